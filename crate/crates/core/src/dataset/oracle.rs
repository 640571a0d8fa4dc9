//! Analytic stand-in for the thermal-hydraulics code.
//!
//! Each void fraction follows a logistic axial profile whose onset, steepness
//! and ceiling depend on the PMPs, shifted so the profile starts near zero at
//! the inlet:
//!
//! ```text
//! z0   = 0.15 + 0.04 p1012 + 0.02 p1008
//! k    = 6 + 0.8 p1022
//! vmax = 0.85 / (1 + 0.06 (p1028 + p1029))
//! v_j  = clamp(vmax σ(k (z_j - z0)) - vmax σ(-k z0), 0, 1)
//! ```

use super::{PmpVector, VoidFractionVector, VOID_DIM};
use crate::nn::sigmoid;
use crate::{Error, Result};

/// Normalized heights of the four measurement levels.
pub const AXIAL_POSITIONS: [f64; VOID_DIM] = [0.20, 0.47, 0.73, 1.00];

/// Tag carried by reports so results from different oracles are never mixed.
pub const ORACLE_VERSION: &str = "logistic-axial-v1";

pub fn oracle_evaluate(pmp: &PmpVector) -> Result<VoidFractionVector> {
    if pmp.to_array().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("oracle input {pmp:?}")));
    }
    let onset = 0.15 + 0.04 * pmp.p1012 + 0.02 * pmp.p1008;
    let steepness = 6.0 + 0.8 * pmp.p1022;
    let ceiling = 0.85 / (1.0 + 0.06 * (pmp.p1028 + pmp.p1029));
    let inlet = ceiling * sigmoid(-steepness * onset);
    let v = AXIAL_POSITIONS
        .map(|z| (ceiling * sigmoid(steepness * (z - onset)) - inlet).clamp(0.0, 1.0));
    Ok(VoidFractionVector::new(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn nominal_point_matches_scripted_evaluation() {
        // independent evaluation of the same closed form in Python
        let expected = [
            0.21978271572286692,
            0.5014986919824101,
            0.5906622716536837,
            0.6086350197607729,
        ];
        let got = oracle_evaluate(&PmpVector::splat(1.0)).unwrap().to_array();
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-14, "{g} vs {e}");
        }
        let got = oracle_evaluate(&PmpVector::new([0.5, 4.2, 1.7, 3.3, 0.9]))
            .unwrap()
            .to_array();
        let expected = [
            0.13467956413768317,
            0.4465428810581096,
            0.5896832210771613,
            0.6183767326540467,
        ];
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-14, "{g} vs {e}");
        }
    }

    #[test]
    fn drag_factors_suppress_void() {
        let mut low = PmpVector::splat(2.0);
        low.p1028 = 1e-9;
        low.p1029 = 1e-9;
        let mut high = low;
        high.p1028 = 5.0;
        high.p1029 = 5.0;
        let a = oracle_evaluate(&low).unwrap();
        let b = oracle_evaluate(&high).unwrap();
        assert!(a.voidf4 > b.voidf4);
    }

    #[test]
    fn non_finite_rejected() {
        let mut p = PmpVector::splat(1.0);
        p.p1022 = f64::NAN;
        assert!(oracle_evaluate(&p).is_err());
    }

    #[test]
    fn monotone_bounded_and_low_at_inlet() {
        let mut rng = seeded(7);
        let mut first = Vec::with_capacity(1000);
        for _ in 0..1000 {
            let p = PmpVector::new(std::array::from_fn(|_| rng.random_range(1e-9..5.0)));
            let v = oracle_evaluate(&p).unwrap().to_array();
            assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
            assert!(v.windows(2).all(|w| w[0] <= w[1]), "{v:?}");
            first.push(v[0]);
        }
        first.sort_by(f64::total_cmp);
        let median = 0.5 * (first[499] + first[500]);
        assert!(median < 0.15, "median voidf1 {median}");
    }
}
