//! Compares reverse-mode gradients of a small network against central
//! differences.

use tabgen::gradcheck::{central_difference, max_relative_error, DEFAULT_STEP};
use tabgen::nn::{Activation, DenseNetwork, MlpSpec, Mode};
use tabgen::rng::{seeded, standard_normal_matrix};

fn main() -> tabgen::Result<()> {
    let mut rng = seeded(3);
    let sizes = [4, 8, 6, 2];
    let net = DenseNetwork::mlp(&MlpSpec::new(&sizes, Activation::Tanh, Activation::Linear), &mut rng)?;
    let x = standard_normal_matrix(&mut rng, 5, 4);
    let target = standard_normal_matrix(&mut rng, 5, 2);

    // squared error against a fixed target
    let loss = |n: &DenseNetwork| {
        let out = n.forward_batch(&x).unwrap();
        out.as_slice()
            .iter()
            .zip(target.as_slice())
            .map(|(o, t)| 0.5 * (o - t) * (o - t))
            .sum::<f64>()
    };

    let (out, tape) = net.forward_recorded(&x, Mode::Inference)?;
    let mut upstream = out.clone();
    for (u, t) in upstream.as_mut_slice().iter_mut().zip(target.as_slice()) {
        *u -= t;
    }
    let (grads, _) = net.backward(&tape, &upstream)?;
    let numeric = central_difference(&net.parameters(), DEFAULT_STEP, |p| {
        let mut n = net.clone();
        n.set_parameters(p).unwrap();
        loss(&n)
    });

    println!("parameters: {}", net.parameter_count());
    println!("loss: {:.6}", loss(&net));
    println!("max relative error: {:.2e}", max_relative_error(&grads.flatten(), &numeric));
    Ok(())
}
