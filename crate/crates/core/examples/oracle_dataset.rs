//! Builds the oracle training set, standardizes it and prints a few rows.

use tabgen::dataset::{fit_standardizer, make_training_set, samples_to_csv, CsvMetadata, COLUMN_NAMES};

fn main() -> tabgen::Result<()> {
    let data = make_training_set(200, 42)?;
    let st = fit_standardizer(&data)?;
    let z = st.standardize_all(&data);

    println!("{:>8} {:>10} {:>10}", "column", "mean", "std");
    for (c, name) in COLUMN_NAMES.iter().enumerate() {
        println!("{name:>8} {:>10.4} {:>10.4}", st.means[c], st.stds[c]);
    }
    println!("\nfirst standardized row: {:.3?}", z.row(0));

    let mut meta = CsvMetadata::default();
    meta.push("seed", "42");
    let csv = samples_to_csv(&data[..3], &meta, false);
    println!("\n{csv}");
    Ok(())
}
