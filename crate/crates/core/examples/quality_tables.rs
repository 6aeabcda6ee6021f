//! How the quality setting scales the base luma and chroma tables.

use qgac::coeff::normalize_quant_matrix;
use qgac::jpeg::quality_to_tables;

fn main() -> qgac::error::Result<()> {
    println!("quality  luma DC  luma (7,7)  chroma DC  chroma (7,7)  mean normalized luma");
    for q in [1, 5, 10, 20, 30, 50, 75, 90, 95, 100] {
        let (l, c) = quality_to_tables(q)?;
        let mean = normalize_quant_matrix(&l).iter().sum::<f64>() / 64.0;
        println!(
            "{q:>7}  {:>7}  {:>10}  {:>9}  {:>12}  {mean:.4}",
            l.dc(),
            l.get(7, 7),
            c.dc(),
            c.get(7, 7)
        );
    }
    Ok(())
}
