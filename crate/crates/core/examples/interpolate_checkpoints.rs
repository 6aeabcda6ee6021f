//! Blend two checkpoints and save/load the result.

use qgac::coeff::NormalizationStats;
use qgac::model::{interpolate_params, ModelCheckpoint, NetworkConfig, Stage};

fn main() -> qgac::error::Result<()> {
    let stats = NormalizationStats::identity();
    let a = ModelCheckpoint::initialize(NetworkConfig::toy(), stats.clone(), 1)?;
    let mut b = ModelCheckpoint::initialize(NetworkConfig::toy(), stats, 2)?;
    b.stage = Stage::Gan;
    let name = "blocknet_pre.head.gen0.weight";
    for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let m = interpolate_params(&a, &b, alpha)?;
        println!("alpha {alpha:.2}  stage {:<10}  {name}[0] = {:+.6}", m.stage.to_string(), m.params.get(name).unwrap().data[0]);
    }
    let dir = std::env::temp_dir().join("qgac-interp-example.ckpt");
    let half = interpolate_params(&a, &b, 0.5)?;
    half.save(&dir)?;
    let back = ModelCheckpoint::load(&dir)?;
    println!("saved and reloaded {} bytes, identical: {}", std::fs::metadata(&dir)?.len(), back.params == half.params);
    Ok(())
}
