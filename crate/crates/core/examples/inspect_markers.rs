//! Walk the marker segments of a JPEG and print its tables.
//!
//!     cargo run --example inspect_markers -- [file.jpg]

use qgac::jpeg::{encode_jpeg, parse_jpeg, EncodeOptions, Subsampling};

fn main() -> qgac::error::Result<()> {
    let data = match std::env::args().nth(1) {
        Some(p) => std::fs::read(p)?,
        None => {
            let img = qgac::harness::read_image(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/astronaut_256.png"))?;
            encode_jpeg(&img, &EncodeOptions::new(25, Subsampling::S420))?
        }
    };
    let parsed = parse_jpeg(&data)?;
    for m in &parsed.markers {
        println!("{:>7}  {:<5} {:>5} bytes", m.offset, m.name, m.length);
    }
    let img = &parsed.image;
    println!("{}x{} {}", img.width, img.height, if img.is_gray() { "gray".into() } else { img.subsampling.to_string() });
    for (i, t) in parsed.quant_tables.iter().enumerate() {
        if let Some(t) = t {
            println!("table {i}:");
            for row in t.chunks(8) {
                println!("  {row:?}");
            }
        }
    }
    Ok(())
}
