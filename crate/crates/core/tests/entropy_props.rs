mod common;

use common::coeff_images::{corpus_case, random_image, Fill};
use proptest::prelude::*;
use qgac::jpeg::{entropy_decode_scan, entropy_encode_scan, parse_jpeg, write_jpeg, HuffmanSet, QuantizedImage, ScanDims};

fn scan_round_trip(img: &QuantizedImage) -> QuantizedImage {
    let tables = HuffmanSet::standard();
    let bytes = entropy_encode_scan(img, &tables).unwrap();
    let dims = ScanDims {
        width: img.width,
        height: img.height,
        subsampling: img.subsampling,
        gray: img.is_gray(),
    };
    let chroma = img.cb.as_ref().map_or(img.y.quant, |c| c.quant);
    entropy_decode_scan(&bytes, &tables, dims, (img.y.quant, chroma)).unwrap()
}

#[test]
fn thousand_images_survive_the_scan_and_the_file() {
    for i in 0..1000 {
        let img = corpus_case(i);
        assert_eq!(scan_round_trip(&img), img, "case {i}");
        let file = write_jpeg(&img).unwrap();
        assert_eq!(parse_jpeg(&file).unwrap().image, img, "case {i} through the file");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn any_image_round_trips(seed in any::<u64>(), fill in 0usize..4, single in any::<bool>()) {
        let fill = [Fill::Zero, Fill::Extreme, Fill::Sparse, Fill::Dense][fill];
        let img = random_image(seed, fill, single);
        prop_assert_eq!(parse_jpeg(&write_jpeg(&img).unwrap()).unwrap().image, img);
    }
}
