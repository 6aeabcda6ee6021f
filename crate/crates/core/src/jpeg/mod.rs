//! Baseline JPEG at coefficient level: color conversion, padding and chroma
//! resampling, the 8×8 DCT, quantization, zigzag ordering, Huffman entropy
//! coding and JFIF marker handling.
//!
//! Decoding can stop at dequantized DCT coefficients
//! ([`decode_jpeg_coefficients`]), which is what the restoration network
//! consumes, or continue to pixels ([`decode_jpeg_pixels`]).

pub mod color;
pub mod dct;
pub mod decoder;
pub mod encoder;
pub mod entropy;
pub mod huffman;
pub mod quant;
pub mod tables;
pub mod types;
pub mod zigzag;

pub use color::{pad_to_mcu, rgb_to_ycbcr, subsample_chroma, upsample_chroma, ycbcr_to_rgb};
pub use dct::{dct_forward_block, dct_inverse_block};
pub use decoder::{
    coefficient_image_to_pixels, coefficient_image_to_ycbcr, coefficients_to_pixels, decode_jpeg_coefficients, decode_jpeg_pixels,
    dequantize_plane, parse_jpeg, MarkerInfo, ParsedJpeg,
};
pub use encoder::{encode_jpeg, encode_to_coefficients, write_jpeg, EncodeOptions};
pub use entropy::{entropy_decode_scan, entropy_encode_scan, ScanDims};
pub use huffman::{HuffmanSet, HuffmanTable, TableClass};
pub use quant::{dequantize_block, quality_to_tables, quantize_block, quantize_block_with, QuantRounding};
pub use types::{
    ChannelRole, CoefficientBlock, CoefficientImage, CoefficientPlane, Image, JpegImage, PixelPlane, QuantMatrix,
    QuantizedImage, QuantizedPlane, Subsampling,
};
pub use zigzag::{zigzag_scan, zigzag_unscan, ZIGZAG};
