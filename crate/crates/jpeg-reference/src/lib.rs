//! Safe wrappers over the system libjpeg, used only as an independent
//! reference when testing the codec in `qgac`.

use std::ffi::CStr;
use std::os::raw::{c_char, c_int, c_long, c_short, c_uchar, c_ulong, c_ushort, c_void};

#[repr(C)]
struct RawInfo {
    width: c_int,
    height: c_int,
    num_components: c_int,
    h_samp: [c_int; 4],
    v_samp: [c_int; 4],
    blocks_w: [c_int; 4],
    blocks_h: [c_int; 4],
    quant: [[c_ushort; 64]; 4],
}

impl Default for RawInfo {
    fn default() -> Self {
        Self {
            width: 0,
            height: 0,
            num_components: 0,
            h_samp: [0; 4],
            v_samp: [0; 4],
            blocks_w: [0; 4],
            blocks_h: [0; 4],
            quant: [[0; 64]; 4],
        }
    }
}

extern "C" {
    fn ref_last_error() -> *const c_char;
    fn ref_read_coefficients(
        data: *const c_uchar,
        len: c_ulong,
        info: *mut RawInfo,
        out: *mut c_short,
        cap: c_ulong,
    ) -> c_long;
    fn ref_decode_pixels(
        data: *const c_uchar,
        len: c_ulong,
        info: *mut RawInfo,
        out: *mut c_uchar,
        cap: c_ulong,
        fancy_upsampling: c_int,
        float_idct: c_int,
        keep_ycc: c_int,
    ) -> c_long;
    fn ref_encode(
        pixels: *const c_uchar,
        width: c_int,
        height: c_int,
        components: c_int,
        quality: c_int,
        subsample_420: c_int,
        restart_interval: c_int,
        progressive: c_int,
        out: *mut *mut c_uchar,
        out_len: *mut c_ulong,
    ) -> c_int;
    fn ref_free(p: *mut c_void);
}

fn last_error() -> String {
    // SAFETY: the shim always returns a pointer to a static NUL-terminated buffer.
    unsafe { CStr::from_ptr(ref_last_error()) }
        .to_string_lossy()
        .into_owned()
}

/// One component's quantized coefficient grid as stored by libjpeg.
#[derive(Debug, Clone, PartialEq)]
pub struct RefComponent {
    pub h_samp: usize,
    pub v_samp: usize,
    pub blocks_w: usize,
    pub blocks_h: usize,
    /// Quantization table in natural (raster) order.
    pub quant: [u16; 64],
    /// `blocks_h * blocks_w` blocks of 64 coefficients, raster order inside each block.
    pub coefficients: Vec<i16>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefCoefficients {
    pub width: usize,
    pub height: usize,
    pub components: Vec<RefComponent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefPixels {
    pub width: usize,
    pub height: usize,
    /// 1 (gray) or 3 (RGB).
    pub channels: usize,
    /// Interleaved samples.
    pub data: Vec<u8>,
}

/// Reads quantized DCT coefficients with `jpeg_read_coefficients`.
pub fn read_coefficients(jpeg: &[u8]) -> Result<RefCoefficients, String> {
    let mut info = RawInfo::default();
    // SAFETY: null output with zero capacity only queries the required size.
    let probe = unsafe {
        ref_read_coefficients(jpeg.as_ptr(), jpeg.len() as c_ulong, &mut info, std::ptr::null_mut(), 0)
    };
    if probe == -1 {
        return Err(last_error());
    }
    let need = (-probe - 2) as usize;
    let mut buf = vec![0i16; need];
    // SAFETY: `buf` holds exactly `need` elements as reported by the probe.
    let got = unsafe {
        ref_read_coefficients(
            jpeg.as_ptr(),
            jpeg.len() as c_ulong,
            &mut info,
            buf.as_mut_ptr(),
            need as c_ulong,
        )
    };
    if got < 0 {
        return Err(last_error());
    }
    let mut components = Vec::new();
    let mut offset = 0;
    for c in 0..info.num_components as usize {
        let (bw, bh) = (info.blocks_w[c] as usize, info.blocks_h[c] as usize);
        let n = bw * bh * 64;
        components.push(RefComponent {
            h_samp: info.h_samp[c] as usize,
            v_samp: info.v_samp[c] as usize,
            blocks_w: bw,
            blocks_h: bh,
            quant: info.quant[c],
            coefficients: buf[offset..offset + n].to_vec(),
        });
        offset += n;
    }
    Ok(RefCoefficients {
        width: info.width as usize,
        height: info.height as usize,
        components,
    })
}

/// Decodes to pixels. `fancy_upsampling = false` selects sample replication for
/// subsampled chroma; `float_idct` selects libjpeg's floating-point IDCT.
pub fn decode_pixels(jpeg: &[u8], fancy_upsampling: bool, float_idct: bool) -> Result<RefPixels, String> {
    decode_impl(jpeg, fancy_upsampling, float_idct, false)
}

/// Like [`decode_pixels`] but stops before color conversion, returning
/// upsampled Y, Cb, Cr samples.
pub fn decode_ycc(jpeg: &[u8], fancy_upsampling: bool, float_idct: bool) -> Result<RefPixels, String> {
    decode_impl(jpeg, fancy_upsampling, float_idct, true)
}

fn decode_impl(jpeg: &[u8], fancy_upsampling: bool, float_idct: bool, keep_ycc: bool) -> Result<RefPixels, String> {
    let mut info = RawInfo::default();
    // SAFETY: size probe, no writes through the null pointer.
    let probe = unsafe {
        ref_decode_pixels(
            jpeg.as_ptr(),
            jpeg.len() as c_ulong,
            &mut info,
            std::ptr::null_mut(),
            0,
            fancy_upsampling as c_int,
            float_idct as c_int,
            keep_ycc as c_int,
        )
    };
    if probe == -1 {
        return Err(last_error());
    }
    let need = (-probe - 2) as usize;
    let mut data = vec![0u8; need];
    // SAFETY: `data` holds exactly the reported number of bytes.
    let got = unsafe {
        ref_decode_pixels(
            jpeg.as_ptr(),
            jpeg.len() as c_ulong,
            &mut info,
            data.as_mut_ptr(),
            need as c_ulong,
            fancy_upsampling as c_int,
            float_idct as c_int,
            keep_ycc as c_int,
        )
    };
    if got < 0 {
        return Err(last_error());
    }
    let channels = if info.num_components == 1 { 1 } else { 3 };
    Ok(RefPixels {
        width: info.width as usize,
        height: info.height as usize,
        channels,
        data,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EncodeOptions {
    pub quality: u8,
    pub subsample_420: bool,
    pub restart_interval: u16,
    pub progressive: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self {
            quality: 75,
            subsample_420: true,
            restart_interval: 0,
            progressive: false,
        }
    }
}

/// Encodes interleaved gray (`channels == 1`) or RGB samples with libjpeg.
pub fn encode(pixels: &[u8], width: usize, height: usize, channels: usize, opts: EncodeOptions) -> Result<Vec<u8>, String> {
    assert_eq!(pixels.len(), width * height * channels);
    let mut out: *mut c_uchar = std::ptr::null_mut();
    let mut len: c_ulong = 0;
    // SAFETY: pixel buffer size checked above; libjpeg allocates `out` with malloc.
    let rc = unsafe {
        ref_encode(
            pixels.as_ptr(),
            width as c_int,
            height as c_int,
            channels as c_int,
            opts.quality as c_int,
            opts.subsample_420 as c_int,
            opts.restart_interval as c_int,
            opts.progressive as c_int,
            &mut out,
            &mut len,
        )
    };
    if rc != 0 {
        if !out.is_null() {
            // SAFETY: allocated by libjpeg's memory destination.
            unsafe { ref_free(out as *mut c_void) };
        }
        return Err(last_error());
    }
    // SAFETY: libjpeg wrote `len` bytes to `out`.
    let bytes = unsafe { std::slice::from_raw_parts(out, len as usize) }.to_vec();
    // SAFETY: as above.
    unsafe { ref_free(out as *mut c_void) };
    Ok(bytes)
}
