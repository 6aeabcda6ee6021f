/* Minimal libjpeg wrapper exposing coefficient and pixel decoding plus encoding
 * through flat buffers, so Rust never has to mirror libjpeg's structs. */
#include <setjmp.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include <jpeglib.h>

typedef struct {
  int width;
  int height;
  int num_components;
  int h_samp[4];
  int v_samp[4];
  int blocks_w[4];
  int blocks_h[4];
  unsigned short quant[4][64];
} ref_info;

struct err_mgr {
  struct jpeg_error_mgr pub;
  jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

static void on_error(j_common_ptr cinfo) {
  struct err_mgr *err = (struct err_mgr *)cinfo->err;
  (*cinfo->err->format_message)(cinfo, err->message);
  longjmp(err->jump, 1);
}

static void on_message(j_common_ptr cinfo) { (void)cinfo; }

static char last_error[JMSG_LENGTH_MAX];

const char *ref_last_error(void) { return last_error; }

static void fill_info(struct jpeg_decompress_struct *cinfo, ref_info *info) {
  int c, k;
  memset(info, 0, sizeof(*info));
  info->width = (int)cinfo->image_width;
  info->height = (int)cinfo->image_height;
  info->num_components = cinfo->num_components;
  for (c = 0; c < cinfo->num_components && c < 4; c++) {
    jpeg_component_info *comp = &cinfo->comp_info[c];
    info->h_samp[c] = comp->h_samp_factor;
    info->v_samp[c] = comp->v_samp_factor;
    /* virtual coefficient arrays are padded to a whole number of MCUs */
    info->blocks_w[c] = (int)(((comp->width_in_blocks + comp->h_samp_factor - 1) /
                               comp->h_samp_factor) * comp->h_samp_factor);
    info->blocks_h[c] = (int)(((comp->height_in_blocks + comp->v_samp_factor - 1) /
                               comp->v_samp_factor) * comp->v_samp_factor);
    if (comp->quant_table != NULL) {
      for (k = 0; k < 64; k++) info->quant[c][k] = comp->quant_table->quantval[k];
    } else if (cinfo->quant_tbl_ptrs[comp->quant_tbl_no] != NULL) {
      for (k = 0; k < 64; k++)
        info->quant[c][k] = cinfo->quant_tbl_ptrs[comp->quant_tbl_no]->quantval[k];
    }
  }
}

/* Reads the quantized coefficients of every component. `out` receives, per
 * component in frame order, blocks_h*blocks_w blocks of 64 values in natural
 * (raster) order. Returns the number of values written, or -1 on error, or
 * the required count negated minus 2 when `cap` is too small. */
long ref_read_coefficients(const unsigned char *data, unsigned long len, ref_info *info,
                           short *out, unsigned long cap) {
  struct jpeg_decompress_struct cinfo;
  struct err_mgr jerr;
  jvirt_barray_ptr *arrays;
  unsigned long need = 0, pos = 0;
  int c, k;
  JDIMENSION r, b;

  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = on_error;
  jerr.pub.output_message = on_message;
  if (setjmp(jerr.jump)) {
    strncpy(last_error, jerr.message, sizeof(last_error) - 1);
    jpeg_destroy_decompress(&cinfo);
    return -1;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, len);
  jpeg_read_header(&cinfo, TRUE);
  arrays = jpeg_read_coefficients(&cinfo);
  fill_info(&cinfo, info);
  for (c = 0; c < cinfo.num_components; c++)
    need += (unsigned long)info->blocks_w[c] * (unsigned long)info->blocks_h[c] * 64UL;
  if (out == NULL || cap < need) {
    jpeg_destroy_decompress(&cinfo);
    return -(long)need - 2;
  }
  for (c = 0; c < cinfo.num_components; c++) {
    for (r = 0; r < (JDIMENSION)info->blocks_h[c]; r++) {
      JBLOCKARRAY row = (*cinfo.mem->access_virt_barray)((j_common_ptr)&cinfo, arrays[c], r, 1, FALSE);
      for (b = 0; b < (JDIMENSION)info->blocks_w[c]; b++) {
        for (k = 0; k < 64; k++) out[pos++] = row[0][b][k];
      }
    }
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return (long)pos;
}

/* Decodes to interleaved RGB (or gray for single-component files). */
long ref_decode_pixels(const unsigned char *data, unsigned long len, ref_info *info,
                       unsigned char *out, unsigned long cap, int fancy_upsampling,
                       int float_idct, int keep_ycc) {
  struct jpeg_decompress_struct cinfo;
  struct err_mgr jerr;
  unsigned long need, stride;

  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = on_error;
  jerr.pub.output_message = on_message;
  if (setjmp(jerr.jump)) {
    strncpy(last_error, jerr.message, sizeof(last_error) - 1);
    jpeg_destroy_decompress(&cinfo);
    return -1;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, len);
  jpeg_read_header(&cinfo, TRUE);
  fill_info(&cinfo, info);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : (keep_ycc ? JCS_YCbCr : JCS_RGB);
  cinfo.do_fancy_upsampling = fancy_upsampling ? TRUE : FALSE;
  cinfo.dct_method = float_idct ? JDCT_FLOAT : JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  stride = (unsigned long)cinfo.output_width * (unsigned long)cinfo.output_components;
  need = stride * cinfo.output_height;
  if (out == NULL || cap < need) {
    jpeg_abort_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return -(long)need - 2;
  }
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return (long)need;
}

/* Encodes interleaved 8-bit samples (1 or 3 components). The returned buffer
 * must be released with ref_free. */
int ref_encode(const unsigned char *pixels, int width, int height, int components, int quality,
               int subsample_420, int restart_interval, int progressive, unsigned char **out,
               unsigned long *out_len) {
  struct jpeg_compress_struct cinfo;
  struct err_mgr jerr;
  int c;

  *out = NULL;
  *out_len = 0;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = on_error;
  jerr.pub.output_message = on_message;
  if (setjmp(jerr.jump)) {
    strncpy(last_error, jerr.message, sizeof(last_error) - 1);
    jpeg_destroy_compress(&cinfo);
    return -1;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, out, out_len);
  cinfo.image_width = (JDIMENSION)width;
  cinfo.image_height = (JDIMENSION)height;
  cinfo.input_components = components;
  cinfo.in_color_space = components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  if (components == 3) {
    int h = subsample_420 ? 2 : 1;
    cinfo.comp_info[0].h_samp_factor = h;
    cinfo.comp_info[0].v_samp_factor = h;
    for (c = 1; c < 3; c++) {
      cinfo.comp_info[c].h_samp_factor = 1;
      cinfo.comp_info[c].v_samp_factor = 1;
    }
  }
  cinfo.restart_interval = (unsigned int)restart_interval;
  if (progressive) jpeg_simple_progression(&cinfo);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = (JSAMPROW)(pixels + (unsigned long)cinfo.next_scanline * width * components);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return 0;
}

void ref_free(void *p) { free(p); }
