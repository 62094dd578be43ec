#include "blurseg/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace blurseg {

Plane luma(const Image& img) {
  if (img.channels() == 1) return img.plane(0);
  if (img.channels() != 3)
    throw std::invalid_argument("luma: expected 1 or 3 channels");
  return 0.299f * img.plane(0) + 0.587f * img.plane(1) + 0.114f * img.plane(2);
}

Image residual_error(const Image& x, const Image& y) {
  if (!x.same_shape(y))
    throw std::invalid_argument("residual_error: shape mismatch");
  Image e(x.height(), x.width(), x.channels());
  for (int c = 0; c < x.channels(); ++c) e.plane(c) = x.plane(c) - y.plane(c);
  return e;
}

Image clamp01(Image img) {
  for (int c = 0; c < img.channels(); ++c)
    img.plane(c) = img.plane(c).cwiseMax(0.0f).cwiseMin(1.0f);
  return img;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

Image load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("load_image: cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("load_image: png decode failed for " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // little-endian rows
  png_read_update_info(png, info);

  color_type = png_get_color_type(png, info);
  bit_depth = png_get_bit_depth(png, info);
  int channels =
      (color_type == PNG_COLOR_TYPE_GRAY) ? 1 : (color_type == PNG_COLOR_TYPE_RGB ? 3 : 0);
  if (channels == 0 || (bit_depth != 8 && bit_depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("load_image: unsupported png layout in " + path);
  }

  const size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<std::vector<png_byte>> rows(h, std::vector<png_byte>(rowbytes));
  std::vector<png_bytep> row_ptrs(h);
  for (png_uint_32 r = 0; r < h; ++r) row_ptrs[r] = rows[r].data();
  png_read_image(png, row_ptrs.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(static_cast<int>(h), static_cast<int>(w), channels);
  const float scale = bit_depth == 8 ? 1.0f / 255.0f : 1.0f / 65535.0f;
  for (png_uint_32 r = 0; r < h; ++r) {
    for (png_uint_32 cx = 0; cx < w; ++cx) {
      for (int c = 0; c < channels; ++c) {
        float v;
        if (bit_depth == 8) {
          v = scale * rows[r][cx * channels + c];
        } else {
          uint16_t raw;
          std::memcpy(&raw, &rows[r][(cx * channels + c) * 2], 2);
          v = scale * raw;
        }
        img.plane(c)(r, cx) = v;
      }
    }
  }
  return img;
}

void save_png(const Image& img, const std::string& path, int bit_depth) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("save_image: cannot open " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("save_image: png encode failed for " + path);
  }
  png_init_io(png, fp.get());

  const int h = img.height(), w = img.width(), channels = img.channels();
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("save_image: png needs 1 or 3 channels");
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h),
               bit_depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);

  const float peak = bit_depth == 8 ? 255.0f : 65535.0f;
  std::vector<png_byte> row(static_cast<size_t>(w) * channels * (bit_depth / 8));
  for (int r = 0; r < h; ++r) {
    for (int cx = 0; cx < w; ++cx) {
      for (int c = 0; c < channels; ++c) {
        float v = std::min(1.0f, std::max(0.0f, img.plane(c)(r, cx)));
        // round-to-nearest quantization
        uint32_t q = static_cast<uint32_t>(v * peak + 0.5f);
        if (bit_depth == 8) {
          row[static_cast<size_t>(cx) * channels + c] = static_cast<png_byte>(q);
        } else {
          uint16_t raw = static_cast<uint16_t>(q);
          std::memcpy(&row[(static_cast<size_t>(cx) * channels + c) * 2], &raw, 2);
        }
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_image: cannot open " + path);
  std::string magic;
  in >> magic;
  int channels;
  if (magic == "PF")
    channels = 3;
  else if (magic == "Pf")
    channels = 1;
  else
    throw std::runtime_error("load_image: bad pfm magic in " + path);
  int w, h;
  double scale;
  in >> w >> h >> scale;
  in.get();  // single whitespace after header
  if (w < 1 || h < 1) throw std::runtime_error("load_image: bad pfm dims");
  if (scale > 0) throw std::runtime_error("load_image: big-endian pfm unsupported");

  Image img(h, w, channels);
  std::vector<float> row(static_cast<size_t>(w) * channels);
  // pfm stores rows bottom-to-top
  for (int r = h - 1; r >= 0; --r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw std::runtime_error("load_image: truncated pfm " + path);
    for (int cx = 0; cx < w; ++cx)
      for (int c = 0; c < channels; ++c)
        img.plane(c)(r, cx) = row[static_cast<size_t>(cx) * channels + c];
  }
  return img;
}

void save_pfm(const Image& img, const std::string& path) {
  const int channels = img.channels();
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("save_image: pfm needs 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_image: cannot open " + path);
  out << (channels == 3 ? "PF" : "Pf") << "\n"
      << img.width() << " " << img.height() << "\n"
      << "-1.0\n";
  const int w = img.width(), h = img.height();
  std::vector<float> row(static_cast<size_t>(w) * channels);
  for (int r = h - 1; r >= 0; --r) {
    for (int cx = 0; cx < w; ++cx)
      for (int c = 0; c < channels; ++c)
        row[static_cast<size_t>(cx) * channels + c] = img.plane(c)(r, cx);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("save_image: write failed " + path);
}

}  // namespace

Image load_image(const std::string& path) {
  Image img = has_suffix(path, ".pfm") ? load_pfm(path) : load_png(path);
  // I/O boundary clamp; interior math never clamps implicitly
  for (int c = 0; c < img.channels(); ++c) {
    if (!img.plane(c).isFinite().all())
      throw std::runtime_error("load_image: non-finite samples in " + path);
  }
  return img;
}

void save_image(const Image& img, const std::string& path) {
  if (img.height() < 1 || img.width() < 1)
    throw std::invalid_argument("save_image: empty image");
  if (has_suffix(path, ".pfm"))
    save_pfm(img, path);
  else
    save_png(img, path, 8);
}

void save_png16(const Image& img, const std::string& path) {
  save_png(img, path, 16);
}

}  // namespace blurseg
