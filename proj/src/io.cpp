#include "rdh/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace rdh {
namespace {

std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

unsigned max_code(int bit_depth) { return bit_depth == 16 ? 65535u : 255u; }

unsigned encode(double v, int bit_depth) {
  const double m = max_code(bit_depth);
  return static_cast<unsigned>(std::floor(std::clamp(v, 0.0, 1.0) * m + 0.5));
}

void check_depth(int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("bit depth must be 8 or 16");
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  longjmp(png_jmpbuf(png), 1);
}

void png_warn(png_structp, png_const_charp) {}

ImageF load_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8)) throw IoError("not a PNG file: " + path.string());

  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("PNG decode error in " + path.string() + ": " + error);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // native little-endian 16-bit samples
  png_read_update_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) throw IoError("unsupported PNG channel layout in " + path.string());
  ImageF img(width, height, channels);
  const double full_scale = max_code(depth);
  for (png_uint_32 y = 0; y < height; ++y) {
    for (png_uint_32 x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const std::size_t idx = static_cast<std::size_t>(x) * channels + c;
        unsigned v;
        if (depth == 16) {
          std::uint16_t s;
          std::memcpy(&s, rows[y] + 2 * idx, 2);
          v = s;
        } else {
          v = rows[y][idx];
        }
        img(x, y, c) = v / full_scale;
      }
    }
  }
  return img;
}

void write_png(std::FILE* f, const std::filesystem::path& path, png_uint_32 width, png_uint_32 height, int color_type,
               int bit_depth, png_bytepp rows) {
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode error in " + path.string() + ": " + error);
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_png(const std::filesystem::path& path, const ImageF& img, int bit_depth) {
  FilePtr f = open_file(path, "wb");
  const auto w = static_cast<std::size_t>(img.width());
  const auto h = static_cast<std::size_t>(img.height());
  const auto ch = static_cast<std::size_t>(img.channels());
  const std::size_t bytes = bit_depth == 16 ? 2 : 1;
  std::vector<png_byte> buffer(w * h * ch * bytes);
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) {
    rows[y] = buffer.data() + y * w * ch * bytes;
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        const unsigned v = encode(img(static_cast<Index>(x), static_cast<Index>(y), static_cast<Index>(c)), bit_depth);
        const std::size_t idx = (x * ch + c) * bytes;
        if (bit_depth == 16) {
          rows[y][idx] = static_cast<png_byte>(v >> 8);  // PNG is big-endian
          rows[y][idx + 1] = static_cast<png_byte>(v & 0xff);
        } else {
          rows[y][idx] = static_cast<png_byte>(v);
        }
      }
    }
  }
  write_png(f.get(), path, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h),
            ch == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, bit_depth, rows.data());
}

// Netpbm header token, skipping whitespace and '#' comments.
long read_pnm_token(std::istream& in) {
  int c = in.get();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#')
      while (in && c != '\n') c = in.get();
    c = in.get();
  }
  if (!in || !std::isdigit(c)) throw IoError("malformed PNM header");
  long v = 0;
  while (in && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    c = in.get();
  }
  return v;  // consumes exactly one trailing whitespace byte
}

ImageF load_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) throw IoError("not a binary PGM/PPM: " + path.string());
  const int channels = magic[1] == '6' ? 3 : 1;
  const long w = read_pnm_token(in), h = read_pnm_token(in), maxval = read_pnm_token(in);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError("bad PNM dimensions in " + path.string());
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> data(static_cast<std::size_t>(w * h * channels) * bytes);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size())) throw IoError("truncated PNM data in " + path.string());
  ImageF img(w, h, channels);
  const double full_scale = static_cast<double>(maxval);
  std::size_t k = 0;
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) {
        unsigned v = data[k * bytes];
        if (bytes == 2) v = (v << 8) | data[k * bytes + 1];
        img(x, y, c) = v / full_scale;
        ++k;
      }
  return img;
}

void save_pnm(const std::filesystem::path& path, const ImageF& img, int bit_depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  out << (img.channels() == 3 ? "P6" : "P5") << '\n'
      << img.width() << ' ' << img.height() << '\n'
      << max_code(bit_depth) << '\n';
  for (Index y = 0; y < img.height(); ++y)
    for (Index x = 0; x < img.width(); ++x)
      for (Index c = 0; c < img.channels(); ++c) {
        const unsigned v = encode(img(x, y, c), bit_depth);
        if (bit_depth == 16) out.put(static_cast<char>(v >> 8));
        out.put(static_cast<char>(v & 0xff));
      }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

ImageF load_image(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("no such file: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return load_pnm(path);
  throw IoError("unsupported image format: " + path.string());
}

void save_image(const std::filesystem::path& path, const ImageF& img, int bit_depth) {
  check_depth(bit_depth);
  const std::string ext = lower_extension(path);
  if (ext == ".png") return save_png(path, img, bit_depth);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    if ((ext == ".pgm") != (img.channels() == 1) && ext != ".pnm")
      throw IoError("channel count does not match " + ext + " for " + path.string());
    return save_pnm(path, img, bit_depth);
  }
  throw IoError("unsupported image format: " + path.string());
}

ImageF quantize(const ImageF& img, int bit_depth) {
  check_depth(bit_depth);
  const double m = max_code(bit_depth);
  return map_planes(img, [&](const Plane& p) { return Plane(((p.max(0.0).min(1.0) * m + 0.5).floor()) / m); });
}

}  // namespace rdh
