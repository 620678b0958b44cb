#include "prnufm/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>
#include <vector>

#include "prnufm/error.hpp"

namespace prnufm {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_fail(const fs::path& path, const std::string& msg) {
  throw Error(ErrorCode::kIo, path.string() + ": " + msg);
}

std::vector<unsigned char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has_png_signature(const std::vector<unsigned char>& bytes) {
  static constexpr unsigned char kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

// --- PNM -------------------------------------------------------------------

class PnmCursor {
 public:
  PnmCursor(const std::vector<unsigned char>& bytes, const fs::path& path)
      : bytes_(bytes), path_(path) {}

  long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) io_fail(path_, "malformed PNM header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1L << 30)) io_fail(path_, "PNM header value out of range");
    }
    return v;
  }

  // Exactly one whitespace byte separates the header from binary payload.
  std::size_t payload_offset() const { return pos_ + 1; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 2;
};

GrayImage read_pnm(const std::vector<unsigned char>& bytes, const fs::path& path) {
  if (bytes.size() < 2 || bytes[0] != 'P') io_fail(path, "not a PNM file");
  const char kind = static_cast<char>(bytes[1]);
  const bool ascii = kind == '2' || kind == '3';
  const bool color = kind == '3' || kind == '6';
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    io_fail(path, std::string("unsupported PNM variant P") + kind);
  }
  PnmCursor cur(bytes, path);
  const long w = cur.next_int();
  const long h = cur.next_int();
  const long maxval = cur.next_int();
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) io_fail(path, "invalid PNM header");

  const int channels = color ? 3 : 1;
  const std::size_t count = static_cast<std::size_t>(w) * h * channels;
  std::vector<double> raw(count);
  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) raw[i] = static_cast<double>(cur.next_int());
  } else {
    const std::size_t bps = maxval > 255 ? 2 : 1;
    const std::size_t off = cur.payload_offset();
    if (bytes.size() < off + count * bps) io_fail(path, "truncated PNM payload");
    for (std::size_t i = 0; i < count; ++i) {
      raw[i] = bps == 1 ? bytes[off + i]
                        : static_cast<double>((bytes[off + 2 * i] << 8) | bytes[off + 2 * i + 1]);
    }
  }
  if (!color) return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(raw));
  std::vector<double> gray(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = luminance_bt601(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
  }
  return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(gray));
}

// --- PNG -------------------------------------------------------------------

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct MemoryReader {
  const std::vector<unsigned char>* bytes;
  std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (src->pos + len > src->bytes->size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->bytes->data() + src->pos, len);
  src->pos += len;
}

GrayImage read_png(const std::vector<unsigned char>& bytes, const fs::path& path) {
  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) io_fail(path, "png_create_read_struct failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) io_fail(path, "png_create_info_struct failed");

  MemoryReader reader{&bytes, 0};
  std::vector<double> gray;
  png_uint_32 w = 0, h = 0;
  if (setjmp(png_jmpbuf(g.png))) io_fail(path, "corrupt PNG data");

  png_set_read_fn(g.png, &reader, png_read_from_memory);
  png_read_info(g.png, g.info);
  int bit_depth = 0, color_type = 0;
  png_get_IHDR(g.png, g.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(g.png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(g.png);
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(g.png);
  png_read_update_info(g.png, g.info);

  const int channels = png_get_channels(g.png, g.info);
  const int depth = png_get_bit_depth(g.png, g.info);
  const std::size_t rowbytes = png_get_rowbytes(g.png, g.info);
  std::vector<unsigned char> buffer(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(g.png, rows.data());

  gray.resize(static_cast<std::size_t>(w) * h);
  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) {
      auto sample = [&](int c) -> double {
        const std::size_t idx = static_cast<std::size_t>(x) * channels + c;
        if (depth == 16) {
          std::uint16_t v;
          std::memcpy(&v, rows[y] + 2 * idx, 2);
          return v;
        }
        return rows[y][idx];
      };
      gray[static_cast<std::size_t>(y) * w + x] =
          channels >= 3 ? luminance_bt601(sample(0), sample(1), sample(2)) : sample(0);
    }
  }
  return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(gray));
}

}  // namespace

double luminance_bt601(double r, double g, double b) noexcept {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

GrayImage read_image(const fs::path& path) {
  const auto bytes = slurp(path);
  try {
    if (has_png_signature(bytes)) return read_png(bytes, path);
    return read_pnm(bytes, path);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(ErrorCode::kIo, path.string() + ": " + e.what());
  }
}

void write_pgm(const fs::path& path, const GrayImage& img, int max_value) {
  if (max_value < 1 || max_value > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "PGM max value must be in [1, 65535]");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out << "P5\n" << img.width() << ' ' << img.height() << '\n' << max_value << '\n';
  const bool wide = max_value > 255;
  std::vector<unsigned char> payload(img.size() * (wide ? 2 : 1));
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto v = static_cast<unsigned>(std::clamp(std::lround(px[i]), 0L, static_cast<long>(max_value)));
    if (wide) {
      payload[2 * i] = static_cast<unsigned char>(v >> 8);
      payload[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
    } else {
      payload[i] = static_cast<unsigned char>(v);
    }
  }
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out) io_fail(path, "write failed");
}

void write_png_preview(const fs::path& path, const GrayImage& img) {
  // Quantize up front: nothing the libpng error path jumps over may live in registers.
  std::vector<unsigned char> bytes(img.size());
  {
    const auto px = img.pixels();
    const auto [lo_it, hi_it] = std::minmax_element(px.begin(), px.end());
    const double lo = *lo_it;
    const double span = *hi_it > lo ? *hi_it - lo : 1.0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      bytes[i] = static_cast<unsigned char>(std::lround(255.0 * (px[i] - lo) / span));
    }
  }

  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) io_fail(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    io_fail(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    io_fail(path, "PNG encode failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height(); ++y) {
    png_write_row(png, bytes.data() + static_cast<std::size_t>(y) * img.width());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

fs::path sidecar_path(const fs::path& raster_path) {
  fs::path p = raster_path;
  p += ".json";
  return p;
}

void save_raster(const fs::path& path, const GrayImage& img, const RasterMeta& meta) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail(path, "cannot open for writing");
    std::vector<unsigned char> payload(img.size() * 4);
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(px[i]));
      for (int b = 0; b < 4; ++b) payload[4 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!out) io_fail(path, "write failed");
  }
  nlohmann::ordered_json j;
  j["width"] = img.width();
  j["height"] = img.height();
  j["kind"] = meta.kind;
  j["dtype"] = "float32";
  j["byte_order"] = "little";
  if (meta.device_id) j["device_id"] = *meta.device_id;
  if (meta.n_images) j["n_images"] = *meta.n_images;
  const fs::path side = sidecar_path(path);
  std::ofstream out(side);
  if (!out) io_fail(side, "cannot open for writing");
  out << j.dump(2) << '\n';
}

StoredRaster load_raster(const fs::path& path) {
  const fs::path side = sidecar_path(path);
  nlohmann::json j;
  {
    std::ifstream in(side);
    if (!in) io_fail(side, "missing JSON sidecar");
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      io_fail(side, std::string("bad sidecar JSON: ") + e.what());
    }
  }
  StoredRaster out;
  int w = 0, h = 0;
  try {
    w = j.at("width").get<int>();
    h = j.at("height").get<int>();
    out.meta.kind = j.at("kind").get<std::string>();
    if (j.contains("dtype") && j["dtype"] != "float32") io_fail(side, "unsupported dtype");
    if (j.contains("device_id")) out.meta.device_id = j["device_id"].get<std::string>();
    if (j.contains("n_images")) out.meta.n_images = j["n_images"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    io_fail(side, std::string("sidecar field error: ") + e.what());
  }
  if (w < 1 || h < 1) io_fail(side, "sidecar dimensions must be positive");
  const auto bytes = slurp(path);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() != n * 4) {
    io_fail(path, "payload holds " + std::to_string(bytes.size()) + " bytes, sidecar implies " +
                      std::to_string(n * 4));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    data[i] = std::bit_cast<float>(bits);
  }
  try {
    out.image = GrayImage(w, h, std::move(data));
  } catch (const Error& e) {
    io_fail(path, e.what());
  }
  return out;
}

}  // namespace prnufm
