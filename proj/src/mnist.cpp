#include "bcall/mnist.hpp"

#include <zlib.h>

#include <cstdlib>
#include <fstream>
#include <iterator>

#include "bcall/error.hpp"

#ifndef BCALL_DEFAULT_DATA_DIR
#define BCALL_DEFAULT_DATA_DIR "data/mnist-subset"
#endif

namespace bcall {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t offset, const char* what) {
  if (b.size() < offset + 4) throw ParseError(std::string("truncated ") + what + " header", b.size());
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
         (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw ParseError("zlib init failed", 0);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      const auto at = zs.total_in;
      inflateEnd(&zs);
      throw ParseError("corrupt or truncated gzip stream", at);
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      const auto at = zs.total_in;
      inflateEnd(&zs);
      throw ParseError("truncated gzip stream", at);
    }
  }
  inflateEnd(&zs);
  return out;
}

}  // namespace

std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes);
  return bytes;
}

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels) {
  if (read_be32(images, 0, "image") != kImageMagic) throw ParseError("bad image file magic", 0);
  if (read_be32(labels, 0, "label") != kLabelMagic) throw ParseError("bad label file magic", 0);
  const auto n = read_be32(images, 4, "image");
  const auto rows = read_be32(images, 8, "image");
  const auto cols = read_be32(images, 12, "image");
  if (rows != kImageSide) throw ParseError("unsupported row count " + std::to_string(rows), 8);
  if (cols != kImageSide) throw ParseError("unsupported column count " + std::to_string(cols), 12);
  const auto n_labels = read_be32(labels, 4, "label");
  if (n_labels != n)
    throw ParseError("label count " + std::to_string(n_labels) + " does not match image count " +
                         std::to_string(n),
                     4);
  const std::size_t image_bytes = 16 + static_cast<std::size_t>(n) * kPixels;
  if (images.size() < image_bytes) throw ParseError("truncated image data", images.size());
  if (labels.size() < 8 + static_cast<std::size_t>(n)) throw ParseError("truncated label data", labels.size());

  Dataset d;
  d.images.resize(n);
  d.labels.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::copy_n(images.begin() + static_cast<std::ptrdiff_t>(16 + k * kPixels), kPixels, d.images[k].begin());
    const auto label = labels[8 + k];
    if (label > 9) throw ParseError("label out of range", 8 + k);
    d.labels[k] = label;
  }
  return d;
}

Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto ib = read_maybe_gzip(images);
  const auto lb = read_maybe_gzip(labels);
  return parse_idx(ib, lb);
}

Dataset load_mnist_split(const std::filesystem::path& dir, const std::string& prefix) {
  auto pick = [&](const std::string& stem) {
    const auto plain = dir / stem;
    if (std::filesystem::exists(plain)) return plain;
    const auto gz = dir / (stem + ".gz");
    if (std::filesystem::exists(gz)) return gz;
    throw std::runtime_error("missing dataset file " + plain.string() + "[.gz]");
  };
  return load_mnist(pick(prefix + "-images-idx3-ubyte"), pick(prefix + "-labels-idx1-ubyte"));
}

BinarySample binarize(const Image& image, int label, int threshold) {
  if (threshold < 0 || threshold > 255) throw ConfigError("threshold", "must be in [0, 255]");
  BinarySample s;
  s.label = label;
  s.pixels.resize(kPixels);
  std::size_t ones = 0;
  for (std::size_t p = 0; p < kPixels; ++p) {
    s.pixels[p] = image[p] > threshold ? 1 : 0;
    ones += s.pixels[p];
  }
  s.coding_level = static_cast<double>(ones) / static_cast<double>(kPixels);
  return s;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("BCALL_DATA_DIR"); env && *env) return env;
  return BCALL_DEFAULT_DATA_DIR;
}

}  // namespace bcall
