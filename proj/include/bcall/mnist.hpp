#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace bcall {

inline constexpr std::size_t kImageSide = 28;
inline constexpr std::size_t kPixels = kImageSide * kImageSide;
inline constexpr int kDefaultBinarizeThreshold = 160;

using Image = std::array<std::uint8_t, kPixels>;

struct Dataset {
  std::vector<Image> images;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
};

struct BinarySample {
  std::vector<std::uint8_t> pixels;  // kPixels entries in {0, 1}
  int label = 0;
  double coding_level = 0.0;
};

/// Parses IDX image and label files (optionally gzip-compressed, detected by
/// magic bytes). Throws ParseError with the byte offset of the first problem.
Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Loads `<prefix>-images-idx3-ubyte[.gz]` and `<prefix>-labels-idx1-ubyte[.gz]`
/// from `dir`, where prefix is `train` or `t10k`.
Dataset load_mnist_split(const std::filesystem::path& dir, const std::string& prefix);

/// Raw bytes of a file, gunzipped when it starts with the gzip magic.
std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path);

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);

/// pixel = 1 iff intensity > threshold.
BinarySample binarize(const Image& image, int label, int threshold = kDefaultBinarizeThreshold);

/// Directory holding the bundled subset; BCALL_DATA_DIR overrides it.
std::filesystem::path default_data_dir();

}  // namespace bcall
