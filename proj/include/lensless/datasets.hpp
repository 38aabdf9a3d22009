#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lensless/imaging.hpp"

namespace lensless {

struct Sample {
  Image image;
  std::size_t label = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  std::size_t num_classes = 0;
  std::vector<std::string> class_names;

  std::size_t size() const { return samples.size(); }
  std::size_t image_size() const { return samples.empty() ? 0 : samples.front().image.size(); }
  std::vector<std::size_t> class_counts() const;
  std::vector<Image> images() const;
  // Every label < num_classes, every class non-empty, all images one size.
  void validate() const;
};

// root/<class_name>/<image>.pgm, classes and files in lexicographic order.
// Images are resized bilinearly to n×n when their size differs.
Dataset load_dataset(const std::filesystem::path& root, std::size_t n);

// Writes the same layout plus manifest.json (counts and per-file checksums).
void save_dataset(const Dataset& ds, const std::filesystem::path& root);

RealGrid resize_bilinear(const RealGrid& src, std::size_t n);

struct SplitSpec {
  double train_fraction = 0.95;
  std::uint64_t seed = 0;
};

// Per-class stratified split; each class keeps at least one test sample.
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

struct AugmentOptions {
  int padding = 4;
  // Top-bottom flip; false selects a left-right flip instead.
  bool vertical_flip = true;
  double flip_probability = 0.5;
};

// Edge-replicate pad, random n×n crop, random flip.
Image augment(const Image& img, std::mt19937_64& rng, const AugmentOptions& opt = {});
// Crop at (row_offset, col_offset) of the padded image; (padding, padding) is centered.
Image augment_at(const Image& img, int row_offset, int col_offset, bool flip,
                 const AugmentOptions& opt = {});
Image flip_vertical(const Image& img);
Image flip_horizontal(const Image& img);

struct SyntheticSpec {
  std::size_t num_classes = 10;
  std::size_t per_class = 100;
  std::size_t n = 24;
  std::uint64_t seed = 0;
  // Peak amplitude of the smooth background blobs added to every scene.
  double clutter = 0.15;
  std::size_t clutter_blobs = 3;
};

// Procedural glyph classes rendered with random sub-pixel shifts, rotations
// within ±10° and ±10% brightness jitter, over a cluttered background of
// smooth Gaussian blobs unrelated to the class.
Dataset gen_synthetic(const SyntheticSpec& spec);
inline Dataset gen_synthetic(std::size_t num_classes, std::size_t per_class, std::size_t n,
                             std::uint64_t seed) {
  return gen_synthetic(SyntheticSpec{num_classes, per_class, n, seed, 0.15, 3});
}

}  // namespace lensless
