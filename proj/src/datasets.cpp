#include "lensless/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "lensless/io.hpp"

namespace lensless {

namespace fs = std::filesystem;

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (const Sample& s : samples) {
    if (s.label < num_classes) ++counts[s.label];
  }
  return counts;
}

std::vector<Image> Dataset::images() const {
  std::vector<Image> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.image);
  return out;
}

void Dataset::validate() const {
  if (samples.empty()) throw InvariantError("dataset is empty");
  if (class_names.size() != num_classes) throw InvariantError("class name count mismatch");
  const std::size_t n = image_size();
  for (const Sample& s : samples) {
    if (s.label >= num_classes) throw InvariantError("label out of range");
    if (s.image.size() != n) throw DimensionError("dataset images differ in size");
  }
  for (std::size_t c : class_counts()) {
    if (c == 0) throw InvariantError("dataset has an empty class");
  }
}

RealGrid resize_bilinear(const RealGrid& src, std::size_t n) {
  if (src.empty() || n == 0) throw DimensionError("cannot resize an empty image");
  if (src.rows() == n && src.cols() == n) return src;
  RealGrid out = RealGrid::square(n);
  // Pixel-center alignment.
  const double sr = static_cast<double>(src.rows()) / static_cast<double>(n);
  const double sc = static_cast<double>(src.cols()) / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double y = std::clamp((static_cast<double>(r) + 0.5) * sr - 0.5, 0.0,
                                static_cast<double>(src.rows() - 1));
    const auto y0 = static_cast<std::size_t>(y);
    const std::size_t y1 = std::min(y0 + 1, src.rows() - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < n; ++c) {
      const double x = std::clamp((static_cast<double>(c) + 0.5) * sc - 0.5, 0.0,
                                  static_cast<double>(src.cols() - 1));
      const auto x0 = static_cast<std::size_t>(x);
      const std::size_t x1 = std::min(x0 + 1, src.cols() - 1);
      const double fx = x - static_cast<double>(x0);
      const double top = src(y0, x0) * (1 - fx) + src(y0, x1) * fx;
      const double bot = src(y1, x0) * (1 - fx) + src(y1, x1) * fx;
      out(r, c) = std::clamp(top * (1 - fy) + bot * fy, 0.0, 1.0);
    }
  }
  return out;
}

Dataset load_dataset(const fs::path& root, std::size_t n) {
  if (!fs::is_directory(root)) throw IoError("dataset root '" + root.string() + "' is not a directory");
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw IoError("dataset root '" + root.string() + "' has no class directories");

  Dataset ds;
  ds.num_classes = class_dirs.size();
  for (std::size_t label = 0; label < class_dirs.size(); ++label) {
    ds.class_names.push_back(class_dirs[label].filename().string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(class_dirs[label])) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw IoError("class directory '" + class_dirs[label].string() + "' contains no images");
    }
    for (const fs::path& f : files) {
      ds.samples.push_back({Image(resize_bilinear(io::read_pgm(f), n)), label});
    }
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& root) {
  ds.validate();
  fs::create_directories(root);
  std::vector<std::size_t> index(ds.num_classes, 0);
  io::json files = io::json::array();
  for (const Sample& s : ds.samples) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.pgm", index[s.label]++);
    const fs::path rel = fs::path(ds.class_names[s.label]) / name;
    io::write_pgm(root / rel, s.image.pixels());
    files.push_back({{"path", rel.generic_string()}, {"label", s.label},
                     {"checksum", io::file_checksum(root / rel)}});
  }
  io::json manifest{{"num_classes", ds.num_classes},
                    {"image_size", ds.image_size()},
                    {"samples", ds.size()},
                    {"class_names", ds.class_names},
                    {"class_counts", ds.class_counts()},
                    {"files", files}};
  io::write_json(root / "manifest.json", manifest);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0,1)");
  }
  ds.validate();
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) by_class[ds.samples[i].label].push_back(i);

  Dataset train{{}, ds.num_classes, ds.class_names};
  Dataset test{{}, ds.num_classes, ds.class_names};
  std::mt19937_64 rng(spec.seed);
  for (auto& members : by_class) {
    if (members.size() < 2) throw InvariantError("every class needs at least 2 samples to split");
    std::shuffle(members.begin(), members.end(), rng);
    const double exact_train = spec.train_fraction * static_cast<double>(members.size());
    auto n_train = static_cast<std::size_t>(std::llround(exact_train));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    // Original order within each part keeps the split independent of shuffle details.
    std::sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::sort(members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k < n_train ? train : test).samples.push_back(ds.samples[members[k]]);
    }
  }
  return {std::move(train), std::move(test)};
}

Image flip_vertical(const Image& img) {
  const std::size_t n = img.size();
  RealGrid out = RealGrid::square(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) out(r, c) = img(n - 1 - r, c);
  }
  return Image(std::move(out));
}

Image flip_horizontal(const Image& img) {
  const std::size_t n = img.size();
  RealGrid out = RealGrid::square(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) out(r, c) = img(r, n - 1 - c);
  }
  return Image(std::move(out));
}

Image augment_at(const Image& img, int row_offset, int col_offset, bool flip,
                 const AugmentOptions& opt) {
  if (opt.padding < 0) throw ConfigError("padding must be non-negative");
  if (row_offset < 0 || col_offset < 0 || row_offset > 2 * opt.padding ||
      col_offset > 2 * opt.padding) {
    throw DimensionError("crop offset outside the padded image");
  }
  const auto n = static_cast<long>(img.size());
  const long last = n - 1;
  RealGrid out = RealGrid::square(img.size());
  for (long r = 0; r < n; ++r) {
    // Padded coordinate r + offset maps back to source r + offset - padding.
    const long sr = std::clamp(r + row_offset - opt.padding, 0L, last);
    for (long c = 0; c < n; ++c) {
      const long sc = std::clamp(c + col_offset - opt.padding, 0L, last);
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          img(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
    }
  }
  Image cropped(std::move(out));
  if (!flip) return cropped;
  return opt.vertical_flip ? flip_vertical(cropped) : flip_horizontal(cropped);
}

Image augment(const Image& img, std::mt19937_64& rng, const AugmentOptions& opt) {
  std::uniform_int_distribution<int> offset(0, 2 * opt.padding);
  const int r = offset(rng);
  const int c = offset(rng);
  std::bernoulli_distribution flip(opt.flip_probability);
  return augment_at(img, r, c, flip(rng), opt);
}

namespace {

// Glyph geometry in pixel units, origin at the image center.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Shape = std::function<bool(Point)>;

struct Blob {
  double x;
  double y;
  double sigma;
  double amplitude;
};

// Parallel bars of the given period and width, rotated by angle.
Shape bars(double period, double width, double angle, double phase = 0.0) {
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  return [=](Point p) {
    const double v = -sa * p.x + ca * p.y + phase;
    const double t = v - period * std::floor(v / period);
    return t < width;
  };
}

// Disks of radius r on a square lattice.
Shape dots(double period, double radius, double phase = 0.0) {
  return [=](Point p) {
    auto wrap = [&](double v) {
      v += phase;
      return v - period * std::round(v / period);
    };
    const double dx = wrap(p.x);
    const double dy = wrap(p.y);
    return dx * dx + dy * dy <= radius * radius;
  };
}

// Concentric ring bars.
Shape rings(double period, double width) {
  return [=](Point p) {
    const double rho = std::hypot(p.x, p.y);
    return rho - period * std::floor(rho / period) < width;
  };
}

Shape either(Shape a, Shape b) {
  return [a = std::move(a), b = std::move(b)](Point p) { return a(p) || b(p); };
}

Shape checker(double cell) {
  return [=](Point p) {
    const auto i = static_cast<long>(std::floor(p.x / cell));
    const auto j = static_cast<long>(std::floor(p.y / cell));
    return ((i + j) & 1L) == 0;
  };
}

// Class textures; all share the same disk envelope so they differ in fine
// structure rather than in their coarse silhouette.
Shape class_texture(std::size_t label) {
  constexpr double kPi = std::numbers::pi;
  const std::size_t variant = label / 10;
  const double shift = 0.5 * static_cast<double>(variant);
  switch (label % 10) {
    case 0:
      return bars(4.0, 2.0, 0.0, shift);
    case 1:
      return bars(4.0, 2.0, kPi / 2, shift);
    case 2:
      return bars(8.0, 4.0, 0.0, shift);
    case 3:
      return bars(8.0, 4.0, kPi / 2, shift);
    case 4:
      return dots(4.0, 1.2, shift);
    case 5:
      return dots(8.0, 2.4, shift);
    case 6:
      return either(bars(4.0, 1.0, 0.0, shift), bars(4.0, 1.0, kPi / 2, shift));
    case 7:
      return either(bars(4.0 * std::sqrt(2.0), 1.4, kPi / 4, shift),
                    bars(4.0 * std::sqrt(2.0), 1.4, -kPi / 4, shift));
    case 8:
      return rings(4.0 + shift, 2.0);
    default:
      return checker(4.0 + shift);
  }
}

}  // namespace

Dataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.num_classes < 2) throw ConfigError("synthetic data needs at least 2 classes");
  if (spec.per_class < 1) throw ConfigError("synthetic data needs at least 1 image per class");
  if (spec.n < 8) throw DimensionError("synthetic images need n >= 8");
  if (!(spec.clutter >= 0.0 && spec.clutter <= 1.0)) throw ConfigError("clutter must lie in [0,1]");

  constexpr double kMaxRotation = 10.0 * std::numbers::pi / 180.0;
  constexpr int kSuper = 3;
  const double n = static_cast<double>(spec.n);
  const double envelope = 0.32 * n;
  const double center = 0.5 * (n - 1.0);

  Dataset ds;
  ds.num_classes = spec.num_classes;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    char name[32];
    std::snprintf(name, sizeof name, "class_%02zu", c);
    ds.class_names.emplace_back(name);
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> subpixel(-1.0, 1.0);
  std::uniform_real_distribution<double> rotation(-kMaxRotation, kMaxRotation);
  std::uniform_real_distribution<double> brightness(0.9, 1.1);
  std::uniform_real_distribution<double> blob_pos(0.0, n);
  std::uniform_real_distribution<double> blob_sigma(3.0, 6.0);
  std::uniform_real_distribution<double> blob_amp(0.0, 1.0);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const Shape texture = class_texture(c);
    for (std::size_t k = 0; k < spec.per_class; ++k) {
      const double dx = subpixel(rng);
      const double dy = subpixel(rng);
      const double theta = rotation(rng);
      const double level = 0.8 * brightness(rng);
      const double ct = std::cos(theta);
      const double st = std::sin(theta);
      RealGrid px = RealGrid::square(spec.n);
      std::vector<Blob> blobs;
      for (std::size_t b = 0; b < spec.clutter_blobs; ++b) {
        const double bx = blob_pos(rng);
        const double by = blob_pos(rng);
        const double bs = blob_sigma(rng);
        blobs.push_back({bx, by, bs, spec.clutter * blob_amp(rng)});
      }
      for (std::size_t r = 0; r < spec.n; ++r) {
        for (std::size_t col = 0; col < spec.n; ++col) {
          int hits = 0;
          for (int sy = 0; sy < kSuper; ++sy) {
            for (int sx = 0; sx < kSuper; ++sx) {
              const double x = static_cast<double>(col) + (sx + 0.5) / kSuper - 0.5 - center - dx;
              const double y = static_cast<double>(r) + (sy + 0.5) / kSuper - 0.5 - center - dy;
              // Undo the glyph rotation.
              const Point q{ct * x + st * y, -st * x + ct * y};
              if (q.x * q.x + q.y * q.y <= envelope * envelope && texture(q)) ++hits;
            }
          }
          double background = 0.0;
          for (const Blob& b : blobs) {
            const double ex = static_cast<double>(col) - b.x;
            const double ey = static_cast<double>(r) - b.y;
            background += b.amplitude * std::exp(-(ex * ex + ey * ey) / (2.0 * b.sigma * b.sigma));
          }
          px(r, col) =
              std::min(1.0, level * static_cast<double>(hits) / (kSuper * kSuper) + background);
        }
      }
      ds.samples.push_back({Image(std::move(px)), c});
    }
  }
  return ds;
}

}  // namespace lensless
