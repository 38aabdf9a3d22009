#include <filesystem>
#include <random>
#include <set>

#include "doctest.h"
#include "lensless/datasets.hpp"
#include "lensless/io.hpp"
#include "oracles.hpp"

using namespace lensless;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lensless-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Dataset tiny(std::size_t classes, std::size_t per_class, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset ds;
  ds.num_classes = classes;
  for (std::size_t c = 0; c < classes; ++c) {
    ds.class_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < per_class; ++i) ds.samples.push_back({oracle::random_image(n, rng), c});
  }
  return ds;
}

}  // namespace

TEST_CASE("synthetic generator is deterministic and balanced") {
  const Dataset a = gen_synthetic(10, 100, 24, 7);
  CHECK(a.size() == 1000);
  CHECK(a.num_classes == 10);
  for (std::size_t c : a.class_counts()) CHECK(c == 100);
  CHECK(a.image_size() == 24);
  const Dataset b = gen_synthetic(10, 100, 24, 7);
  CHECK(a.samples == b.samples);
  const Dataset c = gen_synthetic(10, 100, 24, 8);
  CHECK_FALSE(a.samples == c.samples);
  for (const Sample& s : a.samples) {
    for (double v : s.image.pixels().span()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK_THROWS(gen_synthetic(1, 10, 24, 1));
  CHECK_THROWS(gen_synthetic(3, 10, 4, 1));
  SyntheticSpec bad;
  bad.clutter = 2.0;
  CHECK_THROWS_AS(gen_synthetic(bad), ConfigError);
}

TEST_CASE("split is stratified, seeded and a partition") {
  const Dataset ds = gen_synthetic(4, 100, 12, 1);
  const auto [train, test] = split(ds, {0.95, 3});
  for (std::size_t c : train.class_counts()) CHECK(c == 95);
  for (std::size_t c : test.class_counts()) CHECK(c == 5);

  const auto [train2, test2] = split(ds, {0.95, 3});
  CHECK(train.samples == train2.samples);
  CHECK(test.samples == test2.samples);
  const auto [train3, test3] = split(ds, {0.95, 4});
  CHECK_FALSE(test.samples == test3.samples);
  CHECK(test3.class_counts() == test.class_counts());

  // Partition: every original sample lands in exactly one part.
  using Key = std::pair<std::size_t, std::vector<double>>;
  std::multiset<Key> all, parts;
  auto key = [](const Sample& s) { return Key{s.label, s.image.pixels().values()}; };
  for (const Sample& s : ds.samples) all.insert(key(s));
  for (const Sample& s : train.samples) parts.insert(key(s));
  for (const Sample& s : test.samples) parts.insert(key(s));
  CHECK(all == parts);
  CHECK(train.size() + test.size() == ds.size());

  // Small classes keep at least one sample on each side.
  const auto [tr, te] = split(tiny(2, 3, 4, 1), {0.95, 1});
  for (std::size_t c : te.class_counts()) CHECK(c == 1);
  for (std::size_t c : tr.class_counts()) CHECK(c == 2);
  CHECK_THROWS_AS(split(tiny(2, 1, 4, 1), {0.9, 1}), InvariantError);
  CHECK_THROWS_AS(split(ds, {1.0, 1}), ConfigError);
}

TEST_CASE("augmentation keeps size and label-free geometry") {
  std::mt19937_64 rng(2);
  const Image x = oracle::random_image(12, rng);
  CHECK(augment_at(x, 4, 4, false) == x);
  CHECK(flip_vertical(flip_vertical(x)) == x);
  CHECK(flip_horizontal(flip_horizontal(x)) == x);
  CHECK(augment_at(x, 4, 4, true) == flip_vertical(x));
  CHECK(flip_vertical(x)(0, 3) == x(11, 3));
  AugmentOptions lr;
  lr.vertical_flip = false;
  CHECK(augment_at(x, 4, 4, true, lr) == flip_horizontal(x));
  // Shifted crop with edge replication.
  const Image shifted = augment_at(x, 0, 4, false);
  CHECK(shifted(5, 2) == x(1, 2));
  CHECK(shifted(0, 2) == x(0, 2));
  for (int i = 0; i < 50; ++i) CHECK(augment(x, rng).size() == 12);
  CHECK_THROWS(augment_at(x, 9, 0, false));
}

TEST_CASE("bilinear resize") {
  const RealGrid flat = RealGrid::square(6, 0.25);
  const RealGrid up = resize_bilinear(flat, 13);
  CHECK(up.rows() == 13);
  for (double v : up.span()) CHECK(v == doctest::Approx(0.25));
  std::mt19937_64 rng(3);
  const RealGrid r = oracle::random_grid(9, 9, rng);
  CHECK(resize_bilinear(r, 9) == r);
}

TEST_CASE("dataset save and load round trip") {
  const fs::path root = scratch("ds");
  save_dataset(gen_synthetic(3, 4, 16, 5), root / "a");
  const Dataset loaded = load_dataset(root / "a", 16);
  CHECK(loaded.size() == 12);
  CHECK(loaded.num_classes == 3);
  save_dataset(loaded, root / "b");
  const Dataset again = load_dataset(root / "b", 16);
  CHECK(again.samples == loaded.samples);
  CHECK(again.class_names == loaded.class_names);
  const auto m = io::read_json(root / "b" / "manifest.json");
  CHECK(m["samples"] == 12);
  CHECK(m["files"].size() == 12);
  CHECK(io::read_json(root / "a" / "manifest.json")["files"] == m["files"]);

  // Two class directories of three images each.
  const fs::path two = root / "two";
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 3; ++i) {
      io::write_pgm(two / ("k" + std::to_string(c)) / (std::to_string(i) + ".pgm"),
                    RealGrid::square(8, 0.1 * (c + 1)));
    }
  }
  const Dataset small = load_dataset(two, 8);
  CHECK(small.size() == 6);
  CHECK(small.num_classes == 2);
  CHECK(small.class_names[1] == "k1");

  fs::create_directories(root / "empty");
  CHECK_THROWS_AS(load_dataset(root / "empty", 8), IoError);
  fs::create_directories(root / "hollow" / "cls");
  CHECK_THROWS_AS(load_dataset(root / "hollow", 8), IoError);
  fs::remove_all(root);
}
