#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"
#include "lensless/io.hpp"
#include "lensless/masks.hpp"
#include "oracles.hpp"

using namespace lensless;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lensless-io-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("PGM round trip at 8-bit levels") {
  const fs::path dir = scratch("pgm");
  RealGrid levels = RealGrid::square(16);
  for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = static_cast<double>(i % 256) / 255.0;
  io::write_pgm(dir / "a.pgm", levels);
  CHECK(io::read_pgm(dir / "a.pgm") == levels);

  // Arbitrary values are rounded to the nearest level, then stable.
  std::mt19937_64 rng(1);
  io::write_pgm(dir / "b.pgm", oracle::random_grid(9, 9, rng));
  const RealGrid once = io::read_pgm(dir / "b.pgm");
  io::write_pgm(dir / "c.pgm", once);
  CHECK(io::read_pgm(dir / "c.pgm") == once);
  CHECK(io::file_checksum(dir / "b.pgm") == io::file_checksum(dir / "c.pgm"));

  io::write_text(dir / "ascii.pgm", "P2\n# comment\n2 2\n4\n0 1\n2 4\n");
  const RealGrid ascii = io::read_pgm(dir / "ascii.pgm");
  CHECK(ascii(0, 1) == 0.25);
  CHECK(ascii(1, 1) == 1.0);
  io::write_text(dir / "bad.pgm", "P6\n1 1\n255\nabc");
  CHECK_THROWS_AS(io::read_pgm(dir / "bad.pgm"), IoError);
  io::write_text(dir / "short.pgm", "P5\n4 4\n255\nab");
  CHECK_THROWS_AS(io::read_pgm(dir / "short.pgm"), IoError);
  CHECK_THROWS_AS(io::read_pgm(dir / "missing.pgm"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("float64 arrays round trip bit-exactly") {
  const fs::path dir = scratch("f64");
  std::mt19937_64 rng(2);
  RealGrid g = oracle::random_grid(7, 7, rng, -1e3, 1e3);
  g[3] = std::numeric_limits<double>::denorm_min();
  g[4] = -0.0;
  io::write_f64(dir / "g.f64", g);
  nlohmann::json header;
  const RealGrid back = io::read_f64(dir / "g.f64", &header);
  CHECK(header["n"] == 7);
  CHECK(header["dtype"] == "float64-le");
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::memcmp(&g[i], &back[i], sizeof(double)) == 0);

  const RealGrid rect = oracle::random_grid(2, 5, rng);
  io::write_f64(dir / "r.f64", rect);
  CHECK(io::read_f64(dir / "r.f64") == rect);

  io::write_text(dir / "trunc.f64", "{\"n\":3,\"dtype\":\"float64-le\"}\n12345678");
  CHECK_THROWS_AS(io::read_f64(dir / "trunc.f64"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("PBM masks with sidecar") {
  const fs::path dir = scratch("pbm");
  for (const CodedMask& m : {make_pinhole(8), make_full_open(3), make_random(16, 0.3, 4)}) {
    io::write_pbm(dir / "m.pbm", m);
    CHECK(io::read_pbm(dir / "m.pbm") == m);
    const auto side = io::read_json(dir / "m.pbm.json");
    CHECK(side["m"] == m.size());
    CHECK(side["aperture_ratio"].get<double>() == aperture_ratio(m));
  }
  io::write_pbm(dir / "a.pbm", make_pinhole(4));
  io::write_json(dir / "a.pbm.json", {{"m", 5}, {"aperture_ratio", 0.04}});
  CHECK_THROWS_AS(io::read_pbm(dir / "a.pbm"), IoError);
  io::write_text(dir / "b.pbm", "P1\n2 2\n1 0\n2 1\n");
  CHECK_THROWS_AS(io::read_pbm(dir / "b.pbm"), IoError);
  io::write_text(dir / "c.pbm", "P1\n3 2\n1 0 1\n0 1 0\n");
  CHECK_THROWS_AS(io::read_pbm(dir / "c.pbm"), DimensionError);
  // A hand-written file without a sidecar is accepted.
  io::write_text(dir / "d.pbm", "P1\n# hand made\n2 2\n1 0\n0 1\n");
  const CodedMask d = io::read_pbm(dir / "d.pbm");
  CHECK(d.open(0, 0));
  CHECK(d.open(1, 1));
  CHECK(d.open_count() == 2);
  fs::remove_all(dir);
}

TEST_CASE("shortest round-trip double formatting") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng) * std::pow(10.0, static_cast<int>(i % 30) - 15);
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(1.0) == "1");
}

TEST_CASE("tensor files and JSON helpers") {
  const fs::path dir = scratch("tensor");
  const std::vector<double> v{1.5, -2.0, 3.25};
  io::write_tensor_file(dir / "t.bin", {{"kind", "demo"}, {"count", 3}}, v);
  nlohmann::json h;
  CHECK(io::read_tensor_file(dir / "t.bin", h) == v);
  CHECK(h["kind"] == "demo");
  io::write_text(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(io::read_json(dir / "bad.json"), IoError);
  fs::remove_all(dir);
}
