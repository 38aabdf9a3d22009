#include "lensless/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lensless/masks.hpp"

namespace lensless::io {
namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

// Next whitespace-delimited token of a PNM header, skipping '#' comments.
std::string pnm_token(std::istream& in, const fs::path& path) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw IoError("truncated header in '" + path.string() + "'");
  return tok;
}

std::size_t pnm_number(std::istream& in, const fs::path& path) {
  const std::string tok = pnm_token(in, path);
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw IoError("bad number '" + tok + "' in '" + path.string() + "'");
  }
  return v;
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xff);
    return r;
  }
  return v;
}

}  // namespace

void write_pgm(const fs::path& path, const RealGrid& pixels) {
  std::ofstream out = open_out(path);
  out << "P5\n" << pixels.cols() << " " << pixels.rows() << "\n255\n";
  std::vector<unsigned char> bytes(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const double v = std::clamp(pixels[i], 0.0, 1.0);
    bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

RealGrid read_pgm(const fs::path& path) {
  std::ifstream in = open_in(path);
  const std::string magic = pnm_token(in, path);
  if (magic != "P5" && magic != "P2") throw IoError("'" + path.string() + "' is not a PGM file");
  const std::size_t cols = pnm_number(in, path);
  const std::size_t rows = pnm_number(in, path);
  const std::size_t maxval = pnm_number(in, path);
  if (cols == 0 || rows == 0 || maxval == 0 || maxval > 65535) {
    throw IoError("invalid PGM header in '" + path.string() + "'");
  }
  RealGrid out(rows, cols);
  const double maxv = static_cast<double>(maxval);
  if (magic == "P2") {
    for (double& v : out.span()) v = static_cast<double>(pnm_number(in, path)) / maxv;
    return out;
  }
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(out.size() * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw IoError("truncated pixel data in '" + path.string() + "'");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned v = bytes_per == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
    out[i] = static_cast<double>(v) / maxv;
  }
  return out;
}

void write_tensor_file(const fs::path& path, const json& header, const std::vector<double>& values) {
  std::ofstream out = open_out(path);
  out << header.dump() << '\n';
  for (double v : values) {
    const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<double> read_tensor_file(const fs::path& path, json& header_out) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing header in '" + path.string() + "'");
  try {
    header_out = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError("bad JSON header in '" + path.string() + "': " + e.what());
  }
  std::vector<double> values;
  std::uint64_t bits = 0;
  while (in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
    values.push_back(std::bit_cast<double>(to_le(bits)));
  }
  if (in.gcount() != 0) throw IoError("trailing partial value in '" + path.string() + "'");
  return values;
}

void write_f64(const fs::path& path, const RealGrid& values, json header) {
  if (values.rows() == values.cols()) {
    header["n"] = values.rows();
  } else {
    header["rows"] = values.rows();
    header["cols"] = values.cols();
  }
  header["dtype"] = "float64-le";
  write_tensor_file(path, header, values.values());
}

RealGrid read_f64(const fs::path& path, json* header_out) {
  json header;
  std::vector<double> values = read_tensor_file(path, header);
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (header.contains("n")) {
    rows = cols = header.at("n").get<std::size_t>();
  } else if (header.contains("rows") && header.contains("cols")) {
    rows = header.at("rows").get<std::size_t>();
    cols = header.at("cols").get<std::size_t>();
  } else {
    throw IoError("array header in '" + path.string() + "' has no shape");
  }
  if (values.size() != rows * cols) {
    throw IoError("array payload in '" + path.string() + "' does not match its header");
  }
  if (header_out != nullptr) *header_out = header;
  return RealGrid(rows, cols, std::move(values));
}

void write_pbm(const fs::path& path, const CodedMask& mask) {
  {
    std::ofstream out = open_out(path);
    const std::size_t m = mask.size();
    out << "P1\n" << m << " " << m << "\n";
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        out << (mask.open(r, c) ? '1' : '0') << (c + 1 < m ? " " : "\n");
      }
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }
  write_json(fs::path(path.string() + ".json"),
             json{{"m", mask.size()}, {"aperture_ratio", aperture_ratio(mask)}});
}

CodedMask read_pbm(const fs::path& path) {
  std::ifstream in = open_in(path);
  if (pnm_token(in, path) != "P1") throw IoError("'" + path.string() + "' is not a plain PBM file");
  const std::size_t cols = pnm_number(in, path);
  const std::size_t rows = pnm_number(in, path);
  if (rows != cols) throw DimensionError("mask in '" + path.string() + "' is not square");
  Grid<std::uint8_t> cells(rows, cols, 0);
  for (auto& c : cells.span()) {
    int ch;
    do {
      ch = in.get();
      if (ch == '#') {
        while ((ch = in.get()) != EOF && ch != '\n') {
        }
      }
    } while (ch != EOF && (std::isspace(ch) || ch == '#'));
    if (ch == '0' || ch == '1') {
      c = static_cast<std::uint8_t>(ch - '0');
    } else {
      throw IoError("bad or truncated PBM data in '" + path.string() + "'");
    }
  }
  CodedMask mask(std::move(cells));
  const fs::path sidecar(path.string() + ".json");
  if (fs::exists(sidecar)) {
    const json meta = read_json(sidecar);
    if (meta.value("m", mask.size()) != mask.size()) {
      throw IoError("mask sidecar size disagrees with '" + path.string() + "'");
    }
  }
  return mask;
}

std::string read_text(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("bad JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json(const fs::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

std::string file_checksum(const fs::path& path) {
  const std::string bytes = read_text(path);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace lensless::io
