#pragma once

// File formats:
//   images   8-bit binary PGM (P5); P2 and 16-bit P5 are also read
//   arrays   one-line JSON header terminated by '\n', then row-major float64
//            little-endian values ("n" for square grids, or "rows"/"cols")
//   masks    plain PBM (P1) with a JSON sidecar <file>.json
//            {"m": ..., "aperture_ratio": ...}

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "lensless/grid.hpp"
#include "lensless/imaging.hpp"

namespace lensless::io {

namespace fs = std::filesystem;
using nlohmann::json;

// Values are clamped to [0,1] and rounded to the nearest of 256 levels.
void write_pgm(const fs::path& path, const RealGrid& pixels);
RealGrid read_pgm(const fs::path& path);

void write_f64(const fs::path& path, const RealGrid& values, json header = json::object());
RealGrid read_f64(const fs::path& path, json* header_out = nullptr);

// Raw little-endian float64 payload after an arbitrary JSON header line.
void write_tensor_file(const fs::path& path, const json& header, const std::vector<double>& values);
std::vector<double> read_tensor_file(const fs::path& path, json& header_out);

void write_pbm(const fs::path& path, const CodedMask& mask);
CodedMask read_pbm(const fs::path& path);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);
json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& value);

// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_checksum(const fs::path& path);

// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace lensless::io
