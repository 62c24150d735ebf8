#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace rfe::util {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

/// Minimal CSV table: header plus string cells. No quoting; cells must not
/// contain commas or newlines (everything we write is numeric or an identifier).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  size_t column(std::string_view name) const;  // throws if absent
  bool has_column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);
void write_csv(std::ostream& out, const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

double parse_double(std::string_view cell);

/// 64-bit FNV-1a; used for corpus fingerprints.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 1469598103934665603ULL);
std::string hex64(std::uint64_t v);
std::string file_fingerprint(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace rfe::util
