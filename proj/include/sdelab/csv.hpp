#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sdelab {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma-separated file with a header line. Blank lines are skipped; every
/// row must have as many fields as the header.
CsvTable read_csv(const std::string& path);

/// Parses a finite or infinite double; errors name the file and line.
double parse_real(std::string_view text, const std::string& path, std::size_t line);

}  // namespace sdelab
