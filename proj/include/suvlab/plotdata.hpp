#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "suvlab/config.hpp"

namespace suvlab {

using Cell = std::variant<double, std::int64_t, std::string>;

// Long-form table. Column names carry their unit in brackets, e.g. "t[s]";
// the JSON form uses the bare name as key and records the unit separately.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

// Shortest text that reads back to the same double.
std::string format_number(double v);

std::string to_csv(const Table& table);

// Writes <dir>/<name>.csv and/or <dir>/<name>.json. Returns the paths written,
// relative to dir, in a fixed order.
std::vector<std::string> emit_plotdata(const std::vector<Table>& tables, OutputFormat format,
                                       const std::filesystem::path& dir);

// Writes text to dir/name, throwing std::runtime_error on I/O failure.
void write_file(const std::filesystem::path& dir, const std::string& name,
                const std::string& contents);

}  // namespace suvlab
