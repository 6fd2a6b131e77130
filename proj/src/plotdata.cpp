#include "suvlab/plotdata.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace suvlab {

namespace {

struct ColumnName {
  std::string key;
  std::string unit;
};

ColumnName split_unit(const std::string& column) {
  const auto open = column.find('[');
  if (open == std::string::npos || column.back() != ']') return {column, ""};
  return {column.substr(0, open), column.substr(open + 1, column.size() - open - 2)};
}

std::string csv_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  const std::string& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

nlohmann::ordered_json json_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  return std::get<std::string>(cell);
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("table " + name + ": row has " + std::to_string(row.size()) +
                           " cells, expected " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_file(const std::filesystem::path& dir, const std::string& name,
                const std::string& contents) {
  const std::filesystem::path path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << contents;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::string> emit_plotdata(const std::vector<Table>& tables, OutputFormat format,
                                       const std::filesystem::path& dir) {
  std::vector<std::string> written;
  for (const Table& table : tables) {
    if (format != OutputFormat::kJson) {
      write_file(dir, table.name + ".csv", to_csv(table));
      written.push_back(table.name + ".csv");
    }
    if (format != OutputFormat::kCsv) {
      nlohmann::ordered_json doc;
      nlohmann::ordered_json units = nlohmann::ordered_json::object();
      std::vector<std::string> keys;
      for (const auto& column : table.columns) {
        const ColumnName split = split_unit(column);
        keys.push_back(split.key);
        units[split.key] = split.unit;
      }
      doc["table"] = table.name;
      doc["units"] = units;
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& row : table.rows) {
        nlohmann::ordered_json record;
        for (std::size_t c = 0; c < row.size(); ++c) record[keys[c]] = json_cell(row[c]);
        rows.push_back(std::move(record));
      }
      doc["rows"] = std::move(rows);
      write_file(dir, table.name + ".json", doc.dump(1) + "\n");
      written.push_back(table.name + ".json");
    }
  }
  return written;
}

}  // namespace suvlab
