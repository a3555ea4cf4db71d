#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "latentacc/cli.hpp"
#include "latentacc/errors.hpp"

namespace latentacc {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw DomainError("not a number: '" + field + "'");
  return v;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DomainError("no column '" + name + "'");
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].find_first_of(",\n\"") != std::string::npos) {
        throw DomainError("CSV field needs quoting: '" + fields[i] + "'");
      }
      if (i > 0) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw DomainError("CSV row width differs from the header");
    line(row);
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_csv(table);
  if (!out) throw Error("write failed for " + path.string());
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != t.header.size()) throw DomainError("CSV row width differs from the header");
      t.rows.push_back(std::move(fields));
    }
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace latentacc
