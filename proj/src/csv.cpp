#include "nf/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace nf::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Writer::Writer(const std::string& path,
               const std::vector<std::string>& header)
    : out_(path), path_(path), columns_(header.size()) {
  if (!out_) throw IoFailure("cannot open for write: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out_ << header[i] << (i + 1 < header.size() ? "," : "\n");
  }
}

void Writer::row(const std::vector<double>& values) {
  if (values.size() != columns_) {
    throw IoFailure("csv row width mismatch in " + path_);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    out_ << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
  }
}

void Writer::close() {
  if (out_.is_open()) {
    out_.flush();
    if (!out_) throw IoFailure("write failed: " + path_);
    out_.close();
  }
}

Writer::~Writer() {
  if (out_.is_open()) out_.close();
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open for read: " + path);
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw IoFailure("empty csv: " + path);
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.header.size());
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string cell = line.substr(pos, comma - pos);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw IoFailure("non-numeric cell '" + cell + "' in " + path);
      }
      row.push_back(v);
      pos = comma + 1;
    }
    if (row.size() != table.header.size()) {
      throw IoFailure("truncated row in " + path);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace nf::csv
