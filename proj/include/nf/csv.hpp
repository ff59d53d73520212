#ifndef NF_CSV_HPP
#define NF_CSV_HPP

#include <fstream>
#include <string>
#include <vector>

#include "nf/core.hpp"

namespace nf::csv {

/// Writes rows of doubles with a header line. Values are printed with %.17g
/// so a read-back reproduces every double bit-exactly.
class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void close();
  ~Writer();

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t columns_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

/// Reads a numeric CSV with header. Throws IoFailure on missing files,
/// truncated rows or non-numeric fields.
Table read(const std::string& path);

std::string format_double(double v);

}  // namespace nf::csv

#endif  // NF_CSV_HPP
