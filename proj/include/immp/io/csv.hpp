#ifndef IMMP_IO_CSV_HPP
#define IMMP_IO_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace immp::io {

/// 17 significant digits, '.' decimal; inf, -inf and nan spelled out.
std::string format_double(double x);

/// Field quoted per RFC 4180 when it holds a comma, quote or line break.
std::string csv_field(const std::string& s);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void row(const std::vector<std::string>& fields);
  void row(const std::vector<double>& values);

 private:
  std::ostream& os_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column by header name, parsed as doubles; throws ConfigError if absent.
  std::vector<double> column(const std::string& name) const;
};

/// RFC 4180 reader; the first record is the header.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

}  // namespace immp::io

#endif  // IMMP_IO_CSV_HPP
