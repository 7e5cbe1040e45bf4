#include "immp/io/csv.hpp"

#include "immp/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace immp::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    os_ << csv_field(fields[i]);
  }
  os_ << "\r\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os_ << ',';
    os_ << format_double(values[i]);
  }
  os_ << "\r\n";
}

std::vector<double> CsvTable::column(const std::string& name) const {
  std::size_t j = 0;
  while (j < header.size() && header[j] != name) ++j;
  if (j == header.size()) throw ConfigError("no column named '" + name + "'");
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) {
    if (j >= r.size()) throw ConfigError("short CSV record");
    try {
      std::size_t used = 0;
      v.push_back(std::stod(r[j], &used));
      if (used != r[j].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("non-numeric value '" + r[j] + "' in column " + name);
    }
  }
  return v;
}

CsvTable read_csv(std::istream& is) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  char c;
  auto end_record = [&] {
    rec.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(rec));
    rec.clear();
    any = false;
  };
  while (is.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r') {
      if (is.peek() == '\n') is.get(c);
      end_record();
    } else if (c == '\n') {
      end_record();
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ConfigError("unterminated quoted CSV field");
  if (any || !field.empty() || !rec.empty()) end_record();
  CsvTable t;
  if (records.empty()) return t;
  t.header = std::move(records.front());
  t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return read_csv(in);
}

}  // namespace immp::io
