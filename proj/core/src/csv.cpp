#include "sindex/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "sindex/error.hpp"

namespace sindex {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok, int line_no) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    raise(errc::parse_error, "line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  return v;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) raise(errc::parse_error, "empty input");
  line = strip_cr(line);
  const std::vector<std::string> header = split_fields(line);
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1 || header.back() != "y")
    raise(errc::parse_error, "line 1: expected header x1,...,xd,y");
  for (int j = 0; j < d; ++j)
    if (header[j] != "x" + std::to_string(j + 1))
      raise(errc::parse_error, "line 1: expected column 'x" + std::to_string(j + 1) + "', got '" +
                                   header[j] + "'");

  Vec x, y;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (static_cast<int>(fields.size()) != d + 1)
      raise(errc::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                   std::to_string(d + 1) + " fields, got " +
                                   std::to_string(fields.size()));
    for (int j = 0; j < d; ++j) x.push_back(parse_double(fields[j], line_no));
    y.push_back(parse_double(fields[d], line_no));
  }
  if (y.empty()) raise(errc::empty_dataset, "no samples in CSV");
  const int n = static_cast<int>(y.size());
  return Dataset(n, d, std::move(x), std::move(y));
}

Dataset read_dataset_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::parse_error, "cannot open '" + path + "'");
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  for (int j = 0; j < ds.d(); ++j) out << "x" << (j + 1) << ",";
  out << "y\n";
  for (int i = 0; i < ds.n(); ++i) {
    const double* r = ds.row(i);
    for (int j = 0; j < ds.d(); ++j) out << format_double(r[j]) << ",";
    out << format_double(ds.y_at(i)) << "\n";
  }
}

void write_dataset_csv_file(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) raise(errc::parse_error, "cannot open '" + path + "' for writing");
  write_dataset_csv(out, ds);
}

}  // namespace sindex
