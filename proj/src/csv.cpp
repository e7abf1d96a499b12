#include "tglab/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tglab/error.hpp"

namespace tglab {

std::string fmt_double(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  require(end != begin && *end == '\0' && errno != ERANGE, ErrorKind::Config,
          where + ": not a number: '" + s + "'");
  return v;
}

namespace {

std::vector<std::string> split_line(const std::string& line, const std::string& where) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  require(!quoted, ErrorKind::Config, where + ": unterminated quote");
  out.push_back(cell);
  return out;
}

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string q = "\"";
  for (char c : cell) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Config, "cannot open " + path);
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
      line.erase(0, 3);
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line, path + ":" + std::to_string(lineno));
    if (t.header.empty())
      t.header = std::move(cells);
    else
      t.rows.push_back(std::move(cells));
  }
  require(!t.header.empty(), ErrorKind::Config, path + ": missing header row");
  return t;
}

void CsvWriter::row(std::vector<std::string> cells) {
  require(cells.size() == header_.size(), ErrorKind::Numeric, "csv row width mismatch");
  rows_.push_back(std::move(cells));
}

std::string CsvWriter::str() const {
  std::string s;
  auto emit = [&s](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += quote(cells[i]);
    }
    s += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return s;
}

void CsvWriter::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::Config, "cannot write " + path);
  const std::string s = str();
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  require(out.good(), ErrorKind::Config, "write failed: " + path);
}

}  // namespace tglab
