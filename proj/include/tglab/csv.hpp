#pragma once

#include <string>
#include <vector>

namespace tglab {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// 17 significant digits: round-trips every double.
std::string fmt_double(double v);
double parse_double(const std::string& s, const std::string& where);

CsvTable read_csv(const std::string& path);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(std::vector<std::string> cells);
  std::string str() const;
  void write(const std::string& path) const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace tglab
