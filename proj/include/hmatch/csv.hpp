#pragma once

#include "hmatch/common.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace hmatch {

struct CsvTable {
  std::vector<std::string> header;
  Mat values;  // rows x columns, all numeric

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw ValidationError("csv: no column named '" + name + "'");
  }
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Writes `content` to `path` atomically: a sibling temp file is written and
/// fsynced, then renamed over the destination.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("short write: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ostringstream out;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j) out << ',';
    out << table.header[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(table.values(i, j));
    }
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty csv: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CsvTable table;
  table.header = split_csv_line(line);
  const std::size_t ncol = table.header.size();
  std::vector<double> data;
  std::size_t nrow = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != ncol)
      throw ValidationError("csv row " + std::to_string(nrow + 1) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(ncol) + ": " + path.string());
    for (const auto& f : fields) {
      try {
        data.push_back(std::stod(f));
      } catch (const std::exception&) {
        throw ValidationError("csv: non-numeric field '" + f + "' in " + path.string());
      }
    }
    ++nrow;
  }
  table.values.resize(nrow, ncol);
  for (std::size_t i = 0; i < nrow; ++i)
    for (std::size_t j = 0; j < ncol; ++j) table.values(i, j) = data[i * ncol + j];
  return table;
}

}  // namespace hmatch
