#pragma once

#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "amix/design_space.hpp"

namespace amix {

/// 17 significant digits; NaN prints as NA.
std::string format_double(double v);

/// Writes a `# schema: <name>` comment line, then a header row, then rows.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::string_view schema, const std::vector<std::string>& header);

  CsvWriter& operator<<(const std::string& cell);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long long v);
  CsvWriter& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
  void end_row();

 private:
  void cell(const std::string& s);

  std::ofstream out_;
  std::string path_;
  bool row_started_ = false;
};

struct CsvTable {
  std::string schema;  // empty if the file had no schema line
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position; throws std::runtime_error if absent.
  std::size_t column(std::string_view name) const;
};

/// Throws std::runtime_error naming the file on I/O or shape errors.
CsvTable read_csv(const std::string& path);

/// Dataset CSV: x1..xp, z1..zq, y.
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path, const DesignSpace& space);

/// Design CSV: dataset layout without the y column.
void write_design_csv(const std::string& path, const DesignSpace& space, const std::vector<MixedPoint>& design);

}  // namespace amix
