#include "amix/csv.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace amix {

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  return fmt::format("{:.17g}", v);
}

CsvWriter::CsvWriter(const std::string& path, std::string_view schema, const std::vector<std::string>& header)
    : out_(path), path_(path) {
  if (!out_) throw std::runtime_error("cannot write " + path);
  out_ << "# schema: " << schema << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::cell(const std::string& s) {
  if (row_started_) out_ << ',';
  out_ << s;
  row_started_ = true;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
  cell(s);
  return *this;
}

CsvWriter& CsvWriter::operator<<(double v) {
  cell(format_double(v));
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
  cell(std::to_string(v));
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
  if (!out_) throw std::runtime_error("write failed: " + path_);
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::runtime_error("missing column " + std::string(name));
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      constexpr std::string_view tag = "# schema: ";
      if (line.rfind(tag, 0) == 0 && t.schema.empty()) t.schema = line.substr(tag.size());
      continue;
    }
    auto cells = split(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != t.header.size())
        throw std::runtime_error(path + ": row has " + std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw std::runtime_error(path + ": no header row");
  return t;
}

namespace {

std::vector<std::string> point_header(const DesignSpace& space) {
  std::vector<std::string> h;
  for (std::size_t k = 0; k < space.p(); ++k) h.push_back("x" + std::to_string(k + 1));
  for (std::size_t k = 0; k < space.q(); ++k) h.push_back("z" + std::to_string(k + 1));
  return h;
}

}  // namespace

void write_dataset_csv(const std::string& path, const Dataset& data) {
  auto header = point_header(data.space());
  header.emplace_back("y");
  CsvWriter w(path, "amix.dataset/1", header);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double x : data.point(i).x) w << x;
    for (int z : data.point(i).z) w << z;
    w << data.response(i);
    w.end_row();
  }
}

void write_design_csv(const std::string& path, const DesignSpace& space, const std::vector<MixedPoint>& design) {
  CsvWriter w(path, "amix.design/1", point_header(space));
  for (const auto& pt : design) {
    for (double x : pt.x) w << x;
    for (int z : pt.z) w << z;
    w.end_row();
  }
}

Dataset read_dataset_csv(const std::string& path, const DesignSpace& space) {
  const CsvTable t = read_csv(path);
  auto expected = point_header(space);
  expected.emplace_back("y");
  if (t.header != expected) throw std::runtime_error(path + ": header does not match the design space");
  Dataset d(space);
  try {
    for (const auto& row : t.rows) {
      MixedPoint w;
      for (std::size_t k = 0; k < space.p(); ++k) w.x.push_back(std::stod(row[k]));
      for (std::size_t h = 0; h < space.q(); ++h) w.z.push_back(std::stoi(row[space.p() + h]));
      d.add(std::move(w), std::stod(row.back()));
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return d;
}

}  // namespace amix
