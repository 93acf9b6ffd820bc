#include <charconv>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "qte/errors.hpp"

namespace qte::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::BadConfig, "cannot open '" + path + "'");
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (t.header.empty()) {
      t.header = split_row(line);
      continue;
    }
    t.rows.push_back(split_row(line));
    t.line_numbers.push_back(line_no);
  }
  return t;
}

std::optional<std::size_t> column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  return std::nullopt;
}

double cell_value(const Table& t, std::size_t r, std::size_t c) {
  const auto& row = t.rows[r];
  double v = 0.0;
  if (c >= row.size() || !parse_double(row[c], v)) {
    fail(ErrorKind::BadConfig, "line " + std::to_string(t.line_numbers[r]) + ": expected a number");
  }
  return v;
}

}  // namespace

ObservationTable read_observations(const std::string& path) {
  const Table t = read_table(path);
  const auto yc = column(t, "y");
  const auto zc = column(t, "z");
  if (!yc || !zc) fail(ErrorKind::BadConfig, "input needs a header with columns y and z");
  ObservationTable out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.y.push_back(cell_value(t, r, *yc));
    const double z = cell_value(t, r, *zc);
    if (z != 0.0 && z != 1.0) {
      fail(ErrorKind::BadIndicator,
           "line " + std::to_string(t.line_numbers[r]) + ": treatment indicator must be 0 or 1");
    }
    out.z.push_back(static_cast<int>(z));
  }
  return out;
}

std::vector<double> read_outcomes(const std::string& path) {
  Table t = read_table(path);
  std::size_t c = 0;
  if (const auto yc = column(t, "y")) {
    c = *yc;
  } else {
    // No y header: the first line is data.
    double v = 0.0;
    if (!t.header.empty() && parse_double(t.header[0], v)) {
      t.rows.insert(t.rows.begin(), t.header);
      t.line_numbers.insert(t.line_numbers.begin(), 0);
    }
  }
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(cell_value(t, r, c));
  return out;
}

}  // namespace qte::cli
