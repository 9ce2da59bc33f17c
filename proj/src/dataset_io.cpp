#include "mcml/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace mcml {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, const std::string& name, int line_no) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(name + ":" + std::to_string(line_no) + ": non-numeric cell '" + cell + "'");
  return value;
}

}  // namespace

Dataset parse_dataset_csv(std::istream& in, const std::string& name) {
  std::string line;
  int line_no = 0;

  // Header: y-prefixed response columns, x-prefixed covariate columns.
  std::vector<int> y_cols, x_cols;
  int header_width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].rfind('y', 0) == 0)
        y_cols.push_back(static_cast<int>(c));
      else if (cells[c].rfind('x', 0) == 0)
        x_cols.push_back(static_cast<int>(c));
      else
        throw ParseError(name + ":" + std::to_string(line_no) + ": header column '" + cells[c] +
                         "' must start with y or x");
    }
    header_width = static_cast<int>(cells.size());
    break;
  }
  if (header_width == 0) throw ParseError(name + ": missing header line");
  if (y_cols.empty())
    throw ParseError(name + ":" + std::to_string(line_no) + ": header has no response column");

  Dataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != header_width)
      throw ParseError(name + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header_width) + " cells, found " +
                       std::to_string(cells.size()));
    VectorXd y(static_cast<Eigen::Index>(y_cols.size()));
    for (std::size_t j = 0; j < y_cols.size(); ++j)
      y[static_cast<Eigen::Index>(j)] =
          parse_cell(cells[static_cast<std::size_t>(y_cols[j])], name, line_no);
    VectorXd x(static_cast<Eigen::Index>(x_cols.size()));
    for (std::size_t j = 0; j < x_cols.size(); ++j)
      x[static_cast<Eigen::Index>(j)] =
          parse_cell(cells[static_cast<std::size_t>(x_cols[j])], name, line_no);
    data.responses.push_back(std::move(y));
    data.covariates.push_back(std::move(x));
  }
  if (data.responses.empty()) throw ParseError(name + ": no data rows");
  return data;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return parse_dataset_csv(in, path);
}

}  // namespace mcml
