#include "mlg/gram.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "mlg/errors.hpp"

namespace mlg {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string gram_csv_string(const GramMatrix& gram) {
  std::string out;
  for (const auto& [key, value] : gram.metadata) {
    out += "# ";
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  for (Eigen::Index i = 0; i < gram.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.values.cols(); ++j) {
      if (j) out += ',';
      out += format_double(gram.values(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_gram_csv(const GramMatrix& gram, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("write_gram_csv: cannot open " + path);
  out << gram_csv_string(gram);
  if (!out) throw invalid_input("write_gram_csv: write failed for " + path);
}

GramMatrix read_gram_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("read_gram_csv: cannot open " + path);
  GramMatrix gram;
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.erase(body.begin());
      const std::size_t eq = body.find('=');
      if (eq != std::string::npos) gram.metadata[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw invalid_input("read_gram_csv: " + path + ":" + std::to_string(lineno) +
                            ": malformed value '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw invalid_input("read_gram_csv: " + path + ":" + std::to_string(lineno) +
                          ": ragged row");
    rows.push_back(std::move(row));
  }
  if (!rows.empty() && rows.size() != rows.front().size())
    throw invalid_input("read_gram_csv: matrix in " + path + " is not square");
  gram.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      gram.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return gram;
}

}  // namespace mlg
