#pragma once

// Gram matrix container and its CSV serialization. Files carry a leading
// block of '# key=value' comment lines (sorted by key) followed by the
// comma-separated matrix rows. Values are printed with %.17g so a rerun of
// the recorded configuration reproduces the file byte for byte.

#include <map>
#include <string>

#include "mlg/spd.hpp"

namespace mlg {

struct GramMatrix {
  Matrix values;
  std::map<std::string, std::string> metadata;
};

std::string format_double(double x);

void write_gram_csv(const GramMatrix& gram, const std::string& path);
std::string gram_csv_string(const GramMatrix& gram);
GramMatrix read_gram_csv(const std::string& path);

}  // namespace mlg
