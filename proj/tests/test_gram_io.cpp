#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "mlg/gram.hpp"
#include "testutil.hpp"

using mlg::GramMatrix;
using mlg::Matrix;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mlg_gram_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

GramMatrix sample_gram(std::uint64_t seed) {
  auto rng = testutil::make_rng(seed);
  GramMatrix g;
  g.values.resize(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const double v = testutil::uniform(rng, -1.0, 1.0);
      g.values(i, j) = v;
      g.values(j, i) = v;
    }
  g.metadata["mode"] = "exact";
  g.metadata["levels"] = "2";
  g.metadata["gamma"] = mlg::format_double(0.01);
  return g;
}

}  // namespace

TEST_CASE("format_double survives a text round-trip exactly") {
  auto rng = testutil::make_rng(301);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = std::ldexp(testutil::uniform(rng, -1.0, 1.0),
                                static_cast<int>(rng() % 61) - 30);
    const double back = std::stod(mlg::format_double(x));
    CHECK(back == x);
  }
  CHECK(mlg::format_double(0.0) == "0");
  CHECK(mlg::format_double(1.0) == "1");
  CHECK(std::stod(mlg::format_double(0.1)) == 0.1);
}

TEST_CASE("write and read round-trip values and metadata bit for bit") {
  const GramMatrix g = sample_gram(303);
  TempDir tmp("roundtrip");
  const std::string path = (tmp.path / "gram.csv").string();
  mlg::write_gram_csv(g, path);
  const GramMatrix back = mlg::read_gram_csv(path);

  REQUIRE(back.values.rows() == g.values.rows());
  REQUIRE(back.values.cols() == g.values.cols());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(back.values(i, j) == g.values(i, j));
  CHECK(back.metadata == g.metadata);
}

TEST_CASE("serialization is deterministic and file output matches the string form") {
  const GramMatrix g = sample_gram(307);
  const std::string a = mlg::gram_csv_string(g);
  const std::string b = mlg::gram_csv_string(g);
  CHECK(a == b);

  TempDir tmp("bytes");
  const std::string path = (tmp.path / "gram.csv").string();
  mlg::write_gram_csv(g, path);
  CHECK(slurp(tmp.path / "gram.csv") == a);
}

TEST_CASE("metadata headers are sorted by key") {
  GramMatrix g = sample_gram(311);
  g.metadata.clear();
  g.metadata["zeta"] = "1";
  g.metadata["alpha"] = "2";
  g.metadata["mid"] = "3";
  const std::string text = mlg::gram_csv_string(g);
  const std::size_t a = text.find("# alpha=2");
  const std::size_t m = text.find("# mid=3");
  const std::size_t z = text.find("# zeta=1");
  REQUIRE(a != std::string::npos);
  REQUIRE(m != std::string::npos);
  REQUIRE(z != std::string::npos);
  CHECK(a < m);
  CHECK(m < z);
}

TEST_CASE("reading a missing file fails loudly") {
  CHECK_THROWS(mlg::read_gram_csv("/nonexistent/dir/gram.csv"));
}
