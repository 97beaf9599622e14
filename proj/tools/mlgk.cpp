// Command-line front end for the multiscale Laplacian graph kernels.
//
//   mlgk gram   --dataset DIR --name NAME [--mode exact|linearized] ...
//   mlgk check  [--seed S] [--inject-fault]
//   mlgk cv     --dataset DIR --name NAME [--grid] ...
//   mlgk stats  --dataset DIR --name NAME
//
// Every flag can also come from a key=value config file (--config) or an
// MLG_* environment variable; command-line flags win over the environment,
// which wins over the file. Exit codes: 0 success, 1 failed check or runtime
// failure, 2 usage error.

#include <chrono>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "checks.hpp"
#include "mlg/dataset.hpp"
#include "mlg/gram.hpp"
#include "mlg/mlg_exact.hpp"
#include "mlg/mlg_linearized.hpp"
#include "mlg/svm.hpp"

namespace {

using namespace mlg;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string dataset_dir;
  std::string name;
  int levels = 2;
  int radius = 1;
  double eta = 0.1;
  double gamma = 0.01;
  double tau = 1e-8;
  int samples = 100;
  int rank = 10;
  std::uint64_t budget = 10'000'000;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string mode = "linearized";
  std::string out;
  std::string c_grid = "0.01,0.1,1,10,100";
  int folds = 10;
  int repeats = 10;
  int inner_folds = 3;
  int subsample = 0;  // 0 keeps the whole dataset
  bool grid = false;
  bool inject_fault = false;
};

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

MlsParams exact_params(const RunConfig& cfg) {
  MlsParams p;
  p.levels = cfg.levels;
  p.radius = cfg.radius;
  p.eta = cfg.eta;
  p.gamma = cfg.gamma;
  p.tau = cfg.tau;
  p.budget = cfg.budget;
  return p;
}

PipelineParams linearized_params(const RunConfig& cfg) {
  PipelineParams p;
  p.levels = cfg.levels;
  p.radius = cfg.radius;
  p.eta = cfg.eta;
  p.gamma = cfg.gamma;
  p.tau = cfg.tau;
  p.n_samples = cfg.samples;
  p.rank = cfg.rank;
  p.seed = cfg.seed;
  p.threads = cfg.threads;
  p.warn = [](const std::string& message) { std::fprintf(stderr, "warning: %s\n", message.c_str()); };
  return p;
}

GramMatrix compute_gram(const RunConfig& cfg, const std::vector<Graph>& graphs) {
  if (cfg.mode == "exact") return gram_exact(graphs, exact_params(cfg), cfg.threads);
  return gram_linearized(graphs, linearized_params(cfg));
}

// Deterministic class-balanced head of the dataset: one graph per class per
// round, classes in sorted label order, file order within a class.
Dataset subsample_dataset(const Dataset& ds, int keep) {
  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < static_cast<int>(ds.graphs.size()); ++i) by_class[ds.labels[i]].push_back(i);
  std::vector<int> chosen;
  for (std::size_t round = 0; static_cast<int>(chosen.size()) < keep; ++round) {
    bool advanced = false;
    for (const auto& [label, members] : by_class) {
      if (round >= members.size()) continue;
      chosen.push_back(members[round]);
      advanced = true;
      if (static_cast<int>(chosen.size()) == keep) break;
    }
    if (!advanced) break;
  }
  std::sort(chosen.begin(), chosen.end());
  Dataset out;
  out.name = ds.name;
  out.alphabet = ds.alphabet;
  out.labels_from_degree = ds.labels_from_degree;
  for (const int idx : chosen) {
    out.graphs.push_back(ds.graphs[static_cast<std::size_t>(idx)]);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(idx)]);
    out.node_labels.push_back(ds.node_labels[static_cast<std::size_t>(idx)]);
  }
  return out;
}

Dataset load_selected(const RunConfig& cfg) {
  if (cfg.dataset_dir.empty() || cfg.name.empty())
    throw usage_error("this command needs --dataset and --name");
  Dataset ds = load_tu_dataset(cfg.dataset_dir, cfg.name);
  if (cfg.subsample > 0 && cfg.subsample < static_cast<int>(ds.graphs.size()))
    ds = subsample_dataset(ds, cfg.subsample);
  return ds;
}

std::vector<double> parse_c_grid(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    std::string token = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    token = first == std::string::npos ? std::string() : token.substr(first, last - first + 1);
    if (!token.empty()) {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || value <= 0.0)
        throw usage_error("--c-grid: cannot parse '" + token + "' as a positive number");
      out.push_back(value);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw usage_error("--c-grid: no values given");
  return out;
}

void print_class_line(const DatasetStats& stats) {
  std::string classes;
  for (std::size_t i = 0; i < stats.class_counts.size(); ++i) {
    if (i) classes += ", ";
    classes += fmt("%d: %d", stats.class_counts[i].first, stats.class_counts[i].second);
  }
  std::printf("dataset %s: %d graphs, classes %s\n", stats.name.c_str(), stats.n_graphs,
              classes.c_str());
}

std::string param_line(const RunConfig& cfg) {
  std::string line = fmt("mode %s levels=%d radius=%d eta=%g gamma=%g tau=%g", cfg.mode.c_str(),
                         cfg.levels, cfg.radius, cfg.eta, cfg.gamma, cfg.tau);
  if (cfg.mode == "linearized")
    line += fmt(" samples=%d rank=%d seed=%llu", cfg.samples, cfg.rank,
                static_cast<unsigned long long>(cfg.seed));
  return line;
}

int cmd_stats(const RunConfig& cfg) {
  const Dataset ds = load_selected(cfg);
  std::fputs(format_stats(dataset_stats(ds)).c_str(), stdout);
  return 0;
}

int cmd_gram(const RunConfig& cfg) {
  const Dataset ds = load_selected(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  GramMatrix gram = compute_gram(cfg, ds.graphs);
  const double elapsed = seconds_since(t0);
  gram.metadata["dataset"] = ds.name;
  if (cfg.subsample > 0) gram.metadata["subsample"] = std::to_string(cfg.subsample);
  const std::string out_path =
      cfg.out.empty() ? ds.name + "_" + cfg.mode + "_gram.csv" : cfg.out;
  write_gram_csv(gram, out_path);
  std::printf("%s\n", param_line(cfg).c_str());
  std::printf("graphs %d\n", static_cast<int>(ds.graphs.size()));
  std::printf("wrote %s\n", out_path.c_str());
  std::printf("wall_time_seconds %.3f\n", elapsed);
  return 0;
}

int cmd_check(const RunConfig& cfg) {
  const auto results = mlgk::run_checks(cfg.seed, cfg.threads, cfg.inject_fault);
  int failed = 0;
  for (const auto& r : results) {
    std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    if (!r.pass) ++failed;
  }
  const int total = static_cast<int>(results.size());
  std::printf("CHECK_SUMMARY passed=%d failed=%d total=%d\n", total - failed, failed, total);
  return failed == 0 ? 0 : 1;
}

void print_cv_report(const CvReport& report) {
  std::printf("accuracy %.2f ± %.2f\n", 100.0 * report.mean, 100.0 * report.stdev);
  std::string means;
  for (std::size_t i = 0; i < report.repeat_means.size(); ++i) {
    if (i) means += ' ';
    means += fmt("%.2f", 100.0 * report.repeat_means[i]);
  }
  std::printf("repeat_means %s\n", means.c_str());
  std::map<double, int> hist;
  for (const auto& per_repeat : report.chosen_c)
    for (const double c : per_repeat) ++hist[c];
  std::string chosen;
  for (const auto& [c, count] : hist) chosen += fmt("%g:%d ", c, count);
  std::printf("chosen_c %s\n", chosen.c_str());
  std::printf("psd_epsilon %.3g\n", report.psd_epsilon);
}

int cmd_cv(const RunConfig& cfg) {
  const Dataset ds = load_selected(cfg);
  print_class_line(dataset_stats(ds));
  CvOptions opt;
  opt.c_grid = parse_c_grid(cfg.c_grid);
  opt.folds = cfg.folds;
  opt.repeats = cfg.repeats;
  opt.inner_folds = cfg.inner_folds;
  opt.seed = cfg.seed;
  const auto t0 = std::chrono::steady_clock::now();
  if (!cfg.grid) {
    const GramMatrix gram = compute_gram(cfg, ds.graphs);
    const CvReport report = cross_validate(gram.values, ds.labels, opt);
    std::printf("%s\n", param_line(cfg).c_str());
    print_cv_report(report);
  } else {
    struct Row {
      RunConfig cfg;
      CvReport report;
    };
    std::vector<Row> rows;
    for (const int levels : {2, 3}) {
      for (const int radius : {1, 2}) {
        for (const double eta : {0.01, 0.1}) {
          for (const double gamma : {0.01, 0.1}) {
            RunConfig cell = cfg;
            cell.levels = levels;
            cell.radius = radius;
            cell.eta = eta;
            cell.gamma = gamma;
            const GramMatrix gram = compute_gram(cell, ds.graphs);
            CvReport report = cross_validate(gram.values, ds.labels, opt);
            std::printf("levels=%d radius=%d eta=%.2f gamma=%.2f accuracy %.2f ± %.2f\n", levels,
                        radius, eta, gamma, 100.0 * report.mean, 100.0 * report.stdev);
            std::fflush(stdout);
            rows.push_back({std::move(cell), std::move(report)});
          }
        }
      }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].report.mean > rows[best].report.mean) best = i;
    const Row& b = rows[best];
    std::printf("best levels=%d radius=%d eta=%.2f gamma=%.2f accuracy %.2f ± %.2f\n",
                b.cfg.levels, b.cfg.radius, b.cfg.eta, b.cfg.gamma, 100.0 * b.report.mean,
                100.0 * b.report.stdev);
  }
  std::printf("wall_time_seconds %.3f\n", seconds_since(t0));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string command;
  CLI::App app{"multiscale Laplacian graph kernels: Gram matrices, invariant checks, "
               "and cross-validated classification"};
  app.name("mlgk");
  app.add_option("command", command, "one of: gram, check, cv, stats")
      ->required()
      ->check(CLI::IsMember({"gram", "check", "cv", "stats"}))
      ->configurable(false);
  app.add_option("--dataset", cfg.dataset_dir, "directory holding the dataset files")
      ->envname("MLG_DATASET");
  app.add_option("--name", cfg.name, "dataset name (file prefix)")->envname("MLG_NAME");
  app.add_option("--levels", cfg.levels, "recursion depth")
      ->envname("MLG_LEVELS")
      ->check(CLI::PositiveNumber);
  app.add_option("--radius", cfg.radius, "base neighborhood radius")
      ->envname("MLG_RADIUS")
      ->check(CLI::PositiveNumber);
  app.add_option("--eta", cfg.eta, "Laplacian regularizer")
      ->envname("MLG_ETA")
      ->check(CLI::PositiveNumber);
  app.add_option("--gamma", cfg.gamma, "S-matrix regularizer")
      ->envname("MLG_GAMMA")
      ->check(CLI::PositiveNumber);
  app.add_option("--tau", cfg.tau, "relative eigenvalue threshold")
      ->envname("MLG_TAU")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--samples", cfg.samples, "vertices sampled per level (linearized)")
      ->envname("MLG_SAMPLES")
      ->check(CLI::PositiveNumber);
  app.add_option("--rank", cfg.rank, "eigenvectors kept per level (linearized)")
      ->envname("MLG_RANK")
      ->check(CLI::PositiveNumber);
  app.add_option("--budget", cfg.budget, "kernel evaluation budget (exact)")
      ->envname("MLG_BUDGET")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "random seed")->envname("MLG_SEED");
  app.add_option("--threads", cfg.threads, "worker threads")
      ->envname("MLG_THREADS")
      ->check(CLI::PositiveNumber);
  app.add_option("--mode", cfg.mode, "kernel path: exact or linearized")
      ->envname("MLG_MODE")
      ->check(CLI::IsMember({"exact", "linearized"}));
  app.add_option("--out", cfg.out, "output path for the Gram matrix")->envname("MLG_OUT");
  app.add_option("--c-grid", cfg.c_grid, "comma-separated slack values for model selection")
      ->envname("MLG_C_GRID");
  app.add_option("--folds", cfg.folds, "outer cross-validation folds")
      ->envname("MLG_FOLDS")
      ->check(CLI::PositiveNumber);
  app.add_option("--repeats", cfg.repeats, "cross-validation repeats")
      ->envname("MLG_REPEATS")
      ->check(CLI::PositiveNumber);
  app.add_option("--inner-folds", cfg.inner_folds, "inner folds for slack selection")
      ->envname("MLG_INNER_FOLDS")
      ->check(CLI::PositiveNumber);
  app.add_option("--subsample", cfg.subsample,
                 "keep a class-balanced subset of this many graphs (0 = all)")
      ->envname("MLG_SUBSAMPLE")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--grid", cfg.grid, "cv: sweep levels {2,3} x radius {1,2} x eta, gamma {0.01,0.1}")
      ->envname("MLG_GRID");
  app.add_flag("--inject-fault", cfg.inject_fault,
               "check: corrupt one S matrix to demonstrate failure detection")
      ->envname("MLG_INJECT_FAULT");
  app.set_config("--config", "", "key=value configuration file")->envname("MLG_CONFIG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (command == "gram") return cmd_gram(cfg);
    if (command == "check") return cmd_check(cfg);
    if (command == "cv") return cmd_cv(cfg);
    return cmd_stats(cfg);
  } catch (const usage_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
