#pragma once

// Support vector classification on a precomputed kernel matrix: SMO with
// maximal-violating-pair working-set selection, one-vs-rest voting for more
// than two classes, and repeated stratified cross-validation with the slack
// parameter chosen by an inner split of each training fold.

#include <cstdint>
#include <vector>

#include "mlg/spd.hpp"

namespace mlg {

struct SmoOptions {
  double c = 1.0;
  double tol = 1e-3;  // KKT violation tolerance (stop when max violation <= tol)
  std::int64_t max_iter = 10'000'000;
};

struct SvmModel {
  Vector alpha;              // dual variables, in [0, C]
  Vector coef;               // alpha_i * y_i
  double bias = 0.0;
  std::vector<int> support;  // indices with alpha_i > 0
  double c = 1.0;
  std::int64_t iterations = 0;
};

// Binary trainer; y must be +1/-1 with both classes present, k the n x n
// kernel matrix of the training points. Throws svm_convergence_error (with
// the final KKT gap) if max_iter is exhausted.
SvmModel svm_train(const Matrix& k, const std::vector<int>& y, const SmoOptions& opt);

// Decision values f(x) = sum_i coef_i k(x_i, x) + b for the columns of
// k_cross (one column per evaluation point, rows = training points).
Vector decision_values(const SvmModel& m, const Matrix& k_cross);

// Adds eps * I when the spectrum dips below -rel_tol * lambda_max; returns
// the eps used (0 when the matrix was already PSD within tolerance).
double ensure_psd(Matrix* k, double rel_tol = 1e-8);

// One-vs-rest ensemble over the distinct labels of the training set.
// With two classes a single binary machine is trained; ties in the vote
// resolve to the lowest class label.
struct OvrModel {
  std::vector<int> classes;    // sorted distinct labels seen in training
  std::vector<int> train_idx;  // row/col ids of training points in the Gram
  std::vector<SvmModel> models;
};

OvrModel train_ovr(const Matrix& gram, const std::vector<int>& train_idx,
                   const std::vector<int>& labels, const SmoOptions& opt);
std::vector<int> predict_ovr(const OvrModel& m, const Matrix& gram,
                             const std::vector<int>& eval_idx);

struct CvOptions {
  std::vector<double> c_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  int folds = 10;
  int repeats = 10;
  int inner_folds = 3;
  std::uint64_t seed = 0;
  double tol = 1e-3;
  std::int64_t max_iter = 10'000'000;
};

struct CvReport {
  std::vector<std::vector<double>> fold_accuracies;  // [repeat][fold]
  std::vector<std::vector<double>> chosen_c;         // [repeat][fold]
  std::vector<double> repeat_means;
  double mean = 0.0;
  double stdev = 0.0;  // sample standard deviation over repeat means
  double psd_epsilon = 0.0;
};

// Repeated stratified k-fold cross-validation. Folds are reshuffled every
// repeat from a repeat-specific substream of seed; the Gram matrix is
// PSD-repaired once up front (logged in the report).
CvReport cross_validate(const Matrix& gram, const std::vector<int>& labels, const CvOptions& opt);

}  // namespace mlg
