#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mlg/svm.hpp"
#include "testutil.hpp"

using mlg::Matrix;
using mlg::SmoOptions;
using mlg::Vector;

namespace {

// Linear kernel with a ridge: strictly positive definite, so the dual optimum
// is unique and directly comparable across solvers.
Matrix ridge_kernel(std::mt19937_64& rng, int n, int dim, double ridge, Matrix* x_out = nullptr) {
  Matrix x(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) x(i, j) = testutil::uniform(rng, -1.0, 1.0);
  if (x_out) *x_out = x;
  return x * x.transpose() + ridge * Matrix::Identity(n, n);
}

std::vector<int> hyperplane_labels(const Matrix& x, std::mt19937_64& rng) {
  Vector w(x.cols());
  for (int j = 0; j < x.cols(); ++j) w(j) = testutil::uniform(rng, -1.0, 1.0);
  std::vector<int> y(static_cast<std::size_t>(x.rows()));
  for (int i = 0; i < x.rows(); ++i) y[static_cast<std::size_t>(i)] = x.row(i).dot(w) >= 0.0 ? 1 : -1;
  return y;
}

bool both_classes(const std::vector<int>& y) {
  bool pos = false, neg = false;
  for (int v : y) (v > 0 ? pos : neg) = true;
  return pos && neg;
}

double dual_objective(const Matrix& k, const std::vector<int>& y, const Vector& alpha) {
  const int n = static_cast<int>(y.size());
  double quad = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      quad += alpha(i) * alpha(j) * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * k(i, j);
  return 0.5 * quad - alpha.sum();
}

// Ideal kernel: 1 within a class, 0 across classes. PSD by construction.
Matrix ideal_kernel(const std::vector<int>& labels) {
  const int n = static_cast<int>(labels.size());
  Matrix k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k(i, j) = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  return k;
}

}  // namespace

TEST_CASE("two orthonormal points solve in closed form") {
  const Matrix k = Matrix::Identity(2, 2);
  const std::vector<int> y{1, -1};
  const mlg::SvmModel m = mlg::svm_train(k, y, SmoOptions{10.0, 1e-10, 100000});
  CHECK(m.alpha(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.alpha(1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.bias == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m.support == std::vector<int>{0, 1});
  const Vector f = mlg::decision_values(m, k);
  CHECK(f(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f(1) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("SMO agrees with a projected-gradient reference") {
  auto rng = testutil::make_rng(211);
  Matrix x;
  const Matrix k = ridge_kernel(rng, 14, 3, 1.0, &x);
  const std::vector<int> y = hyperplane_labels(x, rng);
  REQUIRE(both_classes(y));
  const double c = 1.0;

  const mlg::SvmModel m = mlg::svm_train(k, y, SmoOptions{c, 1e-8, 10'000'000});
  const Vector ref = testutil::qp_reference(k, y, c);

  // unique optimum: the dual variables themselves must agree
  for (int i = 0; i < 14; ++i) CHECK(std::abs(m.alpha(i) - ref(i)) <= 1e-4);
  CHECK(dual_objective(k, y, m.alpha) <= dual_objective(k, y, ref) + 1e-6);

  // decision values, using the reference's own free-vector bias
  Vector ref_coef(14);
  for (int i = 0; i < 14; ++i) ref_coef(i) = ref(i) * y[static_cast<std::size_t>(i)];
  double bias_sum = 0.0;
  int bias_count = 0;
  for (int i = 0; i < 14; ++i) {
    if (ref(i) > 1e-6 && ref(i) < c - 1e-6) {
      bias_sum += y[static_cast<std::size_t>(i)] - ref_coef.dot(k.col(i));
      ++bias_count;
    }
  }
  REQUIRE(bias_count > 0);
  const double ref_bias = bias_sum / bias_count;
  const Vector f = mlg::decision_values(m, k);
  for (int i = 0; i < 14; ++i) CHECK(std::abs(f(i) - (ref_coef.dot(k.col(i)) + ref_bias)) <= 1e-4);
}

TEST_CASE("dual constraints hold on random problems") {
  auto rng = testutil::make_rng(223);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix x;
    const Matrix k = ridge_kernel(rng, 12, 4, 0.5, &x);
    const std::vector<int> y = hyperplane_labels(x, rng);
    if (!both_classes(y)) continue;
    const double c = trial % 2 == 0 ? 0.7 : 5.0;
    const mlg::SvmModel m = mlg::svm_train(k, y, SmoOptions{c, 1e-6, 10'000'000});
    double balance = 0.0;
    for (int i = 0; i < 12; ++i) {
      CHECK(m.alpha(i) >= -1e-12);
      CHECK(m.alpha(i) <= c + 1e-12);
      balance += m.alpha(i) * y[static_cast<std::size_t>(i)];
      CHECK((m.alpha(i) > 0.0) == (std::find(m.support.begin(), m.support.end(), i) != m.support.end()));
    }
    CHECK(std::abs(balance) <= 1e-6);
  }
}

TEST_CASE("kernel scaling with matched slack leaves decisions unchanged") {
  auto rng = testutil::make_rng(227);
  Matrix x;
  const Matrix k = ridge_kernel(rng, 12, 3, 1.0, &x);
  const std::vector<int> y = hyperplane_labels(x, rng);
  REQUIRE(both_classes(y));

  const double scale = 4.0;
  const mlg::SvmModel base = mlg::svm_train(k, y, SmoOptions{1.0, 1e-10, 10'000'000});
  const Matrix ks = scale * k;
  const mlg::SvmModel scaled = mlg::svm_train(ks, y, SmoOptions{1.0 / scale, 1e-10, 10'000'000});

  const Vector f_base = mlg::decision_values(base, k);
  const Vector f_scaled = mlg::decision_values(scaled, ks);
  for (int i = 0; i < 12; ++i) CHECK(std::abs(f_base(i) - f_scaled(i)) <= 1e-6);
}

TEST_CASE("a vanishing slack bound drives every point to the box edge") {
  auto rng = testutil::make_rng(229);
  const int n = 10;
  const Matrix k = ridge_kernel(rng, n, 3, 1.0);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i < n / 2 ? 1 : -1;  // balanced

  const double c = 1e-4;
  const mlg::SvmModel m = mlg::svm_train(k, y, SmoOptions{c, 1e-3, 10'000'000});
  CHECK(static_cast<int>(m.support.size()) == n);
  for (int i = 0; i < n; ++i) CHECK(m.alpha(i) == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("training rejects malformed inputs") {
  const Matrix k = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(mlg::svm_train(k, {1, -1}, SmoOptions{}), mlg::invalid_input);
  CHECK_THROWS_AS(mlg::svm_train(k, {1, 2, -1}, SmoOptions{}), mlg::invalid_input);
  CHECK_THROWS_AS(mlg::svm_train(k, {1, 1, 1}, SmoOptions{}), mlg::invalid_input);
  CHECK_THROWS_AS(mlg::svm_train(k, {1, -1, 1}, SmoOptions{0.0, 1e-3, 100}), mlg::invalid_input);
}

TEST_CASE("an exhausted iteration cap reports the KKT gap") {
  auto rng = testutil::make_rng(233);
  Matrix x;
  const Matrix k = ridge_kernel(rng, 10, 3, 1.0, &x);
  const std::vector<int> y = hyperplane_labels(x, rng);
  REQUIRE(both_classes(y));
  try {
    mlg::svm_train(k, y, SmoOptions{1.0, 1e-10, 1});
    FAIL("expected svm_convergence_error");
  } catch (const mlg::svm_convergence_error& e) {
    CHECK(e.kkt_gap() > 0.0);
  }
}

TEST_CASE("ensure_psd repairs an indefinite matrix and reports the shift") {
  Matrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, -0.1;
  const double eps = mlg::ensure_psd(&bad);
  CHECK(eps == doctest::Approx(0.1).epsilon(1e-6));
  Eigen::SelfAdjointEigenSolver<Matrix> es(bad, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);

  Matrix good = Matrix::Identity(3, 3);
  CHECK(mlg::ensure_psd(&good) == 0.0);
  CHECK((good - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("one-vs-rest recovers the classes of an ideal three-class kernel") {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 6; ++i) labels.push_back(c * 10);  // classes 0, 10, 20
  const Matrix k = ideal_kernel(labels);

  std::vector<int> all(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) all[i] = static_cast<int>(i);
  const mlg::OvrModel m = mlg::train_ovr(k, all, labels, SmoOptions{1.0, 1e-6, 100000});
  CHECK(m.classes == std::vector<int>{0, 10, 20});
  REQUIRE(m.models.size() == 3);
  CHECK(mlg::predict_ovr(m, k, all) == labels);
}

TEST_CASE("an ideal block kernel cross-validates at full accuracy") {
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(i < 15 ? 1 : 2);
  const Matrix k = ideal_kernel(labels);

  mlg::CvOptions opt;
  opt.folds = 5;
  opt.repeats = 3;
  opt.seed = 99;
  const mlg::CvReport report = mlg::cross_validate(k, labels, opt);
  CHECK(report.mean == doctest::Approx(1.0));
  CHECK(report.stdev == doctest::Approx(0.0));
  CHECK(report.psd_epsilon == 0.0);
  REQUIRE(report.repeat_means.size() == 3);
  REQUIRE(report.fold_accuracies.size() == 3);
  for (const auto& folds : report.fold_accuracies)
    for (double a : folds) CHECK(a == doctest::Approx(1.0));
  // ties across the C grid resolve to the smallest value
  for (const auto& folds : report.chosen_c)
    for (double c : folds) CHECK(c == doctest::Approx(0.01));
}

TEST_CASE("random labels score near the majority fraction") {
  auto rng = testutil::make_rng(239);
  const int n = 60;
  const Matrix k = ridge_kernel(rng, n, 6, 0.5);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 2);
  int ones = 0;
  for (int v : labels) ones += v;
  REQUIRE(ones >= 5);
  REQUIRE(ones <= 55);
  const double majority = std::max(ones, n - ones) / static_cast<double>(n);

  mlg::CvOptions opt;
  opt.folds = 5;
  opt.repeats = 3;
  opt.c_grid = {0.1, 1.0};
  opt.seed = 17;
  const mlg::CvReport report = mlg::cross_validate(k, labels, opt);
  CHECK(std::abs(report.mean - majority) <= 0.12);
}

TEST_CASE("cross-validation is deterministic in the seed") {
  std::vector<int> labels;
  for (int i = 0; i < 24; ++i) labels.push_back(i % 2);
  auto rng = testutil::make_rng(241);
  Matrix k = ridge_kernel(rng, 24, 4, 0.5);
  // mix in a little class signal so accuracies are not degenerate
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j)
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) k(i, j) += 0.3;

  mlg::CvOptions opt;
  opt.folds = 4;
  opt.repeats = 4;
  opt.c_grid = {0.1, 1.0, 10.0};
  opt.seed = 5;
  const mlg::CvReport a = mlg::cross_validate(k, labels, opt);
  const mlg::CvReport b = mlg::cross_validate(k, labels, opt);
  CHECK(a.mean == b.mean);
  CHECK(a.stdev == b.stdev);
  CHECK(a.repeat_means == b.repeat_means);
  CHECK(a.fold_accuracies == b.fold_accuracies);
  CHECK(a.chosen_c == b.chosen_c);

  opt.seed = 6;
  const mlg::CvReport c = mlg::cross_validate(k, labels, opt);
  bool any_difference = c.repeat_means != a.repeat_means;
  for (std::size_t r = 0; r < a.fold_accuracies.size() && !any_difference; ++r)
    any_difference = a.fold_accuracies[r] != c.fold_accuracies[r];
  CHECK(any_difference);
}

TEST_CASE("singleton classes cannot be stratified") {
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(i % 2);
  labels[0] = 7;  // lone member of class 7
  const Matrix k = ideal_kernel(labels);
  mlg::CvOptions opt;
  opt.folds = 5;
  opt.repeats = 1;
  CHECK_THROWS_AS(mlg::cross_validate(k, labels, opt), mlg::stratification_error);
}

TEST_CASE("cross-validation repairs an indefinite Gram matrix and logs the shift") {
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) labels.push_back(i < 10 ? 1 : 2);
  Matrix k = ideal_kernel(labels);
  k(0, 1) = k(1, 0) = 2.5;  // breaks positive semi-definiteness

  mlg::CvOptions opt;
  opt.folds = 4;
  opt.repeats = 1;
  opt.c_grid = {1.0};
  opt.seed = 3;
  const mlg::CvReport report = mlg::cross_validate(k, labels, opt);
  CHECK(report.psd_epsilon > 0.0);
}

TEST_CASE("cross-validation validates its inputs") {
  const Matrix k = Matrix::Identity(4, 4);
  mlg::CvOptions opt;
  CHECK_THROWS_AS(mlg::cross_validate(k, {1, 1, 2}, opt), mlg::invalid_input);
  CHECK_THROWS_AS(mlg::cross_validate(k, {1, 1, 1, 1}, opt), mlg::invalid_input);
  opt.folds = 1;
  CHECK_THROWS_AS(mlg::cross_validate(k, {1, 1, 2, 2}, opt), mlg::invalid_input);
  opt.folds = 2;
  opt.c_grid = {};
  CHECK_THROWS_AS(mlg::cross_validate(k, {1, 1, 2, 2}, opt), mlg::invalid_input);
}
