#include "mlg/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "mlg/errors.hpp"
#include "mlg/random.hpp"

namespace mlg {

SvmModel svm_train(const Matrix& k, const std::vector<int>& y, const SmoOptions& opt) {
  const int n = static_cast<int>(y.size());
  if (k.rows() != n || k.cols() != n)
    throw invalid_input("svm_train: kernel matrix must be " + std::to_string(n) + "x" +
                        std::to_string(n));
  if (!(opt.c > 0.0)) throw invalid_input("svm_train: C must be > 0");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw invalid_input("svm_train: labels must be +1 or -1");
  }
  if (!pos || !neg) throw invalid_input("svm_train: need both classes in the training set");

  // Dual: min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
  const double c = opt.c;
  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);  // gradient of the dual objective
  std::int64_t iter = 0;
  double gap = std::numeric_limits<double>::infinity();

  const auto in_up = [&](int i) { return y[static_cast<std::size_t>(i)] > 0 ? alpha(i) < c : alpha(i) > 0.0; };
  const auto in_low = [&](int i) { return y[static_cast<std::size_t>(i)] > 0 ? alpha(i) > 0.0 : alpha(i) < c; };

  for (;; ++iter) {
    // Maximal violating pair, first index on ties.
    int i = -1, j = -1;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      const double v = -y[static_cast<std::size_t>(t)] * grad(t);
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    gap = m_up - m_low;
    if (gap <= opt.tol) break;
    if (iter >= opt.max_iter)
      throw svm_convergence_error("svm_train: no convergence after " + std::to_string(opt.max_iter) +
                                      " iterations (KKT gap " + std::to_string(gap) + ")",
                                  gap);

    const int yi = y[static_cast<std::size_t>(i)];
    const int yj = y[static_cast<std::size_t>(j)];
    const double old_ai = alpha(i);
    const double old_aj = alpha(j);
    // Curvature along the feasible pair direction is the squared feature
    // distance, identical for both label patterns.
    double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (quad <= 0.0) quad = 1e-12;
    if (yi != yj) {
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0.0 && alpha(j) < 0.0) {
        alpha(j) = 0.0;
        alpha(i) = diff;
      } else if (diff <= 0.0 && alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = -diff;
      }
      if (diff > 0.0 && alpha(i) > c) {
        alpha(i) = c;
        alpha(j) = c - diff;
      } else if (diff <= 0.0 && alpha(j) > c) {
        alpha(j) = c;
        alpha(i) = c + diff;
      }
    } else {
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > c && alpha(i) > c) {
        alpha(i) = c;
        alpha(j) = sum - c;
      } else if (sum <= c && alpha(j) < 0.0) {
        alpha(j) = 0.0;
        alpha(i) = sum;
      }
      if (sum > c && alpha(j) > c) {
        alpha(j) = c;
        alpha(i) = sum - c;
      } else if (sum <= c && alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = sum;
      }
    }
    const double dai = (alpha(i) - old_ai) * yi;
    const double daj = (alpha(j) - old_aj) * yj;
    for (int t = 0; t < n; ++t)
      grad(t) += y[static_cast<std::size_t>(t)] * (k(t, i) * dai + k(t, j) * daj);
  }

  SvmModel model;
  model.alpha = alpha;
  model.c = c;
  model.iterations = iter;
  model.coef.resize(n);
  for (int t = 0; t < n; ++t) {
    model.coef(t) = alpha(t) * y[static_cast<std::size_t>(t)];
    if (alpha(t) > 0.0) model.support.push_back(t);
  }

  // Bias from the KKT conditions: free points pin y_i (g_i + b) = 1; bound
  // points only constrain b, so fall back to the midpoint of the feasible
  // interval when no point is free.
  double free_sum = 0.0;
  int free_count = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (int t = 0; t < n; ++t) {
    const double g = model.coef.dot(k.col(t));
    const double target = y[static_cast<std::size_t>(t)] - g;
    if (alpha(t) > 0.0 && alpha(t) < c) {
      free_sum += target;
      ++free_count;
    } else if (alpha(t) <= 0.0) {
      // y (g + b) >= 1
      if (y[static_cast<std::size_t>(t)] > 0) lo = std::max(lo, target);
      else hi = std::min(hi, target);
    } else {
      // y (g + b) <= 1
      if (y[static_cast<std::size_t>(t)] > 0) hi = std::min(hi, target);
      else lo = std::max(lo, target);
    }
  }
  if (free_count > 0) model.bias = free_sum / free_count;
  else if (std::isfinite(lo) && std::isfinite(hi)) model.bias = (lo + hi) / 2.0;
  else if (std::isfinite(lo)) model.bias = lo;
  else if (std::isfinite(hi)) model.bias = hi;
  return model;
}

Vector decision_values(const SvmModel& m, const Matrix& k_cross) {
  if (k_cross.rows() != m.coef.size())
    throw invalid_input("decision_values: kernel block has " + std::to_string(k_cross.rows()) +
                        " rows for " + std::to_string(m.coef.size()) + " training points");
  return (k_cross.transpose() * m.coef).array() + m.bias;
}

double ensure_psd(Matrix* k, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(*k, Eigen::EigenvaluesOnly);
  const double lambda_min = es.eigenvalues().minCoeff();
  const double lambda_max = std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (lambda_min >= -rel_tol * lambda_max) return 0.0;
  const double eps = -lambda_min + rel_tol * lambda_max;
  k->diagonal().array() += eps;
  return eps;
}

namespace {

Matrix slice(const Matrix& gram, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          gram(rows[i], cols[j]);
  return out;
}

}  // namespace

OvrModel train_ovr(const Matrix& gram, const std::vector<int>& train_idx,
                   const std::vector<int>& labels, const SmoOptions& opt) {
  if (train_idx.empty()) throw invalid_input("train_ovr: empty training set");
  OvrModel out;
  out.train_idx = train_idx;
  for (int i : train_idx) out.classes.push_back(labels[static_cast<std::size_t>(i)]);
  std::sort(out.classes.begin(), out.classes.end());
  out.classes.erase(std::unique(out.classes.begin(), out.classes.end()), out.classes.end());
  if (out.classes.size() < 2) throw invalid_input("train_ovr: need at least two classes");

  const Matrix k = slice(gram, train_idx, train_idx);
  std::vector<int> y(train_idx.size());
  if (out.classes.size() == 2) {
    for (std::size_t t = 0; t < train_idx.size(); ++t)
      y[t] = labels[static_cast<std::size_t>(train_idx[t])] == out.classes[1] ? 1 : -1;
    out.models.push_back(svm_train(k, y, opt));
    return out;
  }
  for (int cls : out.classes) {
    for (std::size_t t = 0; t < train_idx.size(); ++t)
      y[t] = labels[static_cast<std::size_t>(train_idx[t])] == cls ? 1 : -1;
    out.models.push_back(svm_train(k, y, opt));
  }
  return out;
}

std::vector<int> predict_ovr(const OvrModel& m, const Matrix& gram,
                             const std::vector<int>& eval_idx) {
  const Matrix k_cross = slice(gram, m.train_idx, eval_idx);
  std::vector<int> out(eval_idx.size());
  if (m.classes.size() == 2) {
    const Vector f = decision_values(m.models[0], k_cross);
    for (std::size_t t = 0; t < eval_idx.size(); ++t)
      out[t] = f(static_cast<Eigen::Index>(t)) > 0.0 ? m.classes[1] : m.classes[0];
    return out;
  }
  Matrix votes(static_cast<Eigen::Index>(m.classes.size()),
               static_cast<Eigen::Index>(eval_idx.size()));
  for (std::size_t c = 0; c < m.classes.size(); ++c)
    votes.row(static_cast<Eigen::Index>(c)) = decision_values(m.models[c], k_cross).transpose();
  for (std::size_t t = 0; t < eval_idx.size(); ++t) {
    Eigen::Index best = 0;
    // strict > keeps the lowest class label on ties
    for (Eigen::Index c = 1; c < votes.rows(); ++c)
      if (votes(c, static_cast<Eigen::Index>(t)) > votes(best, static_cast<Eigen::Index>(t)))
        best = c;
    out[t] = m.classes[static_cast<std::size_t>(best)];
  }
  return out;
}

namespace {

// Stratified fold assignment: shuffle each class's members, then deal them
// round-robin. Every class with >= 2 members is guaranteed to appear in the
// training side of every fold.
std::vector<int> stratified_folds(const std::vector<int>& labels, const std::vector<int>& subset,
                                  int folds, std::mt19937_64* rng) {
  std::map<int, std::vector<int>> by_class;
  for (int i : subset) by_class[labels[static_cast<std::size_t>(i)]].push_back(i);
  std::vector<int> fold_of(labels.size(), -1);
  for (auto& [cls, members] : by_class) {
    if (rng) portable_shuffle(members, *rng);
    for (std::size_t t = 0; t < members.size(); ++t)
      fold_of[static_cast<std::size_t>(members[t])] = static_cast<int>(t % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels,
                const std::vector<int>& idx) {
  int hits = 0;
  for (std::size_t t = 0; t < idx.size(); ++t)
    if (predicted[t] == labels[static_cast<std::size_t>(idx[t])]) ++hits;
  return idx.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(idx.size());
}

// Mean inner-CV accuracy of one C value on the given training subset.
double inner_score(const Matrix& gram, const std::vector<int>& labels,
                   const std::vector<int>& train, int inner_folds, double c, const CvOptions& opt) {
  const std::vector<int> fold_of = stratified_folds(labels, train, inner_folds, nullptr);
  double total = 0.0;
  int used = 0;
  for (int f = 0; f < inner_folds; ++f) {
    std::vector<int> fit, eval;
    for (int i : train) (fold_of[static_cast<std::size_t>(i)] == f ? eval : fit).push_back(i);
    if (eval.empty() || fit.empty()) continue;
    std::vector<int> classes;
    for (int i : fit) classes.push_back(labels[static_cast<std::size_t>(i)]);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() < 2) continue;
    const OvrModel model = train_ovr(gram, fit, labels, SmoOptions{c, opt.tol, opt.max_iter});
    total += accuracy(predict_ovr(model, gram, eval), labels, eval);
    ++used;
  }
  return used > 0 ? total / used : 0.0;
}

}  // namespace

CvReport cross_validate(const Matrix& gram, const std::vector<int>& labels, const CvOptions& opt) {
  const int n = static_cast<int>(labels.size());
  if (gram.rows() != n || gram.cols() != n)
    throw invalid_input("cross_validate: Gram matrix must be " + std::to_string(n) + "x" +
                        std::to_string(n));
  if (opt.folds < 2) throw invalid_input("cross_validate: folds must be >= 2");
  if (opt.repeats < 1) throw invalid_input("cross_validate: repeats must be >= 1");
  if (opt.c_grid.empty()) throw invalid_input("cross_validate: empty C grid");
  std::map<int, int> class_count;
  for (int label : labels) ++class_count[label];
  if (class_count.size() < 2) throw invalid_input("cross_validate: need at least two classes");
  for (const auto& [cls, count] : class_count)
    if (count < 2)
      throw stratification_error("cross_validate: class " + std::to_string(cls) +
                                 " has a single member; it would be missing from some training fold");

  std::vector<double> c_grid = opt.c_grid;
  std::sort(c_grid.begin(), c_grid.end());

  CvReport report;
  Matrix repaired = gram;
  report.psd_epsilon = ensure_psd(&repaired);

  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;

  for (int r = 0; r < opt.repeats; ++r) {
    std::mt19937_64 rng(split_seed(opt.seed, static_cast<std::uint64_t>(r)));
    const std::vector<int> fold_of = stratified_folds(labels, all, opt.folds, &rng);
    std::vector<double> fold_acc, fold_c;
    for (int f = 0; f < opt.folds; ++f) {
      std::vector<int> train, test;
      for (int i = 0; i < n; ++i)
        (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
      if (test.empty()) continue;  // tiny datasets can leave late folds empty

      double best_c = c_grid.front();
      double best_score = -1.0;
      for (double c : c_grid) {
        const double score = inner_score(repaired, labels, train, opt.inner_folds, c, opt);
        if (score > best_score) {  // strict >: ties keep the smaller C
          best_score = score;
          best_c = c;
        }
      }
      const OvrModel model =
          train_ovr(repaired, train, labels, SmoOptions{best_c, opt.tol, opt.max_iter});
      fold_acc.push_back(accuracy(predict_ovr(model, repaired, test), labels, test));
      fold_c.push_back(best_c);
    }
    double mean = 0.0;
    for (double a : fold_acc) mean += a;
    mean /= static_cast<double>(fold_acc.size());
    report.fold_accuracies.push_back(std::move(fold_acc));
    report.chosen_c.push_back(std::move(fold_c));
    report.repeat_means.push_back(mean);
  }

  double mean = 0.0;
  for (double m : report.repeat_means) mean += m;
  mean /= static_cast<double>(report.repeat_means.size());
  report.mean = mean;
  double var = 0.0;
  for (double m : report.repeat_means) var += (m - mean) * (m - mean);
  report.stdev = report.repeat_means.size() > 1
                     ? std::sqrt(var / static_cast<double>(report.repeat_means.size() - 1))
                     : 0.0;
  return report;
}

}  // namespace mlg
