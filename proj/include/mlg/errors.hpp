#pragma once

#include <stdexcept>
#include <string>

namespace mlg {

// Invalid argument to a library entry point (dimension mismatch, bad index,
// malformed parameter). Thrown before any partial work is done.
class invalid_input : public std::invalid_argument {
 public:
  explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

// A matrix required to be symmetric positive definite failed its Cholesky
// factorization even after one jitter retry. Carries the failing pivot.
class singular_matrix_error : public std::runtime_error {
 public:
  singular_matrix_error(const std::string& what, int pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

// A user-supplied base kernel produced a Gram matrix that is not positive
// semi-definite within tolerance.
class base_kernel_violation : public std::runtime_error {
 public:
  explicit base_kernel_violation(const std::string& what) : std::runtime_error(what) {}
};

// The configured cap on per-level kernel evaluations was hit. Carries the
// level at which the budget ran out.
class budget_exceeded : public std::runtime_error {
 public:
  budget_exceeded(const std::string& what, int level)
      : std::runtime_error(what), level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

// Dataset file problems: missing file, malformed token, inconsistent counts.
// Messages include file name and 1-based line number where applicable.
class dataset_error : public std::runtime_error {
 public:
  explicit dataset_error(const std::string& what) : std::runtime_error(what) {}
};

// SMO failed to reach the KKT tolerance within the iteration cap.
class svm_convergence_error : public std::runtime_error {
 public:
  svm_convergence_error(const std::string& what, double gap)
      : std::runtime_error(what), gap_(gap) {}
  double kkt_gap() const { return gap_; }

 private:
  double gap_;
};

// Cross-validation cannot be stratified (a class would vanish from some
// training fold).
class stratification_error : public std::runtime_error {
 public:
  explicit stratification_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mlg
