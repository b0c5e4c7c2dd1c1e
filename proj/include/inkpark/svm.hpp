#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "inkpark/matrix.hpp"

namespace inkpark {

class SvmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when SMO hits the iteration bound before the KKT gap closes.
class SvmConvergenceError : public SvmError {
 public:
  using SvmError::SvmError;
};

enum class KernelFamily { Linear, Rbf, Sigmoid };

std::string_view kernel_family_name(KernelFamily f);
KernelFamily parse_kernel_family(std::string_view s);

struct KernelSpec {
  KernelFamily family = KernelFamily::Rbf;
  double gamma = 1.0;  // Rbf width; Sigmoid slope
  double coef0 = 0.0;  // Sigmoid offset

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

void validate_kernel(const KernelSpec& spec);

/// Linear: u.v   Rbf: exp(-gamma |u-v|^2)   Sigmoid: tanh(gamma u.v + coef0)
double kernel_eval(const KernelSpec& spec, std::span<const double> u, std::span<const double> v);

/// Full Gram matrix of the rows of x (symmetric by construction).
Matrix gram_matrix(const KernelSpec& spec, const Matrix& x);

struct SvmOptions {
  // max KKT violation gap; 1e-3 leaves decision values ~3e-3 off the exact optimum
  double tolerance = 1e-5;
  std::size_t max_iterations = 10000;
};

/// Raw dual solution over all training rows.
struct SvmDual {
  std::vector<double> alpha;
  double bias = 0.0;
  std::size_t iterations = 0;
};

/// SMO on a precomputed Gram matrix. `gram` must be square with one row per label.
SvmDual solve_svm_dual(const Matrix& gram, std::span<const int> y, double c,
                       const SvmOptions& options = {});

/// Dual-form model. Only rows with alpha > 0 are kept.
struct SvmModel {
  KernelSpec kernel;
  double c = 1.0;
  Matrix support_vectors;
  std::vector<int> labels;     // +1 / -1
  std::vector<double> alpha;   // 0 <= alpha <= c
  double bias = 0.0;
  std::size_t iterations = 0;

  std::size_t dimension() const { return support_vectors.cols(); }
  friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

/// Solves the soft-margin dual with SMO (second-order working-set choice).
/// Labels must be +1/-1 with both classes present; features must be finite.
SvmModel train_svm(const Matrix& x, std::span<const int> y, double c, const KernelSpec& spec,
                   const SvmOptions& options = {});

/// Same, on a precomputed Gram matrix of the training rows.
SvmModel train_svm_gram(const Matrix& x, const Matrix& gram, std::span<const int> y, double c,
                        const KernelSpec& spec, const SvmOptions& options = {});

struct SvmPrediction {
  int label = 1;
  double decision = 0.0;
};

double decision_value(const SvmModel& model, std::span<const double> row);
/// sign(decision) with sign(0) = +1.
SvmPrediction predict(const SvmModel& model, std::span<const double> row);

std::string format_svm_json(const SvmModel& model);
SvmModel parse_svm_json(std::string_view text);

}  // namespace inkpark
