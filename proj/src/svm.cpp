#include "inkpark/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace inkpark {

std::string_view kernel_family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::Linear: return "linear";
    case KernelFamily::Rbf: return "rbf";
    case KernelFamily::Sigmoid: return "sigmoid";
  }
  return "?";
}

KernelFamily parse_kernel_family(std::string_view s) {
  if (s == "linear") return KernelFamily::Linear;
  if (s == "rbf") return KernelFamily::Rbf;
  if (s == "sigmoid") return KernelFamily::Sigmoid;
  throw SvmError("unknown kernel family '" + std::string(s) + "'");
}

void validate_kernel(const KernelSpec& spec) {
  if (spec.family != KernelFamily::Linear && !(spec.gamma > 0 && std::isfinite(spec.gamma)))
    throw SvmError("kernel gamma must be > 0");
  if (!std::isfinite(spec.coef0)) throw SvmError("kernel coef0 must be finite");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw SvmError("kernel_eval: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                   std::to_string(v.size()) + ")");
  switch (spec.family) {
    case KernelFamily::Linear: {
      double s = 0;
      for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
      return s;
    }
    case KernelFamily::Rbf: {
      double s = 0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        s += d * d;
      }
      return std::exp(-spec.gamma * s);
    }
    case KernelFamily::Sigmoid: {
      double s = 0;
      for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
      return std::tanh(spec.gamma * s + spec.coef0);
    }
  }
  return 0;
}

Matrix gram_matrix(const KernelSpec& spec, const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) k(i, j) = k(j, i) = kernel_eval(spec, x.row(i), x.row(j));
  return k;
}

namespace {

void check_inputs(const Matrix& x, std::span<const int> y, double c) {
  if (x.rows() != y.size()) throw SvmError("train_svm: row/label count mismatch");
  if (!(c > 0 && std::isfinite(c))) throw SvmError("train_svm: C must be > 0");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw SvmError("train_svm: labels must be +1 or -1");
  }
  if (!pos || !neg) throw SvmError("train_svm: both classes must be present");
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (double v : x.row(r))
      if (!std::isfinite(v)) throw SvmError("train_svm: non-finite feature value");
}

constexpr double kTau = 1e-12;

}  // namespace

SvmModel train_svm(const Matrix& x, std::span<const int> y, double c, const KernelSpec& spec,
                   const SvmOptions& options) {
  validate_kernel(spec);
  check_inputs(x, y, c);
  return train_svm_gram(x, gram_matrix(spec, x), y, c, spec, options);
}

SvmModel train_svm_gram(const Matrix& x, const Matrix& k, std::span<const int> y, double c,
                        const KernelSpec& spec, const SvmOptions& options) {
  validate_kernel(spec);
  check_inputs(x, y, c);
  const SvmDual dual = solve_svm_dual(k, y, c, options);
  SvmModel model;
  model.kernel = spec;
  model.c = c;
  model.bias = dual.bias;
  model.iterations = dual.iterations;
  model.support_vectors = Matrix(0, x.cols());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    if (dual.alpha[t] <= 0) continue;
    model.support_vectors.append_row(x.row(t));
    model.labels.push_back(y[t]);
    model.alpha.push_back(dual.alpha[t]);
  }
  return model;
}

SvmDual solve_svm_dual(const Matrix& k, std::span<const int> y, double c, const SvmOptions& options) {
  const std::size_t n = y.size();
  if (k.rows() != n || k.cols() != n) throw SvmError("train_svm: Gram matrix has wrong shape");
  if (!(c > 0 && std::isfinite(c))) throw SvmError("train_svm: C must be > 0");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw SvmError("train_svm: labels must be +1 or -1");
  }
  if (!pos || !neg) throw SvmError("train_svm: both classes must be present");
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  std::vector<double> yd(y.begin(), y.end());
  auto q = [&](std::size_t i, std::size_t j) { return yd[i] * yd[j] * k(i, j); };
  auto in_up = [&](std::size_t t) { return (yd[t] > 0 && alpha[t] < c) || (yd[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (yd[t] > 0 && alpha[t] > 0) || (yd[t] < 0 && alpha[t] < c); };

  std::size_t iter = 0;
  for (;; ++iter) {
    // Working set: maximal violating i, then j by second-order gain.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t)
      if (in_up(t) && -yd[t] * grad[t] > gmax) gmax = -yd[t] * grad[t], i = t;
    double gmin = std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -yd[t] * grad[t];
      gmin = std::min(gmin, v);
      if (i == n) continue;
      const double b = gmax - v;
      if (b > 0) {
        double a = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (a <= 0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best_obj) best_obj = obj, j = t;
      }
    }
    if (i == n || j == n || gmax - gmin < options.tolerance) break;
    if (iter >= options.max_iterations)
      throw SvmConvergenceError("SMO did not converge within " + std::to_string(options.max_iterations) +
                                " iterations (gap " + std::to_string(gmax - gmin) + ")");

    const double ai = alpha[i], aj = alpha[j];
    if (yd[i] != yd[j]) {
      double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = diff;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) alpha[i] = c, alpha[j] = c - diff;
      } else {
        if (alpha[j] > c) alpha[j] = c, alpha[i] = c + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) alpha[i] = c, alpha[j] = sum - c;
      } else {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) alpha[j] = c, alpha[i] = sum - c;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = sum;
      }
    }
    const double di = alpha[i] - ai, dj = alpha[j] - aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * di + q(j, t) * dj;
  }

  // Clipping arithmetic can leave alpha an ulp inside a bound; such a vector
  // is not free and must not pin the bias.
  const double snap = 1e-12 * c;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= snap) alpha[t] = 0;
    else if (alpha[t] >= c - snap) alpha[t] = c;
  }

  // Bias: mean of y*grad over free vectors, else the middle of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = yd[t] * grad[t];
    if (alpha[t] >= c) {
      if (yd[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (yd[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  return {std::move(alpha), -rho, iter};
}

double decision_value(const SvmModel& model, std::span<const double> row) {
  if (row.size() != model.dimension())
    throw SvmError("predict: row has " + std::to_string(row.size()) + " features, model expects " +
                   std::to_string(model.dimension()));
  double s = model.bias;
  for (std::size_t i = 0; i < model.alpha.size(); ++i)
    s += model.alpha[i] * model.labels[i] * kernel_eval(model.kernel, model.support_vectors.row(i), row);
  return s;
}

SvmPrediction predict(const SvmModel& model, std::span<const double> row) {
  const double d = decision_value(model, row);
  return {d >= 0 ? 1 : -1, d};
}

std::string format_svm_json(const SvmModel& model) {
  nlohmann::json sv = nlohmann::json::array();
  for (std::size_t i = 0; i < model.support_vectors.rows(); ++i) {
    const auto r = model.support_vectors.row(i);
    sv.push_back(std::vector<double>(r.begin(), r.end()));
  }
  nlohmann::json doc{{"kernel",
                      {{"family", std::string(kernel_family_name(model.kernel.family))},
                       {"gamma", model.kernel.gamma},
                       {"coef0", model.kernel.coef0}}},
                     {"c", model.c},
                     {"bias", model.bias},
                     {"dimension", model.dimension()},
                     {"support_vectors", sv},
                     {"labels", model.labels},
                     {"alpha", model.alpha},
                     {"iterations", model.iterations}};
  return doc.dump(2) + "\n";
}

SvmModel parse_svm_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    SvmModel m;
    const auto& k = doc.at("kernel");
    m.kernel.family = parse_kernel_family(k.at("family").get<std::string>());
    m.kernel.gamma = k.at("gamma").get<double>();
    m.kernel.coef0 = k.at("coef0").get<double>();
    m.c = doc.at("c").get<double>();
    m.bias = doc.at("bias").get<double>();
    m.labels = doc.at("labels").get<std::vector<int>>();
    m.alpha = doc.at("alpha").get<std::vector<double>>();
    m.iterations = doc.value("iterations", std::size_t{0});
    const auto dim = doc.at("dimension").get<std::size_t>();
    m.support_vectors = Matrix(0, dim);
    for (const auto& r : doc.at("support_vectors")) {
      const auto row = r.get<std::vector<double>>();
      if (row.size() != dim) throw SvmError("model JSON: support vector width mismatch");
      m.support_vectors.append_row(row);
    }
    if (m.labels.size() != m.alpha.size() || m.alpha.size() != m.support_vectors.rows())
      throw SvmError("model JSON: array lengths differ");
    validate_kernel(m.kernel);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SvmError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace inkpark
