#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffpred/features.hpp"

namespace ffpred {

enum class KernelKind { kLinear, kRbf, kPolynomial, kSigmoid };

inline const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::kLinear: return "linear";
    case KernelKind::kRbf: return "rbf";
    case KernelKind::kPolynomial: return "polynomial";
    case KernelKind::kSigmoid: return "sigmoid";
  }
  return "?";
}

inline KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "rbf") return KernelKind::kRbf;
  if (name == "polynomial" || name == "poly") return KernelKind::kPolynomial;
  if (name == "sigmoid") return KernelKind::kSigmoid;
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

struct KernelSpec {
  KernelKind kind = KernelKind::kLinear;
  double gamma = 0.0;  // 0 means automatic 1/D, resolved at fit time
  int degree = 3;
  double coef0 = 0.0;

  bool operator==(const KernelSpec&) const = default;
};

// gamma = 0 would degenerate rbf/sigmoid/polynomial kernels to constants;
// it is read as "automatic" 1/D the way the usual tools do.
inline KernelSpec resolve_gamma(KernelSpec spec, std::size_t dims) {
  if (spec.kind != KernelKind::kLinear && spec.gamma == 0.0)
    spec.gamma = 1.0 / static_cast<double>(dims);
  return spec;
}

inline double dot(std::span<const double> x, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) s += x[d] * z[d];
  return s;
}

inline double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                          std::span<const double> z) {
  if (x.size() != z.size())
    throw std::invalid_argument("kernel_eval: vectors of different length");
  switch (spec.kind) {
    case KernelKind::kLinear:
      return dot(x, z);
    case KernelKind::kRbf: {
      double sq = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) {
        double diff = x[d] - z[d];
        sq += diff * diff;
      }
      return std::exp(-spec.gamma * sq);
    }
    case KernelKind::kPolynomial:
      return std::pow(spec.gamma * dot(x, z) + spec.coef0, spec.degree);
    case KernelKind::kSigmoid:
      return std::tanh(spec.gamma * dot(x, z) + spec.coef0);
  }
  throw std::logic_error("unreachable kernel kind");
}

// V_eps: zero inside the tube, |r| - eps outside.
inline double epsilon_insensitive_loss(double r, double eps) {
  return std::max(0.0, std::abs(r) - eps);
}

// C is the regularizer from the training objective
//   (C/N) * sum V_eps(y_i - f(x_i)) + ||w||^2
// and lives in (0, 1].
struct SvrHyper {
  double c = 1.0;
  double epsilon = 0.1;

  bool operator==(const SvrHyper&) const = default;
};

inline void validate_hyper(const SvrHyper& h) {
  if (!(h.c > 0.0 && h.c <= 1.0)) throw std::invalid_argument("SVR C must lie in (0,1]");
  if (h.epsilon < 0.0) throw std::invalid_argument("SVR epsilon must be >= 0");
}

struct SvrTrainOptions {
  double tol = 1e-3;
  long max_iter = -1;             // -1 means 100 * N
  std::size_t cache_limit = 4096; // largest N whose kernel matrix is kept in memory
};

struct SvrModel {
  KernelSpec kernel;  // gamma resolved
  SvrHyper hyper;
  std::size_t dims = 0;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> beta;      // alpha_i - alpha_i*, one per support vector
  double bias = 0.0;
  std::vector<double> weights;   // explicit w (linear kernel only)
  double c_eff = 0.0;            // box bound C/(2N) of the solved dual
  bool converged = true;
  long iterations = 0;
};

inline double svr_predict(const SvrModel& model, std::span<const double> x) {
  if (x.size() != model.dims)
    throw std::invalid_argument("svr_predict: expected " + std::to_string(model.dims) +
                                " features, got " + std::to_string(x.size()));
  if (model.kernel.kind == KernelKind::kLinear)
    return dot(model.weights, x) + model.bias;  // identical to the kernel sum
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    f += model.beta[i] * kernel_eval(model.kernel, model.support_vectors[i], x);
  return f;
}

inline std::vector<double> svr_predict_batch(const SvrModel& model,
                                             const std::vector<FeatureCase>& cases) {
  std::vector<double> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(svr_predict(model, c.features));
  return out;
}

// Training objective in the paper's form, for the linear kernel.
inline double svr_primal_objective(const std::vector<std::vector<double>>& x,
                                   const std::vector<double>& y, std::span<const double> w,
                                   double b, const SvrHyper& hyper) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    loss += epsilon_insensitive_loss(y[i] - (dot(x[i], w) + b), hyper.epsilon);
  return hyper.c / static_cast<double>(x.size()) * loss + dot(w, w);
}

inline double svr_primal_objective(const std::vector<FeatureCase>& cases,
                                   std::span<const double> w, double b, const SvrHyper& hyper) {
  double loss = 0.0;
  for (const auto& c : cases)
    loss += epsilon_insensitive_loss(c.label - (dot(c.features, w) + b), hyper.epsilon);
  return hyper.c / static_cast<double>(cases.size()) * loss + dot(w, w);
}

namespace detail {

// Row provider over the training kernel matrix. Full N x N cache when N is
// small enough, per-row recomputation above that.
class KernelTable {
 public:
  KernelTable(const KernelSpec& spec, const std::vector<std::vector<double>>& x,
              std::size_t cache_limit)
      : spec_(spec), x_(x), n_(x.size()) {
    if (n_ <= cache_limit) {
      cache_.assign(n_ * n_, 0.0);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i; j < n_; ++j) {
          double k = kernel_eval(spec_, x_[i], x_[j]);
          cache_[i * n_ + j] = k;
          cache_[j * n_ + i] = k;
        }
    } else {
      scratch_a_.resize(n_);
      scratch_b_.resize(n_);
    }
  }

  // valid until the second-next call with the same parity
  std::span<const double> row(std::size_t i, bool second) {
    if (!cache_.empty()) return {cache_.data() + i * n_, n_};
    auto& scratch = second ? scratch_b_ : scratch_a_;
    for (std::size_t j = 0; j < n_; ++j) scratch[j] = kernel_eval(spec_, x_[i], x_[j]);
    return scratch;
  }

 private:
  KernelSpec spec_;
  const std::vector<std::vector<double>>& x_;
  std::size_t n_;
  std::vector<double> cache_;
  std::vector<double> scratch_a_, scratch_b_;
};

}  // namespace detail

// Solves the dual of the training objective by sequential minimal
// optimization with maximal-violating-pair selection. The paper's objective
//   (C/N) sum V_eps + ||w||^2
// equals, after multiplying by 1/2, the standard form
//   1/2 ||w||^2 + C_eff sum (xi + xi*)   with  C_eff = C/(2N),
// so the usual box-constrained dual applies with bounds [0, C_eff].
inline SvrModel svr_fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                        const SvrHyper& hyper, const KernelSpec& kernel,
                        const SvrTrainOptions& options = {}) {
  if (x.empty()) throw std::invalid_argument("svr_fit: empty training set");
  if (x.size() != y.size()) throw std::invalid_argument("svr_fit: inputs/labels length mismatch");
  validate_hyper(hyper);
  if (options.tol <= 0.0) throw std::invalid_argument("svr_fit: tol must be > 0");
  const std::size_t n = x.size();
  const std::size_t dims = x[0].size();
  for (const auto& row : x)
    if (row.size() != dims) throw std::invalid_argument("svr_fit: ragged feature matrix");

  const KernelSpec spec = resolve_gamma(kernel, dims);
  const double c_eff = hyper.c / (2.0 * static_cast<double>(n));
  const long max_iter = options.max_iter >= 0 ? options.max_iter
                                              : 100 * static_cast<long>(n);

  detail::KernelTable table(spec, x, options.cache_limit);

  // 2n-variable dual: k < n is alpha_k (sign +1), k >= n is alpha*_{k-n}
  // (sign -1). G is the dual gradient.
  std::vector<double> t(2 * n, 0.0);
  std::vector<double> g(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    g[k] = hyper.epsilon - y[k];
    g[n + k] = hyper.epsilon + y[k];
  }
  auto sign_of = [n](std::size_t k) { return k < n ? 1.0 : -1.0; };

  bool converged = false;
  long iter = 0;
  for (; iter < max_iter; ++iter) {
    // maximal violating pair
    std::size_t i = 2 * n, j = 2 * n;
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < 2 * n; ++k) {
      double s = sign_of(k);
      bool in_up = s > 0 ? t[k] < c_eff : t[k] > 0.0;
      bool in_low = s > 0 ? t[k] > 0.0 : t[k] < c_eff;
      double v = -s * g[k];
      if (in_up && v > up_max) {
        up_max = v;
        i = k;
      }
      if (in_low && v < low_min) {
        low_min = v;
        j = k;
      }
    }
    if (i == 2 * n || j == 2 * n || up_max - low_min <= options.tol) {
      converged = true;
      break;
    }

    const double si = sign_of(i), sj = sign_of(j);
    auto row_i = table.row(i % n, false);
    auto row_j = table.row(j % n, true);
    const double kii = row_i[i % n];
    const double kjj = row_j[j % n];
    const double kij = row_i[j % n];
    double quad = kii + kjj - 2.0 * kij;
    if (quad <= 0.0) quad = 1e-12;

    const double old_ti = t[i], old_tj = t[j];
    if (si != sj) {
      double delta = (-g[i] - g[j]) / quad;
      double diff = t[i] - t[j];
      t[i] += delta;
      t[j] += delta;
      if (diff > 0.0) {
        if (t[j] < 0.0) {
          t[j] = 0.0;
          t[i] = diff;
        }
      } else {
        if (t[i] < 0.0) {
          t[i] = 0.0;
          t[j] = -diff;
        }
      }
      if (diff > 0.0) {
        if (t[i] > c_eff) {
          t[i] = c_eff;
          t[j] = c_eff - diff;
        }
      } else {
        if (t[j] > c_eff) {
          t[j] = c_eff;
          t[i] = c_eff + diff;
        }
      }
    } else {
      double delta = (g[i] - g[j]) / quad;
      double sum = t[i] + t[j];
      t[i] -= delta;
      t[j] += delta;
      if (sum > c_eff) {
        if (t[i] > c_eff) {
          t[i] = c_eff;
          t[j] = sum - c_eff;
        }
      } else {
        if (t[j] < 0.0) {
          t[j] = 0.0;
          t[i] = sum;
        }
      }
      if (sum > c_eff) {
        if (t[j] > c_eff) {
          t[j] = c_eff;
          t[i] = sum - c_eff;
        }
      } else {
        if (t[i] < 0.0) {
          t[i] = 0.0;
          t[j] = sum;
        }
      }
    }

    const double ai = si * (t[i] - old_ti);
    const double aj = sj * (t[j] - old_tj);
    for (std::size_t k = 0; k < n; ++k) {
      double delta_u = row_i[k] * ai + row_j[k] * aj;
      g[k] += delta_u;
      g[n + k] -= delta_u;
    }
  }

  SvrModel model;
  model.kernel = spec;
  model.hyper = hyper;
  model.dims = dims;
  model.c_eff = c_eff;
  model.converged = converged;
  model.iterations = iter;

  std::vector<double> beta(n);
  bool all_zero = true;
  for (std::size_t k = 0; k < n; ++k) {
    beta[k] = t[k] - t[n + k];
    if (beta[k] != 0.0) all_zero = false;
  }

  if (all_zero) {
    // bias is not pinned by any support vector; use the midpoint of the
    // feasible interval [max(y)-eps, min(y)+eps], or mean(y) if empty
    double ymin = *std::min_element(y.begin(), y.end());
    double ymax = *std::max_element(y.begin(), y.end());
    if (ymax - hyper.epsilon <= ymin + hyper.epsilon) {
      model.bias = 0.5 * (ymax + ymin);
    } else {
      double mean = 0.0;
      for (double v : y) mean += v;
      model.bias = mean / static_cast<double>(n);
    }
  } else {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t k = 0; k < 2 * n; ++k) {
      double s = sign_of(k);
      double yg = s * g[k];
      if (t[k] >= c_eff) {
        if (s < 0)
          ub = std::min(ub, yg);
        else
          lb = std::max(lb, yg);
      } else if (t[k] <= 0.0) {
        if (s > 0)
          ub = std::min(ub, yg);
        else
          lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    model.bias = -rho;
  }

  for (std::size_t k = 0; k < n; ++k) {
    if (beta[k] == 0.0) continue;
    model.support_vectors.push_back(x[k]);
    model.beta.push_back(beta[k]);
  }
  if (spec.kind == KernelKind::kLinear) {
    model.weights.assign(dims, 0.0);
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
      for (std::size_t d = 0; d < dims; ++d)
        model.weights[d] += model.beta[i] * model.support_vectors[i][d];
  }
  return model;
}

inline SvrModel svr_fit(const std::vector<FeatureCase>& train, const SvrHyper& hyper,
                        const KernelSpec& kernel, const SvrTrainOptions& options = {}) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  x.reserve(train.size());
  y.reserve(train.size());
  for (const auto& c : train) {
    x.push_back(c.features);
    y.push_back(c.label);
  }
  return svr_fit(x, y, hyper, kernel, options);
}

struct SvrReferenceFit {
  std::vector<double> weights;
  double bias = 0.0;
  double objective = 0.0;
};

namespace detail {

// For fixed w the loss sum_i V_eps(r_i - b) is convex piecewise linear in b;
// its minimizing set is an interval with breakpoints among {r_i +- eps}.
// Returns the interval midpoint, matching the solver's tie-break.
inline double best_bias_for_residuals(const std::vector<double>& residuals, double eps) {
  std::vector<double> pts;
  pts.reserve(2 * residuals.size());
  for (double r : residuals) {
    pts.push_back(r - eps);
    pts.push_back(r + eps);
  }
  std::sort(pts.begin(), pts.end());
  auto loss_at = [&](double b) {
    double total = 0.0;
    for (double r : residuals) total += epsilon_insensitive_loss(r - b, eps);
    return total;
  };
  double best = std::numeric_limits<double>::infinity();
  for (double b : pts) best = std::min(best, loss_at(b));
  double scale = std::max(1.0, std::abs(best));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double b : pts) {
    if (loss_at(b) <= best + 1e-12 * scale) {
      lo = std::min(lo, b);
      hi = std::max(hi, b);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Brute-force minimizer of the primal objective for the linear kernel on
// desk-sized problems: multi-resolution grid over w with the bias solved
// exactly per grid point. Test oracle for svr_fit.
inline SvrReferenceFit svr_reference_fit(const std::vector<std::vector<double>>& x,
                                         const std::vector<double>& y, const SvrHyper& hyper,
                                         double grid_resolution = 1e-5) {
  if (x.empty()) throw std::invalid_argument("svr_reference_fit: empty training set");
  if (x.size() > 8)
    throw std::invalid_argument("svr_reference_fit: at most 8 cases supported");
  const std::size_t dims = x[0].size();
  if (dims > 3) throw std::invalid_argument("svr_reference_fit: at most 3 dimensions supported");
  validate_hyper(hyper);
  if (grid_resolution <= 0.0)
    throw std::invalid_argument("svr_reference_fit: grid_resolution must be > 0");

  const double c_over_n = hyper.c / static_cast<double>(x.size());
  auto objective_at = [&](const std::vector<double>& w, double& bias_out) {
    std::vector<double> residuals(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) residuals[i] = y[i] - dot(x[i], w);
    bias_out = detail::best_bias_for_residuals(residuals, hyper.epsilon);
    double loss = 0.0;
    for (double r : residuals) loss += epsilon_insensitive_loss(r - bias_out, hyper.epsilon);
    return c_over_n * loss + dot(w, w);
  };

  // ||w*||^2 cannot exceed the objective at w = 0
  std::vector<double> w0(dims, 0.0);
  double b0 = 0.0;
  double upper = objective_at(w0, b0);
  double width = std::sqrt(upper) + 1.0;

  const int points = 17;
  std::vector<double> center(dims, 0.0);
  std::vector<double> best_w(dims, 0.0);
  double best_bias = b0;
  double best_obj = upper;

  int guard = 0;
  while (guard++ < 200) {
    double cell = 2.0 * width / (points - 1);
    std::vector<int> idx(dims, 0);
    std::vector<double> w(dims);
    std::vector<int> best_idx(dims, (points - 1) / 2);
    bool improved_on_edge = false;
    while (true) {
      for (std::size_t d = 0; d < dims; ++d) w[d] = center[d] - width + idx[d] * cell;
      double bias = 0.0;
      double obj = objective_at(w, bias);
      if (obj < best_obj) {
        best_obj = obj;
        best_w = w;
        best_bias = bias;
        best_idx = idx;
      }
      std::size_t d = 0;
      for (; d < dims; ++d) {
        if (++idx[d] < points) break;
        idx[d] = 0;
      }
      if (d == dims) break;
    }
    for (std::size_t d = 0; d < dims; ++d)
      if (best_idx[d] == 0 || best_idx[d] == points - 1) improved_on_edge = true;

    center = best_w;
    if (improved_on_edge) continue;  // re-center at same scale
    if (cell <= grid_resolution) break;
    width = 2.0 * cell;  // refine around the best cell
  }

  SvrReferenceFit fit;
  fit.weights = best_w;
  fit.bias = best_bias;
  fit.objective = best_obj;
  return fit;
}

inline SvrReferenceFit svr_reference_fit(const std::vector<FeatureCase>& train,
                                         const SvrHyper& hyper, double grid_resolution = 1e-5) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (const auto& c : train) {
    x.push_back(c.features);
    y.push_back(c.label);
  }
  return svr_reference_fit(x, y, hyper, grid_resolution);
}

inline nlohmann::json kernel_spec_to_json(const KernelSpec& k) {
  return {{"kind", kernel_kind_name(k.kind)},
          {"gamma", k.gamma},
          {"degree", k.degree},
          {"coef0", k.coef0}};
}

inline KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
  KernelSpec k;
  k.kind = parse_kernel_kind(j.at("kind").get<std::string>());
  k.gamma = j.value("gamma", 0.0);
  k.degree = j.value("degree", 3);
  k.coef0 = j.value("coef0", 0.0);
  return k;
}

inline nlohmann::json svr_model_to_json(const SvrModel& m) {
  nlohmann::json j;
  j["kernel"] = kernel_spec_to_json(m.kernel);
  j["c"] = m.hyper.c;
  j["epsilon"] = m.hyper.epsilon;
  j["dims"] = m.dims;
  j["support_vectors"] = m.support_vectors;
  j["beta"] = m.beta;
  j["bias"] = m.bias;
  if (!m.weights.empty()) j["weights"] = m.weights;
  j["c_eff"] = m.c_eff;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  return j;
}

inline SvrModel svr_model_from_json(const nlohmann::json& j) {
  SvrModel m;
  m.kernel = kernel_spec_from_json(j.at("kernel"));
  m.hyper.c = j.at("c").get<double>();
  m.hyper.epsilon = j.at("epsilon").get<double>();
  m.dims = j.at("dims").get<std::size_t>();
  m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
  m.beta = j.at("beta").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  if (j.contains("weights")) m.weights = j.at("weights").get<std::vector<double>>();
  m.c_eff = j.value("c_eff", 0.0);
  m.converged = j.value("converged", true);
  m.iterations = j.value("iterations", 0L);
  return m;
}

}  // namespace ffpred
