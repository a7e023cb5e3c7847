#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "chronolens/common.hpp"
#include "chronolens/dates.hpp"
#include "chronolens/features.hpp"

namespace chronolens {

struct TrainConfig {
  double c_svm = 0.1;
  double c_svr = 100.0;
  double epsilon = 0.1;
  int max_epochs = 1000;
  double tolerance = 1e-6;
  std::uint64_t rng_seed = 0;
};

// One-vs-rest linear SVM: one weight vector and bias per temporal class.
struct LinearSvmModel {
  std::size_t n_classes = 0;
  std::size_t dim = 0;
  std::vector<double> weights;  // n_classes * dim, row per class
  std::vector<double> biases;   // n_classes
  TemporalBinning binning;

  std::span<const double> class_weights(std::size_t k) const {
    return {weights.data() + k * dim, dim};
  }
};

// Epsilon-insensitive linear SVR predicting calendar years directly.
struct LinearSvrModel {
  std::size_t dim = 0;
  std::vector<double> weight;
  double bias = 0.0;
};

// Per-epoch objective values. The dual is nondecreasing by construction;
// primal minus dual bounds the distance to the optimum.
struct EpochStats {
  double primal = 0.0;
  double dual = 0.0;
};

namespace detail {

inline double row_dot(const FeatureMatrix& X, std::size_t i, std::size_t j) {
  const float* a = X.values.data() + i * X.dim;
  const float* b = X.values.data() + j * X.dim;
  double acc = 0.0;
  for (std::size_t k = 0; k < X.dim; ++k) {
    acc += static_cast<double>(a[k]) * static_cast<double>(b[k]);
  }
  return acc;
}

inline double dot_w_row(const std::vector<double>& w, const FeatureMatrix& X,
                        std::size_t i) {
  const float* x = X.values.data() + i * X.dim;
  double acc = 0.0;
  for (std::size_t k = 0; k < X.dim; ++k) acc += w[k] * x[k];
  return acc;
}

inline void axpy_row(double t, const FeatureMatrix& X, std::size_t i,
                     std::vector<double>& w) {
  const float* x = X.values.data() + i * X.dim;
  for (std::size_t k = 0; k < X.dim; ++k) w[k] += t * x[k];
}

// Dense Gram cache for the dual solvers; falls back to margin recomputation
// from w when the matrix would be too large.
class GramCache {
 public:
  explicit GramCache(const FeatureMatrix& X, std::size_t limit = 4096)
      : X_(X), cached_(X.n <= limit && X.n > 0) {
    if (cached_) {
      table_.resize(X.n * X.n);
      parallel_chunks(X.n, [&](std::size_t i) {
        for (std::size_t j = 0; j <= i; ++j) {
          const double v = row_dot(X, i, j);
          table_[i * X.n + j] = v;
          table_[j * X.n + i] = v;
        }
      });
    }
  }

  bool cached() const { return cached_; }
  double dot(std::size_t i, std::size_t j) const {
    return cached_ ? table_[i * X_.n + j] : row_dot(X_, i, j);
  }
  const double* row(std::size_t i) const {
    return cached_ ? table_.data() + i * X_.n : nullptr;
  }

 private:
  const FeatureMatrix& X_;
  bool cached_;
  std::vector<double> table_;
};

// Exact minimizer over b of sum_i max(0, 1 - s_i*(m_i + b)). The loss is
// piecewise linear in b; the optimum is the interval between the n_pos-th
// and (n_pos+1)-th smallest breakpoints s_i - m_i.
inline double optimal_hinge_bias(const std::vector<double>& margins,
                                 const std::vector<signed char>& s) {
  const std::size_t n = margins.size();
  if (n == 0) return 0.0;
  std::vector<double> bp(n);
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bp[i] = static_cast<double>(s[i]) - margins[i];
    if (s[i] > 0) ++n_pos;
  }
  std::sort(bp.begin(), bp.end());
  if (n_pos == 0) return bp.front();
  if (n_pos == n) return bp.back();
  return 0.5 * (bp[n_pos - 1] + bp[n_pos]);
}

inline double hinge_loss(const std::vector<double>& margins,
                         const std::vector<signed char>& s, double b) {
  double loss = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    loss += std::max(0.0, 1.0 - static_cast<double>(s[i]) * (margins[i] + b));
  }
  return loss;
}

// Exact minimizer over b of sum_i max(0, |r_i + b| - eps), r_i = m_i - y_i.
inline double optimal_tube_bias(const std::vector<double>& residuals,
                                double eps) {
  const std::size_t n = residuals.size();
  if (n == 0) return 0.0;
  std::vector<double> events;
  events.reserve(2 * n);
  for (double r : residuals) {
    events.push_back(-r - eps);
    events.push_back(-r + eps);
  }
  std::sort(events.begin(), events.end());
  return 0.5 * (events[n - 1] + events[n]);
}

inline double tube_loss(const std::vector<double>& residuals, double b,
                        double eps) {
  double loss = 0.0;
  for (double r : residuals) {
    loss += std::max(0.0, std::abs(r + b) - eps);
  }
  return loss;
}

inline double squared_norm(const std::vector<double>& w) {
  double acc = 0.0;
  for (double v : w) acc += v * v;
  return acc;
}

struct BinarySvmResult {
  std::vector<double> w;
  double b = 0.0;
  std::vector<EpochStats> history;
};

// Dual maximal-violating-pair coordinate descent for the binary hinge SVM
//   min_{w,b} 1/2 |w|^2 + C sum_i max(0, 1 - s_i (w.x_i + b))
// with the bias kept unregularized (dual constraint sum alpha_i s_i = 0).
// An epoch is n pair updates; after each epoch the primal (with the exact
// optimal bias for the current w) and dual objectives are recorded, and the
// solve stops when the relative duality gap drops below `tol`, both
// objectives stall, or `max_epochs` epochs have run.
inline BinarySvmResult solve_binary_svm(const FeatureMatrix& X,
                                        const std::vector<signed char>& s,
                                        double C, double tol, int max_epochs,
                                        const GramCache& gram) {
  const std::size_t n = X.n;
  BinarySvmResult out;
  out.w.assign(X.dim, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> m(n, 0.0);  // m_i = w . x_i
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = gram.dot(i, i);

  constexpr double kKktStop = 1e-10;
  double prev_primal = std::numeric_limits<double>::infinity();
  double prev_dual = -std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    bool converged = false;
    for (std::size_t step = 0; step < n; ++step) {
      // v_i = s_i - m_i; the KKT multiplier b must satisfy
      // max over I_up of v <= b <= min over I_low of v at the optimum.
      double best_up = -std::numeric_limits<double>::infinity();
      double best_low = std::numeric_limits<double>::infinity();
      std::size_t up_idx = n, low_idx = n;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = static_cast<double>(s[i]) - m[i];
        const bool in_up = s[i] > 0 ? alpha[i] < C : alpha[i] > 0.0;
        const bool in_low = s[i] > 0 ? alpha[i] > 0.0 : alpha[i] < C;
        if (in_up && v > best_up) {
          best_up = v;
          up_idx = i;
        }
        if (in_low && v < best_low) {
          best_low = v;
          low_idx = i;
        }
      }
      if (up_idx == n || low_idx == n || best_up - best_low <= kKktStop) {
        converged = true;
        break;
      }
      const std::size_t i = up_idx, j = low_idx;
      const double eta = diag[i] + diag[j] - 2.0 * gram.dot(i, j);
      const double room_i = s[i] > 0 ? C - alpha[i] : alpha[i];
      const double room_j = s[j] > 0 ? alpha[j] : C - alpha[j];
      double t = std::min(room_i, room_j);
      if (eta > 0.0) t = std::min(t, (best_up - best_low) / eta);
      if (t <= 0.0) {
        converged = true;
        break;
      }
      alpha[i] += static_cast<double>(s[i]) * t;
      alpha[j] -= static_cast<double>(s[j]) * t;
      axpy_row(t, X, i, out.w);
      axpy_row(-t, X, j, out.w);
      if (const double* gi = gram.row(i)) {
        const double* gj = gram.row(j);
        for (std::size_t k = 0; k < n; ++k) m[k] += t * (gi[k] - gj[k]);
      } else {
        for (std::size_t k = 0; k < n; ++k) m[k] = dot_w_row(out.w, X, k);
      }
    }

    // Refresh margins from w to cancel incremental drift, then score.
    for (std::size_t k = 0; k < n; ++k) m[k] = dot_w_row(out.w, X, k);
    const double b = optimal_hinge_bias(m, s);
    const double wsq = squared_norm(out.w);
    const double primal = 0.5 * wsq + C * hinge_loss(m, s, b);
    double alpha_sum = 0.0;
    for (double a : alpha) alpha_sum += a;
    const double dual = alpha_sum - 0.5 * wsq;
    out.history.push_back({primal, dual});
    out.b = b;

    const double scale = std::max(1.0, std::abs(primal));
    if (converged || primal - dual <= tol * scale) break;
    if (std::abs(prev_primal - primal) <= tol * scale &&
        std::abs(prev_dual - dual) <= tol * scale) {
      break;
    }
    prev_primal = primal;
    prev_dual = dual;
  }
  if (out.history.empty()) {
    const double b = optimal_hinge_bias(m, s);
    out.b = b;
    out.history.push_back({C * hinge_loss(m, s, b), 0.0});
  }
  return out;
}

struct SvrResult {
  std::vector<double> w;
  double b = 0.0;
  std::vector<EpochStats> history;
};

// Dual pairwise coordinate descent for epsilon-insensitive linear SVR
//   min_{w,b} 1/2 |w|^2 + C sum_i max(0, |w.x_i + b - y_i| - eps)
// over theta_i = alpha_i - alpha_i* in [-C, C] with sum theta = 0:
//   min 1/2 theta^T K theta - y^T theta + eps |theta|_1.
inline SvrResult solve_svr(const FeatureMatrix& X,
                           const std::vector<double>& y, double C, double eps,
                           double tol, int max_epochs, const GramCache& gram) {
  const std::size_t n = X.n;
  SvrResult out;
  out.w.assign(X.dim, 0.0);
  std::vector<double> theta(n, 0.0);
  std::vector<double> m(n, 0.0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = gram.dot(i, i);

  constexpr double kKktStop = 1e-10;
  const double inf = std::numeric_limits<double>::infinity();
  double prev_primal = inf;
  double prev_dual = -inf;

  // Derivative of the dual objective when moving theta_i up (U) or down (D);
  // a violating pair has U_i + D_j < 0.
  const auto up_deriv = [&](std::size_t i) {
    const double r = m[i] - y[i];
    return r + (theta[i] >= 0.0 ? eps : -eps);
  };
  const auto down_deriv = [&](std::size_t i) {
    const double r = m[i] - y[i];
    return -r + (theta[i] <= 0.0 ? eps : -eps);
  };

  for (int epoch = 0; epoch < max_epochs && n >= 2; ++epoch) {
    bool converged = false;
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t u1 = n, u2 = n, d1 = n, d2 = n;
      double ubest = inf, usecond = inf, dbest = inf, dsecond = inf;
      for (std::size_t i = 0; i < n; ++i) {
        if (theta[i] < C) {
          const double u = up_deriv(i);
          if (u < ubest) {
            usecond = ubest;
            u2 = u1;
            ubest = u;
            u1 = i;
          } else if (u < usecond) {
            usecond = u;
            u2 = i;
          }
        }
        if (theta[i] > -C) {
          const double d = down_deriv(i);
          if (d < dbest) {
            dsecond = dbest;
            d2 = d1;
            dbest = d;
            d1 = i;
          } else if (d < dsecond) {
            dsecond = d;
            d2 = i;
          }
        }
      }
      std::size_t i = u1, j = d1;
      double viol = (u1 < n && d1 < n) ? ubest + dbest : inf;
      if (u1 == d1 && u1 < n) {
        // Same index cannot move both ways; try the second-best partners.
        const double via_d2 = d2 < n ? ubest + dsecond : inf;
        const double via_u2 = u2 < n ? usecond + dbest : inf;
        if (via_d2 <= via_u2) {
          j = d2;
          viol = via_d2;
        } else {
          i = u2;
          viol = via_u2;
        }
      }
      if (i >= n || j >= n || viol >= -kKktStop) {
        converged = true;
        break;
      }

      // Exact line search along theta_i += t, theta_j -= t, t in [0, t_max].
      // The objective is convex piecewise quadratic with kinks where theta_i
      // or theta_j crosses zero.
      const double eta = diag[i] + diag[j] - 2.0 * gram.dot(i, j);
      const double dr = (m[i] - y[i]) - (m[j] - y[j]);
      const double t_max = std::min(C - theta[i], theta[j] + C);
      std::vector<double> knots{0.0};
      if (theta[i] < 0.0 && -theta[i] < t_max) knots.push_back(-theta[i]);
      if (theta[j] > 0.0 && theta[j] < t_max) knots.push_back(theta[j]);
      knots.push_back(t_max);
      std::sort(knots.begin(), knots.end());
      double t = t_max;
      for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
        const double a = knots[seg], bseg = knots[seg + 1];
        if (bseg <= a) continue;
        const double mid = 0.5 * (a + bseg);
        const double sgn_i = theta[i] + mid >= 0.0 ? 1.0 : -1.0;
        const double sgn_j = theta[j] - mid >= 0.0 ? 1.0 : -1.0;
        const double base = dr + eps * sgn_i - eps * sgn_j;
        const double slope_a = eta * a + base;
        if (slope_a >= 0.0) {
          t = a;
          break;
        }
        if (eta > 0.0) {
          const double root = -base / eta;
          if (root <= bseg) {
            t = root;
            break;
          }
        }
      }
      if (t <= 0.0) {
        converged = true;
        break;
      }
      theta[i] += t;
      theta[j] -= t;
      axpy_row(t, X, i, out.w);
      axpy_row(-t, X, j, out.w);
      if (const double* gi = gram.row(i)) {
        const double* gj = gram.row(j);
        for (std::size_t k = 0; k < n; ++k) m[k] += t * (gi[k] - gj[k]);
      } else {
        for (std::size_t k = 0; k < n; ++k) m[k] = dot_w_row(out.w, X, k);
      }
    }

    for (std::size_t k = 0; k < n; ++k) m[k] = dot_w_row(out.w, X, k);
    std::vector<double> residuals(n);
    for (std::size_t k = 0; k < n; ++k) residuals[k] = m[k] - y[k];
    const double b = optimal_tube_bias(residuals, eps);
    const double wsq = squared_norm(out.w);
    const double primal = 0.5 * wsq + C * tube_loss(residuals, b, eps);
    double lin = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      lin += y[k] * theta[k] - eps * std::abs(theta[k]);
    }
    const double dual = lin - 0.5 * wsq;
    out.history.push_back({primal, dual});
    out.b = b;

    const double scale = std::max(1.0, std::abs(primal));
    if (converged || primal - dual <= tol * scale) break;
    if (std::abs(prev_primal - primal) <= tol * scale &&
        std::abs(prev_dual - dual) <= tol * scale) {
      break;
    }
    prev_primal = primal;
    prev_dual = dual;
  }

  if (out.history.empty()) {
    std::vector<double> residuals(n);
    for (std::size_t k = 0; k < n; ++k) residuals[k] = m[k] - y[k];
    out.b = optimal_tube_bias(residuals, eps);
    out.history.push_back({C * tube_loss(residuals, out.b, eps), 0.0});
  }
  return out;
}

inline void check_finite_features(const FeatureMatrix& X) {
  for (std::size_t i = 0; i < X.values.size(); ++i) {
    if (!std::isfinite(X.values[i])) {
      throw NonFinite("feature value at flat index " + std::to_string(i));
    }
  }
}

}  // namespace detail

// Primal objectives, exposed for convergence checks and diagnostics.
inline double svm_primal_objective(const FeatureMatrix& X,
                                   const std::vector<signed char>& s,
                                   std::span<const double> w, double b,
                                   double C) {
  double wsq = 0.0;
  for (double v : w) wsq += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < X.n; ++i) {
    const float* x = X.values.data() + i * X.dim;
    double margin = b;
    for (std::size_t k = 0; k < X.dim; ++k) margin += w[k] * x[k];
    loss += std::max(0.0, 1.0 - static_cast<double>(s[i]) * margin);
  }
  return 0.5 * wsq + C * loss;
}

inline double svr_primal_objective(const FeatureMatrix& X,
                                   const std::vector<double>& y,
                                   std::span<const double> w, double b,
                                   double C, double eps) {
  double wsq = 0.0;
  for (double v : w) wsq += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < X.n; ++i) {
    const float* x = X.values.data() + i * X.dim;
    double pred = b;
    for (std::size_t k = 0; k < X.dim; ++k) pred += w[k] * x[k];
    loss += std::max(0.0, std::abs(pred - y[i]) - eps);
  }
  return 0.5 * wsq + C * loss;
}

// Trains one one-vs-rest binary SVM per bin. Classes train independently and
// in parallel; results are written to fixed slots so the model is identical
// regardless of worker count.
inline LinearSvmModel train_svm(const FeatureMatrix& X,
                                const std::vector<BinIndex>& y,
                                const TrainConfig& cfg,
                                const TemporalBinning& binning,
                                std::vector<std::vector<EpochStats>>* history =
                                    nullptr) {
  if (X.n == 0 || y.size() != X.n) {
    throw LengthMismatch("labels " + std::to_string(y.size()) +
                         " vs samples " + std::to_string(X.n));
  }
  detail::check_finite_features(X);
  const int n_classes = binning.n_bins;
  bool multi = false;
  for (const BinIndex& label : y) {
    check_bin(label, binning);
    if (label != y.front()) multi = true;
  }
  if (!multi) {
    throw SingleClass("all " + std::to_string(X.n) +
                      " samples share bin " + std::to_string(y.front().value));
  }

  LinearSvmModel model;
  model.n_classes = static_cast<std::size_t>(n_classes);
  model.dim = X.dim;
  model.weights.assign(model.n_classes * X.dim, 0.0);
  model.biases.assign(model.n_classes, 0.0);
  model.binning = binning;
  if (history) history->assign(model.n_classes, {});

  const detail::GramCache gram(X);
  parallel_chunks(model.n_classes, [&](std::size_t k) {
    std::vector<signed char> s(X.n);
    for (std::size_t i = 0; i < X.n; ++i) {
      s[i] = y[i].value == static_cast<int>(k) ? 1 : -1;
    }
    auto result = detail::solve_binary_svm(X, s, cfg.c_svm, cfg.tolerance,
                                           cfg.max_epochs, gram);
    std::copy(result.w.begin(), result.w.end(),
              model.weights.begin() + k * X.dim);
    model.biases[k] = result.b;
    if (history) (*history)[k] = std::move(result.history);
  });
  return model;
}

inline LinearSvrModel train_svr(const FeatureMatrix& X,
                                const std::vector<double>& y_years,
                                const TrainConfig& cfg,
                                std::vector<EpochStats>* history = nullptr) {
  if (X.n == 0 || y_years.size() != X.n) {
    throw LengthMismatch("labels " + std::to_string(y_years.size()) +
                         " vs samples " + std::to_string(X.n));
  }
  detail::check_finite_features(X);
  for (double v : y_years) {
    if (!std::isfinite(v)) throw NonFinite("non-finite regression label");
  }
  const detail::GramCache gram(X);
  auto result = detail::solve_svr(X, y_years, cfg.c_svr, cfg.epsilon,
                                  cfg.tolerance, cfg.max_epochs, gram);
  LinearSvrModel model;
  model.dim = X.dim;
  model.weight = std::move(result.w);
  model.bias = result.b;
  if (history) *history = std::move(result.history);
  return model;
}

// Argmax of the per-class decision values; ties go to the lowest class.
inline BinIndex predict_class(const LinearSvmModel& model,
                              std::span<const float> x) {
  if (x.size() != model.dim) {
    throw DimMismatch("feature dim " + std::to_string(x.size()) +
                      ", model dim " + std::to_string(model.dim));
  }
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < model.n_classes; ++k) {
    const auto w = model.class_weights(k);
    double score = model.biases[k];
    for (std::size_t d = 0; d < model.dim; ++d) score += w[d] * x[d];
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(k);
    }
  }
  return BinIndex{best};
}

inline double predict_year(const LinearSvrModel& model,
                           std::span<const float> x) {
  if (x.size() != model.dim) {
    throw DimMismatch("feature dim " + std::to_string(x.size()) +
                      ", model dim " + std::to_string(model.dim));
  }
  double pred = model.bias;
  for (std::size_t d = 0; d < model.dim; ++d) pred += model.weight[d] * x[d];
  return pred;
}

inline double evaluate_mae(const std::vector<double>& predicted_years,
                           const std::vector<double>& true_years) {
  if (predicted_years.size() != true_years.size()) {
    throw LengthMismatch(std::to_string(predicted_years.size()) + " vs " +
                         std::to_string(true_years.size()));
  }
  if (predicted_years.empty()) throw Empty("no predictions to average");
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted_years.size(); ++i) {
    acc += std::abs(predicted_years[i] - true_years[i]);
  }
  return acc / static_cast<double>(predicted_years.size());
}

}  // namespace chronolens
