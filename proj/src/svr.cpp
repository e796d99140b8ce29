#include "laborcast/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "laborcast/errors.hpp"

namespace laborcast {

namespace {

double resolve_gamma(const SvrConfig& cfg, std::size_t n_features) {
  if (cfg.gamma > 0.0) return cfg.gamma;
  return 1.0 / static_cast<double>(n_features);
}

// Exact objective change for moving (beta_i += d, beta_j -= d).
double objective_delta(double d, double f_i, double f_j, double eta, double beta_i,
                       double beta_j, double eps) {
  return d * (f_i - f_j) - 0.5 * d * d * eta -
         eps * (std::abs(beta_i + d) - std::abs(beta_i)) -
         eps * (std::abs(beta_j - d) - std::abs(beta_j));
}

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  if (a.size() != b.size()) throw DataError("rbf kernel: row length mismatch");
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sq += d * d;
  }
  return std::exp(-gamma * sq);
}

double svr_dual_objective(const Matrix& X, const std::vector<double>& y,
                          const std::vector<double>& beta, const SvrConfig& cfg) {
  const double gamma = resolve_gamma(cfg, X.cols());
  const std::size_t n = X.rows();
  double quad = 0.0, linear = 0.0, penalty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      quad += beta[i] * beta[j] * rbf_kernel(X.row(i), X.row(j), gamma);
    linear += y[i] * beta[i];
    penalty += std::abs(beta[i]);
  }
  return -0.5 * quad - cfg.epsilon_tube * penalty + linear;
}

SvrModel fit_svr(const Matrix& X, const std::vector<double>& y, const SvrConfig& cfg,
                 SvrFitTrace* trace) {
  if (X.rows() < 2 || X.rows() != y.size()) throw DataError("SVR needs >= 2 samples");
  const std::size_t n = X.rows();
  const double c = cfg.c_penalty;
  const double eps = cfg.epsilon_tube;
  const double gamma = resolve_gamma(cfg, X.cols());

  // Full kernel cache; trivial at this scale and removes any
  // recomputation nondeterminism.
  Matrix kernel(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      kernel(i, j) = kernel(j, i) = rbf_kernel(X.row(i), X.row(j), gamma);

  std::vector<double> beta(n, 0.0);
  std::vector<double> f(y);  // f_i = y_i - (K beta)_i

  // Directional derivatives of the dual at beta, along +e_i and -e_i.
  auto up_rate = [&](std::size_t i) { return f[i] - eps * (beta[i] >= 0.0 ? 1.0 : -1.0); };
  auto down_rate = [&](std::size_t i) { return -f[i] - eps * (beta[i] <= 0.0 ? 1.0 : -1.0); };

  bool converged = false;
  double objective = 0.0;
  for (int pass = 0; pass < cfg.max_passes && !converged; ++pass) {
    for (std::size_t step = 0; step < n; ++step) {
      // First-order maximal violating pair: best ascent direction that
      // raises one coefficient and lowers another. Track the two best on
      // each side so i and j stay distinct.
      std::size_t up1 = n, up2 = n, down1 = n, down2 = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (beta[i] < c) {
          if (up1 == n || up_rate(i) > up_rate(up1)) {
            up2 = up1;
            up1 = i;
          } else if (up2 == n || up_rate(i) > up_rate(up2)) {
            up2 = i;
          }
        }
        if (beta[i] > -c) {
          if (down1 == n || down_rate(i) > down_rate(down1)) {
            down2 = down1;
            down1 = i;
          } else if (down2 == n || down_rate(i) > down_rate(down2)) {
            down2 = i;
          }
        }
      }
      std::size_t i = up1, j = down1;
      if (i == j) {
        const double alt_up = (up2 < n && down1 < n) ? up_rate(up2) + down_rate(down1)
                                                     : -std::numeric_limits<double>::infinity();
        const double alt_down = (up1 < n && down2 < n) ? up_rate(up1) + down_rate(down2)
                                                       : -std::numeric_limits<double>::infinity();
        if (alt_up >= alt_down) i = up2;
        else j = down2;
      }
      if (i >= n || j >= n) {
        converged = true;
        break;
      }
      const double violation = up_rate(i) + down_rate(j);
      if (violation <= cfg.kkt_tolerance) {
        converged = true;
        break;
      }

      const double hi = std::min(c - beta[i], beta[j] + c);
      const double eta = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);

      // The objective along delta is piecewise quadratic with breakpoints
      // where beta_i + delta or beta_j - delta crosses zero; evaluate the
      // stationary point of each piece plus all breakpoints exactly.
      std::vector<double> candidates{hi};
      if (beta[i] < 0.0 && -beta[i] < hi) candidates.push_back(-beta[i]);
      if (beta[j] > 0.0 && beta[j] < hi) candidates.push_back(beta[j]);
      if (eta > 0.0) {
        for (const double s_i : {-1.0, 1.0})
          for (const double s_j : {-1.0, 1.0}) {
            const double stationary = (f[i] - f[j] - eps * s_i + eps * s_j) / eta;
            if (stationary > 0.0 && stationary < hi) candidates.push_back(stationary);
          }
      }
      double best_delta = 0.0, best_gain = 0.0;
      for (double d : candidates) {
        const double gain = objective_delta(d, f[i], f[j], eta, beta[i], beta[j], eps);
        if (gain > best_gain) {
          best_gain = gain;
          best_delta = d;
        }
      }
      if (best_delta <= 0.0) {
        converged = true;  // numerically stalled at the tolerance edge
        break;
      }

      beta[i] = std::clamp(beta[i] + best_delta, -c, c);
      beta[j] = std::clamp(beta[j] - best_delta, -c, c);
      for (std::size_t k = 0; k < n; ++k)
        f[k] -= best_delta * (kernel(k, i) - kernel(k, j));
      if (trace) {
        objective += best_gain;
        trace->objective.push_back(objective);
      }
    }
  }

  // Bias from the KKT conditions: unbounded support vectors pin it
  // exactly; otherwise take the midpoint of the feasible interval.
  const double bound_tol = 1e-8 * std::max(1.0, c);
  double bias_sum = 0.0;
  std::size_t bias_count = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi_b = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double residual_no_bias = f[i];  // y_i - (K beta)_i
    if (std::abs(beta[i]) > bound_tol && std::abs(beta[i]) < c - bound_tol) {
      bias_sum += residual_no_bias - eps * (beta[i] > 0.0 ? 1.0 : -1.0);
      ++bias_count;
    } else if (std::abs(beta[i]) <= bound_tol) {
      lo = std::max(lo, residual_no_bias - eps);
      hi_b = std::min(hi_b, residual_no_bias + eps);
    } else if (beta[i] > 0.0) {
      hi_b = std::min(hi_b, residual_no_bias - eps);
    } else {
      lo = std::max(lo, residual_no_bias + eps);
    }
  }
  double bias;
  if (bias_count > 0) {
    bias = bias_sum / static_cast<double>(bias_count);
  } else if (std::isfinite(lo) && std::isfinite(hi_b)) {
    bias = 0.5 * (lo + hi_b);
  } else {
    bias = std::isfinite(lo) ? lo : (std::isfinite(hi_b) ? hi_b : 0.0);
  }

  SvrModel model;
  model.gamma = gamma;
  model.bias = bias;
  model.converged = converged;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (beta[i] != 0.0) kept.push_back(i);
  model.support_rows = Matrix(kept.size(), X.cols());
  model.dual_coefficients.resize(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    for (std::size_t col = 0; col < X.cols(); ++col)
      model.support_rows(k, col) = X(kept[k], col);
    model.dual_coefficients[k] = beta[kept[k]];
  }
  if (trace) trace->beta = beta;
  return model;
}

std::vector<double> predict_svr(const SvrModel& m, const Matrix& X) {
  if (m.support_rows.rows() > 0 && X.cols() != m.support_rows.cols())
    throw DataError("SVR model fitted on " + std::to_string(m.support_rows.cols()) +
                    " columns, input has " + std::to_string(X.cols()));
  std::vector<double> out(X.rows(), m.bias);
  for (std::size_t r = 0; r < X.rows(); ++r)
    for (std::size_t s = 0; s < m.support_rows.rows(); ++s)
      out[r] += m.dual_coefficients[s] * rbf_kernel(m.support_rows.row(s), X.row(r), m.gamma);
  return out;
}

}  // namespace laborcast
