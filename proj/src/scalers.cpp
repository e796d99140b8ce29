#include "laborcast/scalers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "laborcast/errors.hpp"

namespace laborcast {

namespace {

constexpr double kDegenerateEps = 0.0;  // exact-zero scale counts as degenerate

double column_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Population stddev.
double column_stddev(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Linear-interpolation quantile of a sorted vector at plotting position
// (n-1) * q.
double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi) return sorted[lo];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Empirical CDF over the sorted reference with rank/(n-1) plotting
// positions; tied runs map to their average rank, values outside the
// reference range clamp to 0 and 1.
double quantile_cdf(const std::vector<double>& ref, double x) {
  const double denom = static_cast<double>(ref.size() - 1);
  if (x < ref.front()) return 0.0;
  if (x > ref.back()) return 1.0;
  auto lo_it = std::lower_bound(ref.begin(), ref.end(), x);
  auto hi_it = std::upper_bound(ref.begin(), ref.end(), x);
  if (lo_it != hi_it) {
    // x equals a reference value (possibly a tied run): average rank.
    const double first = static_cast<double>(lo_it - ref.begin());
    const double last = static_cast<double>(hi_it - ref.begin()) - 1.0;
    return 0.5 * (first + last) / denom;
  }
  const auto i = static_cast<std::size_t>(lo_it - ref.begin()) - 1;
  const double u_lo = static_cast<double>(i) / denom;
  const double u_hi = static_cast<double>(i + 1) / denom;
  return u_lo + (x - ref[i]) / (ref[i + 1] - ref[i]) * (u_hi - u_lo);
}

}  // namespace

const char* scaler_name(ScalerKind kind) {
  switch (kind) {
    case ScalerKind::ZScore: return "ZScore";
    case ScalerKind::RobustMedianIqr: return "Robust";
    case ScalerKind::QuantileUniform: return "Quantile";
    case ScalerKind::PowerYeoJohnson: return "Power";
    case ScalerKind::MinMaxUnit: return "MinMax";
    case ScalerKind::MaxAbsUnit: return "MaxAbs";
  }
  return "?";
}

double yeo_johnson(double x, double lambda) {
  if (x >= 0.0) {
    if (std::abs(lambda) < 1e-12) return std::log1p(x);
    return std::expm1(lambda * std::log1p(x)) / lambda;
  }
  const double two_minus = 2.0 - lambda;
  if (std::abs(two_minus) < 1e-12) return -std::log1p(-x);
  return -std::expm1(two_minus * std::log1p(-x)) / two_minus;
}

double yeo_johnson_inverse(double y, double lambda) {
  if (y >= 0.0) {
    if (std::abs(lambda) < 1e-12) return std::expm1(y);
    return std::expm1(std::log1p(lambda * y) / lambda);
  }
  const double two_minus = 2.0 - lambda;
  if (std::abs(two_minus) < 1e-12) return -std::expm1(-y);
  return -std::expm1(std::log1p(-two_minus * y) / two_minus);
}

double yeo_johnson_log_likelihood(const std::vector<double>& column, double lambda) {
  const auto n = static_cast<double>(column.size());
  std::vector<double> transformed(column.size());
  double sum = 0.0, jacobian = 0.0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    transformed[i] = yeo_johnson(column[i], lambda);
    sum += transformed[i];
    const double sign = column[i] >= 0.0 ? 1.0 : -1.0;
    jacobian += sign * std::log1p(std::abs(column[i]));
  }
  const double mean = sum / n;
  // Two-pass variance: the one-pass form cancels catastrophically when the
  // transform blows values up to ~1e16 on wide columns.
  double variance = 0.0;
  for (double t : transformed) variance += (t - mean) * (t - mean);
  variance /= n;
  // Lambdas that compress the column's relative spread toward the
  // double-precision noise floor are inadmissible: the likelihood there
  // measures rounding artifacts and the standardized transform loses the
  // 1e-9 round-trip guarantee. 1e-6 keeps a ~100x margin over ulp noise.
  const double floor = 1e-6 * (1.0 + std::abs(mean));
  if (!(variance > floor * floor)) return -1e300;
  return -0.5 * n * std::log(variance) + (lambda - 1.0) * jacobian;
}

double fit_lambda(const std::vector<double>& column) {
  if (column.size() < 2) throw DataError("lambda fit needs at least 2 values");
  const double first = column.front();
  if (std::all_of(column.begin(), column.end(), [&](double v) { return v == first; }))
    return 1.0;

  auto ll = [&](double lam) { return yeo_johnson_log_likelihood(column, lam); };

  // Scan at the reference 0.01 grid first, so the refined result dominates
  // every grid point by construction; golden section then sharpens the
  // best bracket to 1e-6.
  double best = -5.0, best_ll = ll(-5.0);
  for (int k = 1; k <= 1000; ++k) {
    const double lam = -5.0 + 0.01 * static_cast<double>(k);
    const double v = ll(lam);
    if (v > best_ll) {
      best_ll = v;
      best = lam;
    }
  }
  double a = std::max(-5.0, best - 0.01);
  double b = std::min(5.0, best + 0.01);

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = ll(x1), f2 = ll(x2);
  while (b - a > 1e-6) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = ll(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = ll(x1);
    }
  }
  const double mid = 0.5 * (a + b);
  // Return the best point actually evaluated.
  double result = mid, result_ll = ll(mid);
  for (auto [x, v] : {std::pair{x1, f1}, {x2, f2}, {best, best_ll}})
    if (v > result_ll) {
      result = x;
      result_ll = v;
    }
  // Column below measurement resolution at every lambda: fall back to the
  // identity-like convention.
  if (result_ll <= -1e300) return 1.0;
  return result;
}

FittedScaler fit_scaler(ScalerKind kind, const Matrix& train) {
  if (train.rows() < 2) throw DataError("scaler fit needs at least 2 rows");
  FittedScaler s;
  s.kind = kind;
  const std::size_t n_cols = train.cols();
  s.shift.assign(n_cols, 0.0);
  s.scale.assign(n_cols, 1.0);

  for (std::size_t c = 0; c < n_cols; ++c) {
    std::vector<double> col = train.column(c);
    switch (kind) {
      case ScalerKind::ZScore: {
        const double mean = column_mean(col);
        const double sd = column_stddev(col, mean);
        s.shift[c] = mean;
        s.scale[c] = sd > kDegenerateEps ? sd : 1.0;
        break;
      }
      case ScalerKind::RobustMedianIqr: {
        std::sort(col.begin(), col.end());
        const double median = interpolated_quantile(col, 0.5);
        const double iqr = interpolated_quantile(col, 0.75) - interpolated_quantile(col, 0.25);
        s.shift[c] = median;
        s.scale[c] = iqr > kDegenerateEps ? iqr : 1.0;
        break;
      }
      case ScalerKind::QuantileUniform: {
        std::sort(col.begin(), col.end());
        s.reference.push_back(std::move(col));
        break;
      }
      case ScalerKind::PowerYeoJohnson: {
        const double first = col.front();
        const bool constant =
            std::all_of(col.begin(), col.end(), [&](double v) { return v == first; });
        const double lam = constant ? 1.0 : fit_lambda(col);
        std::vector<double> transformed(col.size());
        for (std::size_t i = 0; i < col.size(); ++i) transformed[i] = yeo_johnson(col[i], lam);
        const double mean = column_mean(transformed);
        const double sd = column_stddev(transformed, mean);
        s.lambda.push_back(lam);
        s.shift[c] = mean;
        s.scale[c] = sd > kDegenerateEps ? sd : 1.0;
        break;
      }
      case ScalerKind::MinMaxUnit: {
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        s.shift[c] = *lo;
        const double range = *hi - *lo;
        s.scale[c] = range > kDegenerateEps ? range : 1.0;
        break;
      }
      case ScalerKind::MaxAbsUnit: {
        double max_abs = 0.0;
        for (double v : col) max_abs = std::max(max_abs, std::abs(v));
        s.scale[c] = max_abs > kDegenerateEps ? max_abs : 1.0;
        break;
      }
    }
  }
  return s;
}

Matrix apply_scaler(const FittedScaler& s, const Matrix& m) {
  if (m.cols() != s.n_columns())
    throw DataError("scaler fitted on " + std::to_string(s.n_columns()) +
                    " columns, applied to " + std::to_string(m.cols()));
  Matrix out(m.rows(), m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const double x = m(r, c);
      switch (s.kind) {
        case ScalerKind::ZScore:
        case ScalerKind::RobustMedianIqr:
        case ScalerKind::MinMaxUnit:
          out(r, c) = (x - s.shift[c]) / s.scale[c];
          break;
        case ScalerKind::MaxAbsUnit:
          out(r, c) = x / s.scale[c];
          break;
        case ScalerKind::QuantileUniform:
          out(r, c) = quantile_cdf(s.reference[c], x);
          break;
        case ScalerKind::PowerYeoJohnson:
          out(r, c) = (yeo_johnson(x, s.lambda[c]) - s.shift[c]) / s.scale[c];
          break;
      }
    }
  }
  return out;
}

Matrix invert_scaler(const FittedScaler& s, const Matrix& m) {
  if (m.cols() != s.n_columns())
    throw DataError("scaler fitted on " + std::to_string(s.n_columns()) +
                    " columns, inverted on " + std::to_string(m.cols()));
  Matrix out(m.rows(), m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const double y = m(r, c);
      switch (s.kind) {
        case ScalerKind::ZScore:
        case ScalerKind::RobustMedianIqr:
        case ScalerKind::MinMaxUnit:
          out(r, c) = y * s.scale[c] + s.shift[c];
          break;
        case ScalerKind::MaxAbsUnit:
          out(r, c) = y * s.scale[c];
          break;
        case ScalerKind::QuantileUniform: {
          const auto& ref = s.reference[c];
          const double u = std::clamp(y, 0.0, 1.0);
          const double pos = u * static_cast<double>(ref.size() - 1);
          const auto lo = static_cast<std::size_t>(std::floor(pos));
          const auto hi = std::min(lo + 1, ref.size() - 1);
          const double frac = pos - static_cast<double>(lo);
          out(r, c) = ref[lo] + frac * (ref[hi] - ref[lo]);
          break;
        }
        case ScalerKind::PowerYeoJohnson:
          out(r, c) = yeo_johnson_inverse(y * s.scale[c] + s.shift[c], s.lambda[c]);
          break;
      }
    }
  }
  return out;
}

std::string serialize_scaler(const FittedScaler& s) {
  std::ostringstream out;
  out.precision(17);
  out << "scaler " << scaler_name(s.kind) << " columns " << s.n_columns() << '\n';
  for (std::size_t c = 0; c < s.n_columns(); ++c) {
    out << c << " shift " << s.shift[c] << " scale " << s.scale[c];
    if (s.kind == ScalerKind::PowerYeoJohnson) out << " lambda " << s.lambda[c];
    if (s.kind == ScalerKind::QuantileUniform) {
      out << " reference";
      for (double v : s.reference[c]) out << ' ' << v;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace laborcast
