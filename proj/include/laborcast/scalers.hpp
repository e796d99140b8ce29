#pragma once

#include <array>
#include <string>
#include <vector>

#include "laborcast/matrix.hpp"

namespace laborcast {

// The six column-wise transforms benchmarked by the pipeline, in report
// column order.
enum class ScalerKind {
  ZScore,
  RobustMedianIqr,
  QuantileUniform,
  PowerYeoJohnson,
  MinMaxUnit,
  MaxAbsUnit,
};

constexpr std::array<ScalerKind, 6> all_scaler_kinds() {
  return {ScalerKind::ZScore,          ScalerKind::RobustMedianIqr,
          ScalerKind::QuantileUniform, ScalerKind::PowerYeoJohnson,
          ScalerKind::MinMaxUnit,      ScalerKind::MaxAbsUnit};
}

const char* scaler_name(ScalerKind kind);

// Per-column parameters of a fitted transform.
//   ZScore           shift = mean,   scale = population stddev
//   RobustMedianIqr  shift = median, scale = interquartile range
//   MinMaxUnit       shift = min,    scale = max - min
//   MaxAbsUnit       shift = 0,      scale = max |x|
//   PowerYeoJohnson  lambda per column; shift/scale standardize the output
//   QuantileUniform  reference = sorted training values per column
// Degenerate columns store scale 1 so the transform is a pure shift.
struct FittedScaler {
  ScalerKind kind = ScalerKind::ZScore;
  std::vector<double> shift;
  std::vector<double> scale;
  std::vector<double> lambda;
  std::vector<std::vector<double>> reference;

  std::size_t n_columns() const { return shift.size(); }
};

// Fit on training rows only (>= 2 rows required).
FittedScaler fit_scaler(ScalerKind kind, const Matrix& train);

Matrix apply_scaler(const FittedScaler& s, const Matrix& m);

// Exact algebraic inverse for the affine kinds and PowerYeoJohnson;
// QuantileUniform interpolates back into the reference values.
Matrix invert_scaler(const FittedScaler& s, const Matrix& m);

// Yeo-Johnson power transform, defined on all reals.
double yeo_johnson(double x, double lambda);
double yeo_johnson_inverse(double y, double lambda);

// Profile log-likelihood of the Yeo-Johnson transform under a Gaussian
// model of the transformed data (variance term plus the Jacobian term).
double yeo_johnson_log_likelihood(const std::vector<double>& column, double lambda);

// Lambda maximizing the profile log-likelihood: coarse scan over [-5, 5]
// then golden-section refinement to 1e-6. Constant columns return 1.
double fit_lambda(const std::vector<double>& column);

// Plain-text parameter dump for the report bundle.
std::string serialize_scaler(const FittedScaler& s);

}  // namespace laborcast
