#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "laborcast/matrix.hpp"

namespace laborcast {

struct SvrConfig {
  double c_penalty = 10.0;
  double epsilon_tube = 0.05;   // target units (percent)
  double gamma = 0.0;           // 0 = 1 / n_features
  double kkt_tolerance = 1e-4;
  int max_passes = 200;         // sweeps of up to 2n pair updates each
  std::uint64_t seed = 0;
};

// Dual solution f(x) = sum_i beta_i * rbf(support_i, x) + bias with
// beta_i = alpha_i - alpha_i^*; rows with beta_i = 0 are dropped.
struct SvrModel {
  Matrix support_rows;
  std::vector<double> dual_coefficients;
  double bias = 0.0;
  double gamma = 0.0;
  bool converged = true;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

// Dual objective of the epsilon-insensitive problem at coefficients beta:
//   -1/2 sum_ij beta_i beta_j K_ij - eps sum |beta_i| + sum y_i beta_i.
double svr_dual_objective(const Matrix& X, const std::vector<double>& y,
                          const std::vector<double>& beta, const SvrConfig& cfg);

struct SvrFitTrace {
  std::vector<double> objective;  // after each pair update
  std::vector<double> beta;       // final coefficients, one per training row
};

// Sequential minimal optimization with first-order maximal-violating-pair
// selection; pair updates preserve the sum-zero constraint exactly.
SvrModel fit_svr(const Matrix& X, const std::vector<double>& y, const SvrConfig& cfg,
                 SvrFitTrace* trace = nullptr);

std::vector<double> predict_svr(const SvrModel& m, const Matrix& X);

}  // namespace laborcast
