#include "laborcast/linear_models.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "laborcast/errors.hpp"
#include "laborcast/rng.hpp"

namespace laborcast {

LinearModel fit_ols(const Matrix& X, const std::vector<double>& y) {
  if (X.rows() == 0 || X.rows() != y.size()) throw DataError("OLS needs rows(X) = len(y) >= 1");
  const auto n = static_cast<Eigen::Index>(X.rows());
  const auto p = static_cast<Eigen::Index>(X.cols());

  Eigen::MatrixXd A(n, p);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < p; ++c)
      A(r, c) = X(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(y.data(), n);

  // Centering folds the intercept out of the solve, so a rank-revealing
  // decomposition of the centered design yields minimum-norm weights.
  const Eigen::RowVectorXd col_means = A.colwise().mean();
  const double y_mean = b.mean();
  A.rowwise() -= col_means;
  b.array() -= y_mean;

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  Eigen::VectorXd w = cod.solve(b);

  LinearModel model;
  model.weights.assign(w.data(), w.data() + p);
  model.intercept = y_mean - col_means.dot(w);
  for (double v : model.weights)
    if (!std::isfinite(v)) throw NumericError("non-finite OLS weights");
  return model;
}

LinearModel fit_sgd(const Matrix& X, const std::vector<double>& y, const SgdConfig& cfg) {
  if (X.rows() == 0 || X.rows() != y.size()) throw DataError("SGD needs rows(X) = len(y) >= 1");
  if (cfg.epochs < 1) throw DataError("SGD epochs must be >= 1");
  if (!(cfg.initial_step > 0.0)) throw DataError("SGD initial step must be positive");

  const std::size_t n = X.rows();
  const std::size_t p = X.cols();
  std::vector<double> w(p, 0.0);
  double intercept = 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::size_t t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    SplitMix64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      const double step = cfg.initial_step / std::pow(static_cast<double>(t), cfg.decay);
      double pred = intercept;
      for (std::size_t c = 0; c < p; ++c) pred += w[c] * X(i, c);
      const double err = pred - y[i];
      for (std::size_t c = 0; c < p; ++c)
        w[c] -= step * (err * X(i, c) + cfg.l2_penalty * w[c]);
      intercept -= step * err;
      if (!std::isfinite(err))
        throw NumericError("SGD diverged (non-finite loss at sample update " + std::to_string(t) + ")");
    }
  }
  for (double v : w)
    if (!std::isfinite(v)) throw NumericError("SGD diverged (non-finite weights)");
  return {std::move(w), intercept};
}

std::vector<double> predict_linear(const LinearModel& m, const Matrix& X) {
  if (X.cols() != m.weights.size())
    throw DataError("linear model has " + std::to_string(m.weights.size()) +
                    " weights, input has " + std::to_string(X.cols()) + " columns");
  std::vector<double> out(X.rows(), m.intercept);
  for (std::size_t r = 0; r < X.rows(); ++r)
    for (std::size_t c = 0; c < X.cols(); ++c) out[r] += m.weights[c] * X(r, c);
  return out;
}

}  // namespace laborcast
