#include "laborcast/metrics.hpp"

#include <cmath>
#include <string>

#include "laborcast/errors.hpp"

namespace laborcast {

namespace {
void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DataError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                    std::to_string(b) + ")");
  if (a == 0) throw DataError(std::string(what) + ": empty input");
}
}  // namespace

double mse(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y.size(), yhat.size(), "mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - yhat[i];
    sum += r * r;
  }
  return sum / static_cast<double>(y.size());
}

double mape(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y.size(), yhat.size(), "mape");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    sum += std::abs(y[i] - yhat[i]) / std::max(std::abs(y[i]), 1e-8);
  return sum / static_cast<double>(y.size());
}

double directional_accuracy(std::span<const double> y, std::span<const double> yhat,
                            std::span<const double> y_prev) {
  check_lengths(y.size(), yhat.size(), "directional_accuracy");
  check_lengths(y.size(), y_prev.size(), "directional_accuracy");
  auto sign = [](double v) { return v > 0.0 ? 1 : v < 0.0 ? -1 : 0; };
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    hits += sign(y[i] - y_prev[i]) == sign(yhat[i] - y_prev[i]);
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

}  // namespace laborcast
