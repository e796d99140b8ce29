#pragma once

#include <span>

namespace laborcast {

// Mean of squared residuals.
double mse(std::span<const double> y, std::span<const double> yhat);

// Mean of |y - yhat| / max(|y|, 1e-8), reported as a ratio (no x100).
double mape(std::span<const double> y, std::span<const double> yhat);

// Fraction of indices where the predicted change from y_prev has the same
// sign as the actual change; zero changes match only zero.
double directional_accuracy(std::span<const double> y, std::span<const double> yhat,
                            std::span<const double> y_prev);

}  // namespace laborcast
