#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "laborcast/dataio.hpp"
#include "laborcast/matrix.hpp"

namespace laborcast {

struct LstmConfig {
  int window = 6;       // months per input window
  int hidden = 16;
  int epochs = 500;
  double step_size = 0.01;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
};

// Single-layer LSTM with a scalar regression head. Parameters live in one
// flat array; checkpoint layout (row-major, gate order i, f, o, g):
//   W_i W_f W_o W_g   (each H x F)
//   U_i U_f U_o U_g   (each H x H)
//   b_i b_f b_o b_g   (each H)
//   head (H), head bias (1)
struct LstmParams {
  int hidden = 0;
  int input = 0;
  std::vector<double> flat;

  static LstmParams zeros(int hidden, int input);
  std::size_t size() const { return flat.size(); }

  // Offsets into flat; gate in 0..3 following the i, f, o, g order.
  std::size_t wx_offset(int gate) const;
  std::size_t uh_offset(int gate) const;
  std::size_t bias_offset(int gate) const;
  std::size_t head_offset() const;
  std::size_t head_bias_offset() const;
};

// Windows of consecutive scaled feature rows; the label is the raw-percent
// target at each window's final row. label_rows keeps the source row index
// for leakage audits.
struct WindowSet {
  std::vector<Matrix> windows;
  std::vector<double> labels;
  std::vector<std::size_t> label_rows;

  std::size_t size() const { return windows.size(); }
};

// n_rows - L + 1 windows; window k covers rows [k, k + L), label row k+L-1.
WindowSet make_windows(const Matrix& features, const std::vector<double>& target, int window);
WindowSet make_windows(const Dataset& ds, int window);

struct LstmCache {
  // Per-step activations, each step stores H values per gate plus states.
  std::vector<std::vector<double>> gate_i, gate_f, gate_o, gate_g;
  std::vector<std::vector<double>> cell, hidden, cell_tanh;
  double prediction = 0.0;
};

double lstm_forward(const LstmParams& p, const Matrix& window, LstmCache* cache = nullptr);

// Mean squared loss over the batch and its exact gradient via reverse
// accumulation through all steps.
double loss_and_gradients(const LstmParams& p, const WindowSet& batch, LstmParams& grads);

// Full-batch training: uniform [-1/sqrt(H), 1/sqrt(H)] init from the seed,
// global-norm gradient clipping, Adam updates (0.9, 0.999, 1e-8).
LstmParams train_lstm(const WindowSet& train, const LstmConfig& cfg,
                      std::vector<double>* loss_trace = nullptr);

// Max over parameters of |analytic - central difference| relative error.
double finite_diff_check(const LstmParams& p, const WindowSet& sample, double h);

std::string serialize_lstm_params(const LstmParams& p);
LstmParams parse_lstm_params(std::string_view text);

}  // namespace laborcast
