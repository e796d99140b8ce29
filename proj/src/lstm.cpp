#include "laborcast/lstm.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "laborcast/errors.hpp"
#include "laborcast/rng.hpp"

namespace laborcast {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

LstmParams LstmParams::zeros(int hidden, int input) {
  LstmParams p;
  p.hidden = hidden;
  p.input = input;
  const auto h = static_cast<std::size_t>(hidden);
  const auto f = static_cast<std::size_t>(input);
  p.flat.assign(4 * h * f + 4 * h * h + 4 * h + h + 1, 0.0);
  return p;
}

std::size_t LstmParams::wx_offset(int gate) const {
  const auto h = static_cast<std::size_t>(hidden);
  const auto f = static_cast<std::size_t>(input);
  return static_cast<std::size_t>(gate) * h * f;
}

std::size_t LstmParams::uh_offset(int gate) const {
  const auto h = static_cast<std::size_t>(hidden);
  const auto f = static_cast<std::size_t>(input);
  return 4 * h * f + static_cast<std::size_t>(gate) * h * h;
}

std::size_t LstmParams::bias_offset(int gate) const {
  const auto h = static_cast<std::size_t>(hidden);
  const auto f = static_cast<std::size_t>(input);
  return 4 * h * f + 4 * h * h + static_cast<std::size_t>(gate) * h;
}

std::size_t LstmParams::head_offset() const {
  const auto h = static_cast<std::size_t>(hidden);
  const auto f = static_cast<std::size_t>(input);
  return 4 * h * f + 4 * h * h + 4 * h;
}

std::size_t LstmParams::head_bias_offset() const { return head_offset() + static_cast<std::size_t>(hidden); }

WindowSet make_windows(const Matrix& features, const std::vector<double>& target, int window) {
  if (window < 1) throw DataError("window length must be >= 1");
  const auto l = static_cast<std::size_t>(window);
  if (features.rows() < l)
    throw DataError("need at least " + std::to_string(window) + " rows for windowing, have " +
                    std::to_string(features.rows()));
  if (features.rows() != target.size()) throw DataError("windowing: rows != target length");

  WindowSet ws;
  for (std::size_t k = 0; k + l <= features.rows(); ++k) {
    ws.windows.push_back(features.slice_rows(k, k + l));
    ws.labels.push_back(target[k + l - 1]);
    ws.label_rows.push_back(k + l - 1);
  }
  return ws;
}

WindowSet make_windows(const Dataset& ds, int window) {
  if (ds.missing_count() != 0) throw DataError("windowing requires an imputed dataset");
  if (!ds.has_target()) throw DataError("windowing requires a joined target");
  return make_windows(ds.features, ds.target, window);
}

double lstm_forward(const LstmParams& p, const Matrix& window, LstmCache* cache) {
  const auto h_size = static_cast<std::size_t>(p.hidden);
  const auto f_size = static_cast<std::size_t>(p.input);
  if (window.cols() != f_size)
    throw DataError("window has " + std::to_string(window.cols()) + " columns, model expects " +
                    std::to_string(f_size));
  const std::size_t steps = window.rows();
  const double* flat = p.flat.data();

  std::vector<double> h_state(h_size, 0.0), c_state(h_size, 0.0);
  std::vector<double> gate(4 * h_size);
  if (cache) {
    cache->gate_i.assign(steps, {});
    cache->gate_f.assign(steps, {});
    cache->gate_o.assign(steps, {});
    cache->gate_g.assign(steps, {});
    cache->cell.assign(steps, {});
    cache->cell_tanh.assign(steps, {});
    cache->hidden.assign(steps, {});
  }

  for (std::size_t t = 0; t < steps; ++t) {
    const auto x = window.row(t);
    for (int g = 0; g < 4; ++g) {
      const double* wx = flat + p.wx_offset(g);
      const double* uh = flat + p.uh_offset(g);
      const double* b = flat + p.bias_offset(g);
      for (std::size_t j = 0; j < h_size; ++j) {
        double a = b[j];
        for (std::size_t k = 0; k < f_size; ++k) a += wx[j * f_size + k] * x[k];
        for (std::size_t k = 0; k < h_size; ++k) a += uh[j * h_size + k] * h_state[k];
        gate[static_cast<std::size_t>(g) * h_size + j] = a;
      }
    }
    std::vector<double> ct(h_size);
    for (std::size_t j = 0; j < h_size; ++j) {
      const double gi = sigmoid(gate[j]);
      const double gf = sigmoid(gate[h_size + j]);
      const double go = sigmoid(gate[2 * h_size + j]);
      const double gg = std::tanh(gate[3 * h_size + j]);
      c_state[j] = gf * c_state[j] + gi * gg;
      ct[j] = std::tanh(c_state[j]);
      h_state[j] = go * ct[j];
      gate[j] = gi;
      gate[h_size + j] = gf;
      gate[2 * h_size + j] = go;
      gate[3 * h_size + j] = gg;
    }
    if (cache) {
      cache->gate_i[t].assign(gate.begin(), gate.begin() + static_cast<std::ptrdiff_t>(h_size));
      cache->gate_f[t].assign(gate.begin() + static_cast<std::ptrdiff_t>(h_size),
                              gate.begin() + static_cast<std::ptrdiff_t>(2 * h_size));
      cache->gate_o[t].assign(gate.begin() + static_cast<std::ptrdiff_t>(2 * h_size),
                              gate.begin() + static_cast<std::ptrdiff_t>(3 * h_size));
      cache->gate_g[t].assign(gate.begin() + static_cast<std::ptrdiff_t>(3 * h_size), gate.end());
      cache->cell[t] = c_state;
      cache->cell_tanh[t] = ct;
      cache->hidden[t] = h_state;
    }
  }

  const double* head = flat + p.head_offset();
  double pred = p.flat[p.head_bias_offset()];
  for (std::size_t j = 0; j < h_size; ++j) pred += head[j] * h_state[j];
  if (cache) cache->prediction = pred;
  return pred;
}

double loss_and_gradients(const LstmParams& p, const WindowSet& batch, LstmParams& grads) {
  if (batch.size() == 0) throw DataError("empty batch");
  const auto h_size = static_cast<std::size_t>(p.hidden);
  const auto f_size = static_cast<std::size_t>(p.input);
  grads = LstmParams::zeros(p.hidden, p.input);
  double* g_flat = grads.flat.data();
  const double* flat = p.flat.data();
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  double loss = 0.0;
  LstmCache cache;
  std::vector<double> dh(h_size), dc(h_size), dh_prev(h_size), da(4 * h_size);

  for (std::size_t w = 0; w < batch.size(); ++w) {
    const Matrix& window = batch.windows[w];
    const std::size_t steps = window.rows();
    const double pred = lstm_forward(p, window, &cache);
    const double err = pred - batch.labels[w];
    loss += err * err * inv_b;
    const double dpred = 2.0 * err * inv_b;

    const auto& h_last = cache.hidden[steps - 1];
    double* g_head = g_flat + p.head_offset();
    for (std::size_t j = 0; j < h_size; ++j) {
      g_head[j] += dpred * h_last[j];
      dh[j] = dpred * flat[p.head_offset() + j];
    }
    g_flat[p.head_bias_offset()] += dpred;
    std::fill(dc.begin(), dc.end(), 0.0);

    for (std::size_t t = steps; t-- > 0;) {
      const auto x = window.row(t);
      const auto& gi = cache.gate_i[t];
      const auto& gf = cache.gate_f[t];
      const auto& go = cache.gate_o[t];
      const auto& gg = cache.gate_g[t];
      const auto& ct = cache.cell_tanh[t];
      const std::vector<double>* c_prev = t > 0 ? &cache.cell[t - 1] : nullptr;
      const std::vector<double>* h_prev = t > 0 ? &cache.hidden[t - 1] : nullptr;

      for (std::size_t j = 0; j < h_size; ++j) {
        const double d_o = dh[j] * ct[j];
        dc[j] += dh[j] * go[j] * (1.0 - ct[j] * ct[j]);
        const double d_i = dc[j] * gg[j];
        const double d_g = dc[j] * gi[j];
        const double d_f = dc[j] * (c_prev ? (*c_prev)[j] : 0.0);
        da[j] = d_i * gi[j] * (1.0 - gi[j]);
        da[h_size + j] = d_f * gf[j] * (1.0 - gf[j]);
        da[2 * h_size + j] = d_o * go[j] * (1.0 - go[j]);
        da[3 * h_size + j] = d_g * (1.0 - gg[j] * gg[j]);
        dc[j] *= gf[j];  // becomes dc_prev
      }

      std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
      for (int g = 0; g < 4; ++g) {
        const double* a_row = da.data() + static_cast<std::size_t>(g) * h_size;
        double* g_wx = g_flat + p.wx_offset(g);
        double* g_uh = g_flat + p.uh_offset(g);
        double* g_b = g_flat + p.bias_offset(g);
        const double* uh = flat + p.uh_offset(g);
        for (std::size_t j = 0; j < h_size; ++j) {
          const double a_j = a_row[j];
          g_b[j] += a_j;
          for (std::size_t k = 0; k < f_size; ++k) g_wx[j * f_size + k] += a_j * x[k];
          if (h_prev) {
            for (std::size_t k = 0; k < h_size; ++k) {
              g_uh[j * h_size + k] += a_j * (*h_prev)[k];
              dh_prev[k] += a_j * uh[j * h_size + k];
            }
          } else {
            for (std::size_t k = 0; k < h_size; ++k) dh_prev[k] += a_j * uh[j * h_size + k];
          }
        }
      }
      dh = dh_prev;
    }
  }
  return loss;
}

LstmParams train_lstm(const WindowSet& train, const LstmConfig& cfg,
                      std::vector<double>* loss_trace) {
  if (train.size() == 0) throw DataError("empty window set");
  if (cfg.hidden < 1 || cfg.epochs < 1) throw DataError("invalid LSTM config");
  const auto f = static_cast<std::size_t>(train.windows[0].cols());

  LstmParams p = LstmParams::zeros(cfg.hidden, static_cast<int>(f));
  SplitMix64 rng(cfg.seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  for (double& v : p.flat) v = rng.uniform(-s, s);

  std::vector<double> m(p.size(), 0.0), v(p.size(), 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  LstmParams grads;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double loss = loss_and_gradients(p, train, grads);
    if (!std::isfinite(loss)) throw NumericError("LSTM training diverged (non-finite loss)");
    if (loss_trace) loss_trace->push_back(loss);

    double norm_sq = 0.0;
    for (double g : grads.flat) norm_sq += g * g;
    const double norm = std::sqrt(norm_sq);
    const double scale = norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;

    const double bc1 = 1.0 - std::pow(kBeta1, epoch);
    const double bc2 = 1.0 - std::pow(kBeta2, epoch);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = grads.flat[i] * scale;
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
      p.flat[i] -= cfg.step_size * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
    }
  }
  for (double x : p.flat)
    if (!std::isfinite(x)) throw NumericError("LSTM training diverged (non-finite parameters)");
  return p;
}

double finite_diff_check(const LstmParams& p, const WindowSet& sample, double h) {
  if (!(h > 0.0)) throw DataError("finite difference step must be positive");
  LstmParams grads;
  loss_and_gradients(p, sample, grads);

  auto loss_only = [&](const LstmParams& q) {
    double loss = 0.0;
    for (std::size_t w = 0; w < sample.size(); ++w) {
      const double e = lstm_forward(q, sample.windows[w]) - sample.labels[w];
      loss += e * e;
    }
    return loss / static_cast<double>(sample.size());
  };

  LstmParams probe = p;
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double original = probe.flat[i];
    probe.flat[i] = original + h;
    const double up = loss_only(probe);
    probe.flat[i] = original - h;
    const double down = loss_only(probe);
    probe.flat[i] = original;
    const double fd = (up - down) / (2.0 * h);
    const double analytic = grads.flat[i];
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-12});
    worst = std::max(worst, std::abs(analytic - fd) / denom);
  }
  return worst;
}

std::string serialize_lstm_params(const LstmParams& p) {
  std::ostringstream out;
  out.precision(17);
  out << "lstm " << p.hidden << ' ' << p.input << '\n';
  for (double v : p.flat) out << v << '\n';
  return out.str();
}

LstmParams parse_lstm_params(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string magic;
  int hidden = 0, input = 0;
  in >> magic >> hidden >> input;
  if (magic != "lstm" || hidden < 1 || input < 1) throw DataError("bad LSTM checkpoint header");
  LstmParams p = LstmParams::zeros(hidden, input);
  for (double& v : p.flat)
    if (!(in >> v)) throw DataError("truncated LSTM checkpoint");
  double extra;
  if (in >> extra) throw DataError("trailing values in LSTM checkpoint");
  return p;
}

}  // namespace laborcast
