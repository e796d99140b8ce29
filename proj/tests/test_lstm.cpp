#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "laborcast/errors.hpp"
#include "laborcast/lstm.hpp"
#include "laborcast/rng.hpp"
#include "test_util.hpp"

using namespace laborcast;

namespace {

Matrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

LstmParams random_params(SplitMix64& rng, int hidden, int input, double scale = 0.4) {
  LstmParams p = LstmParams::zeros(hidden, input);
  for (double& v : p.flat) v = rng.uniform(-scale, scale);
  return p;
}

WindowSet random_window_set(SplitMix64& rng, std::size_t count, std::size_t steps,
                            std::size_t features) {
  WindowSet ws;
  for (std::size_t w = 0; w < count; ++w) {
    ws.windows.push_back(random_matrix(rng, steps, features));
    ws.labels.push_back(rng.uniform(-1.0, 1.0));
    ws.label_rows.push_back(w + steps - 1);
  }
  return ws;
}

}  // namespace

TEST_CASE("make_windows counts, labels, and overlap") {
  SplitMix64 rng(1);
  const Matrix features = random_matrix(rng, 48, 3);
  std::vector<double> target(48);
  for (std::size_t i = 0; i < 48; ++i) target[i] = static_cast<double>(i);

  const WindowSet ws = make_windows(features, target, 6);
  CHECK(ws.size() == 43);
  CHECK(ws.label_rows.front() == 5);
  CHECK(ws.labels.front() == 5.0);
  CHECK(ws.label_rows.back() == 47);

  // windows k and k+1 share exactly L-1 rows
  for (std::size_t k = 0; k + 1 < ws.size(); ++k)
    for (std::size_t r = 0; r + 1 < 6; ++r)
      for (std::size_t c = 0; c < 3; ++c)
        CHECK(ws.windows[k](r + 1, c) == ws.windows[k + 1](r, c));

  const WindowSet single = make_windows(features, target, 1);
  CHECK(single.size() == 48);
  CHECK(single.windows[0].rows() == 1);

  CHECK_THROWS_AS(make_windows(random_matrix(rng, 3, 2), {1.0, 2.0, 3.0}, 4), DataError);
}

TEST_CASE("make_windows on the bundled dataset keeps date alignment") {
  Dataset ds = impute_backward_fill(testutil::load_bundled());
  const WindowSet ws = make_windows(ds, 6);
  CHECK(ws.size() == 43);
  for (std::size_t w = 0; w < ws.size(); ++w) CHECK(ws.labels[w] == ds.target[ws.label_rows[w]]);
}

TEST_CASE("zero parameters forward to the output bias") {
  LstmParams p = LstmParams::zeros(4, 3);
  SplitMix64 rng(2);
  const Matrix window = random_matrix(rng, 5, 3);
  CHECK(lstm_forward(p, window) == 0.0);
  p.flat[p.head_bias_offset()] = 1.75;
  LstmCache cache;
  CHECK(lstm_forward(p, window, &cache) == 1.75);
  // gates sit at sigmoid(0) = 0.5, cell and hidden stay zero
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(cache.gate_i[t][j] == 0.5);
      CHECK(cache.gate_f[t][j] == 0.5);
      CHECK(cache.cell[t][j] == 0.0);
      CHECK(cache.hidden[t][j] == 0.0);
    }
}

TEST_CASE("forward is pure and bounded") {
  SplitMix64 rng(3);
  const LstmParams p = random_params(rng, 6, 4, 1.2);
  const Matrix window = random_matrix(rng, 8, 4);
  LstmCache c1, c2;
  const double a = lstm_forward(p, window, &c1);
  const double b = lstm_forward(p, window, &c2);
  CHECK(a == b);
  CHECK(c1.hidden == c2.hidden);

  for (std::size_t t = 0; t < 8; ++t)
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(std::abs(c1.hidden[t][j]) < 1.0);
      const double prev = t > 0 ? std::abs(c1.cell[t - 1][j]) : 0.0;
      CHECK(std::abs(c1.cell[t][j]) <= prev + 1.0 + 1e-12);
    }

  CHECK_THROWS_AS(lstm_forward(p, Matrix(3, 9)), DataError);
}

TEST_CASE("a perfect fit is a stationary point") {
  LstmParams p = LstmParams::zeros(4, 2);
  p.flat[p.head_bias_offset()] = 2.5;
  SplitMix64 rng(4);
  WindowSet batch = random_window_set(rng, 3, 4, 2);
  for (double& label : batch.labels) label = 2.5;

  LstmParams grads;
  const double loss = loss_and_gradients(p, batch, grads);
  CHECK(loss == 0.0);
  for (double g : grads.flat) CHECK(g == 0.0);
  CHECK(finite_diff_check(p, batch, 1e-5) < 1e-8);

  CHECK_THROWS_AS(loss_and_gradients(p, WindowSet{}, grads), DataError);
}

TEST_CASE("analytic gradients match central finite differences") {
  SplitMix64 rng(5);
  const LstmParams p = random_params(rng, 4, 3);
  const WindowSet batch = random_window_set(rng, 3, 5, 3);
  CHECK(finite_diff_check(p, batch, 1e-5) < 1e-4);
}

TEST_CASE("truncation error grows with the step size") {
  SplitMix64 rng(6);
  const LstmParams p = random_params(rng, 4, 3, 0.8);
  const WindowSet batch = random_window_set(rng, 2, 5, 3);
  CHECK(finite_diff_check(p, batch, 1e-2) > finite_diff_check(p, batch, 1e-5));
}

TEST_CASE("batch gradients are the mean of per-window gradients") {
  SplitMix64 rng(7);
  const LstmParams p = random_params(rng, 3, 2);
  const WindowSet batch = random_window_set(rng, 2, 4, 2);

  LstmParams g_all, g_first, g_second;
  loss_and_gradients(p, batch, g_all);
  WindowSet first{.windows = {batch.windows[0]}, .labels = {batch.labels[0]}, .label_rows = {0}};
  WindowSet second{.windows = {batch.windows[1]}, .labels = {batch.labels[1]}, .label_rows = {1}};
  loss_and_gradients(p, first, g_first);
  loss_and_gradients(p, second, g_second);
  for (std::size_t i = 0; i < g_all.size(); ++i)
    CHECK(std::abs(g_all.flat[i] - 0.5 * (g_first.flat[i] + g_second.flat[i])) < 1e-12);
}

TEST_CASE("training absorbs a constant target into the output bias") {
  SplitMix64 rng(8);
  WindowSet train = random_window_set(rng, 8, 4, 2);
  for (double& label : train.labels) label = 0.8;
  LstmConfig cfg;
  cfg.hidden = 4;
  cfg.epochs = 800;
  cfg.step_size = 0.02;
  cfg.seed = 9;
  std::vector<double> trace;
  const LstmParams p = train_lstm(train, cfg, &trace);
  double loss = 0.0;
  for (std::size_t w = 0; w < train.size(); ++w) {
    const double e = lstm_forward(p, train.windows[w]) - train.labels[w];
    loss += e * e;
  }
  loss /= static_cast<double>(train.size());
  CHECK(loss < 1e-3);
  CHECK(trace.back() < trace.front());
}

TEST_CASE("training is bitwise deterministic under a fixed seed") {
  SplitMix64 rng(10);
  const WindowSet train = random_window_set(rng, 5, 3, 2);
  LstmConfig cfg;
  cfg.hidden = 3;
  cfg.epochs = 40;
  cfg.seed = 77;
  const LstmParams a = train_lstm(train, cfg);
  const LstmParams b = train_lstm(train, cfg);
  CHECK(a.flat == b.flat);
}

TEST_CASE("training loss falls on the bundled dataset with defaults") {
  Dataset ds = impute_backward_fill(testutil::load_bundled());
  // scaled inputs as the pipeline would supply; a plain max-abs division
  Matrix scaled = ds.features;
  for (std::size_t c = 0; c < scaled.cols(); ++c) {
    double max_abs = 0.0;
    for (std::size_t r = 0; r < scaled.rows(); ++r)
      max_abs = std::max(max_abs, std::abs(scaled(r, c)));
    if (max_abs == 0.0) max_abs = 1.0;
    for (std::size_t r = 0; r < scaled.rows(); ++r) scaled(r, c) /= max_abs;
  }
  const WindowSet ws = make_windows(scaled, ds.target, 6);
  LstmConfig cfg;  // reference defaults
  cfg.seed = 21;
  std::vector<double> trace;
  train_lstm(ws, cfg, &trace);
  REQUIRE(trace.size() == 500);
  CHECK(trace.back() < trace.front());
}

TEST_CASE("checkpoint round trip with the documented layout") {
  SplitMix64 rng(11);
  const LstmParams p = random_params(rng, 5, 3);
  const std::string text = serialize_lstm_params(p);
  CHECK(text.rfind("lstm 5 3\n", 0) == 0);
  const LstmParams q = parse_lstm_params(text);
  CHECK(q.hidden == 5);
  CHECK(q.input == 3);
  CHECK(q.flat == p.flat);

  CHECK_THROWS_AS(parse_lstm_params("gru 5 3\n0\n"), DataError);
  CHECK_THROWS_AS(parse_lstm_params("lstm 5 3\n0 1 2\n"), DataError);
  CHECK_THROWS_AS(parse_lstm_params(text + "99\n"), DataError);
}

TEST_CASE("parameter layout offsets tile the flat array") {
  const LstmParams p = LstmParams::zeros(4, 3);
  CHECK(p.wx_offset(0) == 0);
  CHECK(p.wx_offset(1) == 12);
  CHECK(p.uh_offset(0) == 48);
  CHECK(p.bias_offset(0) == 48 + 64);
  CHECK(p.head_offset() == 48 + 64 + 16);
  CHECK(p.head_bias_offset() == p.size() - 1);
}
