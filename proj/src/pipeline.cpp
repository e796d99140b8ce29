#include "laborcast/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "laborcast/errors.hpp"
#include "laborcast/metrics.hpp"
#include "laborcast/rng.hpp"

namespace laborcast {

const std::array<std::string, kNumModels>& model_names() {
  static const std::array<std::string, kNumModels> names = {
      "LinearRegression", "SGDRegressor", "RandomForest", "GradientBoost",
      "SVR",              "ObliviousBoost", "LSTM"};
  return names;
}

MetricPair row_min(const std::array<MetricPair, kNumScalers>& row) {
  MetricPair out = row[0];
  for (const auto& cell : row) {
    out.mse = std::min(out.mse, cell.mse);
    out.mape = std::min(out.mape, cell.mape);
  }
  return out;
}

Dataset shift_target(Dataset ds, int horizon) {
  if (horizon < 0) throw DataError("horizon must be non-negative");
  if (horizon == 0) return ds;
  const auto h = static_cast<std::size_t>(horizon);
  if (ds.n_rows() <= h) throw DataError("horizon leaves no rows");
  const std::size_t kept = ds.n_rows() - h;
  for (std::size_t r = 0; r < kept; ++r) ds.target[r] = ds.target[r + h];
  ds.target.resize(kept);
  ds.dates.resize(kept);
  ds.features = ds.features.slice_rows(0, kept);
  ds.missing.resize(kept * ds.n_cols());
  return ds;
}

std::vector<std::string> select_top_k(const Dataset& train, int k, const BoostConfig& cfg) {
  if (k < 1 || static_cast<std::size_t>(k) > train.n_cols())
    throw DataError("top_k " + std::to_string(k) + " out of range [1, " +
                    std::to_string(train.n_cols()) + "]");
  ImportanceRanking ranking = importance_ranking(train, cfg);
  std::vector<std::string> codes;
  codes.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) codes.push_back(ranking[static_cast<std::size_t>(i)].code);
  return codes;
}

ImportanceRanking importance_ranking(const Dataset& train, const BoostConfig& cfg) {
  if (train.missing_count() != 0) throw DataError("selection requires an imputed dataset");
  if (!train.has_target()) throw DataError("selection requires a joined target");
  const ObliviousGbtModel model = fit_oblivious_gbt(train.features, train.target, cfg);
  return gain_importance(model.gain_by_feature, train.feature_names);
}

namespace {

int thread_cap_from_env() {
  const char* raw = std::getenv("LABORCAST_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 0) return 0;
  return static_cast<int>(std::min<long>(v, kNumModels * kNumScalers));
}

struct CellResult {
  std::vector<double> train_preds;
  std::vector<double> test_preds;
};

struct CellInputs {
  const Matrix& train_x;
  const Matrix& test_x;
  const Matrix& full_x;  // train rows then test rows, same scaler
  const std::vector<double>& train_y;
  const std::vector<double>& test_y;
  const std::vector<double>& full_y;
  std::size_t boundary;
};

CellResult run_cell(int model, const CellInputs& in, const RunConfig& cfg,
                    std::uint64_t cell_seed) {
  switch (model) {
    case 0: {
      const LinearModel m = fit_ols(in.train_x, in.train_y);
      return {predict_linear(m, in.train_x), predict_linear(m, in.test_x)};
    }
    case 1: {
      SgdConfig sgd = cfg.sgd;
      sgd.seed = cell_seed;
      const LinearModel m = fit_sgd(in.train_x, in.train_y, sgd);
      return {predict_linear(m, in.train_x), predict_linear(m, in.test_x)};
    }
    case 2: {
      ForestConfig forest = cfg.forest;
      forest.seed = cell_seed;
      const Forest m = fit_random_forest(in.train_x, in.train_y, forest);
      return {predict_forest(m, in.train_x), predict_forest(m, in.test_x)};
    }
    case 3: {
      BoostConfig boost = cfg.gbt;
      boost.seed = cell_seed;
      const GbtModel m = fit_second_order_gbt(in.train_x, in.train_y, boost);
      return {predict_gbt(m, in.train_x), predict_gbt(m, in.test_x)};
    }
    case 4: {
      SvrConfig svr = cfg.svr;
      svr.seed = cell_seed;
      const SvrModel m = fit_svr(in.train_x, in.train_y, svr);
      return {predict_svr(m, in.train_x), predict_svr(m, in.test_x)};
    }
    case 5: {
      BoostConfig boost = cfg.oblivious;
      boost.seed = cell_seed;
      const ObliviousGbtModel m = fit_oblivious_gbt(in.train_x, in.train_y, boost);
      return {predict_oblivious(m, in.train_x), predict_oblivious(m, in.test_x)};
    }
    case 6: {
      LstmConfig lstm = cfg.lstm;
      lstm.seed = cell_seed;
      const WindowSet all = make_windows(in.full_x, in.full_y, lstm.window);
      WindowSet train_ws, test_ws;
      for (std::size_t w = 0; w < all.size(); ++w) {
        WindowSet& dst = all.label_rows[w] < in.boundary ? train_ws : test_ws;
        dst.windows.push_back(all.windows[w]);
        dst.labels.push_back(all.labels[w]);
        dst.label_rows.push_back(all.label_rows[w]);
      }
      const LstmParams params = train_lstm(train_ws, lstm);
      CellResult out;
      for (const auto& w : train_ws.windows) out.train_preds.push_back(lstm_forward(params, w));
      for (const auto& w : test_ws.windows) out.test_preds.push_back(lstm_forward(params, w));
      return out;
    }
    default:
      throw DataError("unknown model index");
  }
}

}  // namespace

BenchmarkGrid run_benchmark(const Dataset& input, const RunConfig& cfg,
                            BenchmarkDiagnostics* diag) {
  if (!input.has_target()) throw DataError("benchmark requires a joined target");
  Dataset ds = impute_backward_fill(input);
  ds = shift_target(std::move(ds), cfg.horizon);

  const SplitSpec split{cfg.split_fraction};
  const std::size_t boundary = split.resolve_boundary(ds.n_rows());

  // Feature selection; by default only the training block is visible.
  if (!cfg.use_all_features) {
    Dataset selection_block = ds;
    if (cfg.select_on_train_only) {
      selection_block.dates.resize(boundary);
      selection_block.features = ds.features.slice_rows(0, boundary);
      selection_block.target.resize(boundary);
      selection_block.missing.resize(boundary * ds.n_cols());
    }
    BoostConfig select_cfg = cfg.oblivious;
    select_cfg.seed = derive_seed(cfg.seed, seed_tag::kSelection);
    const std::vector<std::string> selected = select_top_k(selection_block, cfg.top_k, select_cfg);
    if (diag) diag->selected_features = selected;

    std::vector<std::size_t> indices;
    for (const auto& code : selected) {
      const auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), code);
      indices.push_back(static_cast<std::size_t>(it - ds.feature_names.begin()));
    }
    ds.features = ds.features.select_columns(indices);
    ds.feature_names = selected;
    ds.missing.assign(ds.n_rows() * ds.n_cols(), 0);
  } else if (diag) {
    diag->selected_features = ds.feature_names;
  }

  auto [train, test] = chronological_split(ds, split);

  std::array<FittedScaler, kNumScalers> fitted;
  std::array<Matrix, kNumScalers> train_scaled, test_scaled, full_scaled;
  const auto kinds = all_scaler_kinds();
  for (int s = 0; s < kNumScalers; ++s) {
    fitted[s] = fit_scaler(kinds[static_cast<std::size_t>(s)], train.features);
    train_scaled[s] = apply_scaler(fitted[s], train.features);
    test_scaled[s] = apply_scaler(fitted[s], test.features);
    full_scaled[s] = apply_scaler(fitted[s], ds.features);
    if (diag) diag->scaler_params[static_cast<std::size_t>(s)] = serialize_scaler(fitted[s]);
  }

  BenchmarkGrid grid;
  const std::uint64_t cell_root = derive_seed(cfg.seed, seed_tag::kBenchmarkCell);

  auto execute = [&](int task) {
    const int m = task / kNumScalers;
    const int s = task % kNumScalers;
    // Cells mix (master seed, model id, scaler id); the forest alone keeps
    // scaler-independent seeding so identical bootstraps make its row
    // constant across the affine scalers.
    const std::uint64_t model_stream = derive_seed(cell_root, static_cast<std::uint64_t>(m));
    const std::uint64_t cell_seed =
        m == 2 ? model_stream : derive_seed(model_stream, static_cast<std::uint64_t>(s));
    const CellInputs inputs{train_scaled[s], test_scaled[s], full_scaled[s],
                            train.target,    test.target,    ds.target,
                            boundary};
    try {
      CellResult result = run_cell(m, inputs, cfg, cell_seed);
      grid.cells[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)] = {
          mse(test.target, result.test_preds), mape(test.target, result.test_preds)};
      if (diag) {
        diag->train_predictions[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)] =
            std::move(result.train_preds);
        diag->test_predictions[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)] =
            std::move(result.test_preds);
      }
    } catch (const DataError& e) {
      throw DataError("cell (" + model_names()[static_cast<std::size_t>(m)] + ", " +
                      scaler_name(kinds[static_cast<std::size_t>(s)]) + "): " + e.what());
    } catch (const NumericError& e) {
      throw NumericError("cell (" + model_names()[static_cast<std::size_t>(m)] + ", " +
                         scaler_name(kinds[static_cast<std::size_t>(s)]) + "): " + e.what());
    }
  };

  const int n_tasks = kNumModels * kNumScalers;
  const int n_threads = thread_cap_from_env();
  if (n_threads <= 1) {
    for (int task = 0; task < n_tasks; ++task) execute(task);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      while (true) {
        const int task = next.fetch_add(1);
        if (task >= n_tasks) return;
        try {
          execute(task);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }
  return grid;
}

}  // namespace laborcast
