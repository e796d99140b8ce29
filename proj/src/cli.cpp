#include "laborcast/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "laborcast/dataio.hpp"
#include "laborcast/errors.hpp"
#include "laborcast/run_config.hpp"

namespace laborcast {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
}

ReportFormat parse_format(const std::string& text) {
  if (text == "table") return ReportFormat::Table;
  if (text == "delimited") return ReportFormat::Delimited;
  throw UsageError("--format must be 'table' or 'delimited', got '" + text + "'");
}

Dataset load_joined(const std::string& features_path, const std::string& target_path) {
  Dataset ds = parse_dataset(slurp(features_path), reference_catalog());
  return join_target(std::move(ds), parse_target_series(slurp(target_path)));
}

int run_ingest(const IngestCommand& cmd) {
  Dataset ds = parse_dataset(slurp(cmd.features_path), reference_catalog());
  const std::size_t missing_before = ds.missing_count();
  if (cmd.target_path) ds = join_target(std::move(ds), parse_target_series(slurp(*cmd.target_path)));
  ds = impute_backward_fill(std::move(ds));

  std::cout << "rows: " << ds.n_rows() << "\ncolumns: " << ds.n_cols() << '\n';
  if (ds.n_rows() > 0)
    std::cout << "dates: " << ds.dates.front().to_string() << " .. "
              << ds.dates.back().to_string() << '\n';
  std::cout << "missing cells filled: " << missing_before << '\n';
  std::cout << "target: " << (ds.has_target() ? "joined" : "absent") << '\n';

  if (cmd.out_dir) {
    std::filesystem::create_directories(*cmd.out_dir);
    write_file(*cmd.out_dir + "/imputed.csv", serialize_dataset(ds));
    std::cout << "wrote " << *cmd.out_dir << "/imputed.csv\n";
  }
  return 0;
}

int run_select(const SelectFeaturesCommand& cmd) {
  Dataset ds = load_joined(cmd.features_path, cmd.target_path);
  ds = impute_backward_fill(std::move(ds));
  ds = shift_target(std::move(ds), cmd.horizon);

  RunConfig defaults;
  BoostConfig selector = defaults.oblivious;
  selector.seed = derive_seed(cmd.seed, seed_tag::kSelection);
  const ImportanceRanking ranking = importance_ranking(ds, selector);
  if (cmd.k < 1 || static_cast<std::size_t>(cmd.k) > ranking.size())
    throw DataError("--k " + std::to_string(cmd.k) + " out of range [1, " +
                    std::to_string(ranking.size()) + "]");

  std::ostringstream out;
  out.precision(6);
  for (int i = 0; i < cmd.k; ++i) {
    const auto& e = ranking[static_cast<std::size_t>(i)];
    out << e.code << '\t' << std::fixed << e.share << '\n';
  }
  std::cout << out.str();
  if (cmd.out_dir) {
    std::filesystem::create_directories(*cmd.out_dir);
    write_file(*cmd.out_dir + "/selected_features.tsv", out.str());
  }
  return 0;
}

int run_benchmark_cmd(const BenchmarkCommand& cmd) {
  ParsedRunConfig parsed = parse_run_config(slurp(cmd.config_path));
  if (cmd.features_path) parsed.features_path = cmd.features_path;
  if (cmd.target_path) parsed.target_path = cmd.target_path;
  if (cmd.seed) parsed.run.seed = *cmd.seed;
  if (cmd.horizon) parsed.run.horizon = *cmd.horizon;
  if (cmd.all_features) parsed.run.use_all_features = true;
  if (!parsed.features_path) throw DataError("no features file: set --features or 'features =' in config");
  if (!parsed.target_path) throw DataError("no target file: set --target or 'target =' in config");

  const Dataset ds = load_joined(*parsed.features_path, *parsed.target_path);
  BenchmarkDiagnostics diag;
  const BenchmarkGrid grid = run_benchmark(ds, parsed.run, &diag);

  std::cout << render_report(grid, cmd.format);
  if (cmd.out_dir) {
    std::filesystem::create_directories(*cmd.out_dir);
    write_file(*cmd.out_dir + "/report.txt", render_report(grid, ReportFormat::Table));
    write_file(*cmd.out_dir + "/grid.tsv", render_report(grid, ReportFormat::Delimited));
    std::ostringstream selection;
    for (const auto& code : diag.selected_features) selection << code << '\n';
    write_file(*cmd.out_dir + "/selected_features.txt", selection.str());
    std::ostringstream scalers;
    for (const auto& text : diag.scaler_params) scalers << text;
    write_file(*cmd.out_dir + "/scaler_params.txt", scalers.str());
  }
  return 0;
}

int run_report(const ReportCommand& cmd) {
  const BenchmarkGrid grid = parse_report(slurp(cmd.grid_path));
  std::cout << render_report(grid, cmd.format);
  return 0;
}

}  // namespace

Command parse_args(const std::vector<std::string>& argv) {
  CLI::App app{"laborcast: unemployment-rate regression benchmark"};
  app.require_subcommand(0, 1);

  IngestCommand ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse, validate and impute an indicator file");
  ingest_cmd->add_option("--features", ingest.features_path, "Indicator CSV/TSV path")->required();
  std::string ingest_target, ingest_out;
  ingest_cmd->add_option("--target", ingest_target, "Target series path");
  ingest_cmd->add_option("--out", ingest_out, "Output directory");

  SelectFeaturesCommand select;
  auto* select_cmd =
      app.add_subcommand("select-features", "Rank features by booster gain importance");
  select_cmd->add_option("--features", select.features_path, "Indicator CSV/TSV path")->required();
  select_cmd->add_option("--target", select.target_path, "Target series path")->required();
  select_cmd->add_option("--k", select.k, "How many codes to keep");
  select_cmd->add_option("--horizon", select.horizon, "Forecast horizon in months");
  select_cmd->add_option("--seed", select.seed, "Selector seed");
  std::string select_out;
  select_cmd->add_option("--out", select_out, "Output directory");

  BenchmarkCommand benchmark;
  auto* bench_cmd = app.add_subcommand("benchmark", "Run the 7-model x 6-scaler grid");
  bench_cmd->add_option("--config", benchmark.config_path, "Run configuration file")->required();
  std::string bench_features, bench_target, bench_out, bench_format = "table";
  std::uint64_t bench_seed = 0;
  int bench_horizon = 0;
  bench_cmd->add_option("--features", bench_features, "Indicator path (overrides config)");
  bench_cmd->add_option("--target", bench_target, "Target path (overrides config)");
  bench_cmd->add_option("--out", bench_out, "Output directory for the report bundle");
  auto* seed_opt = bench_cmd->add_option("--seed", bench_seed, "Master seed (overrides config)");
  auto* horizon_opt = bench_cmd->add_option("--horizon", bench_horizon, "Horizon (overrides config)");
  bench_cmd->add_flag("--all-features", benchmark.all_features, "Bypass top-k selection");
  bench_cmd->add_option("--format", bench_format, "Stdout format: table|delimited");

  ReportCommand report;
  auto* report_cmd = app.add_subcommand("report", "Re-render a saved delimited grid");
  report_cmd->add_option("grid", report.grid_path, "Path to grid.tsv")->required();
  std::string report_format = "table";
  report_cmd->add_option("--format", report_format, "table|delimited");

  // CLI11 wants argv reversed, program name excluded.
  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);  // prints the help of whichever (sub)command asked
    return HelpRequested{};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (ingest_cmd->parsed()) {
    if (!ingest_target.empty()) ingest.target_path = ingest_target;
    if (!ingest_out.empty()) ingest.out_dir = ingest_out;
    return ingest;
  }
  if (select_cmd->parsed()) {
    if (!select_out.empty()) select.out_dir = select_out;
    return select;
  }
  if (bench_cmd->parsed()) {
    if (!bench_features.empty()) benchmark.features_path = bench_features;
    if (!bench_target.empty()) benchmark.target_path = bench_target;
    if (!bench_out.empty()) benchmark.out_dir = bench_out;
    if (seed_opt->count() > 0) benchmark.seed = bench_seed;
    if (horizon_opt->count() > 0) benchmark.horizon = bench_horizon;
    benchmark.format = parse_format(bench_format);
    return benchmark;
  }
  if (report_cmd->parsed()) {
    report.format = parse_format(report_format);
    return report;
  }
  throw UsageError("missing subcommand; try --help");
}

int run_command(const Command& cmd) {
  return std::visit(
      [](const auto& c) -> int {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, IngestCommand>) return run_ingest(c);
        else if constexpr (std::is_same_v<T, SelectFeaturesCommand>) return run_select(c);
        else if constexpr (std::is_same_v<T, BenchmarkCommand>) return run_benchmark_cmd(c);
        else if constexpr (std::is_same_v<T, ReportCommand>) return run_report(c);
        else return 0;  // HelpRequested
      },
      cmd);
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_command(parse_args(args));
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace laborcast
