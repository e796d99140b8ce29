#include "laborcast/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "laborcast/errors.hpp"

namespace laborcast {

namespace {

constexpr const char* kMetrics[2] = {"MSE", "MAPE"};

std::string cell_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

double metric_of(const MetricPair& p, int metric) { return metric == 0 ? p.mse : p.mape; }

void check_complete(const BenchmarkGrid& grid) {
  for (const auto& row : grid.cells)
    for (const auto& cell : row)
      if (!std::isfinite(cell.mse) || !std::isfinite(cell.mape) || cell.mse < 0.0 ||
          cell.mape < 0.0)
        throw DataError("incomplete grid: non-finite or negative metric cell");
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string render_report(const BenchmarkGrid& grid, ReportFormat format) {
  check_complete(grid);
  std::ostringstream out;
  const auto kinds = all_scaler_kinds();

  if (format == ReportFormat::Delimited) {
    out << "metric\tmodel";
    for (auto kind : kinds) out << '\t' << scaler_name(kind);
    out << "\tOverallMin\n";
    for (int metric = 0; metric < 2; ++metric) {
      for (int m = 0; m < kNumModels; ++m) {
        const auto& row = grid.row(m);
        out << kMetrics[metric] << '\t' << model_names()[static_cast<std::size_t>(m)];
        for (const auto& cell : row) out << '\t' << cell_text(metric_of(cell, metric));
        out << '\t' << cell_text(metric_of(row_min(row), metric)) << '\n';
      }
    }
    return out.str();
  }

  for (int metric = 0; metric < 2; ++metric) {
    if (metric == 1) out << '\n';
    out << kMetrics[metric] << '\n';
    char line[256];
    std::snprintf(line, sizeof(line), "%-18s", "Model");
    out << line;
    for (auto kind : kinds) {
      std::snprintf(line, sizeof(line), "%10s", scaler_name(kind));
      out << line;
    }
    std::snprintf(line, sizeof(line), "%12s", "OverallMin");
    out << line << '\n';
    for (int m = 0; m < kNumModels; ++m) {
      const auto& row = grid.row(m);
      std::snprintf(line, sizeof(line), "%-18s", model_names()[static_cast<std::size_t>(m)].c_str());
      out << line;
      for (const auto& cell : row) {
        std::snprintf(line, sizeof(line), "%10s", cell_text(metric_of(cell, metric)).c_str());
        out << line;
      }
      std::snprintf(line, sizeof(line), "%12s", cell_text(metric_of(row_min(row), metric)).c_str());
      out << line << '\n';
    }
  }
  return out.str();
}

BenchmarkGrid parse_report(std::string_view delimited_text) {
  std::istringstream in{std::string(delimited_text)};
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty grid file");
  const auto header = split_fields(line, '\t');
  if (header.size() != 2 + kNumScalers + 1 || header[0] != "metric" || header[1] != "model")
    throw DataError("bad grid header");

  BenchmarkGrid grid;
  for (int metric = 0; metric < 2; ++metric) {
    for (int m = 0; m < kNumModels; ++m) {
      if (!std::getline(in, line))
        throw DataError("incomplete grid: expected 14 data rows");
      const auto fields = split_fields(line, '\t');
      if (fields.size() != header.size())
        throw DataError("grid row has " + std::to_string(fields.size()) + " fields");
      if (fields[0] != kMetrics[metric] || fields[1] != model_names()[static_cast<std::size_t>(m)])
        throw DataError("grid rows out of order at '" + fields[1] + "'");
      for (int s = 0; s < kNumScalers; ++s) {
        const std::string& cell = fields[static_cast<std::size_t>(2 + s)];
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end != cell.c_str() + cell.size() || !std::isfinite(v))
          throw DataError("bad grid cell '" + cell + "'");
        auto& slot = grid.cells[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)];
        (metric == 0 ? slot.mse : slot.mape) = v;
      }
    }
  }
  return grid;
}

}  // namespace laborcast
