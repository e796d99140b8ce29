#pragma once

#include <string>
#include <string_view>

#include "laborcast/pipeline.hpp"

namespace laborcast {

enum class ReportFormat { Table, Delimited };

// Two blocks (MSE then MAPE); rows in model order, columns in scaler order
// plus the per-row overall minimum; 4 decimal places. The delimited
// variant is tab-separated with the same cells.
std::string render_report(const BenchmarkGrid& grid, ReportFormat format);

// Parse the delimited variant back into a grid.
BenchmarkGrid parse_report(std::string_view delimited_text);

}  // namespace laborcast
