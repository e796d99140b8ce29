#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "laborcast/matrix.hpp"

namespace laborcast {

// Calendar date, ISO-8601 `YYYY-MM-DD`.
struct Date {
  int year = 0;
  int month = 0;  // 1..12
  int day = 0;    // 1..31

  auto operator<=>(const Date&) const = default;

  bool is_month_end() const;
  std::string to_string() const;
  static Date parse(std::string_view text);  // throws DataError
};

struct CatalogEntry {
  std::string code;
  std::string full_name;
  std::string source;
};

// Catalog of indicator codes accepted as dataset columns.
struct FeatureCatalog {
  std::vector<CatalogEntry> entries;

  bool contains(std::string_view code) const;
  void validate() const;  // unique, non-empty codes
};

// The 30-indicator catalog bundled with the toolkit.
const FeatureCatalog& reference_catalog();

// Date-indexed indicator panel plus optional target series.
// `missing` flags cells that were empty in the source file; imputation
// clears every flag. The target, when present, is the unemployment rate
// in percent and is strictly positive.
struct Dataset {
  std::vector<Date> dates;
  Matrix features;
  std::vector<std::string> feature_names;
  std::vector<double> target;           // empty when absent
  std::vector<std::uint8_t> missing;    // n_rows * n_cols, row-major

  std::size_t n_rows() const { return dates.size(); }
  std::size_t n_cols() const { return feature_names.size(); }
  bool has_target() const { return !target.empty(); }
  bool is_missing(std::size_t r, std::size_t c) const {
    return missing[r * n_cols() + c] != 0;
  }
  std::size_t missing_count() const;
  std::vector<std::optional<double>> column_with_missing(std::size_t c) const;
};

// Chronological train/test boundary: boundary = floor(n_rows * fraction).
struct SplitSpec {
  double train_fraction = 0.8;

  std::size_t resolve_boundary(std::size_t n_rows) const;  // throws DataError
};

using TargetSeries = std::vector<std::pair<Date, double>>;

// Parse a delimited indicator table (comma or tab, auto-detected from the
// header line). First header must be `date`; the rest must be catalog codes.
// Empty cells become missing markers.
Dataset parse_dataset(std::string_view text, const FeatureCatalog& catalog);

// Writes a Dataset back to the same delimited shape parse_dataset accepts
// (comma-separated, missing cells empty, full double round-trip precision).
std::string serialize_dataset(const Dataset& ds);

// Replace each missing entry with the nearest following observed value;
// a trailing run with no following value falls back to the nearest
// preceding one. Throws DataError when every entry is missing.
std::vector<double> backward_fill(const std::vector<std::optional<double>>& column);

// backward_fill applied to every column; clears the missing flags.
Dataset impute_backward_fill(Dataset ds);

// Parse a `date,unemployment_rate` file.
TargetSeries parse_target_series(std::string_view text);

// Attach the target series, matching by exact date. The series must cover
// every dataset date and every rate must be strictly positive.
Dataset join_target(Dataset ds, const TargetSeries& series);

// Target values paired with their dates (inverse of join_target).
TargetSeries extract_target_series(const Dataset& ds);

// First boundary rows vs the remainder, no shuffling.
std::pair<Dataset, Dataset> chronological_split(const Dataset& ds, const SplitSpec& spec);

}  // namespace laborcast
