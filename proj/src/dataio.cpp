#include "laborcast/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "laborcast/errors.hpp"

namespace laborcast {

namespace {

bool is_leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap_year(y)) return 29;
  return kDays[m - 1];
}

double parse_number(std::string_view cell, const std::string& context) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw DataError("unparseable numeral '" + std::string(cell) + "' in " + context);
  if (!std::isfinite(value))
    throw DataError("non-finite value '" + std::string(cell) + "' in " + context);
  return value;
}

std::vector<std::string_view> split_line(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t pos = text.find('\n', start);
    std::string_view line =
        pos == std::string_view::npos ? text.substr(start) : text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

bool Date::is_month_end() const { return day == days_in_month(year, month); }

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

Date Date::parse(std::string_view text) {
  auto bad = [&] { throw DataError("invalid ISO-8601 date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') bad();
  auto to_int = [&](std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) bad();
    return v;
  };
  Date d{to_int(text.substr(0, 4)), to_int(text.substr(5, 2)), to_int(text.substr(8, 2))};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) bad();
  return d;
}

bool FeatureCatalog::contains(std::string_view code) const {
  return std::any_of(entries.begin(), entries.end(),
                     [&](const CatalogEntry& e) { return e.code == code; });
}

void FeatureCatalog::validate() const {
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.code.empty()) throw DataError("catalog entry with empty code");
    if (!seen.insert(e.code).second) throw DataError("duplicate catalog code " + e.code);
  }
}

const FeatureCatalog& reference_catalog() {
  static const FeatureCatalog catalog{{
      {"UNITEDSTACONJOBCLA", "Continuing Jobless Claims", "U.S. Department of Labor via FRED"},
      {"USAPFBC", "Philly Fed Business Conditions", "Federal Reserve Bank of Philadelphia"},
      {"UNITEDSTAPHIFEDMANIN", "Philadelphia Fed Manufacturing Index",
       "Federal Reserve Bank of Philadelphia"},
      {"UNITEDSTAGRONATPRO", "Gross National Product", "U.S. Bureau of Economic Analysis via FRED"},
      {"USANYGDPCCAPPPCD", "GDP per Capita, PPP", "World Bank"},
      {"UnitedStaYouUneRat", "Youth Unemployment Rate - United States",
       "U.S. Bureau of Labor Statistics"},
      {"UNITEDSTAGDPFROTRA", "GDP from Transportation", "U.S. Bureau of Economic Analysis (BEA)"},
      {"UNITEDSTANEWORD", "New Orders for Durable Goods", "U.S. Census Bureau"},
      {"UNITEDSTAECOOPTIND", "Economic Optimism Index", "IBD/TIPP"},
      {"USADBT", "Debt Balance Total", "U.S. Department of the Treasury"},
      {"USCABAL", "Current Account Balance", "U.S. Bureau of Economic Analysis"},
      {"USHOSP", "Hospital Services Expenditures", "American Hospital Association"},
      {"USACA2GDP", "Current Account to GDP Ratio", "World Bank"},
      {"USACPPY", "Core Producer Prices YoY", "U.S. Bureau of Labor Statistics (BLS)"},
      {"UNITEDSTACHU", "CPI Housing & Utilities", "U.S. Bureau of Labor Statistics (BLS)"},
      {"UNITEDSTAGFPA", "GDP from Public Administration", "U.S. Bureau of Economic Analysis (BEA)"},
      {"UNITEDSTAPARTIMEMP", "Part-Time Employment", "U.S. Bureau of Labor Statistics"},
      {"USARENINF", "Rental Inflation Rate", "U.S. Bureau of Labor Statistics"},
      {"USAMCEC", "Michigan Current Economic Conditions", "University of Michigan"},
      {"UNITEDSTACASSHIHOMPR", "Case-Shiller Home Price Index", "S&P Dow Jones Indices"},
      {"USAECIB", "Employment Cost Index", "U.S. Bureau of Labor Statistics (BLS)"},
      {"GDP CQOQ", "GDP Growth Rate", "U.S. Bureau of Economic Analysis"},
      {"UnitedStRetAgeWom", "Retirement Age for Women", "OECD"},
      {"USBEDS", "Hospital Beds per 1,000 People", "World Bank"},
      {"UNITEDSTACORPCEPRIIN", "Core PCE Price Index", "U.S. Bureau of Economic Analysis (BEA)"},
      {"UNITEDSTAGDPDEF", "GDP Deflator", "U.S. Bureau of Economic Analysis"},
      {"UNITEDSTAPROPRICHA", "Producer Prices Change", "U.S. Bureau of Labor Statistics"},
      {"UNITEDSTAJC4A", "4-Week Average Jobless Claims", "U.S. Department of Labor via FRED"},
      {"USPRR", "Price-to-Rent Ratio", "Global Property Guide"},
      {"UNITEDSTACPITRA", "CPI Transportation", "U.S. Bureau of Labor Statistics (BLS)"},
  }};
  return catalog;
}

std::size_t Dataset::missing_count() const {
  std::size_t n = 0;
  for (auto flag : missing) n += flag;
  return n;
}

std::vector<std::optional<double>> Dataset::column_with_missing(std::size_t c) const {
  std::vector<std::optional<double>> out(n_rows());
  for (std::size_t r = 0; r < n_rows(); ++r)
    if (!is_missing(r, c)) out[r] = features(r, c);
  return out;
}

std::size_t SplitSpec::resolve_boundary(std::size_t n_rows) const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DataError("train fraction must be in (0,1)");
  auto boundary = static_cast<std::size_t>(
      std::floor(static_cast<double>(n_rows) * train_fraction));
  if (boundary < 1 || boundary > n_rows - 1)
    throw DataError("split boundary " + std::to_string(boundary) + " outside [1, " +
                    std::to_string(n_rows - 1) + "]");
  return boundary;
}

Dataset parse_dataset(std::string_view text, const FeatureCatalog& catalog) {
  catalog.validate();
  auto lines = split_lines(text);
  if (lines.empty()) throw DataError("empty dataset file");

  const char delim = lines[0].find('\t') != std::string_view::npos ? '\t' : ',';
  auto header = split_line(lines[0], delim);
  if (header.empty() || header[0] != "date")
    throw DataError("first column header must be 'date'");

  Dataset ds;
  std::set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string code(header[c]);
    if (!catalog.contains(code)) throw DataError("header '" + code + "' not in catalog");
    if (!seen.insert(code).second) throw DataError("duplicate header '" + code + "'");
    ds.feature_names.push_back(std::move(code));
  }

  const std::size_t n_cols = ds.feature_names.size();
  const std::size_t n_rows = lines.size() - 1;
  ds.features = Matrix(n_rows, n_cols);
  ds.missing.assign(n_rows * n_cols, 0);

  for (std::size_t r = 0; r < n_rows; ++r) {
    auto fields = split_line(lines[r + 1], delim);
    if (fields.size() != n_cols + 1)
      throw DataError("row " + std::to_string(r + 2) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(n_cols + 1));
    Date date = Date::parse(fields[0]);
    if (!date.is_month_end())
      throw DataError("date " + date.to_string() + " is not a month end");
    if (!ds.dates.empty() && !(ds.dates.back() < date)) {
      if (ds.dates.back() == date) throw DataError("duplicate date " + date.to_string());
      throw DataError("dates out of order at " + date.to_string());
    }
    ds.dates.push_back(date);
    for (std::size_t c = 0; c < n_cols; ++c) {
      std::string_view cell = fields[c + 1];
      if (cell.empty()) {
        ds.missing[r * n_cols + c] = 1;
      } else {
        ds.features(r, c) =
            parse_number(cell, "column " + ds.feature_names[c] + ", row " + date.to_string());
      }
    }
  }
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  std::ostringstream out;
  out << "date";
  for (const auto& name : ds.feature_names) out << ',' << name;
  out << '\n';
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    out << ds.dates[r].to_string();
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
      out << ',';
      if (!ds.is_missing(r, c)) out << format_double(ds.features(r, c));
    }
    out << '\n';
  }
  return out.str();
}

std::vector<double> backward_fill(const std::vector<std::optional<double>>& column) {
  const std::size_t n = column.size();
  std::vector<double> out(n);
  std::optional<double> next;
  // Right-to-left: carry the nearest following value.
  std::vector<std::optional<double>> filled(n);
  for (std::size_t i = n; i-- > 0;) {
    if (column[i]) next = column[i];
    filled[i] = next;
  }
  // Trailing gap fallback: the nearest preceding value.
  std::optional<double> prev;
  for (std::size_t i = 0; i < n; ++i) {
    if (filled[i]) {
      prev = filled[i];
      out[i] = *filled[i];
    } else if (prev) {
      out[i] = *prev;
    } else {
      throw DataError("all entries missing; column cannot be imputed");
    }
  }
  return out;
}

Dataset impute_backward_fill(Dataset ds) {
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    bool any = false;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) any |= ds.is_missing(r, c);
    if (!any) continue;
    auto filled = backward_fill(ds.column_with_missing(c));
    for (std::size_t r = 0; r < ds.n_rows(); ++r) ds.features(r, c) = filled[r];
  }
  std::fill(ds.missing.begin(), ds.missing.end(), 0);
  return ds;
}

TargetSeries parse_target_series(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty()) throw DataError("empty target file");
  const char delim = lines[0].find('\t') != std::string_view::npos ? '\t' : ',';
  auto header = split_line(lines[0], delim);
  if (header.size() != 2 || header[0] != "date" || header[1] != "unemployment_rate")
    throw DataError("target header must be 'date,unemployment_rate'");
  TargetSeries series;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split_line(lines[i], delim);
    if (fields.size() != 2) throw DataError("target row " + std::to_string(i + 1) + " malformed");
    Date date = Date::parse(fields[0]);
    double rate = parse_number(fields[1], "target at " + date.to_string());
    series.emplace_back(date, rate);
  }
  return series;
}

Dataset join_target(Dataset ds, const TargetSeries& series) {
  ds.target.resize(ds.n_rows());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const auto& p) { return p.first == ds.dates[r]; });
    if (it == series.end())
      throw DataError("target series missing date " + ds.dates[r].to_string());
    if (!(it->second > 0.0))
      throw DataError("non-positive unemployment rate at " + ds.dates[r].to_string());
    ds.target[r] = it->second;
  }
  return ds;
}

TargetSeries extract_target_series(const Dataset& ds) {
  TargetSeries series;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) series.emplace_back(ds.dates[r], ds.target[r]);
  return series;
}

std::pair<Dataset, Dataset> chronological_split(const Dataset& ds, const SplitSpec& spec) {
  if (ds.missing_count() != 0) throw DataError("split requires an imputed dataset");
  if (!ds.has_target()) throw DataError("split requires a joined target");
  if (ds.n_rows() < 2) throw DataError("split requires at least 2 rows");
  const std::size_t boundary = spec.resolve_boundary(ds.n_rows());

  auto take = [&](std::size_t begin, std::size_t end) {
    Dataset part;
    part.dates.assign(ds.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                      ds.dates.begin() + static_cast<std::ptrdiff_t>(end));
    part.features = ds.features.slice_rows(begin, end);
    part.feature_names = ds.feature_names;
    part.target.assign(ds.target.begin() + static_cast<std::ptrdiff_t>(begin),
                       ds.target.begin() + static_cast<std::ptrdiff_t>(end));
    part.missing.assign((end - begin) * ds.n_cols(), 0);
    return part;
  };
  return {take(0, boundary), take(boundary, ds.n_rows())};
}

}  // namespace laborcast
