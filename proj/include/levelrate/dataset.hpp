#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "levelrate/errors.hpp"

namespace levelrate {

/// Labeled dataset with row-major features.
struct Dataset {
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;  // size() * num_features
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }

  std::span<const double> row(std::size_t i) const noexcept {
    return std::span<const double>(features).subspan(i * num_features, num_features);
  }

  void push_back(std::span<const double> x, int label) {
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
  }
};

inline std::map<int, std::size_t> class_histogram(const Dataset& ds) {
  std::map<int, std::size_t> hist;
  for (int y : ds.labels) ++hist[y];
  return hist;
}

inline void validate_labels(const Dataset& ds) {
  if (ds.size() == 0) throw DataError("dataset is empty");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int y = ds.labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= ds.num_classes) {
      throw DataError("label " + std::to_string(y) + " at sample " + std::to_string(i) +
                      " outside [0, " + std::to_string(ds.num_classes) + ")");
    }
  }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses CSV with a header row: feature columns followed by an integer
/// `label` column. LF and CRLF line endings are accepted; blank lines are
/// skipped. Errors name the 1-based line number.
inline Dataset parse_dataset_csv(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) {
      header_line = line;
      break;
    }
  }
  if (header_line.empty()) throw DataError(source + ": empty file");
  if (header_line.size() >= 3 && static_cast<unsigned char>(header_line[0]) == 0xEF &&
      static_cast<unsigned char>(header_line[1]) == 0xBB && static_cast<unsigned char>(header_line[2]) == 0xBF) {
    header_line.erase(0, 3);
  }
  header = detail::split_commas(header_line);
  if (header.size() < 2 || header.back() != "label") {
    throw DataError(source + ":" + std::to_string(lineno) +
                    ": header must list feature columns followed by 'label'");
  }

  Dataset ds;
  ds.num_features = header.size() - 1;
  std::vector<double> row(ds.num_features);
  int max_label = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    const std::string where = source + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < ds.num_features; ++j) {
      if (!detail::parse_number(cells[j], row[j]) || !std::isfinite(row[j])) {
        throw DataError(where + ": feature '" + std::string(header[j]) + "' is not a finite number: '" +
                        std::string(cells[j]) + "'");
      }
    }
    int label = 0;
    if (!detail::parse_number(cells.back(), label) || label < 0) {
      throw DataError(where + ": label must be a non-negative integer: '" + std::string(cells.back()) + "'");
    }
    max_label = std::max(max_label, label);
    ds.push_back(row, label);
  }
  if (ds.size() == 0) throw DataError(source + ": no data rows");
  ds.num_classes = static_cast<std::size_t>(max_label) + 1;
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return parse_dataset_csv(in, path);
}

/// Two isotropic 2-D Gaussian blobs. Class 1 is the minority with exactly
/// llround(n * minority_fraction) samples; rows are shuffled with the seed.
struct SyntheticSpec {
  std::size_t n = 1000;
  double minority_fraction = 0.1;
  double separation = 2.0;  // distance between class means along the diagonal
  double stddev = 1.0;
  std::uint64_t seed = 0;
};

inline Dataset make_imbalanced_blobs(const SyntheticSpec& spec) {
  if (spec.n < 2) throw ConfigError("synthetic dataset needs n >= 2");
  if (!(spec.minority_fraction > 0.0 && spec.minority_fraction < 1.0)) {
    throw ConfigError("minority_fraction must lie in (0, 1)");
  }
  const auto n_minor = static_cast<std::size_t>(std::llround(static_cast<double>(spec.n) * spec.minority_fraction));
  const std::size_t n_major = spec.n - n_minor;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.stddev);
  const double half = spec.separation / (2.0 * std::sqrt(2.0));

  std::vector<std::pair<std::array<double, 2>, int>> rows;
  rows.reserve(spec.n);
  for (std::size_t i = 0; i < n_major; ++i) rows.push_back({{-half + noise(rng), -half + noise(rng)}, 0});
  for (std::size_t i = 0; i < n_minor; ++i) rows.push_back({{half + noise(rng), half + noise(rng)}, 1});
  std::shuffle(rows.begin(), rows.end(), rng);

  Dataset ds;
  ds.num_features = 2;
  ds.num_classes = 2;
  for (const auto& [x, y] : rows) ds.push_back(x, y);
  return ds;
}

}  // namespace levelrate
