#include "eogv/zscore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eogv {

bool NormStats::any_floored() const {
  return std::any_of(floored.begin(), floored.end(), [](bool f) { return f; });
}

NormStats zscore_fit(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw std::invalid_argument("cannot fit normalisation on an empty set");
  const size_t dim = rows.front().size();
  NormStats s;
  s.mean.assign(dim, 0.0);
  s.stdev.assign(dim, 0.0);
  s.floored.assign(dim, false);
  for (const auto& r : rows) {
    if (r.size() != dim) throw std::invalid_argument("inconsistent feature dimension");
    for (size_t j = 0; j < dim; ++j) s.mean[j] += r[j];
  }
  const double n = static_cast<double>(rows.size());
  for (double& m : s.mean) m /= n;
  for (const auto& r : rows) {
    for (size_t j = 0; j < dim; ++j) {
      const double d = r[j] - s.mean[j];
      s.stdev[j] += d * d;
    }
  }
  for (size_t j = 0; j < dim; ++j) {
    s.stdev[j] = std::sqrt(s.stdev[j] / n);
    if (!(s.stdev[j] >= kStdFloor)) {
      s.stdev[j] = kStdFloor;
      s.floored[j] = true;
    }
  }
  return s;
}

std::vector<double> zscore_apply(const NormStats& stats, std::span<const double> row) {
  if (row.size() != stats.size()) {
    throw std::invalid_argument("feature dimension " + std::to_string(row.size()) +
                                " does not match normalisation dimension " + std::to_string(stats.size()));
  }
  std::vector<double> out(row.size());
  for (size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - stats.mean[j]) / stats.stdev[j];
  return out;
}

std::vector<std::vector<double>> zscore_apply(const NormStats& stats,
                                              std::span<const std::vector<double>> rows) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(zscore_apply(stats, r));
  return out;
}

} // namespace eogv
