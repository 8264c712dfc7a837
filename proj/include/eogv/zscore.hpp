#pragma once

#include <span>
#include <vector>

namespace eogv {

inline constexpr double kStdFloor = 1e-9;

// Per-feature standardisation statistics.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stdev;
  // Features whose population std fell below kStdFloor and were floored.
  std::vector<bool> floored;

  size_t size() const { return mean.size(); }
  bool any_floored() const;
};

NormStats zscore_fit(std::span<const std::vector<double>> rows);
std::vector<double> zscore_apply(const NormStats& stats, std::span<const double> row);
std::vector<std::vector<double>> zscore_apply(const NormStats& stats,
                                              std::span<const std::vector<double>> rows);

} // namespace eogv
