#pragma once

#include "eogv/geometry.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace eogv {

inline constexpr size_t kLeft = 0;
inline constexpr size_t kRight = 1;

// Two-channel EOG trace in millivolts, uniformly sampled.
struct Recording {
  double sample_rate{500.0};
  double start_time{0.0};
  std::array<std::vector<double>, 2> channels;  // left, right

  size_t size() const { return channels[kLeft].size(); }
  bool empty() const { return size() == 0; }
  double duration() const { return static_cast<double>(size()) / sample_rate; }
  double time_at(size_t i) const { return start_time + static_cast<double>(i) / sample_rate; }

  // Throws std::invalid_argument on unequal channel lengths, non-positive
  // sample rate or non-finite samples.
  void validate() const;
};

// Annotated span of a recording. `label` is either a gesture name
// ("200->30") or an artifact tag ("chewing", "talking+vergence", ...).
struct EventSpan {
  double onset{0.0};
  double offset{0.0};
  std::string label;

  double center() const { return 0.5 * (onset + offset); }
  std::optional<GestureLabel> gesture() const;
};

} // namespace eogv
