#include "eogv/recording.hpp"

#include <cmath>
#include <stdexcept>

namespace eogv {

void Recording::validate() const {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (channels[kLeft].size() != channels[kRight].size()) {
    throw std::invalid_argument("channel lengths differ");
  }
  for (const auto& ch : channels) {
    for (double v : ch) {
      if (!std::isfinite(v)) throw std::invalid_argument("recording contains non-finite samples");
    }
  }
}

std::optional<GestureLabel> EventSpan::gesture() const {
  if (label.find("->") == std::string::npos) return std::nullopt;
  return GestureLabel::parse(label);
}

} // namespace eogv
