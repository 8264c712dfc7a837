#pragma once

#include <array>
#include <string>
#include <string_view>

namespace eogv {

// Fixation geometry of the two eyes. Only the interpupillary distance matters.
struct EyeConfig {
  double ipd_mm{50.0};
};

enum class Depth { Near = 0, Mid = 1, Far = 2 };

struct DepthLevel {
  Depth name{Depth::Near};
  double distance_cm{30.0};
};

// Fixation distances for the three depth targets.
struct DepthSet {
  double near_cm{30.0};
  double mid_cm{70.0};
  double far_cm{200.0};

  double distance(Depth d) const;
  DepthLevel level(Depth d) const { return {d, distance(d)}; }
};

// A gaze shift between two depth targets. `from != to` is enforced by the
// constructor; use all_gestures() / four_gestures() to enumerate.
class GestureLabel {
public:
  GestureLabel(Depth from, Depth to);

  Depth from() const { return from_; }
  Depth to() const { return to_; }

  GestureLabel reversed() const { return {to_, from_}; }

  // Stable index in [0, 6) following all_gestures() order.
  int index() const;
  static GestureLabel from_index(int index);

  // "30->200" style, using the default depth distances.
  std::string name() const;
  static GestureLabel parse(std::string_view text);

  friend bool operator==(const GestureLabel&, const GestureLabel&) = default;

private:
  Depth from_;
  Depth to_;
};

// 30->70, 30->200, 70->30, 70->200, 200->30, 200->70
const std::array<GestureLabel, 6>& all_gestures();
// The well-separated subset: 30->200, 70->200, 200->30, 200->70
const std::array<GestureLabel, 4>& four_gestures();

// Angle between the two lines of sight when fixating at `distance_cm`,
// in degrees. Throws std::domain_error for non-positive distance.
double vergence_angle(const EyeConfig& cfg, double distance_cm);

// Change in vergence angle for a gesture, degrees. Convergence (far to near)
// is positive.
double angle_delta(const EyeConfig& cfg, const GestureLabel& g, const DepthSet& depths = {});

// True when the eyes rotate inward over the gesture.
inline bool is_convergence(const GestureLabel& g) {
  return static_cast<int>(g.to()) < static_cast<int>(g.from());
}

// Horizontal separation between left/right images on a screen at distance L
// that makes a point appear at depth e, for eye separation d. All lengths in
// the same unit.
double stereo_disparity(double screen_dist, double ipd, double virtual_depth);

// Thin-lens effective focal length from object and image distances.
double effective_focal_length(double d, double d_prime);

} // namespace eogv
