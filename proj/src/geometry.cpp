#include "eogv/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eogv {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

const char* depth_token(Depth d) {
  switch (d) {
    case Depth::Near: return "30";
    case Depth::Mid: return "70";
    case Depth::Far: return "200";
  }
  return "?";
}

Depth parse_depth(std::string_view s) {
  if (s == "30" || s == "near") return Depth::Near;
  if (s == "70" || s == "mid") return Depth::Mid;
  if (s == "200" || s == "far") return Depth::Far;
  throw std::invalid_argument("unknown depth '" + std::string(s) + "'");
}

} // namespace

double DepthSet::distance(Depth d) const {
  switch (d) {
    case Depth::Near: return near_cm;
    case Depth::Mid: return mid_cm;
    case Depth::Far: return far_cm;
  }
  return far_cm;
}

GestureLabel::GestureLabel(Depth from, Depth to) : from_(from), to_(to) {
  if (from == to) throw std::invalid_argument("gesture needs two distinct depths");
}

int GestureLabel::index() const {
  const int f = static_cast<int>(from_);
  const int t = static_cast<int>(to_);
  // Two targets per source depth, in increasing order of target.
  return f * 2 + (t > f ? t - 1 : t);
}

GestureLabel GestureLabel::from_index(int index) {
  if (index < 0 || index >= 6) throw std::out_of_range("gesture index out of range");
  return all_gestures()[static_cast<size_t>(index)];
}

std::string GestureLabel::name() const {
  return std::string(depth_token(from_)) + "->" + depth_token(to_);
}

GestureLabel GestureLabel::parse(std::string_view text) {
  const auto arrow = text.find("->");
  if (arrow == std::string_view::npos) {
    throw std::invalid_argument("not a gesture label: '" + std::string(text) + "'");
  }
  return {parse_depth(text.substr(0, arrow)), parse_depth(text.substr(arrow + 2))};
}

const std::array<GestureLabel, 6>& all_gestures() {
  static const std::array<GestureLabel, 6> labels{
      GestureLabel{Depth::Near, Depth::Mid}, GestureLabel{Depth::Near, Depth::Far},
      GestureLabel{Depth::Mid, Depth::Near}, GestureLabel{Depth::Mid, Depth::Far},
      GestureLabel{Depth::Far, Depth::Near}, GestureLabel{Depth::Far, Depth::Mid}};
  return labels;
}

const std::array<GestureLabel, 4>& four_gestures() {
  static const std::array<GestureLabel, 4> labels{
      GestureLabel{Depth::Near, Depth::Far}, GestureLabel{Depth::Mid, Depth::Far},
      GestureLabel{Depth::Far, Depth::Near}, GestureLabel{Depth::Far, Depth::Mid}};
  return labels;
}

double vergence_angle(const EyeConfig& cfg, double distance_cm) {
  if (!(distance_cm > 0.0)) throw std::domain_error("fixation distance must be positive");
  if (!(cfg.ipd_mm > 0.0)) throw std::domain_error("ipd must be positive");
  const double half_ipd_cm = cfg.ipd_mm / 20.0;
  return 2.0 * std::atan(half_ipd_cm / distance_cm) * kRadToDeg;
}

double angle_delta(const EyeConfig& cfg, const GestureLabel& g, const DepthSet& depths) {
  return vergence_angle(cfg, depths.distance(g.to())) -
         vergence_angle(cfg, depths.distance(g.from()));
}

double stereo_disparity(double screen_dist, double ipd, double virtual_depth) {
  if (!(screen_dist > 0.0) || !(ipd > 0.0) || !(virtual_depth > 0.0)) {
    throw std::domain_error("stereo disparity needs positive L, d and e");
  }
  return ipd * (screen_dist / virtual_depth - 1.0);
}

double effective_focal_length(double d, double d_prime) {
  if (!(d > 0.0) || !(d_prime > 0.0)) {
    throw std::domain_error("lens distances must be positive");
  }
  return d * d_prime / (d + d_prime);
}

} // namespace eogv
