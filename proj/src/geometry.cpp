#include "consistnav/geometry.hpp"

#include <string>

#include "consistnav/errors.hpp"

namespace consistnav {

double normalize_heading(double angle) {
  if (!std::isfinite(angle)) throw InvalidArgument("normalize_heading: non-finite angle");
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a value just below a multiple of 2pi can round up to 2pi.
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

double angle_diff(double to, double from) {
  double d = std::remainder(to - from, kTwoPi);
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

double euclidean_distance(Vec2 a, Vec2 b) {
  if (!a.finite() || !b.finite()) throw InvalidArgument("euclidean_distance: non-finite point");
  return std::hypot(a.x - b.x, a.y - b.y);
}

Pose::Pose(Vec2 position, double heading) : position_(position), heading_(normalize_heading(heading)) {
  if (!position.finite()) throw InvalidArgument("Pose: non-finite position");
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Forward: return "Forward";
    case Action::Left: return "Left";
    case Action::Right: return "Right";
    case Action::Stop: return "Stop";
  }
  return "?";
}

std::optional<Action> parse_action(std::string_view s) {
  if (s == "Forward") return Action::Forward;
  if (s == "Left") return Action::Left;
  if (s == "Right") return Action::Right;
  if (s == "Stop") return Action::Stop;
  return std::nullopt;
}

}  // namespace consistnav
