#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>

namespace consistnav {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

// Wraps any finite angle into [0, 2pi). Throws InvalidArgument otherwise.
double normalize_heading(double angle);

// Signed smallest rotation taking `from` onto `to`, in (-pi, pi].
double angle_diff(double to, double from);

double euclidean_distance(Vec2 a, Vec2 b);

inline Vec2 heading_vector(double heading) { return {std::cos(heading), std::sin(heading)}; }

class Pose {
 public:
  Pose() = default;
  Pose(Vec2 position, double heading);

  Vec2 position() const { return position_; }
  double heading() const { return heading_; }

 private:
  Vec2 position_{};
  double heading_ = 0.0;
};

// The four discrete ObjectNav actions. Left turns counter-clockwise.
enum class Action { Forward, Left, Right, Stop };

std::string_view to_string(Action a);
std::optional<Action> parse_action(std::string_view s);

}  // namespace consistnav
