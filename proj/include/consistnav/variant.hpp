#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace consistnav {

// Ablation staging: each row adds one executive component.
enum class Variant { Baseline, PCM, PCM_FSEC, Full };

inline constexpr std::array<Variant, 4> kAllVariants = {Variant::Baseline, Variant::PCM,
                                                        Variant::PCM_FSEC, Variant::Full};

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view s);

struct VariantFeatures {
  bool memory = false;  // persistent candidate memory
  bool fse = false;     // finite-state executive + verified gate
  bool guards = false;  // anti-spin, stall, stop interception, recovery motion
};

constexpr VariantFeatures features(Variant v) {
  switch (v) {
    case Variant::Baseline: return {false, false, false};
    case Variant::PCM: return {true, false, false};
    case Variant::PCM_FSEC: return {true, true, false};
    case Variant::Full: return {true, true, true};
  }
  return {};
}

}  // namespace consistnav
