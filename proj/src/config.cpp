#include "consistnav/config.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "consistnav/errors.hpp"
#include "consistnav/variant.hpp"

namespace consistnav {

using nlohmann::json;

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Baseline: return "Baseline";
    case Variant::PCM: return "PCM";
    case Variant::PCM_FSEC: return "PCM_FSEC";
    case Variant::Full: return "Full";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view s) {
  for (Variant v : kAllVariants) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

void BaselineConfig::validate() const {
  if (!(pursue_confidence >= 0 && pursue_confidence <= 1)) throw InvalidArgument("baseline: bad pursue_confidence");
  if (!(stop_radius > 0)) throw InvalidArgument("baseline: stop_radius must be positive");
}

void SimConfig::validate() const {
  memory.validate();
  fse.validate();
  guard.validate();
  detector.validate();
  episode.validate();
  baseline.validate();
  if (!(absence.range_fraction > 0 && absence.range_fraction <= 1) || !(absence.fov_margin >= 0)) {
    throw InvalidArgument("absence: bad range_fraction or fov_margin");
  }
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// One serialisable field of a config section. Angles are stored in radians
// and written in degrees.
template <typename S>
struct Field {
  const char* name;
  double S::*d = nullptr;
  int S::*i = nullptr;
  bool S::*b = nullptr;
  std::uint64_t S::*u = nullptr;
  bool degrees = false;
};

template <typename S>
Field<S> num(const char* n, double S::*m) { return {n, m}; }
template <typename S>
Field<S> deg(const char* n, double S::*m) { return {n, m, nullptr, nullptr, nullptr, true}; }
template <typename S>
Field<S> integer(const char* n, int S::*m) { return {n, nullptr, m}; }
template <typename S>
Field<S> flag(const char* n, bool S::*m) { return {n, nullptr, nullptr, m}; }

template <typename S>
json write_section(const S& s, const std::vector<Field<S>>& fields) {
  json j = json::object();
  for (const auto& f : fields) {
    if (f.d) j[f.name] = f.degrees ? s.*f.d / kDeg : s.*f.d;
    else if (f.i) j[f.name] = s.*f.i;
    else if (f.b) j[f.name] = s.*f.b;
    else j[f.name] = s.*f.u;
  }
  return j;
}

template <typename S>
void read_section(S& s, const json& j, const std::vector<Field<S>>& fields, const std::string& section) {
  if (!j.is_object()) throw SchemaError("config section '" + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const Field<S>* match = nullptr;
    for (const auto& f : fields) {
      if (it.key() == f.name) match = &f;
    }
    if (!match) throw SchemaError("unknown config key '" + section + "." + it.key() + "'");
    const json& v = it.value();
    const std::string where = section + "." + it.key();
    if (match->b) {
      if (!v.is_boolean()) throw SchemaError("config key '" + where + "' must be a boolean");
      s.*match->b = v.get<bool>();
    } else if (match->i) {
      if (!v.is_number_integer()) throw SchemaError("config key '" + where + "' must be an integer");
      s.*match->i = v.get<int>();
    } else if (match->u) {
      if (!v.is_number_unsigned()) throw SchemaError("config key '" + where + "' must be a non-negative integer");
      s.*match->u = v.get<std::uint64_t>();
    } else {
      if (!v.is_number()) throw SchemaError("config key '" + where + "' must be a number");
      s.*match->d = v.get<double>() * (match->degrees ? kDeg : 1.0);
    }
  }
}

const std::vector<Field<MemoryConfig>>& memory_fields() {
  using M = MemoryConfig;
  static const std::vector<Field<M>> f{
      num("merge_radius", &M::merge_radius), num("ema_lambda", &M::ema_lambda), num("alpha", &M::alpha),
      num("beta", &M::beta), num("w_c", &M::w_c), num("w_r", &M::w_r), num("w_o", &M::w_o),
      num("w_itm", &M::w_itm), num("w_f", &M::w_f), num("epsilon", &M::epsilon), num("tau_c", &M::tau_c),
      num("tau_cons", &M::tau_cons), integer("stale_after", &M::stale_after),
      integer("cooldown_steps", &M::cooldown_steps), integer("itm_window", &M::itm_window),
      num("stale_penalty", &M::stale_penalty), num("visit_penalty", &M::visit_penalty),
      integer("visit_window", &M::visit_window), num("failure_decay", &M::failure_decay),
      integer("freeze_after", &M::freeze_after)};
  return f;
}

const std::vector<Field<FseConfig>>& fse_fields() {
  using F = FseConfig;
  static const std::vector<Field<F>> f{
      num("r_v", &F::r_v), num("r_extra", &F::r_extra), integer("n_verify", &F::n_verify),
      num("r_stop", &F::r_stop), num("tau_conf", &F::tau_conf), integer("m_obs", &F::m_obs),
      num("tau_itm", &F::tau_itm), integer("hit_window", &F::hit_window),
      integer("persistence", &F::persistence), num("strong_confidence", &F::strong_confidence),
      integer("failover_budget", &F::failover_budget), integer("max_failover_entries", &F::max_failover_entries),
      integer("verify_timeout", &F::verify_timeout), integer("dock_timeout", &F::dock_timeout)};
  return f;
}

const std::vector<Field<GuardConfig>>& guard_fields() {
  using G = GuardConfig;
  static const std::vector<Field<G>> f{
      num("delta_move", &G::delta_move), integer("spin_cap", &G::spin_cap),
      num("progress_margin", &G::progress_margin), integer("stall_steps", &G::stall_steps),
      integer("recovery_budget", &G::recovery_budget), num("lambda_visited", &G::lambda_visited),
      num("lambda_failed", &G::lambda_failed), deg("heading_tolerance_deg", &G::heading_tolerance),
      num("failed_region_radius", &G::failed_region_radius), integer("failed_region_ttl", &G::failed_region_ttl),
      integer("escape_moves", &G::escape_moves)};
  return f;
}

const std::vector<Field<DetectorConfig>>& detector_fields() {
  using D = DetectorConfig;
  static const std::vector<Field<D>> f{
      num("sensing_range", &D::sensing_range), deg("fov_deg", &D::fov), num("p_detect", &D::p_detect),
      num("p_confuse", &D::p_confuse), num("p_hallucinate", &D::p_hallucinate),
      num("conf_true_mean", &D::conf_true_mean), num("conf_true_sd", &D::conf_true_sd),
      num("conf_false_mean", &D::conf_false_mean), num("conf_false_sd", &D::conf_false_sd),
      num("itm_true_mean", &D::itm_true_mean), num("itm_true_sd", &D::itm_true_sd),
      num("itm_false_mean", &D::itm_false_mean), num("itm_false_sd", &D::itm_false_sd),
      num("pos_noise_sd", &D::pos_noise_sd), integer("blackout_from", &D::blackout_from),
      integer("blackout_until", &D::blackout_until)};
  return f;
}

const std::vector<Field<EpisodeConfig>>& episode_fields() {
  using E = EpisodeConfig;
  static const std::vector<Field<E>> f{integer("max_steps", &E::max_steps), num("success_radius", &E::success_radius),
                                       num("forward_step", &E::forward_step), deg("turn_angle_deg", &E::turn_angle),
                                       {"seed", nullptr, nullptr, nullptr, &E::seed}};
  return f;
}

const std::vector<Field<BaselineConfig>>& baseline_fields() {
  using B = BaselineConfig;
  static const std::vector<Field<B>> f{num("pursue_confidence", &B::pursue_confidence),
                                       num("stop_radius", &B::stop_radius)};
  return f;
}

const std::vector<Field<AbsenceConfig>>& absence_fields() {
  using A = AbsenceConfig;
  static const std::vector<Field<A>> f{flag("enabled", &A::enabled), num("range_fraction", &A::range_fraction),
                                       deg("fov_margin_deg", &A::fov_margin)};
  return f;
}

}  // namespace

json to_json(const SimConfig& c) {
  return {{"memory", write_section(c.memory, memory_fields())},
          {"fse", write_section(c.fse, fse_fields())},
          {"guard", write_section(c.guard, guard_fields())},
          {"detector", write_section(c.detector, detector_fields())},
          {"episode", write_section(c.episode, episode_fields())},
          {"baseline", write_section(c.baseline, baseline_fields())},
          {"absence", write_section(c.absence, absence_fields())}};
}

SimConfig config_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("config must be a JSON object");
  SimConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "memory") read_section(c.memory, it.value(), memory_fields(), k);
    else if (k == "fse") read_section(c.fse, it.value(), fse_fields(), k);
    else if (k == "guard") read_section(c.guard, it.value(), guard_fields(), k);
    else if (k == "detector") read_section(c.detector, it.value(), detector_fields(), k);
    else if (k == "episode") read_section(c.episode, it.value(), episode_fields(), k);
    else if (k == "baseline") read_section(c.baseline, it.value(), baseline_fields(), k);
    else if (k == "absence") read_section(c.absence, it.value(), absence_fields(), k);
    else throw SchemaError("unknown config section '" + k + "'");
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("invalid config: ") + e.what());
  }
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace consistnav
