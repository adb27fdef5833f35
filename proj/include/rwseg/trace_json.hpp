#pragma once

#include <json.hpp>

#include <ostream>
#include <string>

#include "rwseg/feedback.hpp"

namespace rwseg {

inline nlohmann::json to_json(const IterationRecord& r) {
  nlohmann::json j{
      {"iteration", r.iteration},
      {"potential", r.potential},
      {"boundary", r.boundary_count},
      {"added_foreground", r.added_foreground},
      {"added_background", r.added_background},
      {"foreground_seeds", r.foreground_seeds},
      {"background_seeds", r.background_seeds},
      {"labels_id", r.labels_id},
  };
  if (r.error_count) j["error_count"] = *r.error_count;
  if (r.error_rate) j["error_rate"] = *r.error_rate;
  return j;
}

inline nlohmann::json to_json(const IterationTrace& t) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : t.records) records.push_back(to_json(r));
  return {{"records", records},
          {"stop", to_string(t.stop)},
          {"xi", t.xi},
          {"degraded", t.degraded},
          {"notes", t.notes}};
}

/// One JSON object per line, one line per trace record.
inline void write_json_lines(std::ostream& out, const IterationTrace& t) {
  for (const auto& r : t.records) out << to_json(r).dump() << '\n';
}

inline std::string to_json_lines(const IterationTrace& t) {
  std::string s;
  for (const auto& r : t.records) s += to_json(r).dump() + '\n';
  return s;
}

inline nlohmann::json to_json(const FeedbackParams& p) {
  nlohmann::json j{{"epsilon", p.epsilon_seed},       {"delta", p.delta},
                   {"lambda", p.lambda},              {"xi_relative", p.xi_relative},
                   {"max_iter", p.max_outer_iterations}, {"sample_fraction", p.sample_fraction},
                   {"rng_seed", p.rng_seed},          {"beta", p.beta},
                   {"weight_floor", p.weight_floor}};
  j["xi"] = p.xi ? nlohmann::json(*p.xi) : nlohmann::json(nullptr);
  return j;
}

/// Overlays the keys present in `j` onto `p`; unknown keys are rejected.
inline void apply_overrides(FeedbackParams& p, const nlohmann::json& j) {
  if (j.is_null()) return;
  if (!j.is_object()) throw Error(ErrorCode::invalid_input, "params must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    const auto& v = it.value();
    try {
      if (k == "epsilon") p.epsilon_seed = v.get<double>();
      else if (k == "delta") p.delta = v.get<double>();
      else if (k == "lambda") p.lambda = v.get<double>();
      else if (k == "xi") p.xi = v.is_null() ? std::optional<double>{} : std::optional<double>{v.get<double>()};
      else if (k == "xi_relative") p.xi_relative = v.get<double>();
      else if (k == "max_iter") p.max_outer_iterations = v.get<int>();
      else if (k == "sample_fraction") p.sample_fraction = v.get<double>();
      else if (k == "rng_seed") p.rng_seed = v.get<std::uint64_t>();
      else if (k == "beta") p.beta = v.get<double>();
      else if (k == "weight_floor") p.weight_floor = v.get<double>();
      else throw Error(ErrorCode::invalid_input, "unknown parameter '" + k + "'");
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::invalid_input, "parameter '" + k + "' has the wrong type");
    }
  }
  p.validate();
}

}  // namespace rwseg
