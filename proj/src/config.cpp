#include "commcost/config.hpp"

#include <istream>

#include <fmt/format.h>

#include "commcost/csv.hpp"
#include "commcost/errors.hpp"

namespace commcost {

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(fmt::format("config line {}: expected key = value", lineno));
    std::string key(trim(view.substr(0, eq)));
    std::string value(trim(view.substr(eq + 1)));
    if (key.empty()) throw ParseError(fmt::format("config line {}: empty key", lineno));
    if (!kv.emplace(key, value).second) throw ParseError(fmt::format("config line {}: duplicate key '{}'", lineno, key));
  }
  return kv;
}

const std::map<std::string, std::string>& simulation_defaults() {
  // empty value = unset (gamma falls back to the compressor-aware default)
  static const std::map<std::string, std::string> defaults = {
      {"n", "8"},
      {"d", "100"},
      {"steps", "50"},
      {"gamma", ""},
      {"compressor.kind", "identity"},
      {"compressor.k", "1"},
      {"compressor.r", "1"},
      {"alpha", "1e-4"},
      {"beta", "1e-9"},
      {"alpha_m", "0"},
      {"beta_m", "0"},
      {"seed", "0"},
      {"downlink_compressed", "false"},
      {"charge_downlink", "true"},
      {"problem", "mean"},
  };
  return defaults;
}

SimulationSettings resolve_simulation(const KeyValues& overrides) {
  SimulationSettings s;
  s.resolved = simulation_defaults();
  for (const auto& [key, value] : overrides) {
    auto it = s.resolved.find(key);
    if (it == s.resolved.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
    it->second = value;
  }
  const auto& r = s.resolved;
  try {
    s.n = parse_uint(r.at("n"));
    s.d = parse_uint(r.at("d"));
    if (s.n == 0 || s.d == 0) throw ConfigError("n and d must be >= 1");

    const auto& problem = r.at("problem");
    if (problem == "mean") {
      s.problem = ProblemKind::mean;
    } else if (problem == "quadratic") {
      s.problem = ProblemKind::quadratic;
    } else {
      throw ConfigError(fmt::format("problem must be mean or quadratic, got '{}'", problem));
    }

    s.sim.steps = parse_uint(r.at("steps"));
    if (s.sim.steps == 0) throw ConfigError("steps must be >= 1");
    if (!r.at("gamma").empty()) {
      s.sim.gamma = parse_double(r.at("gamma"));
      if (!(*s.sim.gamma > 0.0)) throw ConfigError("gamma must be > 0");
    }

    const auto kind = parse_compressor_kind(r.at("compressor.kind"));
    s.sim.compressor = CompressorSpec{kind, 0, 0, std::nullopt};
    if (kind == CompressorKind::rand_k || kind == CompressorKind::top_k) s.sim.compressor.k = parse_uint(r.at("compressor.k"));
    if (kind == CompressorKind::rank_r) s.sim.compressor.r = parse_uint(r.at("compressor.r"));
    s.sim.compressor.validate(s.d);

    s.sim.time_model = TimeModelParams(parse_double(r.at("alpha")), parse_double(r.at("beta")),
                                       parse_double(r.at("alpha_m")), parse_double(r.at("beta_m")));
    s.sim.seed = parse_uint(r.at("seed"));
    s.sim.downlink_compressed = parse_bool(r.at("downlink_compressed"));
    s.sim.charge_downlink = parse_bool(r.at("charge_downlink"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return s;
}

Problem SimulationSettings::make_problem() const {
  if (problem == ProblemKind::mean) return Problem::random_mean(n, d, sim.seed);
  return Problem::random_quadratic(n, d, sim.seed);
}

}  // namespace commcost
