#include "swarm/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "swarm/errors.hpp"

namespace swarm {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

SimMode parse_mode(const std::string& name) {
  if (name == "nominal") return SimMode::Nominal;
  if (name == "tunable") return SimMode::Tunable;
  if (name == "tunable-from-nominal") return SimMode::TunableFromNominal;
  throw ConfigError("unknown mode '" + name +
                    "' (expected nominal | tunable | tunable-from-nominal)");
}

std::string mode_name(SimMode mode) {
  switch (mode) {
    case SimMode::Nominal: return "nominal";
    case SimMode::Tunable: return "tunable";
    case SimMode::TunableFromNominal: return "tunable-from-nominal";
  }
  return "?";
}

long Scenario::n_steps() const { return std::lround(horizon / dt); }

void Scenario::validate() const {
  try {
    potential.validate();
    impedance.validate();
    alpha_bounds.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n_robots < 1) throw ConfigError("n_robots must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("sim.dt must be > 0");
  if (!(horizon >= dt)) throw ConfigError("sim.horizon must be >= sim.dt");
  if (!(t_bar > 0.0)) throw ConfigError("controller.t_bar must be > 0");
  if (!(beta >= 0.0)) throw ConfigError("coupling.beta must be >= 0");
  if (!(mass > 0.0)) throw ConfigError("robots.mass must be > 0");
  if (!(local_damping > 0.0)) {
    throw ConfigError("robots.local_damping must be > 0");
  }
  if (!(alpha_nominal > 0.0)) {
    throw ConfigError("scaling.alpha_nominal must be > 0");
  }
  if (!(gamma_cap > 0.0)) throw ConfigError("controller.gamma_cap must be > 0");
  if (init.box_side < 0.0) throw ConfigError("init.box_side must be >= 0");
  if (!(init.margin >= 0.0)) throw ConfigError("init.margin must be >= 0");
  if (init.max_attempts < 1) throw ConfigError("init.max_attempts must be >= 1");
}

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
  bool used = false;
};

class ConfigReader {
public:
  ConfigReader(const std::string& text, const std::string& origin)
      : origin_(origin) {
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        fail(line_no, "expected 'key = value', got '" + trimmed + "'");
      }
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) fail(line_no, "empty key");
      if (value.empty()) fail(line_no, "empty value for field '" + key + "'");
      if (entries_.count(key)) {
        fail(line_no, "duplicate field '" + key + "'");
      }
      entries_[key] = RawEntry{value, line_no, false};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  double require_double(const std::string& key) {
    const RawEntry& e = require(key);
    return to_double(key, e);
  }

  double get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return to_double(key, take(key));
  }

  long get_long(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    const RawEntry& e = take(key);
    long out = 0;
    const auto res =
        std::from_chars(e.value.data(), e.value.data() + e.value.size(), out);
    if (res.ec != std::errc() || res.ptr != e.value.data() + e.value.size()) {
      fail(e.line, "field '" + key + "' expects an integer, got '" + e.value +
                       "'");
    }
    return out;
  }

  long require_long(const std::string& key) {
    require(key);
    return get_long(key, 0);
  }

  bool get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const RawEntry& e = take(key);
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    fail(e.line, "field '" + key + "' expects true or false, got '" + e.value +
                     "'");
    return fallback;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    return take(key).value;
  }

  [[noreturn]] void missing(const std::string& key) const {
    throw ConfigError(origin_ + ": missing required field '" + key + "'");
  }

  void check_all_used() const {
    for (const auto& [key, entry] : entries_) {
      if (!entry.used) {
        fail(entry.line, "unknown field '" + key + "'");
      }
    }
  }

  [[noreturn]] void fail(int line, const std::string& message) const {
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + message);
  }

private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
  }

  const RawEntry& require(const std::string& key) {
    if (!has(key)) missing(key);
    return take(key);
  }

  const RawEntry& take(const std::string& key) {
    RawEntry& e = entries_.at(key);
    e.used = true;
    return e;
  }

  double to_double(const std::string& key, const RawEntry& e) const {
    try {
      size_t pos = 0;
      const double out = std::stod(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument(e.value);
      return out;
    } catch (const std::exception&) {
      fail(e.line,
           "field '" + key + "' expects a number, got '" + e.value + "'");
    }
  }

  std::string origin_;
  std::map<std::string, RawEntry> entries_;
};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  ConfigReader reader(text, origin);
  Scenario s;

  s.n_robots = static_cast<int>(reader.require_long("n_robots"));
  s.potential.delta_s = reader.require_double("potential.delta_s");
  s.potential.delta_d = reader.require_double("potential.delta_d");
  s.potential.range = reader.require_double("potential.R");
  s.potential.k_c = reader.get_double("potential.k_c", 1.0);

  s.init.obstacle_enabled = reader.get_bool("obstacle.enabled", true);
  const bool has_x = reader.has("obstacle.x");
  const bool has_y = reader.has("obstacle.y");
  const bool has_z = reader.has("obstacle.z");
  if (has_x != has_y || has_x != has_z) {
    throw ConfigError(origin +
                      ": obstacle.x, obstacle.y, obstacle.z must be given "
                      "together");
  }
  if (has_x) {
    s.init.obstacle_position =
        Eigen::Vector3d(reader.get_double("obstacle.x", 0.0),
                        reader.get_double("obstacle.y", 0.0),
                        reader.get_double("obstacle.z", 0.0));
  }
  s.init.obstacle_clearance = reader.get_double("obstacle.clearance", 20.0);

  s.drive_force = Eigen::Vector3d(reader.get_double("drive.fx", 1.0),
                                  reader.get_double("drive.fy", 0.0),
                                  reader.get_double("drive.fz", 0.0));

  s.mass = reader.get_double("robots.mass", 1.0);
  s.local_damping = reader.get_double("robots.local_damping", 1.0);
  s.beta = reader.get_double("coupling.beta", 1.0);

  s.impedance.kappa_d = reader.get_double("impedance.kappa_d", 1.0);
  s.impedance.beta_d = reader.get_double("impedance.beta_d", 1.0);
  s.impedance.rest_length = reader.get_double("impedance.delta", 1.0);
  s.impedance.rest_speed = reader.get_double("impedance.delta_v", 1.0);

  s.alpha_nominal = reader.get_double("scaling.alpha_nominal", 30.0);
  s.alpha_bounds.lower = reader.get_double("scaling.alpha_min", 1e-4);
  s.alpha_bounds.upper = reader.get_double("scaling.alpha_max", 1e2);

  s.dt = reader.get_double("sim.dt", 1e-3);
  s.horizon = reader.get_double("sim.horizon", 10.0);
  s.seed = static_cast<unsigned long>(reader.get_long("sim.seed", 0));
  s.t_bar = reader.get_double("controller.t_bar", 10.0 * s.dt);
  const std::string gamma_form =
      reader.get_string("controller.gamma_form", "residual");
  if (gamma_form == "residual") {
    s.gamma_form = GammaForm::Residual;
  } else if (gamma_form == "rest_length") {
    s.gamma_form = GammaForm::RestLength;
  } else {
    throw ConfigError(origin + ": controller.gamma_form must be residual or "
                               "rest_length, got '" +
                      gamma_form + "'");
  }
  s.gamma_cap = reader.get_double("controller.gamma_cap", 50.0);

  s.init.box_side = reader.get_double("init.box_side", 0.0);
  s.init.margin = reader.get_double("init.margin", 1.0);
  s.init.max_attempts =
      static_cast<int>(reader.get_long("init.max_attempts", 10000));

  reader.check_all_used();
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_scenario(buffer.str(), path);
}

std::string scenario_echo(const Scenario& s, SimMode mode,
                          const std::optional<Eigen::Vector3d>& obstacle,
                          bool full_state) {
  std::ostringstream out;
  auto put = [&out](const std::string& key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  put("mode", mode_name(mode));
  put("n_robots", std::to_string(s.n_robots));
  put("potential.delta_s", format_double(s.potential.delta_s));
  put("potential.delta_d", format_double(s.potential.delta_d));
  put("potential.R", format_double(s.potential.range));
  put("potential.k_c", format_double(s.potential.k_c));
  put("obstacle.enabled", s.init.obstacle_enabled ? "true" : "false");
  if (obstacle) {
    put("obstacle.x", format_double((*obstacle)[0]));
    put("obstacle.y", format_double((*obstacle)[1]));
    put("obstacle.z", format_double((*obstacle)[2]));
  }
  put("obstacle.clearance", format_double(s.init.obstacle_clearance));
  put("drive.fx", format_double(s.drive_force[0]));
  put("drive.fy", format_double(s.drive_force[1]));
  put("drive.fz", format_double(s.drive_force[2]));
  put("robots.mass", format_double(s.mass));
  put("robots.local_damping", format_double(s.local_damping));
  put("coupling.beta", format_double(s.beta));
  put("impedance.kappa_d", format_double(s.impedance.kappa_d));
  put("impedance.beta_d", format_double(s.impedance.beta_d));
  put("impedance.delta", format_double(s.impedance.rest_length));
  put("impedance.delta_v", format_double(s.impedance.rest_speed));
  put("scaling.alpha_nominal", format_double(s.alpha_nominal));
  put("scaling.alpha_min", format_double(s.alpha_bounds.lower));
  put("scaling.alpha_max", format_double(s.alpha_bounds.upper));
  put("controller.t_bar", format_double(s.t_bar));
  put("controller.gamma_form",
      s.gamma_form == GammaForm::Residual ? "residual" : "rest_length");
  put("controller.gamma_cap", format_double(s.gamma_cap));
  put("sim.dt", format_double(s.dt));
  put("sim.horizon", format_double(s.horizon));
  put("sim.seed", std::to_string(s.seed));
  put("init.box_side", format_double(s.init.box_side));
  put("init.margin", format_double(s.init.margin));
  put("init.max_attempts", std::to_string(s.init.max_attempts));
  put("output.full_state", full_state ? "true" : "false");
  return out.str();
}

}  // namespace swarm
