#include "bfd/config.hpp"

#include "bfd/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace bfd {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"grid", {"n", "radius"}},
      {"kernel", {"gamma", "b0", "angular_table", "speed_cap", "c_b_lower", "alpha", "n_theta", "n_phi"}},
      {"time", {"t_end", "dt", "cfl", "dt_max", "projection", "threads"}},
      {"init", {"type", "amplitude", "radius", "width", "rho", "T", "center", "path"}},
      {"output", {"dir", "every", "snapshots"}},
      {"verify", {"seed"}},
  };
  return keys;
}

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ValidationError, key + ": " + why);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) invalid(key, "expected a number, got '" + t + "'");
  return value;
}

long to_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) invalid(key, "expected an integer, got '" + t + "'");
  return value;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  invalid(key, "expected a boolean, got '" + t + "'");
}

Vec3d to_vec3(const std::string& key, const std::string& text) {
  std::string t = text;
  for (char& ch : t) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream is(t);
  std::string a, b, c, extra;
  if (!(is >> a >> b >> c) || (is >> extra)) invalid(key, "expected three components");
  return {to_double(key, a), to_double(key, b), to_double(key, c)};
}

InitialCondition::Kind to_kind(const std::string& key, const std::string& text) {
  using Kind = InitialCondition::Kind;
  static const std::map<std::string, Kind> kinds = {
      {"zero", Kind::Zero},           {"indicator", Kind::Indicator}, {"gaussian", Kind::Gaussian},
      {"equilibrium", Kind::Equilibrium}, {"saturated", Kind::Saturated}, {"snapshot", Kind::Snapshot},
  };
  const auto it = kinds.find(trim(text));
  if (it == kinds.end()) invalid(key, "unknown initial condition '" + trim(text) + "'");
  return it->second;
}

const char* kind_name(InitialCondition::Kind k) {
  using Kind = InitialCondition::Kind;
  switch (k) {
    case Kind::Zero: return "zero";
    case Kind::Indicator: return "indicator";
    case Kind::Gaussian: return "gaussian";
    case Kind::Equilibrium: return "equilibrium";
    case Kind::Saturated: return "saturated";
    case Kind::Snapshot: return "snapshot";
  }
  return "?";
}

void apply(SimulationConfig& c, const std::string& section, const std::string& name, const std::string& value) {
  const auto sec = known_keys().find(section);
  const std::string key = section + "." + name;
  if (sec == known_keys().end() || !sec->second.count(name)) invalid(key, "unknown key");
  if (section == "grid") {
    if (name == "n") c.n = static_cast<int>(to_int(key, value));
    if (name == "radius") c.radius = to_double(key, value);
  } else if (section == "kernel") {
    if (name == "gamma") c.kernel.gamma = to_double(key, value);
    if (name == "b0") {
      const double b0 = to_double(key, value);
      if (!(b0 > 0.0) || !std::isfinite(b0)) invalid(key, "must be positive and finite");
      c.kernel.angular = AngularLaw::constant(b0);
    }
    if (name == "angular_table") c.angular_table = trim(value);
    if (name == "speed_cap") {
      const double cap = to_double(key, value);
      if (std::isinf(cap) && cap > 0) {
        c.kernel.speed_cap.reset();
      } else {
        c.kernel.speed_cap = cap;
      }
    }
    if (name == "c_b_lower") c.kernel.c_b_lower = to_double(key, value);
    if (name == "alpha") c.kernel.alpha = to_double(key, value);
    if (name == "n_theta") c.n_theta = static_cast<int>(to_int(key, value));
    if (name == "n_phi") c.n_phi = static_cast<int>(to_int(key, value));
  } else if (section == "time") {
    if (name == "t_end") c.t_end = to_double(key, value);
    if (name == "dt") c.dt_policy.dt = to_double(key, value);
    if (name == "cfl") c.dt_policy.cfl = to_double(key, value);
    if (name == "dt_max") c.dt_policy.dt_max = to_double(key, value);
    if (name == "projection") c.projection = to_bool(key, value);
    if (name == "threads") c.threads = static_cast<int>(to_int(key, value));
  } else if (section == "init") {
    if (name == "type") c.init.kind = to_kind(key, value);
    if (name == "amplitude") c.init.amplitude = to_double(key, value);
    if (name == "radius") c.init.radius = to_double(key, value);
    if (name == "width") c.init.width = to_double(key, value);
    if (name == "rho") c.init.rho = to_double(key, value);
    if (name == "T") c.init.T = to_double(key, value);
    if (name == "center") c.init.center = to_vec3(key, value);
    if (name == "path") c.init.path = trim(value);
  } else if (section == "output") {
    if (name == "dir") c.output_dir = trim(value);
    if (name == "every") c.output_every = static_cast<int>(to_int(key, value));
    if (name == "snapshots") c.write_snapshots = to_bool(key, value);
  } else if (section == "verify") {
    if (name == "seed") {
      const long s = to_int(key, value);
      if (s < 0) invalid(key, "must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    }
  }
}

SimulationConfig from_tree(const pt::ptree& tree, const std::vector<std::string>& overrides) {
  SimulationConfig c;
  // Environment fallback; an explicit time.threads wins.
  if (const char* env = std::getenv("BFD_THREADS")) {
    try {
      c.threads = static_cast<int>(to_int("BFD_THREADS", env));
    } catch (const Error&) {
      c.threads = 0;
    }
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) invalid(section, "key outside any section");
    for (const auto& [name, leaf] : body) apply(c, section, name, leaf.data());
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      invalid(o, "override must look like section.key=value");
    }
    apply(c, trim(o.substr(0, dot)), trim(o.substr(dot + 1, eq - dot - 1)), o.substr(eq + 1));
  }
  c.validate();
  return c;
}

pt::ptree read_tree(std::istream& is, const std::string& origin) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ParseError, origin + " line " + std::to_string(e.line()) + ": " + e.message());
  }
  return tree;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

SimulationConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open config " + path);
  return from_tree(read_tree(is, path), overrides);
}

SimulationConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  std::istringstream is(text);
  return from_tree(read_tree(is, "<text>"), overrides);
}

std::string config_echo(const SimulationConfig& c) {
  std::ostringstream os;
  os << "[grid]\nn = " << c.n << "\nradius = " << fmt(c.radius) << "\n\n";
  os << "[kernel]\ngamma = " << fmt(c.kernel.gamma) << '\n';
  if (c.angular_table.empty()) {
    os << "b0 = " << fmt(c.kernel.angular.constant_value()) << '\n';
  } else {
    os << "angular_table = " << c.angular_table << '\n';
  }
  if (c.kernel.speed_cap) os << "speed_cap = " << fmt(*c.kernel.speed_cap) << '\n';
  if (c.kernel.c_b_lower) os << "c_b_lower = " << fmt(*c.kernel.c_b_lower) << '\n';
  if (c.kernel.alpha) os << "alpha = " << fmt(*c.kernel.alpha) << '\n';
  os << "n_theta = " << c.n_theta << "\nn_phi = " << c.n_phi << "\n\n";
  os << "[time]\nt_end = " << fmt(c.t_end) << "\ndt = " << fmt(c.dt_policy.dt) << "\ncfl = " << fmt(c.dt_policy.cfl)
     << "\ndt_max = " << fmt(c.dt_policy.dt_max) << "\nprojection = " << (c.projection ? "true" : "false")
     << "\nthreads = " << c.threads << "\n\n";
  os << "[init]\ntype = " << kind_name(c.init.kind) << "\namplitude = " << fmt(c.init.amplitude)
     << "\nradius = " << fmt(c.init.radius) << "\nwidth = " << fmt(c.init.width) << "\nrho = " << fmt(c.init.rho)
     << "\nT = " << fmt(c.init.T) << "\ncenter = " << fmt(c.init.center.x()) << ", " << fmt(c.init.center.y())
     << ", " << fmt(c.init.center.z()) << '\n';
  if (!c.init.path.empty()) os << "path = " << c.init.path << '\n';
  os << "\n[output]\ndir = " << c.output_dir << "\nevery = " << c.output_every
     << "\nsnapshots = " << (c.write_snapshots ? "true" : "false") << "\n\n";
  os << "[verify]\nseed = " << c.seed << '\n';
  return os.str();
}

std::string config_fingerprint(const SimulationConfig& config) {
  // Worker count never changes results, so it stays out of the fingerprint.
  SimulationConfig canonical = config;
  canonical.threads = 0;
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config_echo(canonical)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace bfd
