#include "clustergas/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "clustergas/errors.hpp"
#include "clustergas/io.hpp"

namespace clustergas {

namespace {

using Value = std::variant<double, long long, std::string, bool>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

Value parse_value(const std::string& raw, const std::string& path) {
  if (raw.empty()) throw ConfigError("missing value for " + path);
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw ConfigError("unterminated string for " + path);
    return raw.substr(1, raw.size() - 2);
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  const bool integral = raw.find_first_of(".eEna") == std::string::npos;
  if (integral) {
    long long v = 0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec == std::errc() && p == raw.data() + raw.size()) return v;
  }
  double d = 0.0;
  auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), d);
  if (ec != std::errc() || p != raw.data() + raw.size())
    throw ConfigError("cannot parse value '" + raw + "' for " + path);
  return d;
}

double as_double(const Value& v, const std::string& path) {
  if (auto d = std::get_if<double>(&v)) return *d;
  if (auto i = std::get_if<long long>(&v)) return static_cast<double>(*i);
  throw ConfigError(path + " must be a number");
}

long long as_int(const Value& v, const std::string& path) {
  if (auto i = std::get_if<long long>(&v)) return *i;
  throw ConfigError(path + " must be an integer");
}

std::string as_string(const Value& v, const std::string& path) {
  if (auto s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError(path + " must be a string");
}

using Setter = std::function<void(Config&, const Value&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"potential.form", [](Config& c, const Value& v, const std::string& p) { c.potential.form = as_string(v, p); }},
      {"potential.r_hc", [](Config& c, const Value& v, const std::string& p) { c.potential.r_hc = as_double(v, p); }},
      {"potential.b", [](Config& c, const Value& v, const std::string& p) { c.potential.b = as_double(v, p); }},
      {"potential.epsilon", [](Config& c, const Value& v, const std::string& p) { c.potential.epsilon = as_double(v, p); }},
      {"potential.sigma", [](Config& c, const Value& v, const std::string& p) { c.potential.sigma = as_double(v, p); }},
      {"potential.c12", [](Config& c, const Value& v, const std::string& p) { c.potential.c12 = as_double(v, p); }},
      {"potential.c6", [](Config& c, const Value& v, const std::string& p) { c.potential.c6 = as_double(v, p); }},
      {"potential.taper_width", [](Config& c, const Value& v, const std::string& p) { c.potential.taper_width = as_double(v, p); }},
      {"potential.holder_exponent", [](Config& c, const Value& v, const std::string& p) { c.potential.holder_exponent = as_double(v, p); }},
      {"potential.holder_constant", [](Config& c, const Value& v, const std::string& p) { c.potential.holder_constant = as_double(v, p); }},
      {"potential.holder_r_min", [](Config& c, const Value& v, const std::string& p) { c.potential.holder_r_min = as_double(v, p); }},
      {"box.dim", [](Config& c, const Value& v, const std::string& p) { c.box.dim = static_cast<int>(as_int(v, p)); }},
      {"box.R", [](Config& c, const Value& v, const std::string& p) { c.box.R = as_double(v, p); }},
      {"box.N", [](Config& c, const Value& v, const std::string& p) { c.box.N = static_cast<int>(as_int(v, p)); }},
      {"box.L", [](Config& c, const Value& v, const std::string& p) { c.box.L = as_double(v, p); }},
      {"box.beta", [](Config& c, const Value& v, const std::string& p) { c.box.beta = as_double(v, p); }},
      {"mc.n_sweeps", [](Config& c, const Value& v, const std::string& p) { c.mc.n_sweeps = as_int(v, p); }},
      {"mc.burn_in_sweeps", [](Config& c, const Value& v, const std::string& p) { c.mc.burn_in_sweeps = as_int(v, p); }},
      {"mc.step_size", [](Config& c, const Value& v, const std::string& p) { c.mc.step_size = as_double(v, p); }},
      {"mc.measure_every", [](Config& c, const Value& v, const std::string& p) { c.mc.measure_every = as_int(v, p); }},
      {"mc.replicas", [](Config& c, const Value& v, const std::string& p) { c.mc.replicas = static_cast<int>(as_int(v, p)); }},
      {"mc.seed", [](Config& c, const Value& v, const std::string& p) { c.mc.seed = static_cast<std::uint64_t>(as_int(v, p)); }},
      {"mc.k_max_trace", [](Config& c, const Value& v, const std::string& p) { c.mc.k_max_trace = static_cast<int>(as_int(v, p)); }},
      {"mc.batches", [](Config& c, const Value& v, const std::string& p) { c.mc.batches = static_cast<int>(as_int(v, p)); }},
      {"mc.snapshot_every", [](Config& c, const Value& v, const std::string& p) { c.mc.snapshot_every = as_int(v, p); }},
      {"variational.k_max", [](Config& c, const Value& v, const std::string& p) { c.variational.k_max = static_cast<int>(as_int(v, p)); }},
      {"variational.multistarts", [](Config& c, const Value& v, const std::string& p) { c.variational.multistarts = static_cast<int>(as_int(v, p)); }},
      {"variational.hops", [](Config& c, const Value& v, const std::string& p) { c.variational.hops = static_cast<int>(as_int(v, p)); }},
      {"variational.nu_min", [](Config& c, const Value& v, const std::string& p) { c.variational.nu_min = as_double(v, p); }},
      {"variational.nu_max", [](Config& c, const Value& v, const std::string& p) { c.variational.nu_max = as_double(v, p); }},
      {"variational.grid_count", [](Config& c, const Value& v, const std::string& p) { c.variational.grid_count = static_cast<int>(as_int(v, p)); }},
      {"variational.seed", [](Config& c, const Value& v, const std::string& p) { c.variational.seed = static_cast<std::uint64_t>(as_int(v, p)); }},
  };
  return table;
}

}  // namespace

PotentialSpec Config::potential_spec() const {
  const PotentialConfig& p = potential;
  std::optional<HolderData> holder;
  const int given = p.holder_exponent.has_value() + p.holder_constant.has_value() +
                    p.holder_r_min.has_value();
  if (given != 0 && given != 3)
    throw ConfigError("potential.holder_exponent, holder_constant and holder_r_min go together");
  if (given == 3) holder = HolderData{*p.holder_exponent, *p.holder_constant, *p.holder_r_min};
  if (p.form == "lennard_jones")
    return PotentialSpec(p.r_hc, p.b, LennardJonesForm{p.epsilon, p.sigma, p.taper_width}, holder);
  if (p.form == "inverse_power")
    return PotentialSpec(p.r_hc, p.b, InversePowerForm{p.c12, p.c6, p.taper_width}, holder);
  throw ConfigError("potential.form must be \"lennard_jones\" or \"inverse_power\", got \"" +
                    p.form + "\"");
}

Config parse_config(const std::string& text) {
  static const std::set<std::string> sections = {"potential", "box", "mc", "variational"};
  Config c;
  std::set<std::string> seen;
  std::string section;
  bool empty_unknown = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (empty_unknown) throw ConfigError("unknown section [" + section + "]");
      if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = trim(s.substr(1, s.size() - 2));
      empty_unknown = !sections.count(section);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (section.empty() && key.find('.') == std::string::npos)
      throw ConfigError("key '" + key + "' outside any section");
    const std::string path = section.empty() ? key : section + "." + key;
    auto it = setters().find(path);
    if (it == setters().end()) throw ConfigError("unknown key " + path);
    if (!seen.insert(path).second) throw ConfigError("duplicate key " + path);
    it->second(c, parse_value(trim(s.substr(eq + 1)), path), path);
  }
  if (empty_unknown) throw ConfigError("unknown section [" + section + "]");
  if (!seen.count("box.dim")) throw ConfigError("missing required key box.dim");
  if (c.box.dim < 1 || c.box.dim > 3) throw ConfigError("box.dim must be 1, 2 or 3");
  try {
    (void)c.potential_spec();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("[potential]: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("[potential]: ") + e.what());
  }
  return c;
}

Config load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(read_text_file(path));
}

std::string to_toml(const Config& c) {
  std::ostringstream os;
  auto num = [](double x) { return fmt_double(x); };
  const PotentialConfig& p = c.potential;
  os << "[potential]\n"
     << "form = \"" << p.form << "\"\n"
     << "r_hc = " << num(p.r_hc) << "\n"
     << "b = " << num(p.b) << "\n"
     << "epsilon = " << num(p.epsilon) << "\n"
     << "sigma = " << num(p.sigma) << "\n"
     << "c12 = " << num(p.c12) << "\n"
     << "c6 = " << num(p.c6) << "\n"
     << "taper_width = " << num(p.taper_width) << "\n";
  if (p.holder_exponent) os << "holder_exponent = " << num(*p.holder_exponent) << "\n";
  if (p.holder_constant) os << "holder_constant = " << num(*p.holder_constant) << "\n";
  if (p.holder_r_min) os << "holder_r_min = " << num(*p.holder_r_min) << "\n";
  os << "\n[box]\n"
     << "dim = " << c.box.dim << "\n"
     << "R = " << num(c.box.R) << "\n";
  if (c.box.N) os << "N = " << *c.box.N << "\n";
  if (c.box.L) os << "L = " << num(*c.box.L) << "\n";
  if (c.box.beta) os << "beta = " << num(*c.box.beta) << "\n";
  const MCParams& m = c.mc;
  os << "\n[mc]\n"
     << "n_sweeps = " << m.n_sweeps << "\n"
     << "burn_in_sweeps = " << m.burn_in_sweeps << "\n"
     << "step_size = " << num(m.step_size) << "\n"
     << "measure_every = " << m.measure_every << "\n"
     << "replicas = " << m.replicas << "\n"
     << "seed = " << m.seed << "\n"
     << "k_max_trace = " << m.k_max_trace << "\n"
     << "batches = " << m.batches << "\n"
     << "snapshot_every = " << m.snapshot_every << "\n";
  const VariationalConfig& v = c.variational;
  os << "\n[variational]\n"
     << "k_max = " << v.k_max << "\n"
     << "multistarts = " << v.multistarts << "\n"
     << "hops = " << v.hops << "\n"
     << "nu_min = " << num(v.nu_min) << "\n"
     << "nu_max = " << num(v.nu_max) << "\n"
     << "grid_count = " << v.grid_count << "\n"
     << "seed = " << v.seed << "\n";
  return os.str();
}

}  // namespace clustergas
