#include "qkdfs/scenario.hpp"

#include "qkdfs/bb84.hpp"
#include "qkdfs/dpsk.hpp"
#include "qkdfs/error.hpp"
#include "qkdfs/phasetime.hpp"
#include "qkdfs/sarg04.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace qkdfs::scenario {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"scenario", {"protocol", "rounds", "seed", "workers", "format"}},
      {"detectors",
       {"eta", "eta0_t0", "eta0_t1", "eta1_t0", "eta1_t1", "curve0", "curve1", "grid", "normal_eta0",
        "normal_eta1"}},
      {"attack",
       {"enabled", "eve_efficiency", "brightness", "brightness_t0", "brightness_t1", "brightness_normal"}},
      {"bb84", {"random_assignment"}},
      {"phasetime", {"mu"}},
      {"dpsk", {"mu", "frame_length"}},
      {"ekert", {"weights", "footnote_alpha", "normalization"}},
      {"sweep", {"param", "from", "to", "steps"}},
  };
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
    throw ConfigError(key, fmt::format("expected a number, got '{}'", text));
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key, fmt::format("expected a nonnegative integer, got '{}'", text));
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key, fmt::format("expected a boolean, got '{}'", text));
}

double parse_probability(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v < 0.0 || v > 1.0) throw ConfigError(key, "must lie in [0, 1]");
  return v;
}

std::optional<std::string> get(const Settings& s, const std::string& path) {
  if (const auto v = s.get_optional<std::string>(path)) return trim(*v);
  return std::nullopt;
}

Protocol parse_protocol(const std::string& text) {
  if (text == "bb84") return Protocol::bb84;
  if (text == "sarg04") return Protocol::sarg04;
  if (text == "phasetime") return Protocol::phasetime;
  if (text == "dpsk") return Protocol::dpsk;
  if (text == "ekert") return Protocol::ekert;
  throw ConfigError("scenario.protocol", fmt::format("unknown protocol '{}'", text));
}

void check_keys(const Settings& s) {
  for (const auto& [section, body] : s) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      if (body.empty()) throw ConfigError(section, "key outside any section");
      throw ConfigError(section, "unknown section");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) throw ConfigError(section + "." + key, "unknown key");
      if (!value.empty()) throw ConfigError(section + "." + key, "nested keys are not allowed");
    }
  }
}

MismatchSpec parse_detectors(const Settings& s) {
  const auto curve0 = get(s, "detectors.curve0");
  const auto curve1 = get(s, "detectors.curve1");
  const auto eta = get(s, "detectors.eta");
  const bool explicit_etas = s.get_child_optional("detectors.eta0_t0") || s.get_child_optional("detectors.eta0_t1") ||
                             s.get_child_optional("detectors.eta1_t0") || s.get_child_optional("detectors.eta1_t1");

  if (curve0 || curve1) {
    if (!curve0) throw ConfigError("detectors.curve0", "required when detectors.curve1 is set");
    if (!curve1) throw ConfigError("detectors.curve1", "required when detectors.curve0 is set");
    if (eta || explicit_etas) throw ConfigError("detectors.eta", "cannot be combined with efficiency curves");
    auto parse_curve = [](const std::string& key, const std::string& text) {
      try {
        return EfficiencyCurve::parse(text);
      } catch (const Error& e) {
        throw ConfigError(key, e.what());
      }
    };
    const EfficiencyCurve c0 = parse_curve("detectors.curve0", *curve0);
    const EfficiencyCurve c1 = parse_curve("detectors.curve1", *curve1);
    std::vector<ControlValue> grid;
    const std::string grid_text = get(s, "detectors.grid").value_or("-1:1:201");
    {
      const auto a = grid_text.find(':');
      const auto b = grid_text.find(':', a == std::string::npos ? a : a + 1);
      if (a == std::string::npos || b == std::string::npos) {
        throw ConfigError("detectors.grid", "expected from:to:steps");
      }
      const double from = parse_double("detectors.grid", grid_text.substr(0, a));
      const double to = parse_double("detectors.grid", grid_text.substr(a + 1, b - a - 1));
      const auto steps = parse_uint("detectors.grid", grid_text.substr(b + 1));
      if (steps < 2) throw ConfigError("detectors.grid", "needs at least two points");
      grid = linear_grid(from, to, steps);
    }
    try {
      return choose_control_values(DetectorPair(c0, c1), grid).spec;
    } catch (const Error& e) {
      throw ConfigError("detectors.grid", e.what());
    }
  }

  MismatchSpec spec = MismatchSpec::total_mismatch();
  if (eta) {
    if (explicit_etas) throw ConfigError("detectors.eta", "cannot be combined with eta0_t0..eta1_t1");
    spec = MismatchSpec::symmetric(parse_probability("detectors.eta", *eta));
  }
  for (auto [key, field] : {std::pair{"eta0_t0", &MismatchSpec::eta0_t0}, std::pair{"eta0_t1", &MismatchSpec::eta0_t1},
                            std::pair{"eta1_t0", &MismatchSpec::eta1_t0}, std::pair{"eta1_t1", &MismatchSpec::eta1_t1}}) {
    const std::string path = std::string("detectors.") + key;
    if (const auto v = get(s, path)) spec.*field = parse_probability(path, *v);
  }
  return spec;
}

Value num(double v) {
  if (std::isnan(v)) return std::monostate{};
  return v;
}

void add_spec(Record& r, const MismatchSpec& m) {
  r.add("eta0_t0", m.eta0_t0);
  r.add("eta0_t1", m.eta0_t1);
  r.add("eta1_t0", m.eta1_t0);
  r.add("eta1_t1", m.eta1_t1);
}

void add_qber(Record& r, const QberEstimate& q) {
  r.add("qber", q.defined() ? num(q.point) : Value{});
  r.add("qber_low", q.defined() ? num(q.low) : Value{});
  r.add("qber_high", q.defined() ? num(q.high) : Value{});
}

ExactMismatchSpec exact(const MismatchSpec& m) {
  return {from_double(m.eta0_t0), from_double(m.eta0_t1), from_double(m.eta1_t0), from_double(m.eta1_t1)};
}

ExactBrightness exact(const Brightness& b) {
  return {from_double(b.t0), from_double(b.t1), from_double(b.normal)};
}

Value exact_qber(const ExactStats& s) {
  if (s.arrival == 0) return std::monostate{};
  return to_double(s.qber());
}

void require_attack(const ScenarioConfig& cfg) {
  if (!cfg.attack) throw ConfigError("attack.enabled", "this protocol only simulates the attack");
}

void require_brightness(const ScenarioConfig& cfg, BrightnessMode allowed, const char* protocols) {
  if (cfg.brightness_mode != BrightnessMode::manual && cfg.brightness_mode != allowed) {
    throw ConfigError("attack.brightness", fmt::format("mode not available for {}", protocols));
  }
}

RunOptions options(const ScenarioConfig& cfg) { return {cfg.seed, cfg.workers}; }

Record run_bb84(const ScenarioConfig& cfg) {
  require_attack(cfg);
  require_brightness(cfg, BrightnessMode::equalize, "bb84");
  bb84::AttackConfig ac{cfg.spec, cfg.brightness, cfg.eve_efficiency};
  ExactBrightness eb = exact(cfg.brightness);
  if (cfg.brightness_mode == BrightnessMode::equalize) {
    eb = bb84::equalizing_brightness(exact(cfg.spec));
    ac.brightness = {to_double(eb.t0), to_double(eb.t1), to_double(eb.normal)};
  }
  const AttackStats st = cfg.random_assignment ? bb84::simulate_with_random_assignment(cfg.rounds, ac, options(cfg))
                                               : bb84::simulate(cfg.rounds, ac, options(cfg));
  const ExactStats oracle = cfg.random_assignment ? bb84::enumerate_attack_random_assignment(exact(cfg.spec), eb)
                                                  : bb84::enumerate_attack(exact(cfg.spec), eb);
  Record r;
  r.add("protocol", std::string(cfg.random_assignment ? "bb84_random_assignment" : "bb84"));
  add_spec(r, cfg.spec);
  r.add("rounds", st.rounds);
  r.add("sifted", st.sifted);
  r.add("errors", st.errors);
  add_qber(r, st.qber());
  r.add("eve_knowledge", num(st.eve_knowledge()));
  r.add("analytic_qber", exact_qber(oracle));
  return r;
}

Record run_sarg04(const ScenarioConfig& cfg) {
  require_attack(cfg);
  require_brightness(cfg, BrightnessMode::manual, "sarg04");
  const sarg04::AttackConfig ac{cfg.spec, cfg.brightness, cfg.eve_efficiency};
  const AttackStats st = sarg04::simulate(cfg.rounds, ac, options(cfg));
  Record r;
  r.add("protocol", std::string("sarg04"));
  add_spec(r, cfg.spec);
  r.add("rounds", st.rounds);
  r.add("sifted", st.sifted);
  r.add("errors", st.errors);
  add_qber(r, st.qber());
  r.add("eve_knowledge", num(st.eve_knowledge()));
  r.add("analytic_qber", exact_qber(sarg04::enumerate_attack(exact(cfg.spec), exact(cfg.brightness))));
  return r;
}

phasetime::Config make_phasetime_config(const ScenarioConfig& cfg) {
  require_brightness(cfg, BrightnessMode::manual, "phasetime");
  return {cfg.spec, cfg.normal_eta0, cfg.normal_eta1, cfg.mu, cfg.brightness, cfg.attack, cfg.eve_efficiency};
}

Record run_phasetime(const ScenarioConfig& cfg) {
  const auto res = phasetime::simulate(cfg.rounds, make_phasetime_config(cfg), options(cfg));
  Record r;
  r.add("protocol", std::string("phasetime"));
  add_spec(r, cfg.spec);
  r.add("mu", cfg.mu);
  r.add("rounds", res.stats.rounds);
  r.add("sifted", res.stats.sifted);
  r.add("errors", res.stats.errors);
  add_qber(r, res.stats.qber());
  r.add("eve_knowledge", cfg.attack ? num(res.stats.eve_knowledge()) : Value{});
  r.add("coincidence_rate", static_cast<double>(res.multi_click_rounds) / static_cast<double>(res.stats.rounds));
  return r;
}

dpsk::Config make_dpsk_config(const ScenarioConfig& cfg) {
  require_brightness(cfg, BrightnessMode::compensate, "dpsk");
  return {cfg.spec,
          cfg.normal_eta0,
          cfg.normal_eta1,
          cfg.frame_length,
          cfg.mu,
          cfg.brightness,
          cfg.brightness_mode == BrightnessMode::compensate,
          cfg.attack,
          cfg.eve_efficiency};
}

Record run_dpsk(const ScenarioConfig& cfg) {
  const auto res = dpsk::simulate(cfg.rounds, make_dpsk_config(cfg), options(cfg));
  Record r;
  r.add("protocol", std::string("dpsk"));
  add_spec(r, cfg.spec);
  r.add("mu", cfg.mu);
  r.add("frames", res.stats.rounds);
  r.add("announced_windows", res.stats.sifted);
  r.add("errors", res.stats.errors);
  const auto q = res.stats.qber();
  r.add("qber", q.defined() ? num(q.point) : Value{});
  r.add("eve_knowledge", cfg.attack ? num(res.stats.eve_knowledge()) : Value{});
  r.add("coincidence_rate", res.coincidence_rate());
  return r;
}

Record run_ekert(const ScenarioConfig& cfg) {
  if (cfg.brightness_mode != BrightnessMode::manual) throw ConfigError("attack.brightness", "not used by ekert");
  const ekert::Config ec{cfg.weights, cfg.attack, cfg.footnote_alpha};
  const auto res = ekert::simulate(cfg.rounds, ec, options(cfg));
  Record r;
  r.add("protocol", std::string("ekert"));
  r.add("pairs", res.stats.rounds);
  r.add("p_alpha", cfg.attack ? Value{cfg.weights.alpha} : Value{});
  r.add("p_beta", cfg.attack ? Value{cfg.weights.beta} : Value{});
  r.add("p_gamma", cfg.attack ? Value{cfg.weights.gamma} : Value{});
  r.add("key_sifted", res.stats.sifted);
  r.add("key_errors", res.stats.errors);
  const auto q = res.stats.qber();
  r.add("qber", q.defined() ? num(q.point) : Value{});
  r.add("eve_knowledge", cfg.attack ? num(res.stats.eve_knowledge()) : Value{});
  try {
    r.add("S", res.chsh());
    r.add("S_sigma", res.chsh_sigma());
  } catch (const UndefinedError&) {
    r.add("S", Value{});
    r.add("S_sigma", Value{});
  }
  const auto m = cfg.attack ? ekert::mixture_correlations(cfg.weights, cfg.normalization) : ekert::singlet_matrix();
  try {
    r.add("S_expected", m.chsh());
  } catch (const UndefinedError&) {
    r.add("S_expected", Value{});
  }
  for (const auto& p : ekert::kChshPairs) {
    const auto e = res.pairs[p.index()].correlation();
    r.add("E_" + p.name(), e ? Value{*e} : Value{});
  }
  return r;
}

std::string csv_cell(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (x.find_first_of(",\"\n") == std::string::npos) return x;
          std::string out = "\"";
          for (const char c : x) out += c == '"' ? std::string("\"\"") : std::string(1, c);
          return out + "\"";
        } else {
          return fmt::format("{}", x);
        }
      },
      v);
}

}  // namespace

phasetime::Config phasetime_config(const ScenarioConfig& cfg) { return make_phasetime_config(cfg); }
dpsk::Config dpsk_config(const ScenarioConfig& cfg) { return make_dpsk_config(cfg); }
ekert::Config ekert_config(const ScenarioConfig& cfg) { return {cfg.weights, cfg.attack, cfg.footnote_alpha}; }

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::bb84: return "bb84";
    case Protocol::sarg04: return "sarg04";
    case Protocol::phasetime: return "phasetime";
    case Protocol::dpsk: return "dpsk";
    case Protocol::ekert: return "ekert";
  }
  return "?";
}

std::vector<double> SweepAxis::values() const {
  if (steps == 1) return {from};
  std::vector<double> out;
  for (const auto& v : linear_grid(from, to, steps)) out.push_back(v.value());
  return out;
}

Settings read_settings(std::istream& in) {
  // read_ini only knows whole-line comments; drop trailing "  ; ..." first.
  // A ';' glued to text is data (table curves use it as a separator).
  static const std::regex trailing_comment(R"(\s+[;#].*$)");
  std::stringstream cleaned;
  for (std::string line; std::getline(in, line);) cleaned << std::regex_replace(line, trailing_comment, "") << '\n';
  Settings s;
  try {
    boost::property_tree::ini_parser::read_ini(cleaned, s);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("", fmt::format("line {}: {}", e.line(), e.message()));
  }
  return s;
}

Settings read_settings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", fmt::format("cannot open config file '{}'", path));
  return read_settings(in);
}

void apply_override(Settings& settings, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment, "expected section.key=value");
  const std::string key = trim(assignment.substr(0, eq));
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() || key.find('.', dot + 1) != std::string::npos) {
    throw ConfigError(key, "expected section.key=value");
  }
  settings.put(key, trim(assignment.substr(eq + 1)));
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("QKDFS_SEED")) return parse_uint("QKDFS_SEED", env);
  return 0;
}

ScenarioConfig parse(const Settings& s) {
  check_keys(s);
  ScenarioConfig cfg;
  if (const auto v = get(s, "scenario.protocol")) cfg.protocol = parse_protocol(*v);
  if (const auto v = get(s, "scenario.rounds")) {
    cfg.rounds = parse_uint("scenario.rounds", *v);
    if (cfg.rounds == 0) throw ConfigError("scenario.rounds", "must be positive");
  }
  cfg.seed = get(s, "scenario.seed") ? parse_uint("scenario.seed", *get(s, "scenario.seed")) : default_seed();
  if (const auto v = get(s, "scenario.workers")) cfg.workers = static_cast<int>(parse_uint("scenario.workers", *v));
  if (const auto v = get(s, "scenario.format")) {
    if (*v == "csv") {
      cfg.format = Format::csv;
    } else if (*v == "json") {
      cfg.format = Format::json;
    } else {
      throw ConfigError("scenario.format", fmt::format("expected csv or json, got '{}'", *v));
    }
  }

  cfg.spec = parse_detectors(s);
  if (const auto v = get(s, "detectors.normal_eta0")) cfg.normal_eta0 = parse_probability("detectors.normal_eta0", *v);
  if (const auto v = get(s, "detectors.normal_eta1")) cfg.normal_eta1 = parse_probability("detectors.normal_eta1", *v);

  if (const auto v = get(s, "attack.enabled")) cfg.attack = parse_bool("attack.enabled", *v);
  if (const auto v = get(s, "attack.eve_efficiency")) {
    cfg.eve_efficiency = parse_probability("attack.eve_efficiency", *v);
  }
  if (const auto v = get(s, "attack.brightness")) {
    if (*v == "manual") {
      cfg.brightness_mode = BrightnessMode::manual;
    } else if (*v == "equalize") {
      cfg.brightness_mode = BrightnessMode::equalize;
    } else if (*v == "compensate") {
      cfg.brightness_mode = BrightnessMode::compensate;
    } else {
      throw ConfigError("attack.brightness", fmt::format("expected manual, equalize or compensate, got '{}'", *v));
    }
  }
  for (auto [key, field] : {std::pair{"brightness_t0", &Brightness::t0}, std::pair{"brightness_t1", &Brightness::t1},
                            std::pair{"brightness_normal", &Brightness::normal}}) {
    const std::string path = std::string("attack.") + key;
    if (const auto v = get(s, path)) {
      cfg.brightness.*field = parse_double(path, *v);
      if (cfg.brightness.*field < 0.0) throw ConfigError(path, "must be nonnegative");
      if (cfg.brightness_mode != BrightnessMode::manual) throw ConfigError(path, "only used with attack.brightness=manual");
    }
  }

  if (const auto v = get(s, "bb84.random_assignment")) cfg.random_assignment = parse_bool("bb84.random_assignment", *v);

  const char* mu_key = cfg.protocol == Protocol::dpsk ? "dpsk.mu" : "phasetime.mu";
  if (const auto v = get(s, mu_key)) {
    cfg.mu = parse_double(mu_key, *v);
    if (!(cfg.mu > 0.0)) throw ConfigError(mu_key, "must be positive");
  }
  if (const auto v = get(s, "dpsk.frame_length")) {
    cfg.frame_length = static_cast<int>(parse_uint("dpsk.frame_length", *v));
    if (cfg.frame_length < 2) throw ConfigError("dpsk.frame_length", "must be at least 2");
  }

  if (const auto v = get(s, "ekert.weights")) {
    if (*v == "exact") {
      cfg.weights = ekert::exact_equal_terms_weights();
    } else if (*v == "rounded") {
      cfg.weights = {0.116, 0.653, 0.231};
    } else if (*v == "two") {
      cfg.weights = {2.0 - std::sqrt(2.0), std::sqrt(2.0) - 1.0, 0.0};
    } else {
      std::vector<double> w;
      std::size_t start = 0;
      while (start <= v->size()) {
        const auto end = v->find(',', start);
        w.push_back(parse_double("ekert.weights", v->substr(start, end == std::string::npos ? end : end - start)));
        if (end == std::string::npos) break;
        start = end + 1;
      }
      if (w.size() != 3) throw ConfigError("ekert.weights", "expected exact, rounded, two or alpha,beta,gamma");
      cfg.weights = {w[0], w[1], w[2]};
    }
    try {
      cfg.weights.validate();
    } catch (const Error& e) {
      throw ConfigError("ekert.weights", e.what());
    }
  }
  if (const auto v = get(s, "ekert.footnote_alpha")) cfg.footnote_alpha = parse_bool("ekert.footnote_alpha", *v);
  if (const auto v = get(s, "ekert.normalization")) {
    if (*v == "per_pair") {
      cfg.normalization = ekert::Normalization::per_pair;
    } else if (*v == "global") {
      cfg.normalization = ekert::Normalization::global;
    } else {
      throw ConfigError("ekert.normalization", "expected per_pair or global");
    }
  }

  if (const auto param = get(s, "sweep.param")) {
    SweepAxis axis;
    axis.param = *param;
    const bool optical = cfg.protocol == Protocol::phasetime || cfg.protocol == Protocol::dpsk;
    if (axis.param == "eta" || axis.param == "eve_efficiency") {
      if (axis.param == "eta" && cfg.protocol == Protocol::ekert) {
        throw ConfigError("sweep.param", "ekert is modeled for total mismatch only");
      }
    } else if (axis.param == "mu") {
      if (!optical) throw ConfigError("sweep.param", "mu only applies to phasetime and dpsk");
    } else if (axis.param == "p_beta") {
      if (cfg.protocol != Protocol::ekert) throw ConfigError("sweep.param", "p_beta only applies to ekert");
    } else {
      throw ConfigError("sweep.param", fmt::format("unknown sweep parameter '{}'", axis.param));
    }
    for (const char* key : {"sweep.from", "sweep.to", "sweep.steps"}) {
      if (!get(s, key)) throw ConfigError(key, "required when sweep.param is set");
    }
    axis.from = parse_double("sweep.from", *get(s, "sweep.from"));
    axis.to = parse_double("sweep.to", *get(s, "sweep.to"));
    axis.steps = parse_uint("sweep.steps", *get(s, "sweep.steps"));
    if (axis.steps == 0) throw ConfigError("sweep.steps", "must be positive");
    cfg.sweep = axis;
    for (const double v : axis.values()) {
      try {
        (void)at_sweep_point(cfg, v);
      } catch (const Error& e) {
        throw ConfigError("sweep.from", fmt::format("value {} out of range: {}", v, e.what()));
      }
    }
  } else {
    for (const char* key : {"sweep.from", "sweep.to", "sweep.steps"}) {
      if (get(s, key)) throw ConfigError(key, "set sweep.param to sweep");
    }
  }
  return cfg;
}

ScenarioConfig at_sweep_point(const ScenarioConfig& cfg, double value) {
  if (!cfg.sweep) throw ConfigError("sweep.param", "no sweep configured");
  ScenarioConfig out = cfg;
  out.sweep.reset();
  const std::string& p = cfg.sweep->param;
  if (p == "eta") {
    if (value < 0.0 || value > 1.0) throw DomainError("eta must lie in [0, 1]");
    out.spec = MismatchSpec::symmetric(value);
  } else if (p == "eve_efficiency") {
    if (value < 0.0 || value > 1.0) throw DomainError("eve_efficiency must lie in [0, 1]");
    out.eve_efficiency = value;
  } else if (p == "mu") {
    if (!(value > 0.0)) throw DomainError("mu must be positive");
    out.mu = value;
  } else if (p == "p_beta") {
    if (value < 0.0 || value > 1.0) throw DomainError("p_beta must lie in [0, 1]");
    out.weights = {1.0 - value, value, 0.0};
  }
  return out;
}

const Value* Record::find(const std::string& name) const {
  for (const auto& [k, v] : fields) {
    if (k == name) return &v;
  }
  return nullptr;
}

double Record::number(const std::string& name) const {
  const Value* v = find(name);
  if (!v) return std::nan("");
  if (const auto* d = std::get_if<double>(v)) return *d;
  if (const auto* u = std::get_if<std::uint64_t>(v)) return static_cast<double>(*u);
  return std::nan("");
}

Record run_point(const ScenarioConfig& cfg) {
  switch (cfg.protocol) {
    case Protocol::bb84: return run_bb84(cfg);
    case Protocol::sarg04: return run_sarg04(cfg);
    case Protocol::phasetime: return run_phasetime(cfg);
    case Protocol::dpsk: return run_dpsk(cfg);
    case Protocol::ekert: return run_ekert(cfg);
  }
  throw ConfigError("scenario.protocol", "unknown protocol");
}

std::vector<Record> run(const ScenarioConfig& cfg) {
  if (!cfg.sweep) return {run_point(cfg)};
  std::vector<Record> out;
  for (const double v : cfg.sweep->values()) out.push_back(run_point(at_sweep_point(cfg, v)));
  return out;
}

void write_csv(std::ostream& out, const std::vector<Record>& records) {
  if (records.empty()) return;
  std::string header;
  for (const auto& [k, v] : records.front().fields) header += (header.empty() ? "" : ",") + k;
  out << header << '\n';
  for (const auto& r : records) {
    std::string line;
    bool first = true;
    for (const auto& [k, v] : r.fields) {
      if (!first) line += ',';
      first = false;
      line += csv_cell(v);
    }
    out << line << '\n';
  }
}

void write_json(std::ostream& out, const std::vector<Record>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.fields) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
              obj[k] = nullptr;
            } else {
              obj[k] = x;
            }
          },
          v);
    }
    arr.push_back(std::move(obj));
  }
  out << arr.dump(2) << '\n';
}

void write(std::ostream& out, const std::vector<Record>& records, Format format) {
  if (format == Format::json) {
    write_json(out, records);
  } else {
    write_csv(out, records);
  }
}

}  // namespace qkdfs::scenario
