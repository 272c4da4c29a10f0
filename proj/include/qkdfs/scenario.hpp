#pragma once

// Scenario configuration (INI-style "key = value" with sections), dispatch to
// the protocol simulators, and flat CSV/JSON result records.

#include "qkdfs/detmodel.hpp"
#include "qkdfs/dpsk.hpp"
#include "qkdfs/ekert.hpp"
#include "qkdfs/phasetime.hpp"

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qkdfs::scenario {

enum class Protocol { bb84, sarg04, phasetime, dpsk, ekert };
std::string to_string(Protocol p);

enum class Format { csv, json };

enum class BrightnessMode { manual, equalize, compensate };

struct SweepAxis {
  std::string param;  // eta, mu, eve_efficiency, p_beta
  double from = 0.0;
  double to = 0.0;
  std::size_t steps = 1;

  std::vector<double> values() const;
};

struct ScenarioConfig {
  Protocol protocol = Protocol::bb84;
  std::uint64_t rounds = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
  Format format = Format::csv;

  MismatchSpec spec = MismatchSpec::total_mismatch();
  double normal_eta0 = 1.0;
  double normal_eta1 = 1.0;

  bool attack = true;
  double eve_efficiency = 1.0;
  BrightnessMode brightness_mode = BrightnessMode::manual;
  Brightness brightness{};
  bool random_assignment = false;

  double mu = 0.1;
  int frame_length = 64;

  ekert::MixtureWeights weights = ekert::exact_equal_terms_weights();
  bool footnote_alpha = false;
  ekert::Normalization normalization = ekert::Normalization::per_pair;

  std::optional<SweepAxis> sweep;
};

using Settings = boost::property_tree::ptree;

Settings read_settings(std::istream& in);
Settings read_settings_file(const std::string& path);
// "section.key=value"; throws ConfigError on malformed input.
void apply_override(Settings& settings, const std::string& assignment);

// Default seed: QKDFS_SEED if set, else 0.
std::uint64_t default_seed();

// Validates every key against the schema; errors name the offending key
// path, e.g. "detectors.curve0".
ScenarioConfig parse(const Settings& settings);

// The config of one sweep point.
ScenarioConfig at_sweep_point(const ScenarioConfig& cfg, double value);

using Value = std::variant<std::monostate, std::uint64_t, double, std::string>;

struct Record {
  std::vector<std::pair<std::string, Value>> fields;

  void add(std::string name, Value v) { fields.emplace_back(std::move(name), std::move(v)); }
  const Value* find(const std::string& name) const;
  double number(const std::string& name) const;  // NaN when absent or empty
};

// One record per sweep point (or a single record). Every sweep point uses
// the configured seed, so neighbouring points share random numbers.
std::vector<Record> run(const ScenarioConfig& cfg);
Record run_point(const ScenarioConfig& cfg);

// Module configs for callers that need more than the summary record.
phasetime::Config phasetime_config(const ScenarioConfig& cfg);
dpsk::Config dpsk_config(const ScenarioConfig& cfg);
ekert::Config ekert_config(const ScenarioConfig& cfg);

// Header row always emitted; empty cells for undefined values.
void write_csv(std::ostream& out, const std::vector<Record>& records);
void write_json(std::ostream& out, const std::vector<Record>& records);
void write(std::ostream& out, const std::vector<Record>& records, Format format);

}  // namespace qkdfs::scenario
