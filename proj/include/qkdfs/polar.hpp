#pragma once

// Two-level states on the Poincare-sphere equator (plus the two poles) and
// projective measurement with per-outcome detector efficiency.

#include "qkdfs/detmodel.hpp"
#include "qkdfs/random.hpp"
#include "qkdfs/rational.hpp"

#include <array>
#include <cstdint>
#include <variant>

namespace qkdfs::polar {

// cos of an angle in degrees, exact at multiples of 45 degrees.
double cos_deg(double degrees);

// Angle reduced to [0, 360).
double normalize_deg(double degrees);

struct EquatorState {
  explicit EquatorState(double angle_deg = 0.0) : angle(normalize_deg(angle_deg)) {}
  double angle;  // degrees in [0, 360)

  EquatorState orthogonal() const { return EquatorState(angle + 180.0); }
  friend bool operator==(const EquatorState&, const EquatorState&) = default;
};

enum class Pole : std::uint8_t { north, south };

struct PoleState {
  Pole pole;
  friend bool operator==(const PoleState&, const PoleState&) = default;
};

using State = std::variant<EquatorState, PoleState>;

// Measurement axis: the +1 outcome projects on `axis`, the -1 outcome on
// axis + 180 degrees.
struct MeasurementBasis {
  double axis;  // degrees
  double eigenstate(int sign) const { return sign > 0 ? axis : axis + 180.0; }
};

// Born-rule probability |<eigenstate|state>|^2: (1 + cos delta)/2 on the
// equator, 1/2 for either pole.
double overlap_probability(const State& state, double eigenstate_deg);

// Same, as an exact rational. Requires the angle difference to be a multiple
// of 90 degrees (or a pole state); throws DomainError otherwise.
Rational exact_overlap(const State& state, double eigenstate_deg);

enum class Outcome : std::int8_t { minus = -1, none = 0, plus = 1 };

// Efficiencies of the detectors registering the +1 and -1 outcomes.
struct ClickEfficiencies {
  double plus;
  double minus;
};

struct ClickProbabilities {
  double plus;
  double minus;
  double none;
};

// Single-photon detection: at most one projection outcome, which clicks
// with that detector's efficiency.
ClickProbabilities click_probabilities(const State& state, MeasurementBasis basis,
                                       ClickEfficiencies eff);

Outcome measure(const State& state, MeasurementBasis basis, ClickEfficiencies eff, Stream& rng);

// Detector 0 registers +1, detector 1 registers -1; efficiencies taken from
// the curves at control value t.
Outcome measure(const State& state, MeasurementBasis basis, const DetectorPair& detectors,
                ControlValue t, Stream& rng);

// Fixed angle conventions shared by the protocol modules.
namespace layout {

// BB84: Z basis carries bits on 0/180 degrees, X basis on 90/270 degrees.
constexpr double bb84_axis(int basis) { return basis == 0 ? 0.0 : 90.0; }
constexpr double bb84_angle(int basis, int bit) { return bb84_axis(basis) + (bit ? 180.0 : 0.0); }

// SARG04 four states: |0_a>=0, |1_a>=90, |0_b>=180, |1_b>=270. Detection
// basis x holds {x_a, x_b}; letter a is the +1 eigenstate.
constexpr double sarg_angle(int bit, int letter) { return 90.0 * bit + 180.0 * letter; }
constexpr double sarg_axis(int bit) { return 90.0 * bit; }

// Ekert measurement axes a1..a3 and b1..b3.
inline constexpr std::array<double, 3> ekert_alice_axes{0.0, 45.0, 90.0};
inline constexpr std::array<double, 3> ekert_bob_axes{45.0, 90.0, 135.0};

}  // namespace layout

}  // namespace qkdfs::polar
