#include "qkdfs/polar.hpp"

#include "qkdfs/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace qkdfs::polar {

double normalize_deg(double degrees) {
  if (!std::isfinite(degrees)) throw DomainError("angle must be finite");
  double r = std::fmod(degrees, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

double cos_deg(double degrees) {
  const double r = normalize_deg(degrees);
  constexpr double h = std::numbers::sqrt2 / 2.0;
  if (r == 0.0) return 1.0;
  if (r == 45.0 || r == 315.0) return h;
  if (r == 90.0 || r == 270.0) return 0.0;
  if (r == 135.0 || r == 225.0) return -h;
  if (r == 180.0) return -1.0;
  return std::cos(r * std::numbers::pi / 180.0);
}

double overlap_probability(const State& state, double eigenstate_deg) {
  if (std::holds_alternative<PoleState>(state)) return 0.5;
  const double delta = std::get<EquatorState>(state).angle - eigenstate_deg;
  return 0.5 * (1.0 + cos_deg(delta));
}

Rational exact_overlap(const State& state, double eigenstate_deg) {
  if (std::holds_alternative<PoleState>(state)) return Rational(1, 2);
  const double delta = normalize_deg(std::get<EquatorState>(state).angle - eigenstate_deg);
  if (delta == 0.0) return Rational(1);
  if (delta == 180.0) return Rational(0);
  if (delta == 90.0 || delta == 270.0) return Rational(1, 2);
  throw DomainError(fmt::format("overlap at {} degrees is irrational", delta));
}

ClickProbabilities click_probabilities(const State& state, MeasurementBasis basis,
                                       ClickEfficiencies eff) {
  const double plus = overlap_probability(state, basis.eigenstate(+1)) * eff.plus;
  const double minus = overlap_probability(state, basis.eigenstate(-1)) * eff.minus;
  return {plus, minus, 1.0 - (plus + minus)};
}

Outcome measure(const State& state, MeasurementBasis basis, ClickEfficiencies eff, Stream& rng) {
  const auto p = click_probabilities(state, basis, eff);
  const double u = rng.uniform();
  if (u < p.plus) return Outcome::plus;
  if (u < p.plus + p.minus) return Outcome::minus;
  return Outcome::none;
}

Outcome measure(const State& state, MeasurementBasis basis, const DetectorPair& detectors,
                ControlValue t, Stream& rng) {
  return measure(state, basis, ClickEfficiencies{detectors.efficiency(0, t), detectors.efficiency(1, t)},
                 rng);
}

}  // namespace qkdfs::polar
