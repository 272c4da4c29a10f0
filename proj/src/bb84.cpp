#include "qkdfs/bb84.hpp"

#include <array>
#include <cmath>

namespace qkdfs::bb84 {

namespace {

using polar::layout::bb84_angle;
using polar::layout::bb84_axis;

template <class T>
T effective_eta(const BasicMismatchSpec<T>& m, const BasicBrightness<T>& w, DetectorIndex d,
                Control c) {
  return clamp_unit(w.at(c) * m.eta(d, c));
}

// flip_weights[f] is the probability that Bob's assignment is flipped (f=1)
// or not (f=0) in a round.
ExactStats enumerate(const ExactMismatchSpec& m, const ExactBrightness& w,
                     const std::array<Rational, 2>& flip_weights) {
  const Rational half(1, 2);
  ExactStats out{Rational(0), Rational(0)};
  for (int a_basis = 0; a_basis < 2; ++a_basis) {
    for (int a_bit = 0; a_bit < 2; ++a_bit) {
      const Qubit alice{static_cast<Basis>(a_basis), a_bit};
      for (int e_basis = 0; e_basis < 2; ++e_basis) {
        for (int e_bit = 0; e_bit < 2; ++e_bit) {
          const Rational p_eve =
              polar::exact_overlap(alice.state(), bb84_angle(e_basis, e_bit));
          if (p_eve == 0) continue;
          const FakedState faked = faked_state_for(static_cast<Basis>(e_basis), e_bit);
          // Sifting keeps only rounds where Bob's basis equals Alice's.
          const int b_basis = a_basis;
          for (int flip = 0; flip < 2; ++flip) {
            if (flip_weights[flip] == 0) continue;
            for (int b_bit = 0; b_bit < 2; ++b_bit) {
              const Rational p_proj =
                  polar::exact_overlap(faked.qubit.state(), bb84_angle(b_basis, b_bit));
              const DetectorIndex detector = b_bit ^ flip;
              const Rational p_click = effective_eta(m, w, detector, faked.control);
              // Alice basis, Alice bit, Eve basis, Bob basis: 1/2 each.
              const Rational weight =
                  half * half * half * half * p_eve * flip_weights[flip] * p_proj * p_click;
              out.arrival += weight;
              if (b_bit != a_bit) out.error += weight;
            }
          }
        }
      }
    }
  }
  return out;
}

void tally(AttackStats& acc, const Bb84Round& r) {
  ++acc.rounds;
  if (r.faked) {
    acc.diag.record_sent(r.faked->control);
    if (r.bob_bit) acc.diag.record_click(r.faked->control, r.bob_detector);
  } else {
    ++acc.diag.vacuum_sent;
  }
  acc.diag.coincidences += static_cast<std::uint64_t>(r.double_clicks);
  if (r.sifted) {
    ++acc.sifted;
    if (r.error) ++acc.errors;
    if (r.eve_knows) ++acc.eve_known;
  }
}

}  // namespace

FakedState faked_state_for(Basis eve_basis, int eve_bit) {
  return {Qubit{other(eve_basis), 1 - eve_bit}, eve_bit == 0 ? Control::t0 : Control::t1};
}

ExactStats enumerate_attack(const ExactMismatchSpec& m, const ExactBrightness& brightness) {
  m.validate();
  return enumerate(m, brightness, {Rational(1), Rational(0)});
}

ExactStats enumerate_attack_random_assignment(const ExactMismatchSpec& m,
                                              const ExactBrightness& brightness) {
  m.validate();
  return enumerate(m, brightness, {Rational(1, 2), Rational(1, 2)});
}

ExactBrightness equalizing_brightness(const ExactMismatchSpec& m) {
  // Click probability of a faked state at t_d, averaged over Bob's basis:
  // (eta_d(t_d) + 3 eta_!d(t_d)) / 4.
  const Rational r0 = m.eta0_t0 + 3 * m.eta1_t0;
  const Rational r1 = m.eta1_t1 + 3 * m.eta0_t1;
  if (r0 == 0 || r1 == 0) throw UndefinedError("a working point never produces clicks");
  ExactBrightness w;
  if (r0 > r1) {
    w.t0 = r1 / r0;
  } else {
    w.t1 = r0 / r1;
  }
  return w;
}

Bb84Round play_round(const AttackConfig& cfg, bool random_assignment, Stream& rng) {
  Bb84Round r;
  r.alice = Qubit{static_cast<Basis>(rng.below(2)), static_cast<int>(rng.below(2))};
  r.eve_basis = static_cast<Basis>(rng.below(2));

  // Eve's replica: projective measurement with her own detectors.
  const auto eve_outcome =
      polar::measure(r.alice.state(), polar::MeasurementBasis{bb84_axis(static_cast<int>(r.eve_basis))},
                     polar::ClickEfficiencies{cfg.eve_efficiency, cfg.eve_efficiency}, rng);
  r.bob_basis = static_cast<Basis>(rng.below(2));
  r.assignment_flipped = random_assignment && rng.below(2) == 1;
  if (eve_outcome == polar::Outcome::none) return r;  // vacuum: Bob cannot click

  r.eve_bit = eve_outcome == polar::Outcome::plus ? 0 : 1;
  r.faked = faked_state_for(r.eve_basis, *r.eve_bit);
  const Control c = r.faked->control;
  auto eff = [&](DetectorIndex d) {
    return std::min(1.0, cfg.brightness.at(c) * cfg.spec.eta(d, c));
  };

  // Outcome +1 is bit 0. With a flipped assignment bit b lands on detector !b.
  const int flip = r.assignment_flipped ? 1 : 0;
  const polar::MeasurementBasis bob_axis{bb84_axis(static_cast<int>(r.bob_basis))};
  const auto bob =
      polar::measure(r.faked->qubit.state(), bob_axis, polar::ClickEfficiencies{eff(flip), eff(1 - flip)}, rng);
  if (bob == polar::Outcome::none) return r;
  r.bob_bit = bob == polar::Outcome::plus ? 0 : 1;
  r.bob_detector = *r.bob_bit ^ flip;

  r.sifted = r.bob_basis == r.alice.basis;
  if (!r.sifted) return r;
  r.error = *r.bob_bit != r.alice.bit;

  // Eve's guess from her records and the public basis: the more probable of
  // Bob's two bits, averaged over the assignment she cannot see. Ties go to
  // her own bit.
  const auto state = r.faked->qubit.state();
  double w[2] = {0.0, 0.0};
  for (int f = 0; f <= (random_assignment ? 1 : 0); ++f) {
    for (int b = 0; b < 2; ++b) {
      w[b] += polar::overlap_probability(state, bb84_angle(static_cast<int>(r.bob_basis), b)) * eff(b ^ f);
    }
  }
  const int guess = w[0] > w[1] ? 0 : (w[1] > w[0] ? 1 : *r.eve_bit);
  r.eve_knows = guess == *r.bob_bit;
  return r;
}

AttackStats simulate(std::uint64_t rounds, const AttackConfig& cfg, const RunOptions& opts) {
  cfg.spec.validate();
  return run_rounds<AttackStats>(rounds, opts, [&](AttackStats& acc, Stream& rng, std::uint64_t) {
    tally(acc, play_round(cfg, false, rng));
  });
}

AttackStats simulate_with_random_assignment(std::uint64_t rounds, const AttackConfig& cfg,
                                            const RunOptions& opts) {
  cfg.spec.validate();
  return run_rounds<AttackStats>(rounds, opts, [&](AttackStats& acc, Stream& rng, std::uint64_t) {
    tally(acc, play_round(cfg, true, rng));
  });
}

double TimeShiftStats::accuracy() const {
  if (sifted == 0) return std::nan("");
  return static_cast<double>(correct_guesses) / static_cast<double>(sifted);
}

void TimeShiftStats::merge(const TimeShiftStats& o) {
  rounds += o.rounds;
  sifted += o.sifted;
  errors += o.errors;
  correct_guesses += o.correct_guesses;
  diag.merge(o.diag);
}

TimeShiftStats time_shift_simulate(std::uint64_t rounds, const MismatchSpec& spec,
                                   double p_shift_to_t0, const RunOptions& opts) {
  spec.validate();
  if (!(p_shift_to_t0 >= 0.0 && p_shift_to_t0 <= 1.0)) {
    throw DomainError("shift probability must lie in [0,1]");
  }
  return run_rounds<TimeShiftStats>(rounds, opts, [&](TimeShiftStats& acc, Stream& rng, std::uint64_t) {
    ++acc.rounds;
    const Qubit alice{static_cast<Basis>(rng.below(2)), static_cast<int>(rng.below(2))};
    const Control c = rng.bernoulli(p_shift_to_t0) ? Control::t0 : Control::t1;
    acc.diag.record_sent(c);
    const Basis bob_basis = static_cast<Basis>(rng.below(2));
    const auto bob = polar::measure(alice.state(), polar::MeasurementBasis{bb84_axis(static_cast<int>(bob_basis))},
                                    polar::ClickEfficiencies{spec.eta(0, c), spec.eta(1, c)}, rng);
    if (bob == polar::Outcome::none) return;
    const int bob_bit = bob == polar::Outcome::plus ? 0 : 1;
    acc.diag.record_click(c, bob_bit);
    if (bob_basis != alice.basis) return;
    ++acc.sifted;
    if (bob_bit != alice.bit) ++acc.errors;
    const int guess = spec.eta(1, c) > spec.eta(0, c) ? 1 : 0;
    if (guess == bob_bit) ++acc.correct_guesses;
  });
}

}  // namespace qkdfs::bb84
