#pragma once

// BB84 under the faked-states attack: Eve intercepts with a replica of Bob's
// receiver and resends the opposite bit in the opposite basis, timed so the
// detector for that opposite bit is blinded.

#include "qkdfs/detmodel.hpp"
#include "qkdfs/engine.hpp"
#include "qkdfs/error.hpp"
#include "qkdfs/polar.hpp"
#include "qkdfs/stats.hpp"

#include <cstdint>
#include <optional>

namespace qkdfs::bb84 {

enum class Basis : std::uint8_t { z = 0, x = 1 };

constexpr Basis other(Basis b) { return b == Basis::z ? Basis::x : Basis::z; }

struct Qubit {
  Basis basis;
  int bit;

  polar::State state() const {
    return polar::EquatorState(polar::layout::bb84_angle(static_cast<int>(basis), bit));
  }
  friend bool operator==(const Qubit&, const Qubit&) = default;
};

struct FakedState {
  Qubit qubit;
  Control control;
  friend bool operator==(const FakedState&, const FakedState&) = default;
};

// Detected bit d in basis B -> bit !d in the other basis, sent at t_d.
FakedState faked_state_for(Basis eve_basis, int eve_bit);

// QBER of the attack for given efficiencies at the working points:
// [2 eta0(t1) + 2 eta1(t0)] / [eta0(t0) + 3 eta0(t1) + 3 eta1(t0) + eta1(t1)].
template <class T>
T analytic_qber(const BasicMismatchSpec<T>& m) {
  const T den = m.eta0_t0 + T(3) * m.eta0_t1 + T(3) * m.eta1_t0 + m.eta1_t1;
  if (den == T(0)) throw UndefinedError("bb84 qber undefined: all efficiencies are zero");
  return (T(2) * m.eta0_t1 + T(2) * m.eta1_t0) / den;
}

// Symmetric curves with equalized detection rates: 2 eta / (1 + 3 eta).
template <class T>
T symmetric_qber(const T& eta) {
  if (eta < T(0) || eta > T(1)) throw DomainError("symmetric ratio must lie in [0,1]");
  return T(2) * eta / (T(1) + T(3) * eta);
}

// Exhaustive enumeration over Alice basis/bit, Eve basis/outcome, Bob
// basis/outcome with exact rational weights. Eve is lossless.
ExactStats enumerate_attack(const ExactMismatchSpec& m, const ExactBrightness& brightness = {});

// Same, with Bob flipping his detector-to-bit assignment with probability
// 1/2 per round while Eve keeps the unmodified attack.
ExactStats enumerate_attack_random_assignment(const ExactMismatchSpec& m,
                                              const ExactBrightness& brightness = {});

// Weights that make Bob's click probability equal for faked states sent at
// t0 and at t1; the larger weight is 1.
ExactBrightness equalizing_brightness(const ExactMismatchSpec& m);

struct AttackConfig {
  MismatchSpec spec = MismatchSpec::total_mismatch();
  Brightness brightness{};
  double eve_efficiency = 1.0;  // probability Eve's replica registers a click
};

struct Bb84Round {
  Qubit alice{};
  Basis eve_basis{};
  std::optional<int> eve_bit;     // nullopt: Eve saw nothing and sent vacuum
  std::optional<FakedState> faked;
  Basis bob_basis{};
  bool assignment_flipped = false;
  std::optional<int> bob_bit;     // nullopt: no click
  DetectorIndex bob_detector = 0;
  int double_clicks = 0;          // single-photon model: always zero
  bool sifted = false;
  bool error = false;
  bool eve_knows = false;
};

Bb84Round play_round(const AttackConfig& cfg, bool random_assignment, Stream& rng);

AttackStats simulate(std::uint64_t rounds, const AttackConfig& cfg, const RunOptions& opts);

AttackStats simulate_with_random_assignment(std::uint64_t rounds, const AttackConfig& cfg,
                                            const RunOptions& opts);

struct TimeShiftStats {
  std::uint64_t rounds = 0;
  std::uint64_t sifted = 0;
  std::uint64_t errors = 0;
  std::uint64_t correct_guesses = 0;
  Diagnostics diag;

  QberEstimate qber() const { return qber_estimate(errors, sifted); }
  double accuracy() const;
  void merge(const TimeShiftStats& o);

  friend bool operator==(const TimeShiftStats&, const TimeShiftStats&) = default;
};

// Eve shifts each qubit to t0 with probability p (else t1) without
// measuring it, then guesses every sifted bit as the detector more likely
// to have fired at that shift.
TimeShiftStats time_shift_simulate(std::uint64_t rounds, const MismatchSpec& spec,
                                   double p_shift_to_t0, const RunOptions& opts);

}  // namespace qkdfs::bb84
