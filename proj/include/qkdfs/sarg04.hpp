#pragma once

// SARG04 on BB84-equivalent states. The bit value is the basis; the letter
// (a/b) names the detector. Alice announces the sent state together with a
// random state of the opposite bit, and Bob keeps a bit only when his result
// excludes exactly one announced state.

#include "qkdfs/detmodel.hpp"
#include "qkdfs/engine.hpp"
#include "qkdfs/error.hpp"
#include "qkdfs/polar.hpp"
#include "qkdfs/stats.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qkdfs::sarg04 {

enum class Letter : std::uint8_t { a = 0, b = 1 };

constexpr Letter other(Letter l) { return l == Letter::a ? Letter::b : Letter::a; }

struct SargState {
  int bit;
  Letter letter;

  polar::State state() const {
    return polar::EquatorState(polar::layout::sarg_angle(bit, static_cast<int>(letter)));
  }
  std::string name() const;  // "0_a", "1_b", ...
  friend bool operator==(const SargState&, const SargState&) = default;
};

inline constexpr std::array<SargState, 4> kAllStates{
    SargState{0, Letter::a}, SargState{0, Letter::b}, SargState{1, Letter::a},
    SargState{1, Letter::b}};

struct AnnouncedPair {
  SargState sent;
  SargState partner;  // opposite bit value

  AnnouncedPair(SargState sent, SargState partner);
};

struct SiftOutcome {
  std::optional<int> bit;  // nullopt: discard

  static SiftOutcome discard() { return {}; }
  static SiftOutcome keep(int b) { return {b}; }
  bool kept() const { return bit.has_value(); }
  friend bool operator==(const SiftOutcome&, const SiftOutcome&) = default;
};

// Keep iff Bob's result is orthogonal to exactly one announced state; the
// kept bit is the bit of the other announced state.
SiftOutcome sift(const AnnouncedPair& announced, int bob_basis, Letter bob_letter);

struct FakedState {
  SargState state;
  Control control;  // t0 = t_a (blinds detector b), t1 = t_b (blinds a)
  friend bool operator==(const FakedState&, const FakedState&) = default;
};

// Detected x_l -> (!x)_(!l) sent at t_l.
FakedState faked_state_for(SargState eve_outcome);

// Efficiencies are named eta_<detector>(t_<point>). In MismatchSpec terms
// detector a is detector 0 and t_a is t0.
template <class T>
T p_arrive_given_0a(const T& a_ta, const T& a_tb, const T& b_ta, const T& b_tb) {
  return (a_ta / T(4) + a_tb / T(4) + T(13) * b_ta / T(4) + b_tb / T(4)) / T(8);
}

template <class T>
T p_arrive(const T& a_ta, const T& a_tb, const T& b_ta, const T& b_tb) {
  return (a_ta + T(7) * a_tb + T(7) * b_ta + b_tb) / T(32);
}

template <class T>
T analytic_qber(const T& a_ta, const T& a_tb, const T& b_ta, const T& b_tb) {
  const T den = a_ta + T(7) * a_tb + T(7) * b_ta + b_tb;
  if (den == T(0)) throw UndefinedError("sarg04 qber undefined: zero arrival probability");
  return (T(4) * a_tb + T(4) * b_ta) / den;
}

template <class T>
T analytic_qber(const BasicMismatchSpec<T>& m) {
  return analytic_qber(m.eta0_t0, m.eta0_t1, m.eta1_t0, m.eta1_t1);
}

template <class T>
T symmetric_qber(const T& eta) {
  if (eta < T(0) || eta > T(1)) throw DomainError("symmetric ratio must lie in [0,1]");
  return T(4) * eta / (T(1) + T(7) * eta);
}

// Arrival (kept after sifting) and error probabilities for one Alice state,
// not weighted by the 1/4 prior on Alice's choice.
ExactStats enumerate_given(SargState alice, const ExactMismatchSpec& m,
                           const ExactBrightness& brightness = {});

// Averaged over Alice's four states.
ExactStats enumerate_attack(const ExactMismatchSpec& m, const ExactBrightness& brightness = {});

// One line of the attack table for a fixed Alice state: Eve's result, what
// she resends, Bob's basis and result, and the sifting verdict for both
// possible announcements.
struct AttackTableRow {
  SargState alice;
  SargState eve_result;
  FakedState resent;
  int bob_basis;
  Letter bob_letter;
  Rational row_weight;   // P(Eve result) * P(Bob basis)
  Rational probability;  // P(Bob result | resent state, control, Bob basis)
  std::array<AnnouncedPair, 2> announcements;
  std::array<SiftOutcome, 2> sifting;
};

std::vector<AttackTableRow> attack_table(SargState alice, const ExactMismatchSpec& m,
                                         const ExactBrightness& brightness = {});

struct AttackConfig {
  MismatchSpec spec = MismatchSpec::total_mismatch();
  Brightness brightness{};
  double eve_efficiency = 1.0;
};

AttackStats simulate(std::uint64_t rounds, const AttackConfig& cfg, const RunOptions& opts);

}  // namespace qkdfs::sarg04
