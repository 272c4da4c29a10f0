#pragma once

// Phase-time encoded BB84: time basis {|l>, |s>} (pulse via Alice's long or
// short arm) and phase basis {|l>+|s>, |l>-|s>}. Bob's interferometer spreads
// each pulse over two detection slots; the middle gated slot is where the two
// arms interfere.
//
// Slot convention (physical time increases to the right):
//
//   detection slot   -1         0            1              2            3
//   role             ungated    exclusive-s  interference   exclusive-l  ungated
//   label            S4         S3           S2             S1           S0
//
// |s> arrives in slot 0 and |l> in slot 1. The S-labels run against physical
// time under this convention; nothing depends on the direction.

#include "qkdfs/detmodel.hpp"
#include "qkdfs/engine.hpp"
#include "qkdfs/interferometry.hpp"
#include "qkdfs/stats.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace qkdfs::phasetime {

enum class Basis : std::uint8_t { time = 0, phase = 1 };

// Time-basis symbols l/s carry bit 0/1, phase-basis +/- carry bit 0/1.
enum class Symbol : std::uint8_t { l = 0, s = 1, plus = 2, minus = 3 };

inline constexpr std::array<Symbol, 4> kAllSymbols{Symbol::l, Symbol::s, Symbol::plus, Symbol::minus};

constexpr Basis basis_of(Symbol s) { return s == Symbol::l || s == Symbol::s ? Basis::time : Basis::phase; }
constexpr int bit_of(Symbol s) { return s == Symbol::s || s == Symbol::minus ? 1 : 0; }
std::string_view to_string(Symbol s);

enum class SlotRole : std::uint8_t { ungated_early, exclusive_s, interference, exclusive_l, ungated_late };

inline constexpr int kFirstSlot = -1;
inline constexpr int kLastSlot = 3;
inline constexpr int kInterferenceSlot = 1;
inline constexpr int kExclusiveSSlot = 0;
inline constexpr int kExclusiveLSlot = 2;

SlotRole role_of(int slot);
std::string_view slot_label(int slot);  // "S0".."S4"

// Bob's three gates: exclusive-s, interference, exclusive-l.
const interferometry::GateSet& bob_gates();

// Alice's state as a unit-energy train at control `tag`.
interferometry::PulseTrain encode(Symbol symbol, double mu, ControlValue tag);

// Basis and bit for a click; nullopt for ungated slots.
std::optional<Symbol> classify_click(int slot, interferometry::Port port);

struct FakedState {
  interferometry::PulseTrain train;
  Control control;
};

// Time results: a lone pulse one slot outside Alice's pair (|ll> after
// |l>, |ss> before |s>) at the normal working point, so its second output
// falls in an ungated slot. Phase results: four pulses (-1,+1,+1,-1) at t0
// for '+', (+1,+1,-1,-1) at t1 for '-', unit total energy.
FakedState faked_state_for(Symbol eve_result, double mu, const Receiver& receiver);

// (slot, port) pairs that must stay dark at Bob for a faked state: every
// gated target other than the intended one on the live port, and the
// interference slot on the blinded port.
std::vector<std::pair<int, interferometry::Port>> null_targets(Symbol eve_result);

// Eve's replica receiver: one photon sampled from the output intensity
// distribution, registered with probability `efficiency`.
std::optional<Symbol> eve_measure(const interferometry::PulseTrain& alice, double efficiency, Stream& rng);

struct Config {
  MismatchSpec spec = MismatchSpec::total_mismatch();
  double normal_eta0 = 1.0;
  double normal_eta1 = 1.0;
  double mu = 0.1;
  Brightness brightness{};
  bool attack = true;
  double eve_efficiency = 1.0;
};

// Clicks per (detection slot, port), slots -1..3.
struct SlotHistogram {
  std::array<std::array<std::uint64_t, 2>, 5> counts{};

  std::uint64_t& at(int slot, interferometry::Port p) {
    return counts[static_cast<std::size_t>(slot - kFirstSlot)][static_cast<std::size_t>(p)];
  }
  std::uint64_t at(int slot, interferometry::Port p) const {
    return counts[static_cast<std::size_t>(slot - kFirstSlot)][static_cast<std::size_t>(p)];
  }
  void merge(const SlotHistogram& o);
  friend bool operator==(const SlotHistogram&, const SlotHistogram&) = default;
};

struct Result {
  AttackStats stats;
  SlotHistogram histogram;
  std::uint64_t multi_click_rounds = 0;

  void merge(const Result& o);
  friend bool operator==(const Result&, const Result&) = default;
};

// Rounds with more than one click are counted as coincidences and not keyed.
Result simulate(std::uint64_t rounds, const Config& cfg, const RunOptions& opts);

}  // namespace qkdfs::phasetime
