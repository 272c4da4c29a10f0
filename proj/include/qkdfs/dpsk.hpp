#pragma once

// Differential phase shift keying over a frame of L weak coherent pulses at
// arrival slots 0..L-1. Bob's one-slot delay interferometer produces
// detection windows 0..L; window k compares pulses k-1 and k. Windows 0 and
// L see a lone pulse and are never keyed.

#include "qkdfs/detmodel.hpp"
#include "qkdfs/engine.hpp"
#include "qkdfs/interferometry.hpp"
#include "qkdfs/stats.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace qkdfs::dpsk {

class DpskFrame {
 public:
  // phases[k] is 0 for phase 0 and 1 for phase pi.
  explicit DpskFrame(std::vector<std::uint8_t> phases);
  static DpskFrame random(int length, Stream& rng);

  int length() const noexcept { return static_cast<int>(phases_.size()); }
  const std::vector<std::uint8_t>& phases() const noexcept { return phases_; }
  // Differential bit at an interior window 1..L-1: 0 iff the phases agree.
  int bit(int window) const;
  interferometry::PulseTrain train(double mu, ControlValue tag) const;

 private:
  std::vector<std::uint8_t> phases_;
};

// Window/bit observations from Eve's replica receiver. Entries are kept as
// observed; a window reported with both bits makes the record inconsistent.
class EveDetectionRecord {
 public:
  EveDetectionRecord() = default;
  EveDetectionRecord(std::initializer_list<std::pair<int, int>> entries);

  void add(int window, int bit);
  bool consistent() const;
  bool contains(int window, int bit) const;
  std::optional<int> bit(int window) const;  // first observation
  const std::vector<std::pair<int, int>>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::vector<std::pair<int, int>> entries_;
};

enum class WindowIntent : std::uint8_t { null, constructive, edge };

struct TrainPlan {
  int bit = 0;
  Control control = Control::t0;
  interferometry::Port live = interferometry::Port::d0;
  interferometry::PulseTrain train;
  std::vector<WindowIntent> intent;  // indexed by window 0..L

  // Largest live-port intensity among null windows.
  double null_residual() const;
  // Windows whose live port receives light.
  std::vector<int> live_support(double threshold = 1e-24) const;
};

struct FakedTrainPlan {
  int frame_length = 0;
  TrainPlan zero;  // t0 train, live port D0
  TrainPlan one;   // t1 train, live port D1

  const TrainPlan& train_for(int bit) const { return bit == 0 ? zero : one; }
  // Throws ConstructionError if a null window leaks more than 1e-24 on the
  // live port, or if light reaches the live port at a window Eve did not
  // detect with the train's bit (boundary windows 0 and L excepted).
  void validate(const EveDetectionRecord& record) const;
};

// Default strategy: two continuous trains spanning the whole frame. In the
// t_b train consecutive phases agree (b=0) or differ (b=1) exactly at
// windows where Eve saw bit b, so the live port is dark everywhere else.
FakedTrainPlan continuous_train_plan(const EveDetectionRecord& record, int frame_length, double mu,
                                     const Receiver& receiver);

// Pulses at arrival slots first..last-1 with control t_b. The live port can
// click only at windows first..last; first and last are edges. Requires Eve
// to have seen bit b at both edges.
interferometry::PulseTrain segment_faked_state(const EveDetectionRecord& record, int first, int last,
                                               int bit, double mu, const Receiver& receiver);

// Lone pulse at arrival slot k: windows k and k+1, both edges.
interferometry::PulseTrain single_pulse_faked_state(const EveDetectionRecord& record, int window,
                                                    int bit, double mu, const Receiver& receiver);

// Bob gates windows 0..frame_length.
interferometry::GateSet bob_gates(int frame_length);

// Interference and detection per train, clicks merged and sorted by window.
std::vector<interferometry::Click> bob_detect(const std::vector<interferometry::PulseTrain>& trains,
                                              const interferometry::GateSet& gates,
                                              const DetectorPair& detectors, Stream& rng);

// Eve's replica receiver at Alice's mu with detection efficiency `efficiency`.
EveDetectionRecord eve_detect(const DpskFrame& frame, double mu, double efficiency, Stream& rng);

// Brightness that lifts the live-port click probability of a constructive
// window to at least 1 - miss.
double compensating_brightness(double mu, double live_eta, double miss = 1e-9);

struct Config {
  MismatchSpec spec = MismatchSpec::total_mismatch();
  double normal_eta0 = 1.0;
  double normal_eta1 = 1.0;
  int frame_length = 64;
  double mu = 0.1;
  Brightness brightness{};
  bool compensate = false;  // overrides brightness for t0/t1 trains
  bool attack = true;
  double eve_efficiency = 1.0;
};

struct Result {
  AttackStats stats;  // rounds = frames, sifted = announced interior windows
  std::uint64_t windows = 0;                // interior windows offered
  std::uint64_t coincidence_windows = 0;    // both ports fired
  std::uint64_t announced_outside_record = 0;

  double coincidence_rate() const;
  void merge(const Result& o);
  friend bool operator==(const Result&, const Result&) = default;
};

Result simulate(std::uint64_t frames, const Config& cfg, const RunOptions& opts);

}  // namespace qkdfs::dpsk
