#pragma once

// Weak coherent pulse trains through an unbalanced interferometer whose arm
// difference equals one pulse slot, detected by two gated detectors with
// Poissonian click statistics.

#include "qkdfs/detmodel.hpp"
#include "qkdfs/random.hpp"

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace qkdfs::interferometry {

using Amplitude = std::complex<double>;

struct Pulse {
  Amplitude amplitude;
  ControlValue tag;
};

// Consecutive arrival slots starting at base_slot; nullopt entries are
// vacuum. Mean photon number of a pulse is mu * |amplitude|^2.
class PulseTrain {
 public:
  PulseTrain() = default;
  // Throws ConstructionError when adjacent pulses carry different control
  // tags (they would meet in one detection slot) or mu < 0.
  PulseTrain(int base_slot, std::vector<std::optional<Pulse>> pulses, double mu);

  int base_slot() const noexcept { return base_slot_; }
  int end_slot() const noexcept { return base_slot_ + static_cast<int>(pulses_.size()); }
  double mu() const noexcept { return mu_; }
  const std::vector<std::optional<Pulse>>& pulses() const noexcept { return pulses_; }

  // Amplitude at an arrival slot; 0 outside the train or for vacuum.
  Amplitude amplitude(int slot) const;
  std::optional<ControlValue> tag(int slot) const;
  double energy() const;  // sum of |amplitude|^2

  PulseTrain with_mu(double mu) const;

 private:
  int base_slot_ = 0;
  std::vector<std::optional<Pulse>> pulses_;
  double mu_ = 0.0;
};

enum class Port : std::uint8_t { d0 = 0, d1 = 1 };

struct SlotAmplitudes {
  int slot;
  Amplitude d0;
  Amplitude d1;
  std::optional<ControlValue> tag;  // nullopt when no light reaches the slot

  const Amplitude& at(Port p) const { return p == Port::d0 ? d0 : d1; }
  double energy() const { return std::norm(d0) + std::norm(d1); }
};

struct PortAmplitudes {
  std::vector<SlotAmplitudes> slots;  // contiguous, ascending
  double mu = 0.0;

  const SlotAmplitudes* find(int slot) const;
  double energy() const;
  // |amplitude|^2 at (slot, port); 0 for slots outside the record.
  double intensity(int slot, Port port) const;
};

// Detection slot k receives D0 = (a[k-1] + e^{i phi} a[k]) / 2 and
// D1 = (a[k-1] - e^{i phi} a[k]) / 2: the long arm delays by one slot.
PortAmplitudes interfere(const PulseTrain& train, double bob_phase = 0.0);

class GateSet {
 public:
  GateSet() = default;
  GateSet(std::set<int> slots, std::map<int, std::string> labels = {});

  bool gated(int slot) const { return slots_.contains(slot); }
  const std::set<int>& slots() const noexcept { return slots_; }
  std::string label(int slot) const;

 private:
  std::set<int> slots_;
  std::map<int, std::string> labels_;
};

struct Click {
  int slot;
  Port port;
  ControlValue tag;
  friend bool operator==(const Click&, const Click&) = default;
};

// 1 - exp(-mu |A|^2 eta).
double click_probability(double mu, double intensity, double eta);

// Each gated (slot, port) clicks independently; ungated slots are never
// reported. Port d0 uses detector 0, d1 uses detector 1.
std::vector<Click> detect(const PortAmplitudes& ports, const GateSet& gates,
                          const DetectorPair& detectors, Stream& rng);

// Columns: slot, re_d0, im_d0, re_d1, im_d1, control_tag (empty if dark).
void write_waveform_csv(std::ostream& out, const PortAmplitudes& ports);

}  // namespace qkdfs::interferometry
