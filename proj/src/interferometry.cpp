#include "qkdfs/interferometry.hpp"

#include "qkdfs/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace qkdfs::interferometry {

PulseTrain::PulseTrain(int base_slot, std::vector<std::optional<Pulse>> pulses, double mu)
    : base_slot_(base_slot), pulses_(std::move(pulses)), mu_(mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConstructionError("mu must be finite and >= 0");
  for (std::size_t i = 0; i < pulses_.size(); ++i) {
    const auto& p = pulses_[i];
    if (p && (!std::isfinite(p->amplitude.real()) || !std::isfinite(p->amplitude.imag()))) {
      throw ConstructionError("pulse amplitude must be finite");
    }
    if (i > 0 && p && pulses_[i - 1] && pulses_[i - 1]->tag != p->tag) {
      throw ConstructionError(
          fmt::format("pulses at slots {} and {} carry different control tags", base_slot_ + i - 1,
                      base_slot_ + i));
    }
  }
}

Amplitude PulseTrain::amplitude(int slot) const {
  const int i = slot - base_slot_;
  if (i < 0 || i >= static_cast<int>(pulses_.size()) || !pulses_[static_cast<std::size_t>(i)]) {
    return {};
  }
  return pulses_[static_cast<std::size_t>(i)]->amplitude;
}

std::optional<ControlValue> PulseTrain::tag(int slot) const {
  const int i = slot - base_slot_;
  if (i < 0 || i >= static_cast<int>(pulses_.size()) || !pulses_[static_cast<std::size_t>(i)]) {
    return std::nullopt;
  }
  return pulses_[static_cast<std::size_t>(i)]->tag;
}

double PulseTrain::energy() const {
  double e = 0.0;
  for (const auto& p : pulses_) {
    if (p) e += std::norm(p->amplitude);
  }
  return e;
}

PulseTrain PulseTrain::with_mu(double mu) const { return PulseTrain(base_slot_, pulses_, mu); }

const SlotAmplitudes* PortAmplitudes::find(int slot) const {
  if (slots.empty()) return nullptr;
  const int i = slot - slots.front().slot;
  if (i < 0 || i >= static_cast<int>(slots.size())) return nullptr;
  return &slots[static_cast<std::size_t>(i)];
}

double PortAmplitudes::energy() const {
  double e = 0.0;
  for (const auto& s : slots) e += s.energy();
  return e;
}

double PortAmplitudes::intensity(int slot, Port port) const {
  const auto* s = find(slot);
  return s ? std::norm(s->at(port)) : 0.0;
}

PortAmplitudes interfere(const PulseTrain& train, double bob_phase) {
  PortAmplitudes out;
  out.mu = train.mu();
  const Amplitude phase = std::polar(1.0, bob_phase);
  const int first = train.base_slot();
  const int last = train.end_slot();  // the long arm pushes the last pulse one slot later
  out.slots.reserve(static_cast<std::size_t>(last - first + 1));
  for (int k = first; k <= last; ++k) {
    const Amplitude late = train.amplitude(k - 1);  // long arm
    const Amplitude early = phase * train.amplitude(k);
    auto tag = train.tag(k - 1);
    if (!tag) tag = train.tag(k);
    out.slots.push_back({k, 0.5 * (late + early), 0.5 * (late - early), tag});
  }
  return out;
}

GateSet::GateSet(std::set<int> slots, std::map<int, std::string> labels)
    : slots_(std::move(slots)), labels_(std::move(labels)) {}

std::string GateSet::label(int slot) const {
  if (const auto it = labels_.find(slot); it != labels_.end()) return it->second;
  return fmt::format("{}", slot);
}

double click_probability(double mu, double intensity, double eta) {
  return -std::expm1(-mu * intensity * eta);
}

std::vector<Click> detect(const PortAmplitudes& ports, const GateSet& gates,
                          const DetectorPair& detectors, Stream& rng) {
  std::vector<Click> clicks;
  for (const auto& s : ports.slots) {
    if (!s.tag || !gates.gated(s.slot)) continue;
    for (const Port port : {Port::d0, Port::d1}) {
      const double intensity = std::norm(s.at(port));
      if (intensity == 0.0) continue;
      const double eta = detectors.efficiency(static_cast<DetectorIndex>(port), *s.tag);
      if (rng.bernoulli(click_probability(ports.mu, intensity, eta))) {
        clicks.push_back({s.slot, port, *s.tag});
      }
    }
  }
  return clicks;
}

void write_waveform_csv(std::ostream& out, const PortAmplitudes& ports) {
  out << "slot,re_d0,im_d0,re_d1,im_d1,control_tag\n";
  for (const auto& s : ports.slots) {
    out << fmt::format("{},{},{},{},{},{}\n", s.slot, s.d0.real(), s.d0.imag(), s.d1.real(),
                       s.d1.imag(), s.tag ? fmt::format("{}", s.tag->value()) : std::string());
  }
}

}  // namespace qkdfs::interferometry
