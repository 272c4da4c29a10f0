#include "qkdfs/dpsk.hpp"

#include "qkdfs/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace qkdfs::dpsk {

using interferometry::Click;
using interferometry::Port;
using interferometry::Pulse;
using interferometry::PulseTrain;

namespace {

constexpr double kNullThreshold = 1e-24;

Control control_for(int bit) { return bit == 0 ? Control::t0 : Control::t1; }
Port live_port(int bit) { return bit == 0 ? Port::d0 : Port::d1; }

void check_bit(int bit) {
  if (bit != 0 && bit != 1) throw DomainError("bit must be 0 or 1");
}

// Unit-amplitude pulses at arrival slots first..first+phases.size()-1.
PulseTrain phase_train(int first, const std::vector<std::uint8_t>& phases, double mu, ControlValue tag) {
  std::vector<std::optional<Pulse>> pulses;
  pulses.reserve(phases.size());
  for (const auto p : phases) pulses.push_back(Pulse{p ? -1.0 : 1.0, tag});
  return PulseTrain(first, std::move(pulses), mu);
}

// Phases for pulses first..last-1 so that interior windows first+1..last-1
// are constructive on the live port exactly where the record holds `bit`.
std::vector<std::uint8_t> plan_phases(const EveDetectionRecord& record, int first, int last, int bit) {
  std::vector<std::uint8_t> phases{0};
  for (int w = first + 1; w < last; ++w) {
    const bool want = record.contains(w, bit);
    // bit 0 is constructive on D0 when the phases agree, bit 1 on D1 when they differ
    const bool flip = (bit == 0) ? !want : want;
    phases.push_back(static_cast<std::uint8_t>(phases.back() ^ (flip ? 1 : 0)));
  }
  return phases;
}

}  // namespace

DpskFrame::DpskFrame(std::vector<std::uint8_t> phases) : phases_(std::move(phases)) {
  if (phases_.size() < 2) throw ConstructionError("a DPSK frame needs at least two pulses");
  for (const auto p : phases_) {
    if (p > 1) throw ConstructionError("phase index must be 0 or 1");
  }
}

DpskFrame DpskFrame::random(int length, Stream& rng) {
  if (length < 2) throw DomainError("frame length must be >= 2");
  std::vector<std::uint8_t> phases(static_cast<std::size_t>(length));
  for (auto& p : phases) p = static_cast<std::uint8_t>(rng.below(2));
  return DpskFrame(std::move(phases));
}

int DpskFrame::bit(int window) const {
  if (window < 1 || window >= length()) throw DomainError(fmt::format("window {} is not keyed", window));
  return phases_[static_cast<std::size_t>(window)] == phases_[static_cast<std::size_t>(window - 1)] ? 0 : 1;
}

PulseTrain DpskFrame::train(double mu, ControlValue tag) const { return phase_train(0, phases_, mu, tag); }

EveDetectionRecord::EveDetectionRecord(std::initializer_list<std::pair<int, int>> entries) {
  for (const auto& [w, b] : entries) add(w, b);
}

void EveDetectionRecord::add(int window, int bit) {
  check_bit(bit);
  entries_.emplace_back(window, bit);
}

bool EveDetectionRecord::consistent() const {
  for (const auto& [w, b] : entries_) {
    if (contains(w, 1 - b)) return false;
  }
  return true;
}

bool EveDetectionRecord::contains(int window, int bit) const {
  return std::find(entries_.begin(), entries_.end(), std::pair{window, bit}) != entries_.end();
}

std::optional<int> EveDetectionRecord::bit(int window) const {
  for (const auto& [w, b] : entries_) {
    if (w == window) return b;
  }
  return std::nullopt;
}

double TrainPlan::null_residual() const {
  const auto ports = interferometry::interfere(train);
  double worst = 0.0;
  for (std::size_t w = 0; w < intent.size(); ++w) {
    if (intent[w] != WindowIntent::null) continue;
    worst = std::max(worst, ports.intensity(static_cast<int>(w), live));
  }
  return worst;
}

std::vector<int> TrainPlan::live_support(double threshold) const {
  const auto ports = interferometry::interfere(train);
  std::vector<int> out;
  for (const auto& s : ports.slots) {
    if (std::norm(s.at(live)) > threshold) out.push_back(s.slot);
  }
  return out;
}

void FakedTrainPlan::validate(const EveDetectionRecord& record) const {
  for (const TrainPlan* plan : {&zero, &one}) {
    if (plan->null_residual() >= kNullThreshold) {
      throw ConstructionError(fmt::format("t{} train leaks {} at a null window", plan->bit, plan->null_residual()));
    }
    for (const int w : plan->live_support()) {
      const bool boundary = w == 0 || w == frame_length;
      if (!boundary && !record.contains(w, plan->bit)) {
        throw ConstructionError(
            fmt::format("t{} train reaches the live port at window {} without a matching detection", plan->bit, w));
      }
    }
  }
}

FakedTrainPlan continuous_train_plan(const EveDetectionRecord& record, int frame_length, double mu,
                                     const Receiver& receiver) {
  if (frame_length < 2) throw DomainError("frame length must be >= 2");
  if (!record.consistent()) throw ConstructionError("record holds both bits for one window");
  for (const auto& [w, b] : record.entries()) {
    if (w < 1 || w >= frame_length) {
      throw DomainError(fmt::format("record window {} outside the keyed range 1..{}", w, frame_length - 1));
    }
  }
  FakedTrainPlan plan;
  plan.frame_length = frame_length;
  for (const int bit : {0, 1}) {
    TrainPlan& tp = bit == 0 ? plan.zero : plan.one;
    tp.bit = bit;
    tp.control = control_for(bit);
    tp.live = live_port(bit);
    tp.train = phase_train(0, plan_phases(record, 0, frame_length, bit), mu, receiver.point(tp.control));
    tp.intent.assign(static_cast<std::size_t>(frame_length + 1), WindowIntent::null);
    tp.intent.front() = WindowIntent::edge;
    tp.intent.back() = WindowIntent::edge;
    for (int w = 1; w < frame_length; ++w) {
      if (record.contains(w, bit)) tp.intent[static_cast<std::size_t>(w)] = WindowIntent::constructive;
    }
  }
  plan.validate(record);
  return plan;
}

PulseTrain segment_faked_state(const EveDetectionRecord& record, int first, int last, int bit, double mu,
                               const Receiver& receiver) {
  check_bit(bit);
  if (last <= first) throw ConstructionError("segment must span at least two windows");
  if (!record.contains(first, bit) || !record.contains(last, bit)) {
    throw ConstructionError(
        fmt::format("segment edges {} and {} need detections of bit {}", first, last, bit));
  }
  return phase_train(first, plan_phases(record, first, last, bit), mu, receiver.point(control_for(bit)));
}

PulseTrain single_pulse_faked_state(const EveDetectionRecord& record, int window, int bit, double mu,
                                    const Receiver& receiver) {
  return segment_faked_state(record, window, window + 1, bit, mu, receiver);
}

interferometry::GateSet bob_gates(int frame_length) {
  std::set<int> slots;
  for (int w = 0; w <= frame_length; ++w) slots.insert(w);
  return interferometry::GateSet(std::move(slots));
}

std::vector<Click> bob_detect(const std::vector<PulseTrain>& trains, const interferometry::GateSet& gates,
                              const DetectorPair& detectors, Stream& rng) {
  std::vector<Click> clicks;
  for (const auto& t : trains) {
    auto c = interferometry::detect(interferometry::interfere(t), gates, detectors, rng);
    clicks.insert(clicks.end(), c.begin(), c.end());
  }
  std::stable_sort(clicks.begin(), clicks.end(), [](const Click& a, const Click& b) {
    return a.slot != b.slot ? a.slot < b.slot : a.port < b.port;
  });
  return clicks;
}

EveDetectionRecord eve_detect(const DpskFrame& frame, double mu, double efficiency, Stream& rng) {
  EveDetectionRecord record;
  const auto ports = interferometry::interfere(frame.train(mu, ControlValue(0.0)));
  for (int w = 1; w < frame.length(); ++w) {
    for (const Port p : {Port::d0, Port::d1}) {
      const double intensity = ports.intensity(w, p);
      if (intensity == 0.0) continue;
      if (rng.bernoulli(interferometry::click_probability(mu, intensity, efficiency))) {
        record.add(w, static_cast<int>(p));
      }
    }
  }
  return record;
}

double compensating_brightness(double mu, double live_eta, double miss) {
  if (!(mu > 0.0) || !(live_eta > 0.0)) throw NoSignalError("live detector never clicks");
  return std::max(1.0, -std::log(miss) / (mu * live_eta));
}

double Result::coincidence_rate() const {
  return windows == 0 ? 0.0 : static_cast<double>(coincidence_windows) / static_cast<double>(windows);
}

void Result::merge(const Result& o) {
  stats.merge(o.stats);
  windows += o.windows;
  coincidence_windows += o.coincidence_windows;
  announced_outside_record += o.announced_outside_record;
}

Result simulate(std::uint64_t frames, const Config& cfg, const RunOptions& opts) {
  cfg.spec.validate();
  if (frames == 0) throw DomainError("need at least one frame");
  if (!(cfg.mu > 0.0)) throw DomainError("mu must be positive");
  if (cfg.frame_length < 2) throw DomainError("frame length must be >= 2");
  const Receiver receiver = Receiver::from_spec(cfg.spec, cfg.normal_eta0, cfg.normal_eta1);
  const auto gates = bob_gates(cfg.frame_length);
  const int length = cfg.frame_length;

  std::array<double, 3> brightness{cfg.brightness.t0, cfg.brightness.t1, cfg.brightness.normal};
  if (cfg.compensate) {
    brightness[0] = compensating_brightness(cfg.mu, receiver.eta(0, Control::t0));
    brightness[1] = compensating_brightness(cfg.mu, receiver.eta(1, Control::t1));
  }
  auto control_of = [&](ControlValue tag) {
    for (const Control c : kAllControls) {
      if (receiver.point(c) == tag) return c;
    }
    return Control::normal;
  };

  return run_rounds<Result>(frames, opts, [&](Result& acc, Stream& rng, std::uint64_t) {
    ++acc.stats.rounds;
    acc.windows += static_cast<std::uint64_t>(length - 1);
    const DpskFrame frame = DpskFrame::random(length, rng);

    std::vector<PulseTrain> trains;
    EveDetectionRecord record;
    if (cfg.attack) {
      record = eve_detect(frame, cfg.mu, cfg.eve_efficiency, rng);
      const auto plan = continuous_train_plan(record, length, cfg.mu, receiver);
      trains.push_back(plan.zero.train.with_mu(cfg.mu * brightness[0]));
      trains.push_back(plan.one.train.with_mu(cfg.mu * brightness[1]));
      acc.stats.diag.record_sent(Control::t0);
      acc.stats.diag.record_sent(Control::t1);
    } else {
      trains.push_back(frame.train(cfg.mu * cfg.brightness.normal, receiver.point(Control::normal)));
      acc.stats.diag.record_sent(Control::normal);
    }

    const auto clicks = bob_detect(trains, gates, receiver.pair(), rng);
    std::vector<std::array<bool, 2>> fired(static_cast<std::size_t>(length + 1), {false, false});
    for (const auto& c : clicks) {
      acc.stats.diag.record_click(control_of(c.tag), static_cast<DetectorIndex>(c.port));
      fired[static_cast<std::size_t>(c.slot)][static_cast<std::size_t>(c.port)] = true;
    }

    for (int w = 1; w < length; ++w) {
      const auto& f = fired[static_cast<std::size_t>(w)];
      if (f[0] && f[1]) {
        ++acc.coincidence_windows;
        ++acc.stats.diag.coincidences;
        continue;
      }
      if (!f[0] && !f[1]) continue;
      const int bob_bit = f[1] ? 1 : 0;
      ++acc.stats.sifted;
      if (bob_bit != frame.bit(w)) ++acc.stats.errors;
      if (cfg.attack) {
        const auto eve_bit = record.bit(w);
        if (!eve_bit || *eve_bit != bob_bit) ++acc.announced_outside_record;
        if (eve_bit && *eve_bit == bob_bit) ++acc.stats.eve_known;
      }
    }
  });
}

}  // namespace qkdfs::dpsk
