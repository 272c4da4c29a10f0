#include "qkdfs/phasetime.hpp"

#include "qkdfs/error.hpp"

#include <cmath>
#include <numbers>

namespace qkdfs::phasetime {

using interferometry::Port;
using interferometry::Pulse;
using interferometry::PulseTrain;

std::string_view to_string(Symbol s) {
  switch (s) {
    case Symbol::l: return "l";
    case Symbol::s: return "s";
    case Symbol::plus: return "+";
    case Symbol::minus: return "-";
  }
  return "?";
}

SlotRole role_of(int slot) {
  switch (slot) {
    case -1: return SlotRole::ungated_early;
    case 0: return SlotRole::exclusive_s;
    case 1: return SlotRole::interference;
    case 2: return SlotRole::exclusive_l;
    case 3: return SlotRole::ungated_late;
    default: throw DomainError("slot outside the phase-time frame");
  }
}

std::string_view slot_label(int slot) {
  switch (role_of(slot)) {
    case SlotRole::ungated_early: return "S4";
    case SlotRole::exclusive_s: return "S3";
    case SlotRole::interference: return "S2";
    case SlotRole::exclusive_l: return "S1";
    case SlotRole::ungated_late: return "S0";
  }
  return "?";
}

const interferometry::GateSet& bob_gates() {
  static const interferometry::GateSet gates(
      {kExclusiveSSlot, kInterferenceSlot, kExclusiveLSlot},
      {{kExclusiveSSlot, "S3"}, {kInterferenceSlot, "S2"}, {kExclusiveLSlot, "S1"}});
  return gates;
}

PulseTrain encode(Symbol symbol, double mu, ControlValue tag) {
  constexpr double h = std::numbers::sqrt2 / 2.0;
  auto pulse = [&](double a) { return std::optional<Pulse>(Pulse{a, tag}); };
  switch (symbol) {
    case Symbol::s: return PulseTrain(0, {pulse(1.0), std::nullopt}, mu);
    case Symbol::l: return PulseTrain(0, {std::nullopt, pulse(1.0)}, mu);
    case Symbol::plus: return PulseTrain(0, {pulse(h), pulse(h)}, mu);
    case Symbol::minus: return PulseTrain(0, {pulse(-h), pulse(h)}, mu);
  }
  throw DomainError("unknown symbol");
}

std::optional<Symbol> classify_click(int slot, Port port) {
  if (slot == kExclusiveLSlot) return Symbol::l;
  if (slot == kExclusiveSSlot) return Symbol::s;
  if (slot == kInterferenceSlot) return port == Port::d0 ? Symbol::plus : Symbol::minus;
  return std::nullopt;
}

FakedState faked_state_for(Symbol eve_result, double mu, const Receiver& receiver) {
  switch (eve_result) {
    case Symbol::l: {
      const ControlValue tag = receiver.point(Control::normal);
      return {PulseTrain(2, {Pulse{1.0, tag}}, mu), Control::normal};
    }
    case Symbol::s: {
      const ControlValue tag = receiver.point(Control::normal);
      return {PulseTrain(-1, {Pulse{1.0, tag}}, mu), Control::normal};
    }
    case Symbol::plus: {
      const ControlValue tag = receiver.point(Control::t0);
      return {PulseTrain(-1, {Pulse{-0.5, tag}, Pulse{0.5, tag}, Pulse{0.5, tag}, Pulse{-0.5, tag}}, mu),
              Control::t0};
    }
    case Symbol::minus: {
      const ControlValue tag = receiver.point(Control::t1);
      return {PulseTrain(-1, {Pulse{0.5, tag}, Pulse{0.5, tag}, Pulse{-0.5, tag}, Pulse{-0.5, tag}}, mu),
              Control::t1};
    }
  }
  throw DomainError("unknown symbol");
}

std::vector<std::pair<int, Port>> null_targets(Symbol eve_result) {
  switch (eve_result) {
    case Symbol::l:
      return {{kExclusiveSSlot, Port::d0}, {kExclusiveSSlot, Port::d1},
              {kInterferenceSlot, Port::d0}, {kInterferenceSlot, Port::d1}};
    case Symbol::s:
      return {{kExclusiveLSlot, Port::d0}, {kExclusiveLSlot, Port::d1},
              {kInterferenceSlot, Port::d0}, {kInterferenceSlot, Port::d1}};
    case Symbol::plus:
      return {{kExclusiveSSlot, Port::d0}, {kExclusiveLSlot, Port::d0}, {kInterferenceSlot, Port::d1}};
    case Symbol::minus:
      return {{kExclusiveSSlot, Port::d1}, {kExclusiveLSlot, Port::d1}, {kInterferenceSlot, Port::d0}};
  }
  return {};
}

std::optional<Symbol> eve_measure(const PulseTrain& alice, double efficiency, Stream& rng) {
  const auto ports = interferometry::interfere(alice);
  const double total = ports.energy();
  if (total == 0.0) return std::nullopt;
  const double u = rng.uniform() * total;
  const bool registered = rng.bernoulli(efficiency);
  double acc = 0.0;
  for (const auto& s : ports.slots) {
    for (const Port p : {Port::d0, Port::d1}) {
      acc += std::norm(s.at(p));
      if (u < acc) return registered ? classify_click(s.slot, p) : std::nullopt;
    }
  }
  return std::nullopt;
}

void SlotHistogram::merge(const SlotHistogram& o) {
  for (std::size_t i = 0; i < counts.size(); ++i) {
    counts[i][0] += o.counts[i][0];
    counts[i][1] += o.counts[i][1];
  }
}

void Result::merge(const Result& o) {
  stats.merge(o.stats);
  histogram.merge(o.histogram);
  multi_click_rounds += o.multi_click_rounds;
}

Result simulate(std::uint64_t rounds, const Config& cfg, const RunOptions& opts) {
  cfg.spec.validate();
  if (!(cfg.mu > 0.0)) throw DomainError("mu must be positive");
  const Receiver receiver = Receiver::from_spec(cfg.spec, cfg.normal_eta0, cfg.normal_eta1);
  const auto& gates = bob_gates();
  auto control_of = [&](ControlValue tag) {
    for (const Control c : kAllControls) {
      if (receiver.point(c) == tag) return c;
    }
    return Control::normal;
  };

  return run_rounds<Result>(rounds, opts, [&](Result& acc, Stream& rng, std::uint64_t) {
    ++acc.stats.rounds;
    const Symbol alice = kAllSymbols[rng.below(4)];
    const PulseTrain alice_train = encode(alice, cfg.mu, receiver.point(Control::normal));

    std::optional<Symbol> eve;
    PulseTrain to_bob = alice_train;
    Control sent_control = Control::normal;
    if (cfg.attack) {
      eve = eve_measure(alice_train, cfg.eve_efficiency, rng);
      if (!eve) {
        ++acc.stats.diag.vacuum_sent;
        return;
      }
      auto faked = faked_state_for(*eve, cfg.mu * cfg.brightness.at(Control::normal), receiver);
      if (faked.control != Control::normal) {
        faked.train = faked.train.with_mu(cfg.mu * cfg.brightness.at(faked.control));
      }
      to_bob = std::move(faked.train);
      sent_control = faked.control;
    }
    acc.stats.diag.record_sent(sent_control);

    const auto clicks = interferometry::detect(interferometry::interfere(to_bob), gates, receiver.pair(), rng);
    for (const auto& c : clicks) {
      ++acc.histogram.at(c.slot, c.port);
      acc.stats.diag.record_click(control_of(c.tag), static_cast<DetectorIndex>(c.port));
    }
    if (clicks.size() > 1) {
      ++acc.multi_click_rounds;
      ++acc.stats.diag.coincidences;
      return;
    }
    if (clicks.empty()) return;
    const auto bob = classify_click(clicks.front().slot, clicks.front().port);
    if (!bob || basis_of(*bob) != basis_of(alice)) return;
    ++acc.stats.sifted;
    if (bit_of(*bob) != bit_of(alice)) ++acc.stats.errors;
    if (eve && basis_of(*eve) == basis_of(*bob) && bit_of(*eve) == bit_of(*bob)) ++acc.stats.eve_known;
  });
}

}  // namespace qkdfs::phasetime
