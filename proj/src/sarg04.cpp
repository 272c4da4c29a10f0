#include "qkdfs/sarg04.hpp"

#include <fmt/format.h>

namespace qkdfs::sarg04 {

namespace {

using polar::layout::sarg_angle;
using polar::layout::sarg_axis;

bool orthogonal(const SargState& s, int bob_basis, Letter bob_letter) {
  return s.bit == bob_basis && s.letter != bob_letter;
}

Rational exact_eff(const ExactMismatchSpec& m, const ExactBrightness& w, Letter detector, Control c) {
  return clamp_unit(w.at(c) * m.eta(static_cast<DetectorIndex>(detector), c));
}

}  // namespace

std::string SargState::name() const { return fmt::format("{}_{}", bit, letter == Letter::a ? 'a' : 'b'); }

AnnouncedPair::AnnouncedPair(SargState s, SargState p) : sent(s), partner(p) {
  if (s.bit == p.bit) throw ConstructionError("announced pair must hold one state of each bit");
}

SiftOutcome sift(const AnnouncedPair& announced, int bob_basis, Letter bob_letter) {
  const bool excl_sent = orthogonal(announced.sent, bob_basis, bob_letter);
  const bool excl_partner = orthogonal(announced.partner, bob_basis, bob_letter);
  if (excl_sent == excl_partner) return SiftOutcome::discard();
  return SiftOutcome::keep(excl_sent ? announced.partner.bit : announced.sent.bit);
}

FakedState faked_state_for(SargState eve) {
  return {SargState{1 - eve.bit, other(eve.letter)},
          eve.letter == Letter::a ? Control::t0 : Control::t1};
}

std::vector<AttackTableRow> attack_table(SargState alice, const ExactMismatchSpec& m,
                                         const ExactBrightness& w) {
  std::vector<AttackTableRow> rows;
  const std::array<AnnouncedPair, 2> announcements{
      AnnouncedPair(alice, SargState{1 - alice.bit, Letter::a}),
      AnnouncedPair(alice, SargState{1 - alice.bit, Letter::b})};
  for (int eve_basis = 0; eve_basis < 2; ++eve_basis) {
    for (const Letter eve_letter : {Letter::a, Letter::b}) {
      const SargState eve{eve_basis, eve_letter};
      const Rational p_eve =
          polar::exact_overlap(alice.state(), sarg_angle(eve.bit, static_cast<int>(eve.letter)));
      if (p_eve == 0) continue;
      const FakedState resent = faked_state_for(eve);
      for (int bob_basis = 0; bob_basis < 2; ++bob_basis) {
        for (const Letter bob_letter : {Letter::a, Letter::b}) {
          const Rational p_proj = polar::exact_overlap(
              resent.state.state(), sarg_angle(bob_basis, static_cast<int>(bob_letter)));
          AttackTableRow row{alice,
                             eve,
                             resent,
                             bob_basis,
                             bob_letter,
                             Rational(1, 2) * p_eve * Rational(1, 2),
                             p_proj * exact_eff(m, w, bob_letter, resent.control),
                             announcements,
                             {sift(announcements[0], bob_basis, bob_letter),
                              sift(announcements[1], bob_basis, bob_letter)}};
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

ExactStats enumerate_given(SargState alice, const ExactMismatchSpec& m, const ExactBrightness& w) {
  m.validate();
  ExactStats out{Rational(0), Rational(0)};
  for (const auto& row : attack_table(alice, m, w)) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (!row.sifting[k].kept()) continue;
      const Rational weight = row.row_weight * row.probability * Rational(1, 2);
      out.arrival += weight;
      if (*row.sifting[k].bit != alice.bit) out.error += weight;
    }
  }
  return out;
}

ExactStats enumerate_attack(const ExactMismatchSpec& m, const ExactBrightness& w) {
  ExactStats out{Rational(0), Rational(0)};
  for (const auto& alice : kAllStates) {
    const auto given = enumerate_given(alice, m, w);
    out.arrival += given.arrival / 4;
    out.error += given.error / 4;
  }
  return out;
}

AttackStats simulate(std::uint64_t rounds, const AttackConfig& cfg, const RunOptions& opts) {
  cfg.spec.validate();
  return run_rounds<AttackStats>(rounds, opts, [&](AttackStats& acc, Stream& rng, std::uint64_t) {
    ++acc.rounds;
    const SargState alice = kAllStates[rng.below(4)];
    const int eve_basis = static_cast<int>(rng.below(2));
    const auto eve = polar::measure(alice.state(), polar::MeasurementBasis{sarg_axis(eve_basis)},
                                    polar::ClickEfficiencies{cfg.eve_efficiency, cfg.eve_efficiency}, rng);
    const int bob_basis = static_cast<int>(rng.below(2));
    const AnnouncedPair announced(alice, SargState{1 - alice.bit, static_cast<Letter>(rng.below(2))});
    if (eve == polar::Outcome::none) {
      ++acc.diag.vacuum_sent;
      return;
    }
    const SargState eve_result{eve_basis, eve == polar::Outcome::plus ? Letter::a : Letter::b};
    const FakedState faked = faked_state_for(eve_result);
    acc.diag.record_sent(faked.control);

    auto eff = [&](Letter d) {
      return std::min(1.0, cfg.brightness.at(faked.control) *
                               cfg.spec.eta(static_cast<DetectorIndex>(d), faked.control));
    };
    const auto bob = polar::measure(faked.state.state(), polar::MeasurementBasis{sarg_axis(bob_basis)},
                                    polar::ClickEfficiencies{eff(Letter::a), eff(Letter::b)}, rng);
    if (bob == polar::Outcome::none) return;
    const Letter bob_letter = bob == polar::Outcome::plus ? Letter::a : Letter::b;
    acc.diag.record_click(faked.control, static_cast<DetectorIndex>(bob_letter));

    const auto verdict = sift(announced, bob_basis, bob_letter);
    if (!verdict.kept()) return;
    ++acc.sifted;
    if (*verdict.bit != alice.bit) ++acc.errors;

    // Eve knows her resent state and the public announcement but not Bob's
    // basis: weigh each of Bob's possible results by its click probability.
    double weight[2] = {0.0, 0.0};
    for (int basis = 0; basis < 2; ++basis) {
      for (const Letter letter : {Letter::a, Letter::b}) {
        const auto v = sift(announced, basis, letter);
        if (!v.kept()) continue;
        weight[*v.bit] += polar::overlap_probability(
                              faked.state.state(), sarg_angle(basis, static_cast<int>(letter))) *
                          eff(letter);
      }
    }
    const int guess = weight[0] > weight[1] ? 0 : (weight[1] > weight[0] ? 1 : eve_result.bit);
    if (guess == *verdict.bit) ++acc.eve_known;
  });
}

}  // namespace qkdfs::sarg04
