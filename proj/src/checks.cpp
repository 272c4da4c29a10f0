#include "qkdfs/checks.hpp"

#include "qkdfs/bb84.hpp"
#include "qkdfs/dpsk.hpp"
#include "qkdfs/ekert.hpp"
#include "qkdfs/interferometry.hpp"
#include "qkdfs/phasetime.hpp"
#include "qkdfs/random.hpp"
#include "qkdfs/sarg04.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

namespace qkdfs::checks {

namespace {

constexpr std::uint64_t kCheckSeed = 20070601;

Rational random_unit(Stream& rng) {
  const auto den = static_cast<std::int64_t>(rng.below(16) + 1);
  return Rational(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(den) + 1)), den);
}

ExactMismatchSpec random_spec(Stream& rng) {
  for (;;) {
    ExactMismatchSpec m{random_unit(rng), random_unit(rng), random_unit(rng), random_unit(rng)};
    if (m.eta0_t0 + m.eta0_t1 + m.eta1_t0 + m.eta1_t1 > 0) return m;
  }
}

CheckResult check(std::string name, const std::function<std::string()>& body) {
  try {
    const std::string failure = body();
    return {std::move(name), failure.empty(), failure};
  } catch (const std::exception& e) {
    return {std::move(name), false, e.what()};
  }
}

std::string bb84_formula() {
  Stream rng = derive_stream(kCheckSeed, 1);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_spec(rng);
    const auto e = bb84::enumerate_attack(m);
    if (e.qber() != bb84::analytic_qber(m)) return fmt::format("mismatch at sample {}", i);
  }
  return {};
}

std::string sarg04_formula() {
  Stream rng = derive_stream(kCheckSeed, 2);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_spec(rng);
    const auto e = sarg04::enumerate_attack(m);
    const auto& a_ta = m.eta0_t0;
    const auto& a_tb = m.eta0_t1;
    const auto& b_ta = m.eta1_t0;
    const auto& b_tb = m.eta1_t1;
    if (e.arrival != sarg04::p_arrive(a_ta, a_tb, b_ta, b_tb)) return fmt::format("arrival mismatch at {}", i);
    if (e.qber() != sarg04::analytic_qber(m)) return fmt::format("qber mismatch at {}", i);
    const auto given = sarg04::enumerate_given(sarg04::SargState{0, sarg04::Letter::a}, m);
    if (given.arrival != sarg04::p_arrive_given_0a(a_ta, a_tb, b_ta, b_tb)) {
      return fmt::format("per-state arrival mismatch at {}", i);
    }
  }
  return {};
}

std::string random_assignment() {
  const auto e = bb84::enumerate_attack_random_assignment(ExactMismatchSpec::total_mismatch());
  if (e.qber() != Rational(1, 2)) return fmt::format("got {}", to_string(e.qber()));
  return {};
}

std::string ekert_exact_weights() {
  const auto m = ekert::mixture_correlations(ekert::exact_equal_terms_weights());
  const double target = -2.0 * std::numbers::sqrt2;
  if (std::abs(m.chsh() - target) > 1e-12) return fmt::format("S = {}", m.chsh());
  for (const auto& p : ekert::kChshPairs) {
    if (std::abs(std::abs(*m.at(p).e) - std::numbers::sqrt2 / 2.0) > 1e-12) return p.name() + " term off";
  }
  for (const auto& p : ekert::kKeyPairs) {
    if (*m.at(p).e != -1.0) return p.name() + " not anticorrelated";
  }
  return {};
}

std::string ekert_solver() {
  const auto solved = ekert::solve_equal_terms();
  const auto exact = ekert::exact_equal_terms_weights();
  const double err = std::max({std::abs(solved.alpha - exact.alpha), std::abs(solved.beta - exact.beta),
                               std::abs(solved.gamma - exact.gamma)});
  if (err > 1e-9) return fmt::format("solver differs from closed form by {}", err);
  const auto two = ekert::solve_two_combination(-2.0 * std::numbers::sqrt2);
  if (std::abs(two.alpha - (2.0 - std::numbers::sqrt2)) > 1e-9) return "two-combination weights off";
  return {};
}

std::string ekert_s_of_beta() {
  Stream rng = derive_stream(kCheckSeed, 3);
  for (int i = 0; i < 100; ++i) {
    const double pb = rng.uniform() * 0.999;
    const auto m = ekert::mixture_correlations(ekert::MixtureWeights{1.0 - pb, pb, 0.0});
    if (std::abs(m.chsh() - ekert::s_of_beta(pb)) > 1e-12) return fmt::format("P_beta = {}", pb);
  }
  return {};
}

std::string ekert_footnote() {
  const auto a = ekert::FakedPairCombination::alpha();
  const auto f = ekert::FakedPairCombination::alpha_footnote();
  for (const auto& p : ekert::all_pairs()) {
    const auto x = ekert::combination_correlation(a, p);
    const auto y = ekert::combination_correlation(f, p);
    if (std::abs(x.d - y.d) > 1e-15 || std::abs(x.c - y.c) > 1e-15) return p.name();
  }
  return {};
}

std::string phasetime_nulls() {
  const Receiver receiver = Receiver::from_spec(MismatchSpec::total_mismatch());
  for (const auto sym : phasetime::kAllSymbols) {
    const auto faked = phasetime::faked_state_for(sym, 1.0, receiver);
    const auto ports = interferometry::interfere(faked.train);
    for (const auto& [slot, port] : phasetime::null_targets(sym)) {
      if (ports.intensity(slot, port) >= 1e-24) {
        return fmt::format("{} leaks at slot {}", phasetime::to_string(sym), slot);
      }
    }
  }
  return {};
}

std::string dpsk_nulls() {
  const Receiver receiver = Receiver::from_spec(MismatchSpec::total_mismatch());
  for (std::uint64_t f = 0; f < 100; ++f) {
    Stream rng = derive_stream(kCheckSeed + 4, f);
    const auto frame = dpsk::DpskFrame::random(64, rng);
    const auto record = dpsk::eve_detect(frame, 0.5, 1.0, rng);
    const auto plan = dpsk::continuous_train_plan(record, 64, 1.0, receiver);
    for (const auto* t : {&plan.zero, &plan.one}) {
      if (t->null_residual() >= 1e-24) return fmt::format("frame {} leaks {}", f, t->null_residual());
    }
  }
  return {};
}

std::string interfere_energy() {
  for (std::uint64_t f = 0; f < 100; ++f) {
    Stream rng = derive_stream(kCheckSeed + 5, f);
    std::vector<std::optional<interferometry::Pulse>> pulses;
    for (int k = 0; k < 64; ++k) {
      if (rng.bernoulli(0.2)) {
        pulses.push_back(std::nullopt);
      } else {
        pulses.push_back(interferometry::Pulse{std::polar(rng.uniform(), 2.0 * std::numbers::pi * rng.uniform()),
                                               ControlValue(0.0)});
      }
    }
    const interferometry::PulseTrain train(0, std::move(pulses), 1.0);
    const double in = train.energy();
    const double out = interferometry::interfere(train, rng.uniform()).energy();
    if (std::abs(in - out) > 1e-12) return fmt::format("train {}: {} in, {} out", f, in, out);
  }
  return {};
}

}  // namespace

std::vector<CheckResult> run_all() {
  return {
      check("bb84 enumeration equals closed form (100 rational specs)", bb84_formula),
      check("bb84 symmetric QBER at eta=1/15 is 1/9",
            [] { return bb84::symmetric_qber(Rational(1, 15)) == Rational(1, 9) ? std::string() : "not 1/9"; }),
      check("sarg04 enumeration equals closed forms (100 rational specs)", sarg04_formula),
      check("sarg04 symmetric QBER at eta=1/30 is 4/37",
            [] { return sarg04::symmetric_qber(Rational(1, 30)) == Rational(4, 37) ? std::string() : "not 4/37"; }),
      check("bb84 random detector assignment, total mismatch: QBER 1/2", random_assignment),
      check("ekert closed-form weights give equal CHSH terms", ekert_exact_weights),
      check("ekert weight solver matches closed forms", ekert_solver),
      check("ekert S(P_beta) matches mixture (100 samples)", ekert_s_of_beta),
      check("ekert linear-state alpha equals circular alpha", ekert_footnote),
      check("phase-time faked states null certificates", phasetime_nulls),
      check("dpsk continuous trains null certificates (100 frames)", dpsk_nulls),
      check("interferometer conserves energy (100 random trains)", interfere_energy),
  };
}

bool print_checks(std::ostream& out, const std::vector<CheckResult>& results) {
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    out << fmt::format("{}  {}{}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail.empty() ? "" : "  (" + r.detail + ")");
  }
  out << fmt::format("{} of {} checks passed\n",
                     std::count_if(results.begin(), results.end(), [](const auto& r) { return r.passed; }),
                     results.size());
  return all;
}

void print_tables(std::ostream& out) {
  const Rational bb = bb84::symmetric_qber(Rational(1, 15));
  const Rational sg = sarg04::symmetric_qber(Rational(1, 30));
  out << "threshold QBER under symmetric mismatch\n";
  out << fmt::format("  bb84    eta=1/15  qber={} ({:.6f})\n", to_string(bb), to_double(bb));
  out << fmt::format("  sarg04  eta=1/30  qber={} ({:.6f})\n", to_string(sg), to_double(sg));

  auto row = [&](const char* label, const ekert::MixtureWeights& w) {
    const auto m = ekert::mixture_correlations(w);
    out << fmt::format("  {:<22} P=({:.5f}, {:.5f}, {:.5f})  E(a1,b1)={:+.4f} E(a1,b3)={:+.4f} E(a3,b1)={:+.4f} "
                       "E(a3,b3)={:+.4f}  S={:.6f}\n",
                       label, w.alpha, w.beta, w.gamma, *m.at({0, 0}).e, *m.at({0, 2}).e, *m.at({2, 0}).e,
                       *m.at({2, 2}).e, m.chsh());
  };
  out << "ekert faked-pair mixtures (alpha, beta, gamma)\n";
  row("alpha only", {1.0, 0.0, 0.0});
  row("alpha+beta rounded", {0.586, 0.414, 0.0});
  row("alpha+beta exact", ekert::solve_two_combination(-2.0 * std::numbers::sqrt2));
  row("three rounded", {0.116, 0.653, 0.231});
  row("three exact", ekert::exact_equal_terms_weights());
  out << fmt::format("  singlet reference      S={:.6f}\n", ekert::singlet_matrix().chsh());
}

}  // namespace qkdfs::checks
