// Acceptance suite: one PASS/FAIL line per criterion.

#include "oracles.hpp"

#include "qkdfs/bb84.hpp"
#include "qkdfs/cli.hpp"
#include "qkdfs/dpsk.hpp"
#include "qkdfs/ekert.hpp"
#include "qkdfs/interferometry.hpp"
#include "qkdfs/phasetime.hpp"
#include "qkdfs/sarg04.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace qkdfs;
using interferometry::Port;

namespace {

constexpr std::uint64_t kSeed = 1701;
const double kTwoRootTwo = 2.0 * std::numbers::sqrt2;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Rational unit(Stream& rng) {
  const auto den = static_cast<std::int64_t>(rng.below(20) + 1);
  return Rational(static_cast<std::int64_t>(rng.below(static_cast<std::uint32_t>(den) + 1)), den);
}

ExactMismatchSpec random_spec(Stream& rng) {
  for (;;) {
    ExactMismatchSpec m{unit(rng), unit(rng), unit(rng), unit(rng)};
    if (m.eta0_t0 + m.eta0_t1 + m.eta1_t0 + m.eta1_t1 > 0) return m;
  }
}

oracle::EtaTable table(const ExactMismatchSpec& m) {
  return oracle::eta_table(m.eta0_t0, m.eta0_t1, m.eta1_t0, m.eta1_t1);
}

// Spec with a single efficiency set to 1: a_ta, a_tb, b_ta, b_tb in that order.
ExactMismatchSpec unit_spec(int i) {
  ExactMismatchSpec m{Rational(0), Rational(0), Rational(0), Rational(0)};
  std::array<Rational*, 4> f{&m.eta0_t0, &m.eta0_t1, &m.eta1_t0, &m.eta1_t1};
  *f[static_cast<std::size_t>(i)] = 1;
  return m;
}

// Monte Carlo estimate against an exact value at k sigma, sigma from the exact value.
void within(Outcome& o, const char* what, const AttackStats& s, double expected, double k) {
  const double q = s.qber().point;
  const double sigma = binomial_sigma(expected, s.sifted);
  const double z = (q - expected) / sigma;
  o.note(fmt::format("{} qber {:.5f} vs {:.5f} ({:+.2f} sigma, {} sifted)", what, q, expected, z, s.sifted));
  if (std::abs(z) > k) o.fail(fmt::format("{} outside {} sigma", what, k));
}

Outcome ac1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Stream rng = derive_stream(kSeed, 1);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_spec(rng);
    const auto lib = bb84::enumerate_attack(m);
    if (lib.qber() != oracle::bb84_qber_formula(table(m))) o.fail(fmt::format("closed form differs at spec {}", i));
    const auto ref = oracle::bb84(table(m), false);
    if (lib.arrival != ref.arrival || lib.error != ref.error) o.fail(fmt::format("oracle differs at spec {}", i));
  }
  const double secs = seconds_since(t0);
  o.note(fmt::format("100 specs in {:.3f} s", secs));
  if (secs >= 1.0) o.fail("too slow");
  return o;
}

Outcome ac2() {
  Outcome o;
  if (bb84::symmetric_qber(Rational(1, 15)) != Rational(1, 9)) o.fail("symmetric_qber(1/15) != 1/9");
  const auto t0 = std::chrono::steady_clock::now();
  bb84::AttackConfig cfg;
  cfg.spec = MismatchSpec::symmetric(1.0 / 15.0);
  const auto s = bb84::simulate(1000000, cfg, {kSeed, 0});
  within(o, "n=1e6", s, 1.0 / 9.0, 3.0);
  const double secs = seconds_since(t0);
  o.note(fmt::format("{:.2f} s", secs));
  if (secs >= 10.0) o.fail("too slow");
  return o;
}

// Expected rows for Alice = 0_a: Eve's result, resent state and timing, Bob's
// basis and letter, probability coefficients on (a_ta, a_tb, b_ta, b_tb) and
// the sifting verdict for the announcements {0_a,1_a} and {0_a,1_b}
// (-1 discard, else the kept bit). Zero-probability rows carry no verdict.
struct TableRow {
  int eve_bit;
  sarg04::Letter eve_letter;
  int resent_bit;
  sarg04::Letter resent_letter;
  Control control;
  int bob_basis;
  sarg04::Letter bob_letter;
  std::array<Rational, 4> coeff;
  std::array<int, 2> sifting;
};

std::vector<TableRow> expected_table() {
  using L = sarg04::Letter;
  const Rational h(1, 2);
  const Rational z(0);
  const Rational one(1);
  return {
      {0, L::a, 1, L::b, Control::t0, 0, L::a, {h, z, z, z}, {-1, -1}},
      {0, L::a, 1, L::b, Control::t0, 0, L::b, {z, z, h, z}, {1, 1}},
      {0, L::a, 1, L::b, Control::t0, 1, L::a, {z, z, z, z}, {-2, -2}},
      {0, L::a, 1, L::b, Control::t0, 1, L::b, {z, z, one, z}, {0, -1}},
      {1, L::a, 0, L::b, Control::t0, 0, L::a, {z, z, z, z}, {-2, -2}},
      {1, L::a, 0, L::b, Control::t0, 0, L::b, {z, z, one, z}, {1, 1}},
      {1, L::a, 0, L::b, Control::t0, 1, L::a, {h, z, z, z}, {-1, 0}},
      {1, L::a, 0, L::b, Control::t0, 1, L::b, {z, z, h, z}, {0, -1}},
      {1, L::b, 0, L::a, Control::t1, 0, L::a, {z, one, z, z}, {-1, -1}},
      {1, L::b, 0, L::a, Control::t1, 0, L::b, {z, z, z, z}, {-2, -2}},
      {1, L::b, 0, L::a, Control::t1, 1, L::a, {z, h, z, z}, {-1, 0}},
      {1, L::b, 0, L::a, Control::t1, 1, L::b, {z, z, z, h}, {0, -1}},
  };
}

void check_table(Outcome& o) {
  const sarg04::SargState alice{0, sarg04::Letter::a};
  std::array<std::vector<sarg04::AttackTableRow>, 4> lib;
  for (int i = 0; i < 4; ++i) lib[static_cast<std::size_t>(i)] = sarg04::attack_table(alice, unit_spec(i));
  const auto expected = expected_table();
  if (lib[0].size() != expected.size()) {
    o.fail(fmt::format("table has {} rows, expected {}", lib[0].size(), expected.size()));
    return;
  }
  int matched = 0;
  for (const auto& e : expected) {
    bool found = false;
    for (std::size_t r = 0; r < lib[0].size(); ++r) {
      const auto& row = lib[0][r];
      if (row.eve_result != sarg04::SargState{e.eve_bit, e.eve_letter} || row.bob_basis != e.bob_basis ||
          row.bob_letter != e.bob_letter) {
        continue;
      }
      found = true;
      const std::string name = fmt::format("Eve {} Bob {}{}", row.eve_result.name(), e.bob_basis,
                                           e.bob_letter == sarg04::Letter::a ? 'a' : 'b');
      if (row.resent.state != sarg04::SargState{e.resent_bit, e.resent_letter} || row.resent.control != e.control) {
        o.fail(name + ": resent state");
      }
      // Eve's 0_a result covers two blocks of weight 1/8
      const Rational weight = e.eve_bit == 0 ? Rational(1, 4) : Rational(1, 8);
      if (row.row_weight != weight) o.fail(name + ": row weight");
      for (int i = 0; i < 4; ++i) {
        if (lib[static_cast<std::size_t>(i)][r].probability != e.coeff[static_cast<std::size_t>(i)]) {
          o.fail(name + ": probability");
        }
      }
      const bool dark = e.coeff == std::array<Rational, 4>{0, 0, 0, 0};
      for (std::size_t k = 0; k < 2 && !dark; ++k) {
        const auto& s = row.sifting[k];
        const int got = s.kept() ? *s.bit : -1;
        if (got != e.sifting[k]) o.fail(name + fmt::format(": sifting for announcement {}", k));
      }
      ++matched;
    }
    if (!found) o.fail("missing row");
  }
  o.note(fmt::format("{} table rows matched", matched));
}

Outcome ac3() {
  Outcome o;
  const sarg04::SargState alice{0, sarg04::Letter::a};
  const std::array<Rational, 4> coeff{Rational(1, 4), Rational(1, 4), Rational(13, 4), Rational(1, 4)};
  for (int i = 0; i < 4; ++i) {
    const auto given = sarg04::enumerate_given(alice, unit_spec(i));
    if (given.arrival != coeff[static_cast<std::size_t>(i)] / 8) o.fail(fmt::format("coefficient {} differs", i));
  }
  Stream rng = derive_stream(kSeed, 3);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_spec(rng);
    const auto lib = sarg04::enumerate_attack(m);
    if (lib.arrival != oracle::sarg04_arrival_formula(table(m))) o.fail(fmt::format("arrival differs at {}", i));
    if (lib.arrival > 0 && lib.qber() != oracle::sarg04_qber_formula(table(m))) {
      o.fail(fmt::format("qber differs at {}", i));
    }
    const auto ref = oracle::sarg04(table(m));
    if (ref.arrival != lib.arrival || ref.error != lib.error) o.fail(fmt::format("oracle differs at {}", i));
  }
  check_table(o);
  return o;
}

Outcome ac4() {
  Outcome o;
  const Rational q = sarg04::symmetric_qber(Rational(1, 30));
  if (q != Rational(4, 37)) o.fail("symmetric_qber(1/30) != 4/37");
  if (!(q < Rational(11, 100))) o.fail("not below 0.11");
  o.note(fmt::format("4/37 = {:.4f}", to_double(q)));
  sarg04::AttackConfig cfg;
  cfg.spec = MismatchSpec::symmetric(1.0 / 30.0);
  within(o, "n=1e6", sarg04::simulate(1000000, cfg, {kSeed, 0}), 4.0 / 37.0, 3.0);
  return o;
}

void zero_qber(Outcome& o, const char* name, const AttackStats& s) {
  o.note(fmt::format("{}: {} errors / {} sifted, knowledge {}", name, s.errors, s.sifted, s.eve_knowledge()));
  if (s.sifted == 0) o.fail(fmt::format("{}: empty key", name));
  if (s.errors != 0) o.fail(fmt::format("{}: errors", name));
  if (s.eve_known != s.sifted) o.fail(fmt::format("{}: Eve knowledge below 1", name));
}

Outcome ac5() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const RunOptions opts{kSeed, 0};
  const std::uint64_t n = 100000;
  zero_qber(o, "bb84", bb84::simulate(n, bb84::AttackConfig{}, opts));
  zero_qber(o, "sarg04", sarg04::simulate(n, sarg04::AttackConfig{}, opts));
  zero_qber(o, "phasetime", phasetime::simulate(n, phasetime::Config{}, opts).stats);
  zero_qber(o, "dpsk", dpsk::simulate(n, dpsk::Config{}, opts).stats);
  const double secs = seconds_since(t0);
  o.note(fmt::format("{:.1f} s", secs));
  if (secs >= 60.0) o.fail("too slow");
  return o;
}

Outcome ac6() {
  Outcome o;
  const auto rounded = ekert::mixture_correlations(ekert::MixtureWeights{0.586, 0.414, 0.0});
  const double e13 = *rounded.at({0, 2}).e;
  o.note(fmt::format("E(a1,b3) = {:.4f}, S = {:.5f}", e13, rounded.chsh()));
  if (std::abs(e13 + 0.172) > 0.001) o.fail("E(a1,b3)");
  if (std::abs(rounded.chsh() + kTwoRootTwo) > 0.004) o.fail("S for rounded weights");
  const auto exact = ekert::mixture_correlations(
      ekert::MixtureWeights{2.0 - std::numbers::sqrt2, std::numbers::sqrt2 - 1.0, 0.0});
  const double err = std::abs(exact.chsh() + kTwoRootTwo);
  o.note(fmt::format("exact |S + 2 sqrt2| = {:.1e}", err));
  if (err > 1e-12) o.fail("S for exact weights");
  return o;
}

Outcome ac7() {
  Outcome o;
  const auto m = ekert::mixture_correlations(ekert::MixtureWeights{0.116, 0.653, 0.231});
  for (const auto& p : ekert::kChshPairs) {
    const double e = *m.at(p).e;
    o.note(fmt::format("{} {:+.4f}", p.name(), e));
    if (std::abs(std::abs(e) - 0.707) > 0.002) o.fail(p.name());
  }
  o.note(fmt::format("S = {:.5f}", m.chsh()));
  if (std::abs(m.chsh() + kTwoRootTwo) > 0.004) o.fail("S");

  std::vector<ekert::WeightTarget> targets;
  for (const auto& p : ekert::kChshPairs) targets.push_back({p, ekert::singlet_correlation(p)});
  const auto w = ekert::solve_weights(
      {ekert::FakedPairCombination::alpha(), ekert::FakedPairCombination::beta(), ekert::FakedPairCombination::gamma()},
      targets);
  const std::array<double, 3> want{0.116, 0.653, 0.231};
  const double den = 3.0 + 4.0 * std::numbers::sqrt2;
  const std::array<double, 3> closed{1.0 / den, 4.0 * std::numbers::sqrt2 / den, 2.0 / den};
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::round(w[i] * 1000.0) / 1000.0 != want[i]) o.fail(fmt::format("weight {} rounds to {:.3f}", i, w[i]));
    if (std::abs(w[i] - closed[i]) > 1e-9) o.fail(fmt::format("weight {} differs from closed form", i));
  }
  o.note(fmt::format("solved ({:.5f}, {:.5f}, {:.5f})", w[0], w[1], w[2]));
  return o;
}

Outcome ac8() {
  Outcome o;
  if (std::abs(ekert::s_of_beta(0.0) + 2.0) > 1e-12) o.fail("s_of_beta(0) != -2");
  double prev = ekert::s_of_beta(0.0);
  for (int i = 1; i <= 10000; ++i) {
    const double s = ekert::s_of_beta(i / 10001.0);
    if (!(s < prev)) o.fail(fmt::format("not decreasing at step {}", i));
    if (!(s > -4.0)) o.fail("reached -4");
    prev = s;
  }
  const double near = ekert::s_of_beta(1.0 - 1e-9);
  o.note(fmt::format("s_of_beta(1-1e-9) = {:.9f}", near));
  if (std::abs(near + 4.0) > 1e-6) o.fail("limit is not -4");
  if (!(ekert::s_of_beta(0.5) < -kTwoRootTwo)) o.fail("does not pass -2 sqrt2");
  return o;
}

Outcome ac9() {
  Outcome o;
  double worst = 0.0;
  const auto receiver = Receiver::from_spec(MismatchSpec::total_mismatch());
  for (const auto sym : phasetime::kAllSymbols) {
    const auto out = interferometry::interfere(phasetime::faked_state_for(sym, 1.0, receiver).train);
    for (const auto& [slot, port] : phasetime::null_targets(sym)) worst = std::max(worst, out.intensity(slot, port));
  }
  const int length = 64;
  for (std::uint64_t f = 0; f < 200; ++f) {
    Stream rng = derive_stream(kSeed + 9, f);
    const auto frame = dpsk::DpskFrame::random(length, rng);
    const auto record = dpsk::eve_detect(frame, 1.0, 1.0, rng);
    const auto plan = dpsk::continuous_train_plan(record, length, 1.0, receiver);
    worst = std::max({worst, plan.zero.null_residual(), plan.one.null_residual()});
    // segments between consecutive detections of the same bit
    for (const int bit : {0, 1}) {
      std::vector<int> windows;
      for (const auto& [w, b] : record.entries()) {
        if (b == bit) windows.push_back(w);
      }
      for (std::size_t i = 1; i < windows.size(); ++i) {
        const int first = windows[i - 1];
        const int last = windows[i];
        const Port live = bit == 0 ? Port::d0 : Port::d1;
        const auto out = interferometry::interfere(dpsk::segment_faked_state(record, first, last, bit, 1.0, receiver));
        for (int w = first + 1; w < last; ++w) {
          if (!record.contains(w, bit)) worst = std::max(worst, out.intensity(w, live));
        }
        if (last == first + 1) {
          const auto single = interferometry::interfere(
              dpsk::single_pulse_faked_state(record, first, bit, 1.0, receiver));
          if (single.energy() <= 0.0) o.fail("empty single-pulse state");
        }
      }
    }
  }
  o.note(fmt::format("worst null residual {:.1e}", worst));
  if (!(worst < 1e-24)) o.fail("null residual");

  double drift = 0.0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    Stream rng = derive_stream(kSeed + 10, t);
    std::vector<std::optional<interferometry::Pulse>> pulses;
    double in = 0.0;
    for (int k = 0; k < 64; ++k) {
      const std::complex<double> a(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
      in += std::norm(a);
      pulses.push_back(interferometry::Pulse{a, ControlValue(0.0)});
    }
    const interferometry::PulseTrain train(static_cast<int>(rng.below(10)), std::move(pulses), 1.0);
    drift = std::max(drift, std::abs(interferometry::interfere(train, 6.283 * rng.uniform()).energy() - in));
  }
  o.note(fmt::format("worst energy drift {:.1e}", drift));
  if (!(drift < 1e-12)) o.fail("energy not conserved");
  return o;
}

Outcome ac10() {
  Outcome o;
  const auto exact = bb84::enumerate_attack_random_assignment(ExactMismatchSpec::total_mismatch());
  const auto ref = oracle::bb84(table(ExactMismatchSpec::total_mismatch()), true);
  if (exact.qber() != ref.qber()) o.fail("library and oracle disagree");
  o.note(fmt::format("exact qber {}", to_string(ref.qber())));
  const auto s = bb84::simulate_with_random_assignment(1000000, bb84::AttackConfig{}, {kSeed, 0});
  const double q = s.qber().point;
  const double sigma = binomial_sigma(q, s.sifted);
  o.note(fmt::format("n=1e6 qber {:.5f} ({:.1f} sigma above 0)", q, q / sigma));
  if (!(q - 4.0 * sigma > 0.0)) o.fail("not above 0 at 4 sigma");
  within(o, "vs exact", s, to_double(ref.qber()), 4.0);
  return o;
}

Outcome ac11() {
  Outcome o;
  const std::array<double, 5> grid{0.0, 0.1, 0.2, 0.3, 0.4};
  auto series = [&](const char* name, const std::function<AttackStats(double)>& run) {
    std::vector<QberEstimate> est;
    std::string line = std::string(name) + ":";
    for (const double eta : grid) {
      est.push_back(run(eta).qber());
      line += fmt::format(" {:.4f}", est.back().point);
    }
    o.note(line);
    for (std::size_t i = 1; i < est.size(); ++i) {
      if (est[i].point < est[i - 1].point) o.fail(fmt::format("{} decreases at eta={}", name, grid[i]));
    }
    if (!(est.front().high < est.back().low)) o.fail(fmt::format("{} extreme intervals overlap", name));
  };
  series("phasetime", [](double eta) {
    phasetime::Config cfg;
    cfg.spec = MismatchSpec::symmetric(eta);
    cfg.mu = 0.5;
    return phasetime::simulate(200000, cfg, {kSeed, 0}).stats;
  });
  series("dpsk", [](double eta) {
    dpsk::Config cfg;
    cfg.spec = MismatchSpec::symmetric(eta);
    return dpsk::simulate(5000, cfg, {kSeed, 0}).stats;
  });
  return o;
}

std::string run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qkdfs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  if (qkdfs::cli::run(static_cast<int>(argv.size()), argv.data(), out, err) != 0) return "exit error: " + err.str();
  return out.str();
}

Outcome ac12() {
  Outcome o;
  const std::vector<std::vector<std::string>> cases{
      {"bb84", "-n", "200000", "--eta", "0.1"},
      {"bb84", "-n", "200000", "--set", "bb84.random_assignment=true"},
      {"sarg04", "-n", "200000", "--eta", "0.05"},
      {"phasetime", "-n", "100000", "--eta", "0.2"},
      {"dpsk", "-n", "2000", "--eta", "0.2"},
      {"dpsk", "-n", "2000", "--set", "attack.brightness=compensate"},
      {"ekert", "-n", "200000"},
      {"sweep", "-p", "phasetime", "--param", "mu", "--from", "0.1", "--to", "0.5", "--steps", "3", "-n", "20000"},
  };
  for (const auto& c : cases) {
    std::vector<std::string> outputs;
    for (const char* workers : {"1", "2", "4", "0"}) {
      auto args = c;
      for (const char* extra : {"-s", "99", "-w"}) args.emplace_back(extra);
      args.emplace_back(workers);
      outputs.push_back(run_cli(args));
    }
    const std::string& name = c[0] == "sweep" ? c[2] + " sweep" : c[0];
    if (outputs[0].rfind("exit error", 0) == 0) o.fail(name + " " + outputs[0]);
    if (std::count(outputs.begin(), outputs.end(), outputs[0]) != static_cast<std::ptrdiff_t>(outputs.size())) o.fail(name + " output depends on workers");
  }
  o.note(fmt::format("{} runs compared at 1, 2, 4 and all ({}) workers", cases.size(), available_workers()));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1 bb84 enumeration equals closed form", ac1},
      {"AC2 bb84 threshold", ac2},
      {"AC3 sarg04 attack table and closed forms", ac3},
      {"AC4 sarg04 threshold", ac4},
      {"AC5 zero-QBER attacks under total mismatch", ac5},
      {"AC6 ekert two-combination mixture", ac6},
      {"AC7 ekert three-combination mixture", ac7},
      {"AC8 ekert S as a function of P_beta", ac8},
      {"AC9 interference null certificates", ac9},
      {"AC10 random detector assignment", ac10},
      {"AC11 monotone QBER in mismatch ratio", ac11},
      {"AC12 worker-count reproducibility", ac12},
  };
  int failed = 0;
  for (const auto& [name, body] : criteria) {
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failed;
    std::cout << fmt::format("{} {}  [{}]\n", o.pass ? "PASS" : "FAIL", name, o.detail) << std::flush;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
                           criteria.size());
  return failed == 0 ? 0 : 1;
}
