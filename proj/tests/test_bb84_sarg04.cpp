#include "oracles.hpp"

#include "qkdfs/bb84.hpp"
#include "qkdfs/sarg04.hpp"

#include <doctest.h>

using namespace qkdfs;

namespace {

Rational unit(Stream& rng) {
  const auto den = static_cast<std::int64_t>(rng.below(12) + 1);
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

}  // namespace

TEST_CASE("bb84 faked states") {
  const auto f = bb84::faked_state_for(bb84::Basis::z, 0);
  CHECK(f.qubit == bb84::Qubit{bb84::Basis::x, 1});
  CHECK(f.control == Control::t0);
  CHECK(bb84::faked_state_for(bb84::Basis::x, 1).control == Control::t1);
}

TEST_CASE("bb84 enumeration agrees with oracle and closed form") {
  Stream rng = derive_stream(11, 0);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_spec(rng);
    const auto lib = bb84::enumerate_attack(m);
    const auto ref = oracle::bb84(table(m), false);
    CHECK(lib.arrival == ref.arrival);
    CHECK(lib.error == ref.error);
    CHECK(lib.qber() == oracle::bb84_qber_formula(table(m)));
    const auto ra = bb84::enumerate_attack_random_assignment(m);
    const auto ra_ref = oracle::bb84(table(m), true);
    CHECK(ra.arrival == ra_ref.arrival);
    CHECK(ra.error == ra_ref.error);
  }
}

TEST_CASE("bb84 brightness clamps at one") {
  const ExactMismatchSpec m{Rational(1), Rational(1, 3), Rational(1, 5), Rational(1, 2)};
  const ExactBrightness w{Rational(1, 2), Rational(3), Rational(1)};
  const auto lib = bb84::enumerate_attack(m, w);
  const auto ref = oracle::bb84(table(m), false, {w.t0, w.t1});
  CHECK(lib.arrival == ref.arrival);
  CHECK(lib.error == ref.error);
}

TEST_CASE("bb84 equalizing brightness balances detection rates") {
  const ExactMismatchSpec m{Rational(1, 2), Rational(1, 10), Rational(1, 20), Rational(1)};
  const auto w = bb84::equalizing_brightness(m);
  CHECK(std::max(w.t0, w.t1) == 1);
  // faked state at t_d carries bit !d: click rate (eta_d + 3 eta_!d) / 4
  CHECK(w.t0 * (m.eta0_t0 + 3 * m.eta1_t0) == w.t1 * (m.eta1_t1 + 3 * m.eta0_t1));
}

TEST_CASE("bb84 symmetric threshold and domain") {
  CHECK(bb84::symmetric_qber(Rational(1, 15)) == Rational(1, 9));
  CHECK(bb84::symmetric_qber(Rational(0)) == 0);
  CHECK_THROWS_AS(bb84::symmetric_qber(Rational(2)), DomainError);
  CHECK_THROWS_AS(bb84::analytic_qber(ExactMismatchSpec{0, 0, 0, 0}), UndefinedError);
}

TEST_CASE("bb84 simulation tracks the analytic qber") {
  bb84::AttackConfig cfg;
  cfg.spec = MismatchSpec{0.9, 0.2, 0.1, 0.7};
  const auto s = bb84::simulate(400000, cfg, {5, 0});
  const double expected = bb84::analytic_qber(cfg.spec);
  CHECK(oracle::within_sigma(s.qber().point, expected, double(s.sifted), 4));
  CHECK(s.diag.conserved());
  CHECK(s == bb84::simulate(400000, cfg, {5, 1}));
}

TEST_CASE("bb84 random assignment leaves Eve 3/4 of the bits") {
  bb84::AttackConfig cfg;
  const auto s = bb84::simulate_with_random_assignment(200000, cfg, {9, 0});
  CHECK(oracle::within_sigma(s.qber().point, 0.5, double(s.sifted), 4));
  CHECK(oracle::within_sigma(s.eve_knowledge(), 0.75, double(s.sifted), 4));
}

TEST_CASE("bb84 time shift gains partial information without errors") {
  const auto s = bb84::time_shift_simulate(100000, MismatchSpec{1.0, 0.2, 0.2, 1.0}, 0.5, {1, 0});
  CHECK(s.errors == 0);
  CHECK(s.accuracy() > 0.75);
  CHECK(s.accuracy() < 0.9);
}

TEST_CASE("sarg04 sifting rule") {
  using sarg04::Letter;
  const sarg04::AnnouncedPair p{{0, Letter::a}, {1, Letter::a}};
  // result 0_b excludes 0_a, so the bit is 1
  CHECK(sarg04::sift(p, 0, Letter::b) == sarg04::SiftOutcome::keep(1));
  CHECK(sarg04::sift(p, 0, Letter::a) == sarg04::SiftOutcome::discard());
  CHECK(sarg04::sift(p, 1, Letter::b) == sarg04::SiftOutcome::keep(0));
  CHECK_THROWS(sarg04::AnnouncedPair({0, Letter::a}, {0, Letter::b}));
}

TEST_CASE("sarg04 enumeration agrees with oracle and closed forms") {
  Stream rng = derive_stream(12, 0);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_spec(rng);
    const auto lib = sarg04::enumerate_attack(m);
    const auto ref = oracle::sarg04(table(m));
    CHECK(lib.arrival == ref.arrival);
    CHECK(lib.error == ref.error);
    CHECK(lib.arrival == oracle::sarg04_arrival_formula(table(m)));
    if (ref.arrival > 0) CHECK(lib.qber() == oracle::sarg04_qber_formula(table(m)));
  }
  CHECK(sarg04::symmetric_qber(Rational(1, 30)) == Rational(4, 37));
}

TEST_CASE("sarg04 simulation tracks the analytic qber") {
  sarg04::AttackConfig cfg;
  cfg.spec = MismatchSpec::symmetric(0.1);
  const auto s = sarg04::simulate(400000, cfg, {6, 0});
  CHECK(oracle::within_sigma(s.qber().point, sarg04::symmetric_qber(0.1), double(s.sifted), 4));
  CHECK(s == sarg04::simulate(400000, cfg, {6, 1}));
}
