#include "oracles.hpp"

#include "qkdfs/detmodel.hpp"
#include "qkdfs/engine.hpp"
#include "qkdfs/polar.hpp"
#include "qkdfs/random.hpp"
#include "qkdfs/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace qkdfs;

TEST_CASE("curves evaluate and parse") {
  CHECK(EfficiencyCurve::constant(0.3).at(ControlValue(5.0)) == doctest::Approx(0.3));
  const auto g = EfficiencyCurve::parse("gauss:0.5,0.2,0.9");
  CHECK(g.at(ControlValue(0.5)) == doctest::Approx(0.9));
  CHECK(g.at(ControlValue(0.7)) < 0.9);
  const auto t = EfficiencyCurve::parse("table:0:0;1:1");
  CHECK(t.at(ControlValue(0.25)) == doctest::Approx(0.25));
  REQUIRE(t.domain());
  CHECK(t.domain()->second == 1.0);
  CHECK_THROWS(EfficiencyCurve::parse("wobble:1"));
  CHECK_THROWS(EfficiencyCurve::parse("constant:1.5"));
}

TEST_CASE("working points pick the most lopsided ratios") {
  // detector 0 peaks at -0.5, detector 1 at +0.5
  const DetectorPair pair(EfficiencyCurve::gaussian(-0.5, 0.3, 1.0), EfficiencyCurve::gaussian(0.5, 0.3, 1.0));
  const auto grid = linear_grid(-1.0, 1.0, 201);
  CHECK(grid.size() == 201);
  const auto choice = choose_control_values(pair, grid);
  // t0 blinds detector 1: far left; t1 blinds detector 0: far right
  CHECK(choice.t0.value() == doctest::Approx(-1.0));
  CHECK(choice.t1.value() == doctest::Approx(1.0));
  CHECK(choice.spec.eta1_t0 < choice.spec.eta0_t0);
  CHECK(choice.spec.eta0_t1 < choice.spec.eta1_t1);
}

TEST_CASE("mismatch spec helpers") {
  const auto s = MismatchSpec::symmetric(0.2);
  REQUIRE(s.symmetric_ratio());
  CHECK(*s.symmetric_ratio() == doctest::Approx(0.2));
  CHECK(MismatchSpec::total_mismatch().is_total());
  CHECK_FALSE(MismatchSpec{1.0, 0.3, 0.1, 1.0}.symmetric_ratio());
  CHECK_THROWS_AS((MismatchSpec{1.2, 0, 0, 1}.validate()), DomainError);
  const auto r = Receiver::from_spec({0.9, 0.1, 0.2, 0.8}, 0.5, 0.6);
  CHECK(r.eta(0, Control::t0) == doctest::Approx(0.9));
  CHECK(r.eta(1, Control::t0) == doctest::Approx(0.2));
  CHECK(r.eta(0, Control::t1) == doctest::Approx(0.1));
  CHECK(r.eta(1, Control::normal) == doctest::Approx(0.6));
}

TEST_CASE("rational double conversion is exact") {
  CHECK(from_double(0.375) == Rational(3, 8));
  CHECK(to_double(from_double(0.1)) == 0.1);
}

TEST_CASE("streams are pure functions of key and counter") {
  Stream a = derive_stream(7, 3);
  Stream b = derive_stream(7, 3);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CHECK(derive_stream(7, 3)() != derive_stream(7, 4)());
  CHECK(derive_stream(7, 3)() != derive_stream(8, 3)());
  Stream u = derive_stream(1, 1);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    sum += x;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  std::set<std::uint32_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(u.below(4));
  CHECK(seen == std::set<std::uint32_t>{0, 1, 2, 3});
}

TEST_CASE("wilson interval") {
  const auto z = qber_estimate(0, 1000);
  CHECK(z.point == 0.0);
  CHECK(z.low == 0.0);
  CHECK(z.high == doctest::Approx(0.00383).epsilon(0.02));
  const auto h = qber_estimate(500, 1000);
  CHECK(h.low < 0.5);
  CHECK(h.high > 0.5);
  CHECK_FALSE(qber_estimate(0, 0).defined());
  CHECK(std::isnan(qber_estimate(0, 0).point));
  CHECK(binomial_sigma(0.5, 100) == doctest::Approx(0.05));
}

namespace {
struct Count {
  std::uint64_t n = 0;
  std::uint64_t ones = 0;
  void merge(const Count& o) {
    n += o.n;
    ones += o.ones;
  }
};
}  // namespace

TEST_CASE("serial and parallel round loops agree") {
  auto kernel = [](Count& c, Stream& s, std::uint64_t) {
    ++c.n;
    c.ones += s.bernoulli(0.3) ? 1 : 0;
  };
  const auto a = run_rounds<Count>(100000, {42, 1}, kernel);
  const auto b = run_rounds<Count>(100000, {42, 3}, kernel);
  const auto c = run_rounds<Count>(100000, {42, 0}, kernel);
  CHECK(a.n == 100000);
  CHECK(a.ones == b.ones);
  CHECK(a.ones == c.ones);
  CHECK(available_workers() >= 1);
}

TEST_CASE("polar overlaps") {
  using namespace polar;
  CHECK(overlap_probability(EquatorState(0), 0) == doctest::Approx(1.0));
  CHECK(overlap_probability(EquatorState(0), 180) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(overlap_probability(EquatorState(0), 90) == doctest::Approx(0.5));
  CHECK(overlap_probability(EquatorState(0), 45) == doctest::Approx((1 + std::sqrt(0.5)) / 2));
  CHECK(overlap_probability(PoleState{Pole::north}, 33) == doctest::Approx(0.5));
  CHECK(exact_overlap(EquatorState(270), 90) == Rational(0));
  CHECK(exact_overlap(EquatorState(270), 0) == Rational(1, 2));
  CHECK_THROWS_AS(exact_overlap(EquatorState(0), 45), DomainError);
  CHECK(cos_deg(90) == 0.0);
  CHECK(normalize_deg(-90) == 270.0);
}

TEST_CASE("polar click probabilities match Born rule times efficiency") {
  using namespace polar;
  const auto p = click_probabilities(EquatorState(90), MeasurementBasis{0}, {0.8, 0.4});
  CHECK(p.plus == doctest::Approx(0.4));
  CHECK(p.minus == doctest::Approx(0.2));
  CHECK(p.none == doctest::Approx(0.4));
  Stream rng = derive_stream(3, 0);
  int plus = 0;
  int minus = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto o = measure(EquatorState(90), MeasurementBasis{0}, {0.8, 0.4}, rng);
    plus += o == Outcome::plus;
    minus += o == Outcome::minus;
  }
  CHECK(oracle::within_sigma(double(plus) / n, 0.4, n, 4));
  CHECK(oracle::within_sigma(double(minus) / n, 0.2, n, 4));
}
