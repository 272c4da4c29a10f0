#include "qkdfs/ekert.hpp"

#include "qkdfs/error.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qkdfs::ekert {

namespace {

using polar::EquatorState;
using polar::Pole;
using polar::PoleState;

constexpr double kA1 = polar::layout::ekert_alice_axes[0];
constexpr double kA2 = polar::layout::ekert_alice_axes[1];
constexpr double kA3 = polar::layout::ekert_alice_axes[2];
constexpr double kB1 = polar::layout::ekert_bob_axes[0];
constexpr double kB2 = polar::layout::ekert_bob_axes[1];

FakedPhoton photon(double angle, Control c) { return {EquatorState(angle), c}; }

// Joint click probabilities for one variant: index 0:++ 1:+- 2:-+ 3:--.
std::array<double, 4> joint(const FakedPairVariant& v, const BasisPair& pair, const MismatchSpec& alice,
                            const MismatchSpec& bob) {
  auto side = [](const FakedPhoton& ph, double axis, const MismatchSpec& m) {
    const polar::MeasurementBasis basis{axis};
    return std::array<double, 2>{
        polar::overlap_probability(ph.state, basis.eigenstate(+1)) * m.eta(0, ph.control),
        polar::overlap_probability(ph.state, basis.eigenstate(-1)) * m.eta(1, ph.control)};
  };
  const auto a = side(v.alice, pair.alice_axis(), alice);
  const auto b = side(v.bob, pair.bob_axis(), bob);
  return {a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]};
}

double denominator(const std::vector<Contribution>& per_pair, const BasisPair& pair, Normalization norm) {
  if (norm == Normalization::per_pair) return per_pair[pair.index()].d;
  double total = 0.0;
  for (const auto& c : per_pair) total += c.d;
  return total / 9.0;
}

std::vector<Contribution> contributions(const FakedPairCombination& combo) {
  std::vector<Contribution> out;
  for (const auto& p : all_pairs()) out.push_back(combination_correlation(combo, p));
  return out;
}

}  // namespace

std::string BasisPair::name() const { return fmt::format("a{}b{}", alice + 1, bob + 1); }
double BasisPair::alice_axis() const { return polar::layout::ekert_alice_axes.at(static_cast<std::size_t>(alice)); }
double BasisPair::bob_axis() const { return polar::layout::ekert_bob_axes.at(static_cast<std::size_t>(bob)); }

bool BasisPair::in_key_set() const { return std::find(kKeyPairs.begin(), kKeyPairs.end(), *this) != kKeyPairs.end(); }
bool BasisPair::in_chsh_set() const {
  return std::find(kChshPairs.begin(), kChshPairs.end(), *this) != kChshPairs.end();
}

std::array<BasisPair, 9> all_pairs() {
  std::array<BasisPair, 9> out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[static_cast<std::size_t>(3 * i + j)] = {i, j};
  }
  return out;
}

FakedPairCombination FakedPairCombination::alpha() {
  return {"alpha",
          {{{PoleState{Pole::north}, Control::t0}, {PoleState{Pole::north}, Control::t1}},
           {{PoleState{Pole::north}, Control::t1}, {PoleState{Pole::north}, Control::t0}}}};
}

FakedPairCombination FakedPairCombination::alpha_footnote() {
  FakedPairCombination out{"alpha_footnote", {}};
  for (const auto& [ca, cb] : {std::pair{Control::t0, Control::t1}, std::pair{Control::t1, Control::t0}}) {
    for (const double a : {kA3, kA3 + 180.0}) {
      for (const double b : {kB1, kB1 + 180.0}) out.variants.push_back({photon(a, ca), photon(b, cb)});
    }
  }
  return out;
}

FakedPairCombination FakedPairCombination::beta() {
  return {"beta",
          {{photon(kA3 + 180.0, Control::t0), photon(kB1 + 180.0, Control::t0)},
           {photon(kA3, Control::t1), photon(kB1, Control::t1)}}};
}

FakedPairCombination FakedPairCombination::gamma() {
  return {"gamma",
          {{photon(kA2 + 180.0, Control::t0), photon(kB2 + 180.0, Control::t0)},
           {photon(kA2, Control::t1), photon(kB2, Control::t1)}}};
}

std::optional<double> Contribution::correlation() const {
  if (d <= 0.0) return std::nullopt;
  return c / d;
}

double singlet_correlation(const BasisPair& pair) { return -polar::cos_deg(pair.bob_axis() - pair.alice_axis()); }

Contribution combination_correlation(const FakedPairCombination& combo, const BasisPair& pair,
                                     const MismatchSpec& alice, const MismatchSpec& bob) {
  for (const auto* m : {&alice, &bob}) {
    m->validate();
    if (!m->is_total() || m->eta0_t0 != 1.0 || m->eta1_t1 != 1.0) {
      throw UnsupportedError("the faked-pair source is only modeled for total efficiency mismatch");
    }
  }
  if (combo.variants.empty()) throw ConstructionError("combination has no variants");
  Contribution out;
  for (const auto& v : combo.variants) {
    const auto p = joint(v, pair, alice, bob);
    out.d += p[0] + p[1] + p[2] + p[3];
    out.c += p[0] - p[1] - p[2] + p[3];
  }
  const auto n = static_cast<double>(combo.variants.size());
  out.d /= n;
  out.c /= n;
  return out;
}

void MixtureWeights::validate() const {
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) throw DomainError("mixture weights must be nonnegative");
  if (std::abs(alpha + beta + gamma - 1.0) > 1e-9) throw DomainError("mixture weights must sum to 1");
}

double CorrelationMatrix::chsh() const {
  std::array<double, 4> e{};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& entry = at(kChshPairs[k]);
    if (!entry.e) throw UndefinedError(fmt::format("no coincidences for {}", entry.pair.name()));
    e[k] = *entry.e;
  }
  return ekert::chsh(e[0], e[1], e[2], e[3]);
}

CorrelationMatrix singlet_matrix() {
  CorrelationMatrix m;
  for (const auto& p : all_pairs()) m.entries[p.index()] = {p, 1.0, singlet_correlation(p)};
  return m;
}

CorrelationMatrix mixture_correlations(const std::vector<std::pair<FakedPairCombination, double>>& mix,
                                       Normalization norm) {
  std::vector<Contribution> total(9);
  for (const auto& [combo, w] : mix) {
    if (w < 0.0) throw DomainError("mixture weights must be nonnegative");
    const auto parts = contributions(combo);
    for (std::size_t i = 0; i < 9; ++i) {
      total[i].d += w * parts[i].d;
      total[i].c += w * parts[i].c;
    }
  }
  CorrelationMatrix m;
  for (const auto& p : all_pairs()) {
    const double den = denominator(total, p, norm);
    auto& entry = m.entries[p.index()];
    entry.pair = p;
    entry.d = total[p.index()].d;
    if (total[p.index()].d > 0.0 && den > 0.0) entry.e = total[p.index()].c / den;
  }
  return m;
}

CorrelationMatrix mixture_correlations(const MixtureWeights& w, Normalization norm) {
  w.validate();
  return mixture_correlations({{FakedPairCombination::alpha(), w.alpha},
                               {FakedPairCombination::beta(), w.beta},
                               {FakedPairCombination::gamma(), w.gamma}},
                              norm);
}

double chsh(double e11, double e13, double e31, double e33) { return e11 - e13 + e31 + e33; }

std::vector<double> solve_weights(const std::vector<FakedPairCombination>& combos,
                                  const std::vector<WeightTarget>& targets, Normalization norm) {
  if (combos.empty()) throw DomainError("no combinations to weigh");
  const auto rows = static_cast<Eigen::Index>(targets.size() + 1);
  const auto cols = static_cast<Eigen::Index>(combos.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  for (Eigen::Index k = 0; k < cols; ++k) {
    const auto parts = contributions(combos[static_cast<std::size_t>(k)]);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto& target = targets[t];
      a(static_cast<Eigen::Index>(t), k) = parts[target.pair.index()].c - target.e * denominator(parts, target.pair, norm);
    }
    a(rows - 1, k) = 1.0;
  }
  rhs(rows - 1) = 1.0;
  const Eigen::VectorXd p = a.completeOrthogonalDecomposition().solve(rhs);
  const double residual = (a * p - rhs).norm();
  if (residual > 1e-9) throw DomainError(fmt::format("target is not reachable (residual {:.3g})", residual));
  std::vector<double> out(p.data(), p.data() + p.size());
  for (auto& x : out) {
    if (x < -1e-12) throw DomainError("target needs a negative weight");
    x = std::max(x, 0.0);
  }
  return out;
}

MixtureWeights solve_equal_terms(Normalization norm) {
  std::vector<WeightTarget> targets;
  for (const auto& p : kChshPairs) targets.push_back({p, singlet_correlation(p)});
  const auto w = solve_weights(
      {FakedPairCombination::alpha(), FakedPairCombination::beta(), FakedPairCombination::gamma()}, targets, norm);
  return {w[0], w[1], w[2]};
}

MixtureWeights solve_two_combination(double s_target) {
  // alpha fixes E = -1 at a1b1, a3b1, a3b3, so S = -3 - E(a1,b3)
  const auto w = solve_weights({FakedPairCombination::alpha(), FakedPairCombination::beta()},
                               {{BasisPair{0, 2}, -3.0 - s_target}});
  return {w[0], w[1], 0.0};
}

MixtureWeights exact_equal_terms_weights() {
  const double r = 4.0 * std::numbers::sqrt2;
  const double total = 3.0 + r;
  return {1.0 / total, r / total, 2.0 / total};
}

double s_of_beta(double p_beta) {
  if (!(p_beta >= 0.0 && p_beta < 1.0)) throw DomainError("P_beta must lie in [0, 1)");
  return -2.0 - 2.0 * p_beta;
}

double SideEffectReport::max_d_ratio() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& r : rows) {
    if (r.d <= 0.0) continue;
    lo = std::min(lo, r.d);
    hi = std::max(hi, r.d);
  }
  return hi > 0.0 ? hi / lo : 1.0;
}

double SideEffectReport::unused_deviation() const {
  double worst = 0.0;
  for (const auto& r : rows) {
    if (r.pair.in_key_set() || r.pair.in_chsh_set()) continue;
    worst = std::max(worst, r.e_mix ? std::abs(*r.e_mix - r.e_singlet) : 1.0);
  }
  return worst;
}

bool SideEffectReport::flagged(double tolerance) const {
  return max_d_ratio() - 1.0 > tolerance || unused_deviation() > tolerance;
}

SideEffectReport side_effects_report(const std::optional<MixtureWeights>& weights, Normalization norm) {
  const CorrelationMatrix m = weights ? mixture_correlations(*weights, norm) : singlet_matrix();
  SideEffectReport report;
  for (const auto& p : all_pairs()) {
    const auto& e = m.at(p);
    report.rows[p.index()] = {p, e.d, e.e, singlet_correlation(p)};
  }
  return report;
}

void write_side_effects_csv(std::ostream& out, const SideEffectReport& report) {
  out << "pair,d,E_mix,E_singlet,in_key_set,in_chsh_set\n";
  for (const auto& r : report.rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.pair.name(), r.d, r.e_mix ? fmt::format("{}", *r.e_mix) : "",
                       r.e_singlet + 0.0, r.pair.in_key_set() ? 1 : 0, r.pair.in_chsh_set() ? 1 : 0);
  }
}

std::optional<double> PairCounts::correlation() const {
  const auto n = coincidences();
  if (n == 0) return std::nullopt;
  const auto same = static_cast<double>(outcomes[0] + outcomes[3]);
  const auto diff = static_cast<double>(outcomes[1] + outcomes[2]);
  return (same - diff) / static_cast<double>(n);
}

double Result::chsh() const {
  std::array<double, 4> e{};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto c = pairs[kChshPairs[k].index()].correlation();
    if (!c) throw UndefinedError(fmt::format("no coincidences for {}", kChshPairs[k].name()));
    e[k] = *c;
  }
  return ekert::chsh(e[0], e[1], e[2], e[3]);
}

double Result::chsh_sigma() const {
  double var = 0.0;
  for (const auto& p : kChshPairs) {
    const auto& counts = pairs[p.index()];
    const auto e = counts.correlation();
    if (!e) throw UndefinedError(fmt::format("no coincidences for {}", p.name()));
    var += (1.0 - *e * *e) / static_cast<double>(counts.coincidences());
  }
  return std::sqrt(var);
}

void Result::merge(const Result& o) {
  stats.merge(o.stats);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].chosen += o.pairs[i].chosen;
    for (std::size_t k = 0; k < 4; ++k) pairs[i].outcomes[k] += o.pairs[i].outcomes[k];
  }
}

Result simulate(std::uint64_t n, const Config& cfg, const RunOptions& opts) {
  if (n == 0) throw DomainError("need at least one pair");
  if (cfg.attack) cfg.weights.validate();
  const std::array<FakedPairCombination, 3> combos{
      cfg.footnote_alpha ? FakedPairCombination::alpha_footnote() : FakedPairCombination::alpha(),
      FakedPairCombination::beta(), FakedPairCombination::gamma()};
  const double cut_alpha = cfg.weights.alpha;
  const double cut_beta = cfg.weights.alpha + cfg.weights.beta;
  auto live = [](Control c) {
    return c == Control::t0 ? polar::ClickEfficiencies{1.0, 0.0} : polar::ClickEfficiencies{0.0, 1.0};
  };

  return run_rounds<Result>(n, opts, [&](Result& acc, Stream& rng, std::uint64_t) {
    ++acc.stats.rounds;
    const BasisPair pair{static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3))};
    auto& counts = acc.pairs[pair.index()];
    ++counts.chosen;

    polar::Outcome a = polar::Outcome::none;
    polar::Outcome b = polar::Outcome::none;
    std::optional<int> eve_guess;
    if (cfg.attack) {
      const double u = rng.uniform();
      const auto& combo = combos[u < cut_alpha ? 0 : (u < cut_beta ? 1 : 2)];
      const auto& v = combo.variants[rng.below(combo.variants.size())];
      acc.stats.diag.record_sent(v.alice.control);
      a = polar::measure(v.alice.state, polar::MeasurementBasis{pair.alice_axis()}, live(v.alice.control), rng);
      b = polar::measure(v.bob.state, polar::MeasurementBasis{pair.bob_axis()}, live(v.bob.control), rng);
      if (a != polar::Outcome::none) acc.stats.diag.record_click(v.alice.control, a == polar::Outcome::plus ? 0 : 1);
      eve_guess = v.alice.control == Control::t0 ? 0 : 1;
    } else {
      acc.stats.diag.record_sent(Control::normal);
      a = rng.below(2) ? polar::Outcome::plus : polar::Outcome::minus;
      const bool same = rng.bernoulli(0.5 * (1.0 + singlet_correlation(pair)));
      b = same ? a : (a == polar::Outcome::plus ? polar::Outcome::minus : polar::Outcome::plus);
      acc.stats.diag.record_click(Control::normal, a == polar::Outcome::plus ? 0 : 1);
    }
    if (a == polar::Outcome::none || b == polar::Outcome::none) return;
    const std::size_t slot = (a == polar::Outcome::plus ? 0 : 2) + (b == polar::Outcome::plus ? 0 : 1);
    ++counts.outcomes[slot];

    if (!pair.in_key_set()) return;
    // Alice keys +1 as 0; Bob inverts his anticorrelated result.
    const int alice_bit = a == polar::Outcome::plus ? 0 : 1;
    const int bob_bit = b == polar::Outcome::plus ? 1 : 0;
    ++acc.stats.sifted;
    if (alice_bit != bob_bit) ++acc.stats.errors;
    if (eve_guess && *eve_guess == bob_bit) ++acc.stats.eve_known;
  });
}

}  // namespace qkdfs::ekert
