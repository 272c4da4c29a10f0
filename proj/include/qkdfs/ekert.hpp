#pragma once

// Ekert protocol with the six equatorial axes a1..a3, b1..b3 and the
// faked-pair source that replaces the singlet source. Detector 0 records +1
// and detector 1 records -1 at both parties in every basis, so control t0
// (blinds detector 1) leaves only +1 live and t1 leaves only -1 live.

#include "qkdfs/detmodel.hpp"
#include "qkdfs/engine.hpp"
#include "qkdfs/polar.hpp"
#include "qkdfs/stats.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qkdfs::ekert {

struct BasisPair {
  int alice;  // 0..2 for a1..a3
  int bob;    // 0..2 for b1..b3

  std::string name() const;
  double alice_axis() const;
  double bob_axis() const;
  bool in_key_set() const;
  bool in_chsh_set() const;
  std::size_t index() const { return static_cast<std::size_t>(3 * alice + bob); }
  friend bool operator==(const BasisPair&, const BasisPair&) = default;
};

std::array<BasisPair, 9> all_pairs();
inline constexpr std::array<BasisPair, 2> kKeyPairs{BasisPair{1, 0}, BasisPair{2, 1}};
inline constexpr std::array<BasisPair, 4> kChshPairs{BasisPair{0, 0}, BasisPair{0, 2}, BasisPair{2, 0},
                                                    BasisPair{2, 2}};

// t0 blinds the -1 detector (only +1 can click), t1 blinds the +1 detector.
struct FakedPhoton {
  polar::State state;
  Control control;
};

struct FakedPairVariant {
  FakedPhoton alice;
  FakedPhoton bob;
};

// Equiprobable variants.
struct FakedPairCombination {
  std::string name;
  std::vector<FakedPairVariant> variants;

  static FakedPairCombination alpha();           // circular polarizations, opposite blinding
  static FakedPairCombination alpha_footnote();  // linear states from a3/b1, same (d, E) as alpha
  static FakedPairCombination beta();
  static FakedPairCombination gamma();
};

// d: coincidence probability; c: sum of sign products weighted by
// probability, so E = c / d when d > 0.
struct Contribution {
  double d = 0.0;
  double c = 0.0;
  std::optional<double> correlation() const;
};

double singlet_correlation(const BasisPair& pair);

// Requires total mismatch on both sides; UnsupportedError otherwise.
Contribution combination_correlation(const FakedPairCombination& combo, const BasisPair& pair,
                                     const MismatchSpec& alice = MismatchSpec::total_mismatch(),
                                     const MismatchSpec& bob = MismatchSpec::total_mismatch());

enum class Normalization {
  per_pair,  // each basis pair normalized by its own coincidence probability
  global,    // every pair normalized by the mean coincidence probability over all nine
};

struct MixtureWeights {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;

  void validate() const;  // nonnegative, sums to 1 within 1e-9
};

struct CorrelationEntry {
  BasisPair pair;
  double d = 0.0;
  std::optional<double> e;  // absent when no coincidences
};

struct CorrelationMatrix {
  std::array<CorrelationEntry, 9> entries;

  const CorrelationEntry& at(const BasisPair& p) const { return entries[p.index()]; }
  // Throws UndefinedError if a CHSH pair has no coincidences.
  double chsh() const;
};

CorrelationMatrix singlet_matrix();

CorrelationMatrix mixture_correlations(const std::vector<std::pair<FakedPairCombination, double>>& mix,
                                       Normalization norm = Normalization::per_pair);
CorrelationMatrix mixture_correlations(const MixtureWeights& w, Normalization norm = Normalization::per_pair);

// S = E(a1,b1) - E(a1,b3) + E(a3,b1) + E(a3,b3).
double chsh(double e11, double e13, double e31, double e33);

struct WeightTarget {
  BasisPair pair;
  double e;
};

// Least-squares solve of sum_k P_k (c_k - e d_k) = 0 per target plus
// sum_k P_k = 1. Throws DomainError if the residual exceeds 1e-9 or a
// weight is negative.
std::vector<double> solve_weights(const std::vector<FakedPairCombination>& combos,
                                  const std::vector<WeightTarget>& targets,
                                  Normalization norm = Normalization::per_pair);

// alpha, beta, gamma with all four CHSH terms at their singlet values.
MixtureWeights solve_equal_terms(Normalization norm = Normalization::per_pair);
// alpha and beta only, reaching S in [-4, -2) through E(a1,b3).
MixtureWeights solve_two_combination(double s_target);
// Closed forms for the two solutions above.
MixtureWeights exact_equal_terms_weights();
double s_of_beta(double p_beta);

struct SideEffectRow {
  BasisPair pair;
  double d;
  std::optional<double> e_mix;
  double e_singlet;
};

struct SideEffectReport {
  std::array<SideEffectRow, 9> rows;

  double max_d_ratio() const;  // largest/smallest nonzero d
  // Largest |E_mix - E_singlet| over pairs outside the key and CHSH sets
  // (pairs without coincidences count as a full deviation of 1).
  double unused_deviation() const;
  bool flagged(double tolerance = 1e-9) const;
};

// nullopt weights describe the honest singlet source.
SideEffectReport side_effects_report(const std::optional<MixtureWeights>& weights,
                                     Normalization norm = Normalization::per_pair);
void write_side_effects_csv(std::ostream& out, const SideEffectReport& report);

struct PairCounts {
  std::uint64_t chosen = 0;
  std::array<std::uint64_t, 4> outcomes{};  // ++, +-, -+, --

  std::uint64_t coincidences() const { return outcomes[0] + outcomes[1] + outcomes[2] + outcomes[3]; }
  std::optional<double> correlation() const;
  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

struct Result {
  AttackStats stats;  // sifted/errors/eve_known over key-pair coincidences
  std::array<PairCounts, 9> pairs{};

  double chsh() const;
  // Standard error of the empirical S from per-pair binomial counts.
  double chsh_sigma() const;
  void merge(const Result& o);
  friend bool operator==(const Result&, const Result&) = default;
};

struct Config {
  MixtureWeights weights = exact_equal_terms_weights();
  bool attack = true;
  bool footnote_alpha = false;
};

Result simulate(std::uint64_t pairs, const Config& cfg, const RunOptions& opts);

}  // namespace qkdfs::ekert
