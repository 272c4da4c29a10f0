#pragma once

#include "qkdfs/detmodel.hpp"
#include "qkdfs/rational.hpp"

#include <array>
#include <cstdint>

namespace qkdfs {

// Point estimate with a 95% Wilson score interval. `kept == 0` leaves the
// estimate undefined (all fields NaN).
struct QberEstimate {
  double point;
  double low;
  double high;
  std::uint64_t errors;
  std::uint64_t kept;

  bool defined() const noexcept { return kept > 0; }
};

QberEstimate qber_estimate(std::uint64_t errors, std::uint64_t kept);

// Binomial standard deviation of a proportion estimated from n samples.
double binomial_sigma(double p, std::uint64_t n);

// Counters a receiver operator could monitor: per-working-point send and
// click counts, per-detector click shares, multi-click rounds.
struct Diagnostics {
  std::array<std::uint64_t, 3> sent_by_control{};
  std::array<std::uint64_t, 3> clicks_by_control{};
  std::array<std::uint64_t, 2> clicks_by_detector{};
  std::uint64_t vacuum_sent = 0;
  std::uint64_t total_clicks = 0;
  std::uint64_t coincidences = 0;

  void record_sent(Control c) { ++sent_by_control[static_cast<std::size_t>(c)]; }
  void record_click(Control c, DetectorIndex d) {
    ++clicks_by_control[static_cast<std::size_t>(c)];
    ++clicks_by_detector[static_cast<std::size_t>(d)];
    ++total_clicks;
  }

  double detection_rate(Control c) const;
  bool conserved() const;
  void merge(const Diagnostics& other);

  friend bool operator==(const Diagnostics&, const Diagnostics&) = default;
};

// Integer counters only, so merging partial results is exact and the
// aggregate does not depend on how rounds were split across workers.
struct AttackStats {
  std::uint64_t rounds = 0;
  std::uint64_t sifted = 0;
  std::uint64_t errors = 0;
  std::uint64_t eve_known = 0;  // sifted bits Eve's best guess gets right
  Diagnostics diag;

  QberEstimate qber() const { return qber_estimate(errors, sifted); }
  double eve_knowledge() const;
  void merge(const AttackStats& other);

  friend bool operator==(const AttackStats&, const AttackStats&) = default;
};

// Exact arrival and error probabilities from an enumeration oracle.
struct ExactStats {
  Rational arrival;
  Rational error;

  Rational qber() const;  // throws UndefinedError when arrival == 0
};

}  // namespace qkdfs
