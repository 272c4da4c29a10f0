#include "qkdfs/stats.hpp"

#include "qkdfs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qkdfs {

namespace {
constexpr double kZ95 = 1.959963984540054;
}

QberEstimate qber_estimate(std::uint64_t errors, std::uint64_t kept) {
  if (errors > kept) throw DomainError("error count exceeds kept count");
  if (kept == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, errors, kept};
  }
  const double n = static_cast<double>(kept);
  const double p = static_cast<double>(errors) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // The interval must contain p; rounding can push an edge by an ulp.
  const double low = std::clamp(std::min(center - half, p), 0.0, 1.0);
  const double high = std::clamp(std::max(center + half, p), 0.0, 1.0);
  return {p, errors == 0 ? 0.0 : low, errors == kept ? 1.0 : high, errors, kept};
}

double binomial_sigma(double p, std::uint64_t n) {
  if (n == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double Diagnostics::detection_rate(Control c) const {
  const auto i = static_cast<std::size_t>(c);
  if (sent_by_control[i] == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(clicks_by_control[i]) / static_cast<double>(sent_by_control[i]);
}

bool Diagnostics::conserved() const {
  const auto by_det = clicks_by_detector[0] + clicks_by_detector[1];
  const auto by_ctl = clicks_by_control[0] + clicks_by_control[1] + clicks_by_control[2];
  return by_det == total_clicks && by_ctl == total_clicks;
}

void Diagnostics::merge(const Diagnostics& o) {
  for (std::size_t i = 0; i < 3; ++i) {
    sent_by_control[i] += o.sent_by_control[i];
    clicks_by_control[i] += o.clicks_by_control[i];
  }
  clicks_by_detector[0] += o.clicks_by_detector[0];
  clicks_by_detector[1] += o.clicks_by_detector[1];
  vacuum_sent += o.vacuum_sent;
  total_clicks += o.total_clicks;
  coincidences += o.coincidences;
}

double AttackStats::eve_knowledge() const {
  if (sifted == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(eve_known) / static_cast<double>(sifted);
}

void AttackStats::merge(const AttackStats& o) {
  rounds += o.rounds;
  sifted += o.sifted;
  errors += o.errors;
  eve_known += o.eve_known;
  diag.merge(o.diag);
}

Rational ExactStats::qber() const {
  if (arrival == 0) throw UndefinedError("qber undefined: zero arrival probability");
  return error / arrival;
}

}  // namespace qkdfs
