#pragma once

// Detector efficiency as a function of the control parameter Eve can set
// (pulse timing, wavelength, ...), and the selection of her working points.

#include "qkdfs/error.hpp"
#include "qkdfs/rational.hpp"

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace qkdfs {

class ControlValue {
 public:
  constexpr ControlValue() = default;
  explicit ControlValue(double value);

  constexpr double value() const noexcept { return value_; }

  friend constexpr auto operator<=>(const ControlValue&, const ControlValue&) = default;

 private:
  double value_ = 0.0;
};

// Named working points of an attack. t0 blinds detector 1, t1 blinds
// detector 0, normal blinds neither.
enum class Control : std::uint8_t { t0 = 0, t1 = 1, normal = 2 };

inline constexpr std::array<Control, 3> kAllControls{Control::t0, Control::t1, Control::normal};

std::string_view to_string(Control c);

// Detector index within a pair: 0 and 1 under BB84 labels (a/b, D0/D1,
// +1/-1 under the other protocols' conventions).
using DetectorIndex = int;

class EfficiencyCurve {
 public:
  struct Constant {
    double value;
  };
  struct Gaussian {
    double center;
    double width;
    double peak;
  };
  struct Table {
    std::vector<std::pair<double, double>> points;  // sorted by control value
  };

  static EfficiencyCurve constant(double value);
  static EfficiencyCurve gaussian(double center, double width, double peak);
  static EfficiencyCurve table(std::vector<std::pair<double, double>> points);

  // Grammar: `constant:<v>`, `gauss:<center>,<width>,<peak>`,
  // `table:<t1>:<v1>;<t2>:<v2>;...`
  static EfficiencyCurve parse(std::string_view text);

  double at(ControlValue t) const;

  // Control range over which the curve is defined; nullopt for parametric
  // curves (defined everywhere).
  std::optional<std::pair<double, double>> domain() const;

  std::string describe() const;

  const std::variant<Constant, Gaussian, Table>& representation() const noexcept { return rep_; }

 private:
  explicit EfficiencyCurve(std::variant<Constant, Gaussian, Table> rep) : rep_(std::move(rep)) {}

  std::variant<Constant, Gaussian, Table> rep_;
};

double efficiency_at(const EfficiencyCurve& curve, ControlValue t);

enum class LabelConvention : std::uint8_t { zero_one, a_b, d0_d1, plus_minus };

std::string_view detector_label(LabelConvention labels, DetectorIndex d);

struct DetectorPair {
  DetectorPair(EfficiencyCurve first, EfficiencyCurve second,
               LabelConvention labels = LabelConvention::zero_one);

  const EfficiencyCurve& curve(DetectorIndex d) const { return d == 0 ? first : second; }
  double efficiency(DetectorIndex d, ControlValue t) const { return curve(d).at(t); }

  EfficiencyCurve first;
  EfficiencyCurve second;
  LabelConvention labels;
};

// Efficiencies of both detectors at the two attack working points.
template <class T>
struct BasicMismatchSpec {
  T eta0_t0{1};
  T eta0_t1{0};
  T eta1_t0{0};
  T eta1_t1{1};

  // eta0(t1) = eta1(t0) = eta, the diagonal entries at 1.
  static BasicMismatchSpec symmetric(const T& eta) { return {T(1), eta, eta, T(1)}; }
  static BasicMismatchSpec total_mismatch() { return {T(1), T(0), T(0), T(1)}; }
  static BasicMismatchSpec no_mismatch() { return {T(1), T(1), T(1), T(1)}; }

  const T& eta(DetectorIndex detector, Control c) const {
    if (c == Control::t0) return detector == 0 ? eta0_t0 : eta1_t0;
    return detector == 0 ? eta0_t1 : eta1_t1;
  }

  bool is_total() const { return eta0_t1 == T(0) && eta1_t0 == T(0); }

  // eta0(t1)/eta1(t1) when it equals eta1(t0)/eta0(t0); nullopt otherwise.
  std::optional<T> symmetric_ratio() const {
    if (eta1_t1 == T(0) || eta0_t0 == T(0)) return std::nullopt;
    const T lhs = eta0_t1 * eta0_t0;
    const T rhs = eta1_t0 * eta1_t1;
    if constexpr (std::is_floating_point_v<T>) {
      const T scale = std::max({T(1e-300), lhs < 0 ? -lhs : lhs, rhs < 0 ? -rhs : rhs});
      if ((lhs - rhs) / scale > T(1e-12) || (rhs - lhs) / scale > T(1e-12)) return std::nullopt;
    } else {
      if (lhs != rhs) return std::nullopt;
    }
    return eta0_t1 / eta1_t1;
  }

  void validate() const {
    for (const T* v : {&eta0_t0, &eta0_t1, &eta1_t0, &eta1_t1}) {
      if (*v < T(0) || *v > T(1)) throw DomainError("mismatch efficiencies must lie in [0,1]");
    }
  }
};

using MismatchSpec = BasicMismatchSpec<double>;
using ExactMismatchSpec = BasicMismatchSpec<Rational>;

inline MismatchSpec to_double(const ExactMismatchSpec& s) {
  return {to_double(s.eta0_t0), to_double(s.eta0_t1), to_double(s.eta1_t0), to_double(s.eta1_t1)};
}

// Brightness multipliers Eve applies per working point. Detection
// probabilities scale with the weight and are clamped at 1.
template <class T>
struct BasicBrightness {
  T t0{1};
  T t1{1};
  T normal{1};

  const T& at(Control c) const {
    switch (c) {
      case Control::t0: return t0;
      case Control::t1: return t1;
      default: return normal;
    }
  }
};

using Brightness = BasicBrightness<double>;
using ExactBrightness = BasicBrightness<Rational>;

struct ControlChoice {
  ControlValue t0;
  ControlValue t1;
  MismatchSpec spec;
};

// t1 minimizes eta0/eta1 over the grid, t0 minimizes eta1/eta0. Points where
// only the numerator is nonzero rank as +inf; 0/0 points are skipped. Ties
// go to the smaller control value.
ControlChoice choose_control_values(const DetectorPair& pair, std::span<const ControlValue> grid);

std::vector<ControlValue> linear_grid(double from, double to, std::size_t steps);

// Efficiency lookup for the three working points, evaluated once. This is
// what the Monte Carlo kernels consume.
class Receiver {
 public:
  // Canonical control coordinates used when a receiver is synthesized from
  // a MismatchSpec rather than from measured curves.
  static constexpr double kCanonicalT0 = -1.0;
  static constexpr double kCanonicalNormal = 0.0;
  static constexpr double kCanonicalT1 = 1.0;

  Receiver(DetectorPair pair, ControlValue t0, ControlValue t1, ControlValue normal);

  // Three-point table curves: t0 -> spec column t0, t1 -> column t1,
  // normal -> normal_eta for both detectors.
  static Receiver from_spec(const MismatchSpec& spec, double normal_eta0 = 1.0,
                            double normal_eta1 = 1.0);

  double eta(DetectorIndex d, Control c) const {
    return table_[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
  }
  ControlValue point(Control c) const { return points_[static_cast<std::size_t>(c)]; }
  const DetectorPair& pair() const { return pair_; }
  MismatchSpec spec() const;

 private:
  DetectorPair pair_;
  std::array<ControlValue, 3> points_;
  std::array<std::array<double, 2>, 3> table_{};
};

}  // namespace qkdfs
