#include "qkdfs/detmodel.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <limits>

namespace qkdfs {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw DomainError(fmt::format("bad number '{}' in {}", text, what));
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

void check_unit(double v, std::string_view what) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError(fmt::format("{} {} outside [0,1]", what, v));
}

}  // namespace

ControlValue::ControlValue(double value) : value_(value) {
  if (!std::isfinite(value)) throw DomainError("control value must be finite");
}

std::string_view to_string(Control c) {
  switch (c) {
    case Control::t0: return "t0";
    case Control::t1: return "t1";
    case Control::normal: return "normal";
  }
  return "?";
}

EfficiencyCurve EfficiencyCurve::constant(double value) {
  check_unit(value, "constant efficiency");
  return EfficiencyCurve(Constant{value});
}

EfficiencyCurve EfficiencyCurve::gaussian(double center, double width, double peak) {
  if (!std::isfinite(center)) throw DomainError("gaussian center must be finite");
  if (!(width > 0.0) || !std::isfinite(width)) throw DomainError("gaussian width must be positive");
  check_unit(peak, "gaussian peak");
  return EfficiencyCurve(Gaussian{center, width, peak});
}

EfficiencyCurve EfficiencyCurve::table(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw DomainError("efficiency table is empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].first)) throw DomainError("table control value must be finite");
    check_unit(points[i].second, "table efficiency");
    if (i > 0 && !(points[i - 1].first < points[i].first)) {
      throw DomainError("efficiency table must be strictly increasing in control value");
    }
  }
  return EfficiencyCurve(Table{std::move(points)});
}

EfficiencyCurve EfficiencyCurve::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw DomainError(fmt::format("curve '{}' lacks a kind prefix", text));
  }
  const auto kind = text.substr(0, colon);
  const auto body = text.substr(colon + 1);
  if (kind == "constant") return constant(parse_number(body, "constant curve"));
  if (kind == "gauss") {
    const auto parts = split(body, ',');
    if (parts.size() != 3) throw DomainError("gauss curve needs <center>,<width>,<peak>");
    return gaussian(parse_number(parts[0], "gauss center"), parse_number(parts[1], "gauss width"),
                    parse_number(parts[2], "gauss peak"));
  }
  if (kind == "table") {
    std::vector<std::pair<double, double>> points;
    for (auto entry : split(body, ';')) {
      if (entry.empty()) continue;
      const auto kv = split(entry, ':');
      if (kv.size() != 2) throw DomainError(fmt::format("table entry '{}' is not <t>:<v>", entry));
      points.emplace_back(parse_number(kv[0], "table control"), parse_number(kv[1], "table value"));
    }
    return table(std::move(points));
  }
  throw DomainError(fmt::format("unknown curve kind '{}'", kind));
}

double EfficiencyCurve::at(ControlValue t) const {
  const double x = t.value();
  if (const auto* c = std::get_if<Constant>(&rep_)) return c->value;
  if (const auto* g = std::get_if<Gaussian>(&rep_)) {
    const double z = (x - g->center) / g->width;
    return g->peak * std::exp(-0.5 * z * z);
  }
  const auto& pts = std::get<Table>(rep_).points;
  if (x < pts.front().first || x > pts.back().first) {
    throw DomainError(fmt::format("control value {} outside table domain [{}, {}]", x,
                                  pts.front().first, pts.back().first));
  }
  const auto hi = std::lower_bound(pts.begin(), pts.end(), x,
                                   [](const auto& p, double v) { return p.first < v; });
  if (hi->first == x) return hi->second;
  const auto lo = hi - 1;
  const double w = (x - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

std::optional<std::pair<double, double>> EfficiencyCurve::domain() const {
  if (const auto* tbl = std::get_if<Table>(&rep_)) {
    return std::pair{tbl->points.front().first, tbl->points.back().first};
  }
  return std::nullopt;
}

std::string EfficiencyCurve::describe() const {
  if (const auto* c = std::get_if<Constant>(&rep_)) return fmt::format("constant:{}", c->value);
  if (const auto* g = std::get_if<Gaussian>(&rep_)) {
    return fmt::format("gauss:{},{},{}", g->center, g->width, g->peak);
  }
  std::string out = "table:";
  bool first = true;
  for (const auto& [t, v] : std::get<Table>(rep_).points) {
    if (!first) out += ';';
    out += fmt::format("{}:{}", t, v);
    first = false;
  }
  return out;
}

double efficiency_at(const EfficiencyCurve& curve, ControlValue t) { return curve.at(t); }

std::string_view detector_label(LabelConvention labels, DetectorIndex d) {
  switch (labels) {
    case LabelConvention::zero_one: return d == 0 ? "0" : "1";
    case LabelConvention::a_b: return d == 0 ? "a" : "b";
    case LabelConvention::d0_d1: return d == 0 ? "D0" : "D1";
    case LabelConvention::plus_minus: return d == 0 ? "+1" : "-1";
  }
  return "?";
}

DetectorPair::DetectorPair(EfficiencyCurve a, EfficiencyCurve b, LabelConvention l)
    : first(std::move(a)), second(std::move(b)), labels(l) {
  const auto da = first.domain();
  const auto db = second.domain();
  if (da && db && *da != *db) {
    throw DomainError("detector curves must share one control domain");
  }
}

namespace {

// Index of the grid point minimizing num/den, or nullopt when every point is
// +inf or 0/0.
std::optional<std::size_t> argmin_ratio(std::span<const double> num, std::span<const double> den,
                                        std::span<const ControlValue> grid) {
  std::optional<std::size_t> best;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (den[i] == 0.0) continue;  // +inf or 0/0: never a candidate
    const double r = num[i] / den[i];
    if (!best || r < best_ratio || (r == best_ratio && grid[i] < grid[*best])) {
      best = i;
      best_ratio = r;
    }
  }
  return best;
}

}  // namespace

ControlChoice choose_control_values(const DetectorPair& pair, std::span<const ControlValue> grid) {
  if (grid.empty()) throw DomainError("control grid is empty");
  std::vector<double> e0(grid.size());
  std::vector<double> e1(grid.size());
  bool any_signal = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    e0[i] = pair.efficiency(0, grid[i]);
    e1[i] = pair.efficiency(1, grid[i]);
    any_signal = any_signal || e0[i] > 0.0 || e1[i] > 0.0;
  }
  if (!any_signal) throw NoSignalError("both detectors have zero efficiency on the whole grid");

  const auto i1 = argmin_ratio(e0, e1, grid);  // t1: detector 0 as dark as possible
  const auto i0 = argmin_ratio(e1, e0, grid);  // t0: detector 1 as dark as possible
  if (!i0) throw NoSignalError("detector 0 never fires on the grid; no t0 exists");
  if (!i1) throw NoSignalError("detector 1 never fires on the grid; no t1 exists");

  ControlChoice out{grid[*i0], grid[*i1], {}};
  out.spec = {e0[*i0], e0[*i1], e1[*i0], e1[*i1]};
  return out;
}

std::vector<ControlValue> linear_grid(double from, double to, std::size_t steps) {
  if (steps == 0) throw DomainError("grid needs at least one point");
  std::vector<ControlValue> grid;
  grid.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double x = steps == 1 ? from : from + (to - from) * static_cast<double>(i) /
                                                    static_cast<double>(steps - 1);
    grid.emplace_back(x);
  }
  return grid;
}

Receiver::Receiver(DetectorPair pair, ControlValue t0, ControlValue t1, ControlValue normal)
    : pair_(std::move(pair)), points_{t0, t1, normal} {
  for (const Control c : kAllControls) {
    for (DetectorIndex d = 0; d < 2; ++d) {
      table_[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] =
          pair_.efficiency(d, point(c));
    }
  }
}

Receiver Receiver::from_spec(const MismatchSpec& spec, double normal_eta0, double normal_eta1) {
  spec.validate();
  check_unit(normal_eta0, "normal efficiency");
  check_unit(normal_eta1, "normal efficiency");
  auto curve = [](double at_t0, double at_normal, double at_t1) {
    return EfficiencyCurve::table(
        {{kCanonicalT0, at_t0}, {kCanonicalNormal, at_normal}, {kCanonicalT1, at_t1}});
  };
  return Receiver(DetectorPair(curve(spec.eta0_t0, normal_eta0, spec.eta0_t1),
                               curve(spec.eta1_t0, normal_eta1, spec.eta1_t1)),
                  ControlValue(kCanonicalT0), ControlValue(kCanonicalT1),
                  ControlValue(kCanonicalNormal));
}

MismatchSpec Receiver::spec() const {
  return {eta(0, Control::t0), eta(0, Control::t1), eta(1, Control::t0), eta(1, Control::t1)};
}

}  // namespace qkdfs
