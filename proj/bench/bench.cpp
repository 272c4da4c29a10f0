// Serial reference loop vs the OpenMP kernels, same seed, same counters.

#include "qkdfs/bb84.hpp"
#include "qkdfs/dpsk.hpp"
#include "qkdfs/ekert.hpp"
#include "qkdfs/phasetime.hpp"
#include "qkdfs/sarg04.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

using namespace qkdfs;

namespace {

template <class Fn>
double timed(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// usage: qkdfs_bench [scale] [workers]
int main(int argc, char** argv) {
  const double scale = argc > 1 ? std::atof(argv[1]) : 1.0;
  const int workers = argc > 2 ? std::atoi(argv[2]) : 0;
  auto n = [&](double base) { return static_cast<std::uint64_t>(base * scale); };

  struct Case {
    std::string name;
    std::uint64_t rounds;
    std::function<std::string(std::uint64_t, const RunOptions&)> run;
  };
  auto key = [](const AttackStats& s) { return fmt::format("{}/{}/{}", s.sifted, s.errors, s.eve_known); };
  const std::vector<Case> cases{
      {"bb84", n(2e6),
       [&](std::uint64_t r, const RunOptions& o) {
         bb84::AttackConfig c;
         c.spec = MismatchSpec::symmetric(0.1);
         return key(bb84::simulate(r, c, o));
       }},
      {"sarg04", n(2e6),
       [&](std::uint64_t r, const RunOptions& o) {
         sarg04::AttackConfig c;
         c.spec = MismatchSpec::symmetric(0.1);
         return key(sarg04::simulate(r, c, o));
       }},
      {"phasetime", n(5e5),
       [&](std::uint64_t r, const RunOptions& o) {
         phasetime::Config c;
         c.spec = MismatchSpec::symmetric(0.1);
         return key(phasetime::simulate(r, c, o).stats);
       }},
      {"dpsk", n(2e4),
       [&](std::uint64_t r, const RunOptions& o) {
         dpsk::Config c;
         c.spec = MismatchSpec::symmetric(0.1);
         return key(dpsk::simulate(r, c, o).stats);
       }},
      {"ekert", n(2e6), [&](std::uint64_t r, const RunOptions& o) { return key(ekert::simulate(r, {}, o).stats); }},
  };

  const int threads = workers > 0 ? workers : available_workers();
  fmt::print("{:<10} {:>10} {:>10} {:>12} {:>8}  {}\n", "kernel", "rounds", "serial s", "omp s", "speedup",
             "identical");
  for (const auto& c : cases) {
    std::string serial;
    std::string parallel;
    const double ts = timed([&] { serial = c.run(c.rounds, {1, 1}); });
    const double tp = timed([&] { parallel = c.run(c.rounds, {1, workers == 1 ? 2 : workers}); });
    fmt::print("{:<10} {:>10} {:>10.3f} {:>12.3f} {:>8.2f}  {}\n", c.name, c.rounds, ts, tp, ts / tp,
               serial == parallel ? "yes" : "NO");
  }
  fmt::print("threads: {}\n", threads);
  return 0;
}
