#ifndef LCLAB_NUMERICS_HPP
#define LCLAB_NUMERICS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace lclab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Deterministic summation: fixed-blocking pairwise tree, independent of
// thread count, so report values are reproducible bit for bit.
double pairwise_sum(std::span<const double> x);

// Golden-section search for the maximum of a unimodal function on [a, b].
double golden_max(const std::function<double(double)>& f, double a, double b,
                  int iters, double* arg_out = nullptr);

inline double golden_min(const std::function<double(double)>& f, double a,
                         double b, int iters, double* arg_out = nullptr) {
  return -golden_max([&](double t) { return -f(t); }, a, b, iters, arg_out);
}

// Solves f(x) = target for f nondecreasing on [a, b] by bisection.
double bisect_increasing(const std::function<double(double)>& f, double target,
                         double a, double b, int iters = 200);

// splitmix64-seeded xoshiro256**; self-contained so sampled artifacts do not
// depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // uniform in [0, 1): 53 mantissa bits
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::uint64_t s_[4];
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% score interval for a binomial proportion.
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials);

// FNV-1a over a canonical text key; used for report input digests.
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

// Decimal text at 17 significant digits (round-trips doubles exactly).
std::string format_g17(double v);

}  // namespace lclab

#endif
