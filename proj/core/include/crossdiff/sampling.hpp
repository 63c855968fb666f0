#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace crossdiff {

/// Seeded generator with platform-independent variates (the standard
/// distributions are implementation-defined, the raw engine output is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0,1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform on (0,1).
  double open_uniform();
  double normal();

  /// Uniform point of the open simplex D = {u in (0,1)^n : sum u < 1}.
  std::vector<double> simplex_point(std::size_t n);
  /// Uniform direction on the unit sphere in R^n.
  std::vector<double> unit_vector(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace crossdiff
