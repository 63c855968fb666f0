#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace crossdiff {

/// One additive entropy term h_i together with its first two derivatives.
/// `h` must be continuous on [0,1]; h' and h'' are only evaluated on (0,1).
struct ScalarEntropy {
  std::function<double(double)> h;
  std::function<double(double)> dh;
  std::function<double(double)> d2h;
};

/// Additive entropy density h(u) = sum_{i=0}^n h_i(u_i), index 0 = solvent.
/// Every h_i'' must be positive and strictly decreasing on (0,1).
class EntropySpec {
 public:
  /// h_i(x) = x (log x - 1) + 1 for all n + 1 indices.
  static EntropySpec boltzmann(std::size_t num_species);

  /// Generic entropy; `terms` holds n + 1 entries (solvent first). Throws
  /// InvalidArgument if a sampled h_i'' is nonpositive or not strictly decreasing.
  static EntropySpec custom(std::vector<ScalarEntropy> terms, std::string name = "custom");

  std::size_t num_species() const noexcept { return n_; }
  bool is_boltzmann() const noexcept { return boltzmann_; }
  const std::string& name() const noexcept { return name_; }

  /// h_i extended continuously to [0,1] (for Boltzmann, 0 log 0 = 0).
  double h(std::size_t index, double x) const;
  double dh(std::size_t index, double x) const;
  double d2h(std::size_t index, double x) const;

 private:
  EntropySpec() = default;

  std::size_t n_ = 0;
  bool boltzmann_ = false;
  std::string name_;
  std::vector<ScalarEntropy> terms_;
};

}  // namespace crossdiff
