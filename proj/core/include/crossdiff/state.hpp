#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace crossdiff {

/// Per-cell species fractions u_{i,K}, i = 1..n, stored cell-major.
/// The solvent fraction u_{0,K} = 1 - sum_i u_{i,K} is never stored.
class StateField {
 public:
  StateField() = default;
  StateField(std::size_t num_species, std::size_t num_cells, double time = 0.0)
      : n_(num_species), cells_(num_cells), time_(time), values_(num_species * num_cells, 0.0) {}

  std::size_t num_species() const noexcept { return n_; }
  std::size_t num_cells() const noexcept { return cells_; }
  std::size_t size() const noexcept { return values_.size(); }

  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }

  /// Species index i runs over 0..n-1 here and denotes the physical species i+1.
  double& operator()(std::size_t cell, std::size_t i) { return values_[cell * n_ + i]; }
  double operator()(std::size_t cell, std::size_t i) const { return values_[cell * n_ + i]; }

  std::span<double> cell(std::size_t k) { return {values_.data() + k * n_, n_}; }
  std::span<const double> cell(std::size_t k) const { return {values_.data() + k * n_, n_}; }

  /// Derived solvent fraction. Round-off excursions below zero are clipped.
  double solvent(std::size_t k) const;
  double species_sum(std::size_t k) const;

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const StateField&, const StateField&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t cells_ = 0;
  double time_ = 0.0;
  std::vector<double> values_;
};

/// Solvent fraction 1 - sum(u), clipped at zero.
double solvent_of(std::span<const double> u);

}  // namespace crossdiff
