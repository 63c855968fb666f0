#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "crossdiff/entropy.hpp"
#include "crossdiff/mesh.hpp"
#include "crossdiff/state.hpp"

namespace crossdiff {

/// Which case of the edge-mean definition produced a value.
enum class MeanBranch : std::uint8_t {
  ChainRule,  // both endpoints positive and distinct: solve the scalar chain rule
  Equal,      // equal positive endpoints
  Zero,       // an endpoint vanishes (and they differ), or both vanish
};

/// Logarithmic mean (a - b) / (log a - log b) with the branch rules for equal
/// or vanishing endpoints. Relative differences below 1e-13 use the arithmetic mean.
/// Throws DomainError for negative input.
double log_mean(double a, double b);

MeanBranch mean_branch(double a, double b);

/// Edge mean for an arbitrary admissible entropy term: the unique m between a
/// and b with h_i''(m) (b - a) = h_i'(b) - h_i'(a), found by bisection.
/// `index` 0 is the solvent. Throws NoRootError if the bracket does not change sign.
double generic_edge_mean(const EntropySpec& entropy, std::size_t index, double a, double b);

/// Closed form for Boltzmann entropy, bisection otherwise.
double edge_mean(const EntropySpec& entropy, std::size_t index, double a, double b);

/// u_sigma = (u_{0,sigma}, ..., u_{n,sigma}) for the edge between cells with
/// species vectors uK, uL (length n). Solvent endpoints are derived per cell.
void edge_mean_vector(const EntropySpec& entropy, std::span<const double> uK, std::span<const double> uL,
                      std::span<double> out);

/// Per-interior-edge mean vectors (n + 1 entries each, solvent first) and branch flags.
class EdgeState {
 public:
  EdgeState(std::size_t num_species, std::size_t num_edges)
      : n1_(num_species + 1), means_(n1_ * num_edges), branches_(n1_ * num_edges) {}

  std::size_t num_species() const noexcept { return n1_ - 1; }
  std::size_t num_edges() const noexcept { return n1_ == 0 ? 0 : means_.size() / n1_; }

  std::span<const double> mean(std::size_t edge) const { return {means_.data() + edge * n1_, n1_}; }
  std::span<double> mean(std::size_t edge) { return {means_.data() + edge * n1_, n1_}; }
  MeanBranch branch(std::size_t edge, std::size_t index) const { return branches_[edge * n1_ + index]; }
  void set_branch(std::size_t edge, std::size_t index, MeanBranch b) { branches_[edge * n1_ + index] = b; }

 private:
  std::size_t n1_;
  std::vector<double> means_;
  std::vector<MeanBranch> branches_;
};

EdgeState compute_edge_state(const Mesh& mesh, const StateField& state, const EntropySpec& entropy);

/// H_ij = delta_ij h_i''(u_{i,sigma}) + h_0''(u_{0,sigma}), i, j = 1..n.
/// Throws DomainError if any component of u_sigma is not positive.
Eigen::MatrixXd h_matrix(const EntropySpec& entropy, std::span<const double> u_sigma);

/// max_i |(H(u_sigma)(u_L - u_K))_i - (w_i(u_L) - w_i(u_K))| with the entropy
/// variables w_i = h_i'(u_i) - h_0'(u_0). uK and uL must lie in the open simplex.
double chain_rule_residual(const EntropySpec& entropy, std::span<const double> uK, std::span<const double> uL);

}  // namespace crossdiff
