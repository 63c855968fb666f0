#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "crossdiff/edge_means.hpp"
#include "crossdiff/entropy.hpp"
#include "crossdiff/errors.hpp"
#include "crossdiff/mesh.hpp"
#include "crossdiff/state.hpp"

namespace crossdiff {

struct EntropyReport {
  double entropy = 0.0;
  double dissipation = 0.0;
  std::optional<double> relative_entropy;
};

/// Sum_K m(K) [sum_i h_i(u_{i,K}) + h_0(u_{0,K})].
double discrete_entropy(const StateField& state, const Mesh& mesh, const EntropySpec& entropy);

/// Boltzmann relative entropy against a spatially constant state u_inf
/// (species vector, solvent derived). Throws DomainError unless u_inf lies in
/// the open simplex.
double relative_entropy(const StateField& state, const Mesh& mesh, std::span<const double> steady);

/// Edge with a vanishing mean but a nonzero jump where the weight u^{2(s-1)} blows up.
class SingularEdge : public DomainError {
 public:
  SingularEdge(const std::string& what, std::size_t edge, std::size_t species)
      : DomainError(what), edge_(edge), species_(species) {}
  std::size_t edge() const noexcept { return edge_; }
  std::size_t species() const noexcept { return species_; }

 private:
  std::size_t edge_;
  std::size_t species_;
};

/// Sum_i sum_sigma tau_sigma u_{i,sigma}^{2(s-1)} (D_sigma u_i)^2 over interior
/// edges (without the c_A dt factor).
double entropy_dissipation(const StateField& state, const EdgeState& edges, const Mesh& mesh, double exponent_s);

/// Discrete H^1 seminorm (boundary edges contribute nothing).
double h1_seminorm(std::span<const double> values, const Mesh& mesh);

/// Measure-weighted restriction of a fine solution onto a nested coarse mesh.
/// Throws InvalidArgument if the meshes are not nested.
StateField coarsen(const StateField& fine, const Mesh& fine_mesh, const Mesh& coarse_mesh);

struct L1Error {
  std::vector<double> per_species;
  double total = 0.0;
};

L1Error l1_error(const StateField& a, const StateField& b, const Mesh& mesh);

/// Observed orders log(e_j / e_{j+1}) / log(h_j / h_{j+1}) for (h, error) pairs.
std::vector<double> convergence_orders(const std::vector<std::pair<double, double>>& errors);

struct DecayFit {
  double rate = 0.0;       // lambda = -slope of log(H) over t
  double intercept = 0.0;  // log(H) at t = 0
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log H against t over [t_from, t_to]. Without a window
/// the second half of the time range is used.
DecayFit decay_fit(const std::vector<std::pair<double, double>>& series,
                   std::optional<std::pair<double, double>> window = std::nullopt);

struct ReactionSteadyStateParams {
  double rate = 1000.0;        // k in r_1 = u_2^2 - k u_1 u_0
  double mass1 = 9.0 / 44.0;   // total mass of species 1
  double mass2 = 2.0 / 11.0;   // total mass of species 2
  double domain_measure = 1.0;
};

/// Spatially constant equilibrium of the thin-film reaction system; conserves
/// 2 u_1 + u_2 and solves r_1(u_inf) = 0.
std::vector<double> thin_film_steady_state(const ReactionSteadyStateParams& params = {});

/// Closed form of the same root for the default parameters.
double thin_film_steady_alpha_closed_form();

}  // namespace crossdiff
