#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "crossdiff/mesh.hpp"
#include "crossdiff/models.hpp"
#include "crossdiff/state.hpp"

namespace crossdiff {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SolverConfig {
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  double dt_shrink = 0.2;
  double dt_grow = 1.1;
  double dt_min = 1e-8;
  double dt_max = 1e-2;
  double dt_initial = 1e-5;
  bool adaptive = true;
  double fixed_dt = 0.0;
  double damping_min = 0x1p-30;
  /// Start Newton from one linearly implicit step (coefficients frozen at
  /// u_old) instead of u_old itself.
  bool linearized_predictor = true;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Per accepted step.
struct StepReport {
  std::size_t step = 0;
  double t = 0.0;
  double dt_used = 0.0;
  double dt_first_attempt = 0.0;
  int newton_iterations = 0;
  double residual_norm = 0.0;
  int rejected_attempts = 0;
  double entropy = 0.0;
  std::optional<double> relative_entropy;
  /// +inf when an edge mean vanishes across a nonzero jump.
  double dissipation = 0.0;
  std::vector<double> mass;
  double min_concentration = 0.0;
  double max_species_sum = 0.0;
};

/// Greedy distance-2 coloring of the cell adjacency graph: two cells share a
/// color only if they are neither neighbors nor have a common neighbor.
std::vector<int> distance2_coloring(const Mesh& mesh);

/// Tolerance on sum_i u_i above 1 accepted as round-off.
inline constexpr double kVolumeSlack = 1e-12;

/// Implicit Euler finite-volume system on a fixed mesh/model pair.
/// Holds the Jacobian coloring and sparsity pattern; not safe for concurrent
/// use of one instance (the linear solver keeps its factorization).
class ImplicitEulerSystem {
 public:
  ImplicitEulerSystem(const Mesh& mesh, const Model& model);
  ~ImplicitEulerSystem();
  ImplicitEulerSystem(const ImplicitEulerSystem&) = delete;
  ImplicitEulerSystem& operator=(const ImplicitEulerSystem&) = delete;

  const Mesh& mesh() const noexcept { return mesh_; }
  const Model& model() const noexcept { return model_; }
  std::size_t num_unknowns() const noexcept { return mesh_.num_cells() * model_.num_species; }
  int num_colors() const noexcept { return num_colors_; }

  /// Two-point flux F_{i,K,sigma} = -tau sum_j A_ij(u_sigma) (u_{j,L} - u_{j,K}).
  void edge_flux(std::span<const double> uK, std::span<const double> uL, double tau, std::span<double> flux) const;

  /// r_(K,i) = m(K)(u_new - u_old)/dt + sum_sigma F_{i,K,sigma} - m(K) f_i(u_new).
  void residual(const StateField& u_new, const StateField& u_old, double dt, std::span<double> out) const;

  /// Forward finite differences with increments max(1e-8, 1e-8 |u|), one
  /// residual evaluation per (color, species) pair.
  SparseMatrix jacobian(const StateField& u_new, const StateField& u_old, double dt) const;
  SparseMatrix jacobian(const StateField& u_new, const StateField& u_old, double dt,
                        std::span<const double> base_residual) const;

  /// One implicit Euler step with A_sigma frozen at the edge means of u_old and
  /// the source evaluated at u_old. Used as the Newton starting iterate; the
  /// result is not guaranteed to be admissible.
  StateField linearized_step(const StateField& u_old, double dt);

  /// Solves J x = rhs by sparse LU. Throws LinearSolveFailure.
  Eigen::VectorXd solve(const SparseMatrix& J, const Eigen::VectorXd& rhs);

 private:
  const Mesh& mesh_;
  Model model_;
  std::vector<int> colors_;
  int num_colors_ = 0;
  std::vector<std::vector<std::size_t>> color_cells_;
  struct Lu;
  std::unique_ptr<Lu> lu_;
};

std::vector<double> assemble_residual(const StateField& u_new, const StateField& u_old, double dt, const Mesh& mesh,
                                      const Model& model);
SparseMatrix assemble_jacobian(const StateField& u_new, const StateField& u_old, double dt, const Mesh& mesh,
                               const Model& model);

/// Finite-difference step for an unknown with value u: the representable part
/// of max(1e-8, 1e-8 |u|), i.e. (u + h) - u.
double fd_increment(double u);

/// u >= 0 and sum_i u_i <= 1 + kVolumeSlack in every cell.
bool is_admissible(const StateField& u);

struct NewtonResult {
  StateField state;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Damped Newton for one implicit Euler step from u_old. At least one update
/// is applied. Throws NewtonDiverged or LinearSolveFailure.
///
/// Started from u_old, Newton cannot leave a cell where u_i = 0 next to a cell
/// with u_i > 0: the log mean has infinite slope at 0, the residual decreases
/// there and every update points below zero. With linearized_predictor the
/// iterate starts from linearized_step, pulled back toward u_old by halving
/// until it is admissible.
NewtonResult newton_solve(ImplicitEulerSystem& system, const StateField& u_old, double dt, const SolverConfig& config);
NewtonResult newton_solve(const StateField& u_old, double dt, const Mesh& mesh, const Model& model,
                          const SolverConfig& config);

/// Step-size rules of the adaptive policy.
struct StepSizeController {
  const SolverConfig& config;
  double after_accept(double dt_prev) const;
  /// Throws DtUnderflow if the shrunken step would fall below dt_min.
  double after_reject(double dt) const;
};

using StepObserver = std::function<void(const StateField&, const StepReport&)>;

struct SimulationOptions {
  /// Spatially constant equilibrium for the relative-entropy column.
  std::optional<std::vector<double>> steady_state;
  std::vector<StepObserver> observers;
};

/// Report for a state (no step information); used for the initial row.
StepReport make_report(const StateField& u, const Mesh& mesh, const Model& model,
                       const std::optional<std::vector<double>>& steady_state);

/// Adaptive stepping from u.time() to t_end; observers see every accepted step.
/// Throws DtUnderflow.
StateField advance_adaptive(const StateField& u, const Mesh& mesh, const Model& model, const SolverConfig& config,
                            double t_end, const SimulationOptions& options = {});

struct SimulationResult {
  StateField final_state;
  std::vector<StepReport> reports;  // index 0 describes the initial state
};

/// Fixed or adaptive stepping according to config.adaptive. Fixed mode needs
/// t_end / fixed_dt to be an integer (ConfigError otherwise).
SimulationResult simulate(const StateField& initial, const Mesh& mesh, const Model& model, const SolverConfig& config,
                          double t_end, const SimulationOptions& options = {});

}  // namespace crossdiff
