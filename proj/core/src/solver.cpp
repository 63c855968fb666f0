#include "crossdiff/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "crossdiff/diagnostics.hpp"
#include "crossdiff/edge_means.hpp"
#include "crossdiff/errors.hpp"

namespace crossdiff {

void SolverConfig::validate() const {
  if (!(newton_tol > 0.0)) throw ConfigError("newton_tol must be positive");
  if (newton_max_iter < 1) throw ConfigError("newton_max_iter must be at least 1");
  if (!(damping_min > 0.0) || damping_min > 1.0) throw ConfigError("damping_min must lie in (0,1]");
  if (adaptive) {
    if (!(dt_min > 0.0) || !(dt_min <= dt_initial) || !(dt_initial <= dt_max))
      throw ConfigError("adaptive stepping requires 0 < dt_min <= dt_initial <= dt_max");
    if (!(dt_shrink > 0.0) || !(dt_shrink < 1.0)) throw ConfigError("dt_shrink must lie in (0,1)");
    if (!(dt_grow > 1.0)) throw ConfigError("dt_grow must exceed 1");
  } else if (!(fixed_dt > 0.0)) {
    throw ConfigError("fixed stepping requires fixed_dt > 0");
  }
}

double fd_increment(double u) {
  const double h = std::max(1e-8, 1e-8 * std::abs(u));
  return (u + h) - u;
}

std::vector<int> distance2_coloring(const Mesh& mesh) {
  const std::size_t nc = mesh.num_cells();
  std::vector<int> color(nc, -1);
  std::vector<std::size_t> stamp;  // stamp[c] == k + 1 marks color c forbidden for cell k
  for (std::size_t k = 0; k < nc; ++k) {
    auto forbid = [&](std::size_t cell) {
      const int c = color[cell];
      if (c < 0) return;
      if (static_cast<std::size_t>(c) >= stamp.size()) stamp.resize(static_cast<std::size_t>(c) + 1, 0);
      stamp[static_cast<std::size_t>(c)] = k + 1;
    };
    for (std::size_t nb : mesh.neighbors(k)) {
      forbid(nb);
      for (std::size_t nb2 : mesh.neighbors(nb)) forbid(nb2);
    }
    int c = 0;
    while (static_cast<std::size_t>(c) < stamp.size() && stamp[static_cast<std::size_t>(c)] == k + 1) ++c;
    color[k] = c;
  }
  return color;
}

bool is_admissible(const StateField& u) {
  for (std::size_t k = 0; k < u.num_cells(); ++k) {
    double s = 0.0;
    for (double v : u.cell(k)) {
      if (!(v >= 0.0)) return false;
      s += v;
    }
    if (!(s <= 1.0 + kVolumeSlack)) return false;
  }
  return true;
}

struct ImplicitEulerSystem::Lu {
  SparseMatrix pattern;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> solver;
  bool analyzed = false;
};

ImplicitEulerSystem::ImplicitEulerSystem(const Mesh& mesh, const Model& model)
    : mesh_(mesh), model_(model), lu_(std::make_unique<Lu>()) {
  if (model_.num_species == 0 || !model_.a_sigma) throw InvalidArgument("model is incomplete");
  if (model_.entropy.num_species() != model_.num_species)
    throw InvalidArgument("model entropy and species count disagree");
  colors_ = distance2_coloring(mesh_);
  num_colors_ = colors_.empty() ? 0 : *std::max_element(colors_.begin(), colors_.end()) + 1;
  color_cells_.assign(static_cast<std::size_t>(num_colors_), {});
  for (std::size_t k = 0; k < colors_.size(); ++k) color_cells_[static_cast<std::size_t>(colors_[k])].push_back(k);

  const std::size_t n = model_.num_species;
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t k = 0; k < mesh_.num_cells(); ++k) {
    auto add_block = [&](std::size_t l) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          trip.emplace_back(static_cast<int>(k * n + i), static_cast<int>(l * n + j), 0.0);
    };
    add_block(k);
    for (std::size_t l : mesh_.neighbors(k)) add_block(l);
  }
  const auto N = static_cast<Eigen::Index>(num_unknowns());
  lu_->pattern.resize(N, N);
  lu_->pattern.setFromTriplets(trip.begin(), trip.end());
  lu_->pattern.makeCompressed();
}

ImplicitEulerSystem::~ImplicitEulerSystem() = default;

void ImplicitEulerSystem::edge_flux(std::span<const double> uK, std::span<const double> uL, double tau,
                                    std::span<double> flux) const {
  const std::size_t n = model_.num_species;
  double mean[16];
  double a[256];
  std::vector<double> mean_heap;
  std::vector<double> a_heap;
  std::span<double> ms(mean, n + 1);
  std::span<double> as(a, n * n);
  if (n + 1 > 16) {
    mean_heap.resize(n + 1);
    a_heap.resize(n * n);
    ms = mean_heap;
    as = a_heap;
  }
  edge_mean_vector(model_.entropy, uK, uL, ms);
  model_.a_sigma(ms, as);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += as[i * n + j] * (uL[j] - uK[j]);
    flux[i] = -tau * s;
  }
}

void ImplicitEulerSystem::residual(const StateField& u_new, const StateField& u_old, double dt,
                                   std::span<double> out) const {
  const std::size_t n = model_.num_species;
  const auto& cells = mesh_.cells();
  std::vector<double> f(n);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double mk = cells[k].measure;
    const auto u = u_new.cell(k);
    const auto uo = u_old.cell(k);
    if (model_.has_source()) {
      model_.source(u, f);
      for (std::size_t i = 0; i < n; ++i) out[k * n + i] = mk * (u[i] - uo[i]) / dt - mk * f[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) out[k * n + i] = mk * (u[i] - uo[i]) / dt;
    }
  }
  std::vector<double> flux(n);
  for (const auto& e : mesh_.interior_edges()) {
    edge_flux(u_new.cell(e.left), u_new.cell(e.right), e.transmissibility, flux);
    for (std::size_t i = 0; i < n; ++i) {
      out[e.left * n + i] += flux[i];
      out[e.right * n + i] -= flux[i];
    }
  }
}

SparseMatrix ImplicitEulerSystem::jacobian(const StateField& u_new, const StateField& u_old, double dt) const {
  std::vector<double> r0(num_unknowns());
  residual(u_new, u_old, dt, r0);
  return jacobian(u_new, u_old, dt, r0);
}

SparseMatrix ImplicitEulerSystem::jacobian(const StateField& u_new, const StateField& u_old, double dt,
                                           std::span<const double> base_residual) const {
  const std::size_t n = model_.num_species;
  SparseMatrix J = lu_->pattern;
  StateField pert = u_new;
  std::vector<double> rp(num_unknowns());
  std::vector<double> h(mesh_.num_cells());
  for (const auto& group : color_cells_) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k : group) {
        h[k] = fd_increment(u_new(k, j));
        pert(k, j) = u_new(k, j) + h[k];
      }
      residual(pert, u_old, dt, rp);
      for (std::size_t k : group) {
        const auto col = static_cast<Eigen::Index>(k * n + j);
        for (SparseMatrix::InnerIterator it(J, col); it; ++it) {
          const auto row = static_cast<std::size_t>(it.row());
          it.valueRef() = (rp[row] - base_residual[row]) / h[k];
        }
        pert(k, j) = u_new(k, j);
      }
    }
  }
  return J;
}

StateField ImplicitEulerSystem::linearized_step(const StateField& u_old, double dt) {
  const std::size_t n = model_.num_species;
  const auto& cells = mesh_.cells();
  SparseMatrix M = lu_->pattern;
  Eigen::VectorXd b(static_cast<Eigen::Index>(num_unknowns()));
  std::vector<double> f(n);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double a = cells[k].measure / dt;
    if (model_.has_source()) model_.source(u_old.cell(k), f);
    for (std::size_t i = 0; i < n; ++i) {
      const auto q = static_cast<Eigen::Index>(k * n + i);
      M.coeffRef(q, q) += a;
      b(q) = a * u_old(k, i) + (model_.has_source() ? cells[k].measure * f[i] : 0.0);
    }
  }
  std::vector<double> mean(n + 1);
  std::vector<double> A(n * n);
  for (const auto& e : mesh_.interior_edges()) {
    edge_mean_vector(model_.entropy, u_old.cell(e.left), u_old.cell(e.right), mean);
    model_.a_sigma(mean, A);
    for (std::size_t i = 0; i < n; ++i) {
      const auto rk = static_cast<Eigen::Index>(e.left * n + i);
      const auto rl = static_cast<Eigen::Index>(e.right * n + i);
      for (std::size_t j = 0; j < n; ++j) {
        const double c = e.transmissibility * A[i * n + j];
        const auto ck = static_cast<Eigen::Index>(e.left * n + j);
        const auto cl = static_cast<Eigen::Index>(e.right * n + j);
        M.coeffRef(rk, ck) += c;
        M.coeffRef(rk, cl) -= c;
        M.coeffRef(rl, ck) -= c;
        M.coeffRef(rl, cl) += c;
      }
    }
  }
  const Eigen::VectorXd x = solve(M, b);
  StateField out = u_old;
  auto& v = out.values();
  for (std::size_t q = 0; q < v.size(); ++q) v[q] = x(static_cast<Eigen::Index>(q));
  return out;
}

Eigen::VectorXd ImplicitEulerSystem::solve(const SparseMatrix& J, const Eigen::VectorXd& rhs) {
  auto& lu = lu_->solver;
  if (!lu_->analyzed) {
    lu.analyzePattern(J);
    lu_->analyzed = true;
  }
  lu.factorize(J);
  if (lu.info() != Eigen::Success) throw LinearSolveFailure("sparse LU factorization failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw LinearSolveFailure("sparse LU solve failed");
  return x;
}

std::vector<double> assemble_residual(const StateField& u_new, const StateField& u_old, double dt, const Mesh& mesh,
                                      const Model& model) {
  ImplicitEulerSystem sys(mesh, model);
  std::vector<double> r(sys.num_unknowns());
  sys.residual(u_new, u_old, dt, r);
  return r;
}

SparseMatrix assemble_jacobian(const StateField& u_new, const StateField& u_old, double dt, const Mesh& mesh,
                               const Model& model) {
  ImplicitEulerSystem sys(mesh, model);
  return sys.jacobian(u_new, u_old, dt);
}

namespace {

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(x));
  }
  return m;
}

}  // namespace

NewtonResult newton_solve(ImplicitEulerSystem& system, const StateField& u_old, double dt, const SolverConfig& config) {
  if (!(dt > 0.0)) throw InvalidArgument("newton_solve: dt must be positive");
  const std::size_t N = system.num_unknowns();
  NewtonResult res{u_old, 0, 0.0};
  StateField& u = res.state;
  std::vector<double> r(N);
  StateField cand = u;
  std::vector<double> rc(N);

  auto try_state = [&](const StateField& s, std::vector<double>& out) {
    if (!is_admissible(s)) return false;
    try {
      system.residual(s, u_old, dt, out);
    } catch (const SingularDenominator&) {
      return false;
    }
    return std::isfinite(max_norm(out));
  };

  bool started = false;
  if (config.linearized_predictor) {
    std::optional<StateField> pred;
    try {
      pred = system.linearized_step(u_old, dt);
    } catch (const SingularDenominator&) {
    } catch (const LinearSolveFailure&) {
    }
    if (pred) {
      const auto& pv = pred->values();
      const auto& ov = u_old.values();
      for (double theta = 1.0; theta >= config.damping_min && !started; theta *= 0.5) {
        auto& cv = cand.values();
        for (std::size_t q = 0; q < N; ++q) cv[q] = ov[q] + theta * (pv[q] - ov[q]);
        started = try_state(cand, r);
      }
      if (started) std::swap(u, cand);
    }
  }
  if (!started && !try_state(u, r))
    throw NewtonDiverged("residual not evaluable at the previous state");

  Eigen::VectorXd rhs(static_cast<Eigen::Index>(N));
  for (int it = 1; it <= config.newton_max_iter; ++it) {
    SparseMatrix J;
    try {
      J = system.jacobian(u, u_old, dt, r);
    } catch (const SingularDenominator& e) {
      throw NewtonDiverged(std::string("Jacobian not evaluable: ") + e.what());
    }
    for (std::size_t q = 0; q < N; ++q) rhs(static_cast<Eigen::Index>(q)) = -r[q];
    const Eigen::VectorXd delta = system.solve(J, rhs);

    double theta = 1.0;
    for (;;) {
      auto& cv = cand.values();
      const auto& uv = u.values();
      for (std::size_t q = 0; q < N; ++q) cv[q] = uv[q] + theta * delta(static_cast<Eigen::Index>(q));
      if (try_state(cand, rc)) break;
      theta *= 0.5;
      if (theta < config.damping_min) throw NewtonDiverged("damping factor fell below damping_min");
    }
    std::swap(u, cand);
    std::swap(r, rc);
    res.iterations = it;
    res.residual_norm = max_norm(r);
    if (res.residual_norm <= config.newton_tol) {
      u.set_time(u_old.time() + dt);
      return res;
    }
  }
  throw NewtonDiverged("Newton did not reach the tolerance within newton_max_iter iterations");
}

NewtonResult newton_solve(const StateField& u_old, double dt, const Mesh& mesh, const Model& model,
                          const SolverConfig& config) {
  ImplicitEulerSystem sys(mesh, model);
  return newton_solve(sys, u_old, dt, config);
}

double StepSizeController::after_accept(double dt_prev) const {
  return std::clamp(config.dt_grow * dt_prev, config.dt_min, config.dt_max);
}

double StepSizeController::after_reject(double dt) const {
  const double next = config.dt_shrink * dt;
  if (next < config.dt_min) throw DtUnderflow("time step would fall below dt_min");
  return next;
}

StepReport make_report(const StateField& u, const Mesh& mesh, const Model& model,
                       const std::optional<std::vector<double>>& steady_state) {
  StepReport rep;
  const std::size_t n = u.num_species();
  rep.t = u.time();
  rep.entropy = discrete_entropy(u, mesh, model.entropy);
  if (steady_state) rep.relative_entropy = relative_entropy(u, mesh, *steady_state);
  try {
    const EdgeState es = compute_edge_state(mesh, u, model.entropy);
    rep.dissipation = entropy_dissipation(u, es, mesh, model.exponent_s);
  } catch (const SingularEdge&) {
    rep.dissipation = std::numeric_limits<double>::infinity();
  }
  rep.mass.assign(n, 0.0);
  rep.min_concentration = std::numeric_limits<double>::infinity();
  rep.max_species_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < u.num_cells(); ++k) {
    const double mk = mesh.cells()[k].measure;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rep.mass[i] += mk * u(k, i);
      rep.min_concentration = std::min(rep.min_concentration, u(k, i));
      s += u(k, i);
    }
    rep.max_species_sum = std::max(rep.max_species_sum, s);
  }
  return rep;
}

namespace {

void notify(const SimulationOptions& options, const StateField& u, const StepReport& rep) {
  for (const auto& obs : options.observers) obs(u, rep);
}

void check_initial(const StateField& u, const Mesh& mesh, const Model& model) {
  if (u.num_cells() != mesh.num_cells()) throw InvalidArgument("initial state does not match the mesh");
  if (u.num_species() != model.num_species) throw InvalidArgument("initial state does not match the model");
  if (!is_admissible(u)) throw RangeError("initial state is not admissible");
}

}  // namespace

StateField advance_adaptive(const StateField& u, const Mesh& mesh, const Model& model, const SolverConfig& config,
                            double t_end, const SimulationOptions& options) {
  check_initial(u, mesh, model);
  ImplicitEulerSystem system(mesh, model);
  const StepSizeController ctl{config};
  StateField cur = u;
  double dt_prev = 0.0;
  std::size_t step = 0;
  while (cur.time() < t_end) {
    double dt = step == 0 ? config.dt_initial : ctl.after_accept(dt_prev);
    const double dt_first = dt;
    int rejected = 0;
    NewtonResult nr;
    bool last = false;
    for (;;) {
      const double remaining = t_end - cur.time();
      last = dt >= remaining;
      const double dt_try = last ? remaining : dt;
      try {
        nr = newton_solve(system, cur, dt_try, config);
        dt = dt_try;
        break;
      } catch (const SolverFailure&) {
        ++rejected;
        dt = ctl.after_reject(dt_try);
      }
    }
    nr.state.set_time(last ? t_end : cur.time() + dt);
    cur = std::move(nr.state);
    ++step;
    dt_prev = dt;
    StepReport rep = make_report(cur, mesh, model, options.steady_state);
    rep.step = step;
    rep.dt_used = dt;
    rep.dt_first_attempt = dt_first;
    rep.newton_iterations = nr.iterations;
    rep.residual_norm = nr.residual_norm;
    rep.rejected_attempts = rejected;
    notify(options, cur, rep);
  }
  return cur;
}

SimulationResult simulate(const StateField& initial, const Mesh& mesh, const Model& model, const SolverConfig& config,
                          double t_end, const SimulationOptions& options) {
  config.validate();
  check_initial(initial, mesh, model);
  if (t_end < initial.time()) throw ConfigError("t_end lies before the initial time");

  SimulationResult result;
  StepReport first = make_report(initial, mesh, model, options.steady_state);
  result.reports.push_back(first);
  notify(options, initial, first);

  SimulationOptions inner;
  inner.steady_state = options.steady_state;
  inner.observers = options.observers;
  inner.observers.push_back([&](const StateField&, const StepReport& rep) { result.reports.push_back(rep); });

  const double span = t_end - initial.time();
  if (span == 0.0) {
    result.final_state = initial;
    return result;
  }

  if (config.adaptive) {
    result.final_state = advance_adaptive(initial, mesh, model, config, t_end, inner);
    return result;
  }

  const double steps_real = span / config.fixed_dt;
  const double steps_rounded = std::round(steps_real);
  if (steps_rounded < 1.0 || std::abs(steps_real - steps_rounded) > 1e-9 * steps_rounded)
    throw ConfigError("fixed stepping requires (t_end - t0) / fixed_dt to be an integer");
  const auto num_steps = static_cast<std::size_t>(steps_rounded);

  ImplicitEulerSystem system(mesh, model);
  StateField cur = initial;
  const double t0 = initial.time();
  for (std::size_t k = 1; k <= num_steps; ++k) {
    NewtonResult nr = newton_solve(system, cur, config.fixed_dt, config);
    nr.state.set_time(k == num_steps ? t_end : t0 + static_cast<double>(k) * config.fixed_dt);
    cur = std::move(nr.state);
    StepReport rep = make_report(cur, mesh, model, options.steady_state);
    rep.step = k;
    rep.dt_used = config.fixed_dt;
    rep.dt_first_attempt = config.fixed_dt;
    rep.newton_iterations = nr.iterations;
    rep.residual_norm = nr.residual_norm;
    notify(inner, cur, rep);
  }
  result.final_state = std::move(cur);
  return result;
}

}  // namespace crossdiff
