// Acceptance runner: `crossdiff_acceptance [N...]` evaluates the listed
// criteria (all of them without arguments), prints one PASS/FAIL line each and
// exits nonzero if any failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <crossdiff/diagnostics.hpp>
#include <crossdiff/edge_means.hpp>
#include <crossdiff/mesh.hpp>
#include <crossdiff/models.hpp>
#include <crossdiff/sampling.hpp>
#include <crossdiff/solver.hpp>

using namespace crossdiff;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    passed = passed && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "VIOLATED ") + what;
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Model reference_maxwell_stefan() { return make_maxwell_stefan(1.0 / 0.168, 1.0 / 0.68, 1.0 / 0.883); }

StateField test_case_one(const Mesh& mesh) {
  return cell_averages([](const Point& x) { return std::vector<double>{x[0] < 0.5 ? 0.8 : 0.0, 0.2}; }, mesh);
}

StateField test_case_two(const Mesh& mesh) {
  return cell_averages(
      [](const Point& x) {
        const bool ll = x[0] < 0.5 && x[1] < 0.5;
        const bool ur = x[0] > 0.5 && x[1] > 0.5;
        return std::vector<double>{ll ? 9.0 / 11.0 : 0.0, ur ? 8.0 / 11.0 : 0.0};
      },
      mesh);
}

StateField random_state(std::size_t n, std::size_t cells, Rng& rng) {
  StateField u(n, cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const auto p = rng.simplex_point(n);
    std::copy(p.begin(), p.end(), u.cell(k).begin());
  }
  return u;
}

Outcome chain_rule_identity() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(kSeed);
  for (std::size_t n : {2u, 3u}) {
    const EntropySpec ent = EntropySpec::boltzmann(n);
    double worst = 0.0;
    for (int s = 0; s < 10000; ++s) {
      const auto uK = rng.simplex_point(n);
      const auto uL = rng.simplex_point(n);
      worst = std::max(worst, chain_rule_residual(ent, uK, uL));
    }
    o.require(worst <= 1e-12, "n=" + std::to_string(n) + fmt(" max residual %.2e <= 1e-12", worst));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 1.0, fmt("runtime %.2f s < 1 s", secs));
  return o;
}

Outcome edge_mean_properties() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const EntropySpec ent = EntropySpec::boltzmann(1);
  Rng rng(kSeed + 1);
  std::size_t bad = 0;
  double worst = 0.0;
  for (int s = 0; s < 100000; ++s) {
    const double a = rng.open_uniform();
    const double b = rng.open_uniform();
    const double m = log_mean(a, b);
    const bool ok = m == log_mean(b, a) && log_mean(a, a) == a && m >= std::min(a, b) && m <= std::max(a, b) &&
                    m <= 0.5 * (a + b);
    bad += ok ? 0 : 1;
    worst = std::max(worst, std::abs(generic_edge_mean(ent, 1, a, b) - m) / m);
  }
  o.require(bad == 0, std::to_string(bad) + " property violations in 1e5 pairs");
  o.require(worst <= 1e-13, fmt("generic vs closed form %.2e <= 1e-13 (relative)", worst));
  const double secs = seconds_since(t0);
  o.require(secs < 5.0, fmt("runtime %.2f s < 5 s", secs));
  return o;
}

Outcome structure_preservation() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 160);
  const Model model = reference_maxwell_stefan();
  SolverConfig cfg;
  cfg.adaptive = false;
  cfg.fixed_dt = 1e-6;
  const StateField init = test_case_one(mesh);

  double max_edge_sum = 0.0;
  SimulationOptions opts;
  opts.observers.push_back([&](const StateField& u, const StepReport&) {
    const EdgeState es = compute_edge_state(mesh, u, model.entropy);
    for (std::size_t e = 0; e < es.num_edges(); ++e) {
      const auto m = es.mean(e);
      max_edge_sum = std::max(max_edge_sum, std::accumulate(m.begin(), m.end(), 0.0));
    }
  });
  const SimulationResult res = simulate(init, mesh, model, cfg, 1e-2, opts);
  const auto& reps = res.reports;
  const double H0 = reps.front().entropy;

  double worst_increase = -INFINITY, worst_drift = 0.0, min_u = INFINITY, max_sum = 0.0;
  for (std::size_t k = 1; k < reps.size(); ++k) {
    worst_increase = std::max(worst_increase, reps[k].entropy - reps[k - 1].entropy);
    for (std::size_t i = 0; i < 2; ++i)
      worst_drift = std::max(worst_drift, std::abs(reps[k].mass[i] - reps[0].mass[i]) / reps[0].mass[i]);
    min_u = std::min(min_u, reps[k].min_concentration);
    max_sum = std::max(max_sum, reps[k].max_species_sum);
  }
  o.require(reps.size() == 10001, std::to_string(reps.size() - 1) + " steps");
  o.require(worst_increase <= 1e-8 * H0, fmt("(a) max entropy increase %.2e <= %.2e", worst_increase, 1e-8 * H0));
  o.require(worst_drift <= 1e-10, fmt("(b) mass drift %.2e <= 1e-10", worst_drift));
  o.require(min_u > 0.0, fmt("(c) min u %.3e > 0", min_u));
  o.require(max_sum <= 1.0 + 1e-12, fmt("(c) max sum u - 1 = %.2e <= 1e-12", max_sum - 1.0));
  o.require(max_edge_sum <= 1.0 + 1e-14, fmt("(d) max edge sum - 1 = %.2e <= 1e-14", max_edge_sum - 1.0));
  const double secs = seconds_since(t0);
  o.require(secs < 600.0, fmt("runtime %.1f s < 600 s", secs));
  return o;
}

Outcome spatial_convergence() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Model model = reference_maxwell_stefan();
  const std::size_t reference = 1280;
  const std::vector<std::size_t> ladder{40, 80, 160, 320};
  SolverConfig cfg;
  cfg.adaptive = false;
  cfg.fixed_dt = std::pow(1.0 / static_cast<double>(reference), 2);

  const Mesh ref_mesh = build_interval_mesh(0.0, 1.0, reference);
  const StateField ref = simulate(test_case_one(ref_mesh), ref_mesh, model, cfg, 1e-2).final_state;
  std::vector<std::pair<double, double>> errors;
  for (std::size_t n : ladder) {
    const Mesh mesh = build_interval_mesh(0.0, 1.0, n);
    const StateField u = simulate(test_case_one(mesh), mesh, model, cfg, 1e-2).final_state;
    errors.emplace_back(1.0 / static_cast<double>(n), l1_error(u, coarsen(ref, ref_mesh, mesh), mesh).total);
  }
  const auto orders = convergence_orders(errors);
  for (std::size_t j = 0; j < orders.size(); ++j)
    o.require(orders[j] >= 1.7 && orders[j] <= 2.3,
              std::to_string(ladder[j]) + "->" + std::to_string(ladder[j + 1]) + fmt(" order %.4f in [1.7, 2.3]", orders[j]));
  const double secs = seconds_since(t0);
  o.require(secs < 1800.0, fmt("runtime %.1f s < 1800 s", secs));
  return o;
}

Outcome entropy_decay() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 32, 32);
  const Model model = make_thin_film_long_time();
  const StateField init = test_case_two(mesh);
  const double T = 15.0;
  SimulationOptions opts;
  opts.steady_state = thin_film_steady_state();
  const SimulationResult res = simulate(init, mesh, model, SolverConfig{}, T, opts);
  const auto& reps = res.reports;

  std::vector<std::pair<double, double>> series;
  for (const auto& r : reps) series.emplace_back(r.t, *r.relative_entropy);
  const double H_init = series.front().second;
  const double H_end = series.back().second;
  o.require(res.final_state.time() == T, fmt("final t = %.17g", res.final_state.time()));
  o.require(H_end < 1e-4 * H_init, fmt("H(T) = %.3e < 1e-4 * %.6f", H_end, H_init));

  const DecayFit fit = decay_fit(series, std::pair{0.5 * T, T});
  o.require(fit.rate > 0.0 && fit.r_squared >= 0.95,
            fmt("lambda = %.4f > 0, R^2 = %.6f >= 0.95", fit.rate, fit.r_squared));

  auto combined = [](const StepReport& r) { return 2.0 * r.mass[0] + r.mass[1]; };
  double drift = 0.0;
  for (const auto& r : reps) drift = std::max(drift, std::abs(combined(r) - combined(reps[0])) / combined(reps[0]));
  o.require(drift <= 1e-9, fmt("2 m1 + m2 drift %.2e <= 1e-9", drift));

  // Past the initial transient the relative entropy must not increase.
  const double transient = 0.1;
  std::size_t increases = 0;
  for (std::size_t k = 1; k < series.size(); ++k)
    if (series[k].first > transient && series[k].second > series[k - 1].second) ++increases;
  o.require(increases == 0, std::to_string(increases) + fmt(" increases of H for t > %.1f", transient));
  const double secs = seconds_since(t0);
  o.require(secs < 1200.0, fmt("runtime %.1f s < 1200 s", secs));
  return o;
}

Outcome positive_definiteness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto two = quadratic_form_sample(make_two_species_euler_limit(), 10000, kSeed + 2);
  o.require(two.worst_ratio >= 1.0 - 1e-12, fmt("two-species ratio %.15f >= 1 - 1e-12", two.worst_ratio));

  const Model film = make_thin_film({0.0, 1.0, 0.5, 1.0, 0.0, 0.3, 0.5, 0.3, 0.0});
  const double alpha = 0.3;
  const auto tf = quadratic_form_sample(film, 10000, kSeed + 3, FormSampling::EdgeMeans);
  o.require(tf.worst_ratio >= alpha * (1.0 - 1e-10), fmt("thin-film ratio %.6f >= alpha = %.1f", tf.worst_ratio, alpha));

  const auto ms = quadratic_form_sample(reference_maxwell_stefan(), 10000, kSeed + 4);
  o.require(!ms.violation && ms.worst_ratio > 0.0, fmt("Maxwell-Stefan ratio %.6f > 0", ms.worst_ratio));
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, fmt("runtime %.2f s < 10 s", secs));
  return o;
}

Outcome solver_oracles() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 4);
  const Model model = reference_maxwell_stefan();
  Rng rng(kSeed + 5);

  const StateField u = random_state(2, 4, rng);
  const StateField u_old = random_state(2, 4, rng);
  const double dt = 1e-3;
  const Eigen::MatrixXd colored = assemble_jacobian(u, u_old, dt, mesh, model);
  const auto base = assemble_residual(u, u_old, dt, mesh, model);
  Eigen::MatrixXd dense(8, 8);
  StateField pert = u;
  for (std::size_t c = 0; c < 8; ++c) {
    const double h = fd_increment(u.values()[c]);
    pert.values()[c] = u.values()[c] + h;
    const auto r = assemble_residual(pert, u_old, dt, mesh, model);
    for (std::size_t row = 0; row < 8; ++row)
      dense(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) = (r[row] - base[row]) / h;
    pert.values()[c] = u.values()[c];
  }
  const double jac_gap = (colored - dense).cwiseAbs().maxCoeff();
  o.require(jac_gap == 0.0, fmt("colored vs dense Jacobian max gap %.3e == 0", jac_gap));

  StateField flat(2, 4);
  for (std::size_t k = 0; k < 4; ++k) flat(k, 0) = 0.3, flat(k, 1) = 0.45;
  const auto r0 = assemble_residual(flat, flat, dt, mesh, model);
  const double r0_max = std::ranges::max(r0, {}, [](double v) { return std::abs(v); });
  o.require(r0_max == 0.0, fmt("constant-state residual %.3e == 0", r0_max));

  const ImplicitEulerSystem system(mesh, model);
  std::size_t asym = 0;
  for (int s = 0; s < 1000; ++s) {
    const StateField x = random_state(2, 4, rng);
    for (const auto& edge : mesh.interior_edges()) {
      double fK[2], fL[2];
      system.edge_flux(x.cell(edge.left), x.cell(edge.right), edge.transmissibility, fK);
      system.edge_flux(x.cell(edge.right), x.cell(edge.left), edge.transmissibility, fL);
      asym += (fK[0] + fL[0] == 0.0 && fK[1] + fL[1] == 0.0) ? 0 : 1;
    }
  }
  o.require(asym == 0, std::to_string(asym) + " antisymmetry violations over 1e3 states");
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, fmt("runtime %.2f s < 10 s", secs));
  return o;
}

Outcome steady_state_algebra() {
  Outcome o;
  const auto u = thin_film_steady_state();
  const double u0 = 1.0 - u[0] - u[1];
  double f[2];
  thin_film_reaction(1000.0)(u, f);
  o.require(std::abs(f[0]) <= 1e-12, fmt("|r1(u_inf)| = %.2e <= 1e-12", std::abs(f[0])));
  const double stated = std::log(u[0] * u0) - 2.0 * std::log(u[1]) - std::log(1000.0);
  o.require(std::abs(stated) <= 1e-10, fmt("log(u1 u0) - 2 log(u2) - log(1000) = %.6f, |.| <= 1e-10", stated));
  const double corrected = std::log(1000.0 * u[0] * u0) - 2.0 * std::log(u[1]);
  std::printf("      info: log(1000 u1 u0) - 2 log(u2) = %.3e\n", corrected);
  return o;
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<const char*, std::function<Outcome()>>> table{
      {1, {"chain-rule identity", chain_rule_identity}},
      {2, {"edge-mean properties", edge_mean_properties}},
      {3, {"structure preservation, test case 1", structure_preservation}},
      {4, {"spatial convergence", spatial_convergence}},
      {5, {"exponential entropy decay, test case 2", entropy_decay}},
      {6, {"positive-definiteness sampling", positive_definiteness}},
      {7, {"solver correctness oracles", solver_oracles}},
      {8, {"steady-state algebra", steady_state_algebra}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));
  if (selected.empty())
    for (const auto& [id, entry] : criteria()) selected.push_back(id);

  int failures = 0;
  for (int id : selected) {
    const auto it = criteria().find(id);
    if (it == criteria().end()) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d (%s): %s\n", o.passed ? "PASS" : "FAIL", id, it->second.first, o.detail.c_str());
    std::fflush(stdout);
    failures += o.passed ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
