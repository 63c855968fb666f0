#include "crossdiff_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <crossdiff/diagnostics.hpp>
#include <crossdiff/errors.hpp>
#include <crossdiff/solver.hpp>

#include "crossdiff_cli/config.hpp"

namespace crossdiff::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const RangeError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DtUnderflow& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitConfig;
  }
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

void write_series_header(std::ostream& os, std::size_t n) {
  os << "step,t,dt,newton_iters,rejected,entropy,rel_entropy,dissipation";
  for (std::size_t i = 1; i <= n; ++i) os << ",mass_" << i;
  os << ",min_u,max_sum_u\n";
}

void write_series_row(std::ostream& os, const StepReport& r) {
  os << r.step << ',' << format_double(r.t) << ',' << format_double(r.dt_used) << ',' << r.newton_iterations << ','
     << r.rejected_attempts << ',' << format_double(r.entropy) << ','
     << (r.relative_entropy ? format_double(*r.relative_entropy) : std::string()) << ','
     << format_double(r.dissipation);
  for (double m : r.mass) os << ',' << format_double(m);
  os << ',' << format_double(r.min_concentration) << ',' << format_double(r.max_species_sum) << '\n';
}

void write_snapshot(const std::filesystem::path& dir, std::size_t step, const StateField& u, const Mesh& mesh) {
  auto os = open_output(dir / ("snapshot_" + std::to_string(step) + ".csv"));
  os << "cell,x,y";
  for (std::size_t i = 1; i <= u.num_species(); ++i) os << ",u_" << i;
  os << '\n';
  for (std::size_t k = 0; k < u.num_cells(); ++k) {
    const auto& c = mesh.cells()[k].center;
    os << k << ',' << format_double(c[0]) << ',' << format_double(c[1]);
    for (double v : u.cell(k)) os << ',' << format_double(v);
    os << '\n';
  }
}

double model_parameter(const Model& m, const std::string& name, double fallback) {
  for (const auto& [k, v] : m.parameters)
    if (k == name) return v;
  return fallback;
}

/// Constant equilibrium for models with a known one (the reaction system);
/// masses taken from the initial state.
std::optional<std::vector<double>> steady_state_for(const Model& model, const StateField& u0, const Mesh& mesh) {
  if (model.name != "thin_film_reaction") return std::nullopt;
  ReactionSteadyStateParams p;
  p.rate = model_parameter(model, "k", 1000.0);
  p.mass1 = p.mass2 = p.domain_measure = 0.0;
  for (std::size_t k = 0; k < u0.num_cells(); ++k) {
    const double mk = mesh.cells()[k].measure;
    p.mass1 += mk * u0(k, 0);
    p.mass2 += mk * u0(k, 1);
  }
  p.domain_measure = mesh.total_measure();
  return thin_film_steady_state(p);
}

std::filesystem::path base_dir_of(const std::filesystem::path& config) {
  return config.has_parent_path() ? config.parent_path() : std::filesystem::path{};
}

}  // namespace

int cmd_run(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigFile cfg = ConfigFile::load(config);
    const RunConfig rc = build_run_config(cfg, base_dir_of(config));
    if (!cfg.has("time.t_end")) throw ConfigError("missing config key 'time.t_end'");
    const Mesh mesh = make_mesh(rc.mesh);
    const StateField u0 = cell_averages(make_initial_field(rc.initial, rc.model.num_species), mesh);
    std::filesystem::create_directories(rc.output_dir);

    auto series = open_output(rc.output_dir / "series.csv");
    write_series_header(series, rc.model.num_species);
    SimulationOptions opts;
    opts.steady_state = steady_state_for(rc.model, u0, mesh);
    opts.observers.push_back([&](const StateField& u, const StepReport& r) {
      write_series_row(series, r);
      if (rc.snapshot_every > 0 && r.step % rc.snapshot_every == 0) write_snapshot(rc.output_dir, r.step, u, mesh);
    });
    const SimulationResult res = simulate(u0, mesh, rc.model, rc.solver, rc.t_end, opts);
    series.flush();
    if (!series) throw ConfigError("error writing series.csv");
    out << "run: " << rc.model_name << ", " << mesh.num_cells() << " cells, " << res.reports.size() - 1
        << " steps to t = " << format_double(res.final_state.time()) << ", output in " << rc.output_dir.string()
        << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_convergence(const std::filesystem::path& config, bool full_scale, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ConfigFile cfg = ConfigFile::load(config);
    cfg.set_default("model.name", "maxwell_stefan");
    cfg.set_default("initial.preset", "testcase1");
    cfg.set_default("time.t_end", "0.01");
    cfg.set_default("time.mode", "fixed");
    cfg.set_default("time.dt", "1");  // replaced below by (h_ref)^2
    cfg.set_default("mesh.cells", "1");
    RunConfig rc = build_run_config(cfg, base_dir_of(config));
    if (rc.mesh.kind != MeshSpec::Kind::Interval) throw ConfigError("mesh.type: convergence study runs on an interval");
    if (full_scale) {
      rc.reference_cells = 5120;
      rc.ladder = {40, 80, 160, 320, 640, 1280};
    }
    if (rc.ladder.size() < 2) throw ConfigError("convergence.ladder: need at least two resolutions");
    for (std::size_t j = 0; j < rc.ladder.size(); ++j) {
      const std::size_t nj = rc.ladder[j];
      if (j > 0 && nj <= rc.ladder[j - 1]) throw ConfigError("convergence.ladder: resolutions must increase");
      if (nj >= rc.reference_cells || rc.reference_cells % nj != 0)
        throw ConfigError("convergence.ladder: " + std::to_string(nj) + " cells is not nested in the reference (" +
                          std::to_string(rc.reference_cells) + " cells)");
    }
    const double length = rc.mesh.lx;
    const double h_ref = length / static_cast<double>(rc.reference_cells);
    rc.solver.adaptive = false;
    rc.solver.fixed_dt = h_ref * h_ref;

    auto solve_on = [&](const Mesh& mesh) {
      const StateField u0 = cell_averages(make_initial_field(rc.initial, rc.model.num_species), mesh);
      return simulate(u0, mesh, rc.model, rc.solver, rc.t_end).final_state;
    };

    const Mesh ref_mesh = build_interval_mesh(0.0, length, rc.reference_cells);
    out << "reference: " << rc.reference_cells << " cells, dt = " << format_double(rc.solver.fixed_dt) << '\n';
    const StateField ref = solve_on(ref_mesh);

    std::vector<std::pair<double, double>> errors;
    std::vector<L1Error> per_rung;
    for (std::size_t cells : rc.ladder) {
      const Mesh mesh = build_interval_mesh(0.0, length, cells);
      const StateField u = solve_on(mesh);
      const L1Error e = l1_error(u, coarsen(ref, ref_mesh, mesh), mesh);
      errors.emplace_back(length / static_cast<double>(cells), e.total);
      per_rung.push_back(e);
      out << "  " << cells << " cells: L1 error " << format_double(e.total) << '\n';
    }
    const std::vector<double> orders = convergence_orders(errors);

    std::filesystem::create_directories(rc.output_dir);
    auto os = open_output(rc.output_dir / "convergence.csv");
    os << "# reference " << rc.reference_cells << " cells, fixed dt = (h_ref)^2 = " << format_double(rc.solver.fixed_dt)
       << ", T = " << format_double(rc.t_end)
       << (full_scale ? ", full-scale ladder\n" : ", desk-scale ladder (full scale: --full-scale, reference 5120)\n");
    os << "n_cells,h,err_L1_total";
    for (std::size_t i = 1; i <= rc.model.num_species; ++i) os << ",err_L1_" << i;
    os << ",observed_order\n";
    for (std::size_t j = 0; j < rc.ladder.size(); ++j) {
      os << rc.ladder[j] << ',' << format_double(errors[j].first) << ',' << format_double(errors[j].second);
      for (double v : per_rung[j].per_species) os << ',' << format_double(v);
      os << ',' << (j == 0 ? std::string() : format_double(orders[j - 1])) << '\n';
    }
    for (std::size_t j = 0; j < orders.size(); ++j)
      out << "  order " << rc.ladder[j] << " -> " << rc.ladder[j + 1] << ": " << format_double(orders[j]) << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_decay(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ConfigFile cfg = ConfigFile::load(config);
    cfg.set_default("model.name", "thin_film_reaction");
    cfg.set_default("mesh.type", "rectangle");
    cfg.set_default("mesh.nx", "32");
    cfg.set_default("mesh.ny", "32");
    cfg.set_default("initial.preset", "testcase2");
    cfg.set_default("time.t_end", "15");
    const RunConfig rc = build_run_config(cfg, base_dir_of(config));
    if (rc.model.name != "thin_film_reaction") throw ConfigError("model.name: decay study needs thin_film_reaction");
    const Mesh mesh = make_mesh(rc.mesh);
    const StateField u0 = cell_averages(make_initial_field(rc.initial, rc.model.num_species), mesh);

    SimulationOptions opts;
    opts.steady_state = steady_state_for(rc.model, u0, mesh);
    const SimulationResult res = simulate(u0, mesh, rc.model, rc.solver, rc.t_end, opts);

    std::vector<std::pair<double, double>> series;
    for (const auto& r : res.reports) series.emplace_back(r.t, *r.relative_entropy);
    const double span = res.reports.back().t - res.reports.front().t;
    const auto window = rc.decay_window.value_or(std::make_pair(res.reports.front().t + 0.5 * span, res.reports.back().t));
    const DecayFit fit = decay_fit(series, window);

    std::filesystem::create_directories(rc.output_dir);
    auto os = open_output(rc.output_dir / "decay.csv");
    os << "t,rel_entropy\n";
    for (const auto& [t, h] : series) os << format_double(t) << ',' << format_double(h) << '\n';
    auto fs = open_output(rc.output_dir / "decay_fit.csv");
    fs << "lambda,intercept,r_squared,points,t_from,t_to\n"
       << format_double(fit.rate) << ',' << format_double(fit.intercept) << ',' << format_double(fit.r_squared) << ','
       << fit.points << ',' << format_double(window.first) << ',' << format_double(window.second) << '\n';
    out << "decay: " << res.reports.size() - 1 << " steps, relative entropy " << format_double(series.front().second)
        << " -> " << format_double(series.back().second) << "\n  lambda = " << format_double(fit.rate)
        << ", R^2 = " << format_double(fit.r_squared) << " over t in [" << format_double(window.first) << ", "
        << format_double(window.second) << "]\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_check(const CheckOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.samples == 0) err << "warning: sample count is 0, every sampled check passes vacuously\n";
    const auto results = run_check_suite(options);
    bool all = true;
    for (const auto& r : results) {
      char line[160];
      std::snprintf(line, sizeof line, "%-34s %s  ", r.name.c_str(), r.passed ? "PASS" : "FAIL");
      out << line << r.detail << '\n';
      all = all && r.passed;
    }
    out << (all ? "all checks passed\n" : "some checks FAILED\n");
    return static_cast<int>(all ? kExitOk : kExitCheckFailed);
  });
}

}  // namespace crossdiff::cli
