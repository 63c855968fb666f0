#include <cmath>
#include <sstream>

#include <crossdiff/errors.hpp>

#include "crossdiff_cli/config.hpp"

namespace crossdiff::cli {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "model.name",        "model.d0",          "model.d1",          "model.d2",
      "model.a",           "model.k",           "model.beta",        "model.theta",
      "model.delta",       "mesh.type",         "mesh.cells",        "mesh.length",
      "mesh.nx",           "mesh.ny",           "mesh.lx",           "mesh.ly",
      "mesh.path",         "initial.preset",    "initial.background", "initial.block",
      "time.t_end",        "time.mode",         "time.dt",           "time.dt_initial",
      "time.dt_min",       "time.dt_max",       "time.dt_grow",      "time.dt_shrink",
      "time.newton_tol",   "time.newton_max_iter", "time.damping_min", "time.predictor",
      "output.dir",        "output.snapshot_every", "run.seed",       "convergence.reference",
      "convergence.ladder", "decay.fit_from",   "decay.fit_to",
  };
  return keys;
}

std::string config_help() {
  return R"(Config file: `key = value` lines grouped under [section] headers, '#' starts a comment.
Numbers may be written as a fraction, e.g. d0 = 1/0.168.

[model]
  name          maxwell_stefan | thin_film | thin_film_reaction | tumor | two_species   (required)
  d0, d1, d2    maxwell_stefan diffusivities (default 1/0.168, 1/0.68, 1/0.883)
  a             thin_film coefficient table a_ij, (n+1)^2 comma-separated values, row-major,
                index 0 = solvent (required for thin_film; thin_film_reaction defaults to
                a10 = 1, a20 = 0.1, all others 0)
  k             thin_film_reaction rate in r1 = u2^2 - k u1 u0 (default 1000)
  beta, theta   tumor parameters, theta < 4/sqrt(beta) (required for tumor)
  delta         tumor artificial diffusion (default 0)
[mesh]
  type          interval | rectangle | file        (default interval)
  cells, length interval: number of cells and domain length (default length 1)
  nx, ny, lx, ly  rectangle: cells per axis and side lengths (default sides 1)
  path          file: FVMESH file, relative to the config file
[initial]
  preset        testcase1 | testcase2 | blocks      (default testcase1)
  background    blocks: species values outside every block (default 0)
  block         blocks, repeatable: `x0, x1, y0, y1 : u1, ..., un` (1D: `x0, x1 : ...`)
[time]
  t_end         final time (required for run)
  mode          adaptive | fixed                     (default adaptive)
  dt            fixed step; t_end / dt must be an integer
  dt_initial, dt_min, dt_max, dt_grow, dt_shrink   adaptive policy (1e-5, 1e-8, 1e-2, 1.1, 0.2)
  newton_tol, newton_max_iter, damping_min         Newton settings (1e-10, 50, 2^-30)
  predictor     linearized | previous                (Newton starting iterate, default linearized)
[output]
  dir           output directory (default out)
  snapshot_every  write snapshot_<step>.csv every k-th accepted step, 0 = never (default 0)
[run]
  seed          recorded in outputs; the solver itself is deterministic (default 0)
[convergence]
  reference     reference resolution (default 1280)
  ladder        comma-separated coarse resolutions dividing the reference (default 40, 80, 160, 320)
[decay]
  fit_from, fit_to  decay-fit window (default: second half of the run)
)";
}

Model build_model(const ConfigFile& cfg) {
  const std::string name = cfg.get("model.name");
  if (name == "maxwell_stefan") {
    return make_maxwell_stefan(cfg.get_double_or("model.d0", 1.0 / 0.168), cfg.get_double_or("model.d1", 1.0 / 0.68),
                               cfg.get_double_or("model.d2", 1.0 / 0.883));
  }
  if (name == "thin_film") return make_thin_film(cfg.get_list("model.a"));
  if (name == "thin_film_reaction") {
    Model m = cfg.has("model.a") ? make_thin_film(cfg.get_list("model.a")) : make_thin_film_long_time();
    if (m.num_species != 2) throw ConfigError("model.a: thin_film_reaction needs a 3 x 3 table");
    const double k = cfg.get_double_or("model.k", 1000.0);
    if (!(k > 0.0)) throw ConfigError("model.k must be positive");
    m.name = "thin_film_reaction";
    m.source = thin_film_reaction(k);
    std::erase_if(m.parameters, [](const auto& p) { return p.first == "k"; });
    m.parameters.emplace_back("k", k);
    return m;
  }
  if (name == "tumor")
    return make_tumor(cfg.get_double("model.beta"), cfg.get_double("model.theta"), cfg.get_double_or("model.delta", 0.0));
  if (name == "two_species") return make_two_species_euler_limit();
  throw ConfigError("model.name: unknown model '" + name + "'");
}

MeshSpec build_mesh_spec(const ConfigFile& cfg, const std::filesystem::path& base_dir) {
  MeshSpec spec;
  const std::string type = cfg.get_or("mesh.type", "interval");
  if (type == "interval") {
    spec.kind = MeshSpec::Kind::Interval;
    spec.nx = cfg.get_count("mesh.cells");
    spec.lx = cfg.get_double_or("mesh.length", 1.0);
  } else if (type == "rectangle") {
    spec.kind = MeshSpec::Kind::Rectangle;
    spec.nx = cfg.get_count("mesh.nx");
    spec.ny = cfg.get_count("mesh.ny");
    spec.lx = cfg.get_double_or("mesh.lx", 1.0);
    spec.ly = cfg.get_double_or("mesh.ly", 1.0);
  } else if (type == "file") {
    spec.kind = MeshSpec::Kind::File;
    spec.path = cfg.get("mesh.path");
    if (spec.path.is_relative() && !base_dir.empty()) spec.path = base_dir / spec.path;
    if (!std::filesystem::exists(spec.path)) throw ConfigError("mesh.path: file not found: " + spec.path.string());
  } else {
    throw ConfigError("mesh.type: unknown mesh type '" + type + "'");
  }
  if (spec.kind != MeshSpec::Kind::File) {
    if (spec.nx == 0 || (spec.kind == MeshSpec::Kind::Rectangle && spec.ny == 0))
      throw ConfigError("mesh: cell counts must be positive");
    if (!(spec.lx > 0.0) || !(spec.ly > 0.0)) throw ConfigError("mesh: side lengths must be positive");
  }
  return spec;
}

namespace {

InitialBlock parse_block(const std::string& text, std::size_t n) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("initial.block: expected 'x0, x1[, y0, y1] : values', got '" + text + "'");
  const auto box = parse_list(text.substr(0, colon), "initial.block");
  const auto vals = parse_list(text.substr(colon + 1), "initial.block");
  InitialBlock b;
  if (box.size() == 2) {
    b.x0 = box[0];
    b.x1 = box[1];
    b.y0 = -INFINITY;
    b.y1 = INFINITY;
  } else if (box.size() == 4) {
    b.x0 = box[0];
    b.x1 = box[1];
    b.y0 = box[2];
    b.y1 = box[3];
  } else {
    throw ConfigError("initial.block: box needs 2 or 4 coordinates");
  }
  if (vals.size() != n)
    throw ConfigError("initial.block: expected " + std::to_string(n) + " species values, got " +
                      std::to_string(vals.size()));
  b.values = vals;
  return b;
}

}  // namespace

InitialSpec build_initial_spec(const ConfigFile& cfg, std::size_t num_species) {
  InitialSpec spec;
  const std::string preset = cfg.get_or("initial.preset", "testcase1");
  if (preset == "testcase1" || preset == "testcase2") {
    spec.kind = preset == "testcase1" ? InitialSpec::Kind::TestCase1 : InitialSpec::Kind::TestCase2;
    if (num_species != 2) throw ConfigError("initial.preset: '" + preset + "' needs a two-species model");
    return spec;
  }
  if (preset != "blocks") throw ConfigError("initial.preset: unknown preset '" + preset + "'");
  spec.kind = InitialSpec::Kind::Blocks;
  spec.background = cfg.has("initial.background") ? cfg.get_list("initial.background")
                                                  : std::vector<double>(num_species, 0.0);
  if (spec.background.size() != num_species)
    throw ConfigError("initial.background: expected " + std::to_string(num_species) + " values");
  for (const auto& e : cfg.all("initial.block")) spec.blocks.push_back(parse_block(e.value, num_species));
  return spec;
}

SolverConfig build_solver_config(const ConfigFile& cfg) {
  SolverConfig c;
  const std::string mode = cfg.get_or("time.mode", "adaptive");
  if (mode == "adaptive") {
    c.adaptive = true;
  } else if (mode == "fixed") {
    c.adaptive = false;
    c.fixed_dt = cfg.get_double("time.dt");
  } else {
    throw ConfigError("time.mode: expected 'adaptive' or 'fixed', got '" + mode + "'");
  }
  c.dt_initial = cfg.get_double_or("time.dt_initial", c.dt_initial);
  c.dt_min = cfg.get_double_or("time.dt_min", c.dt_min);
  c.dt_max = cfg.get_double_or("time.dt_max", c.dt_max);
  c.dt_grow = cfg.get_double_or("time.dt_grow", c.dt_grow);
  c.dt_shrink = cfg.get_double_or("time.dt_shrink", c.dt_shrink);
  c.newton_tol = cfg.get_double_or("time.newton_tol", c.newton_tol);
  c.newton_max_iter = static_cast<int>(cfg.get_count_or("time.newton_max_iter", 50));
  c.damping_min = cfg.get_double_or("time.damping_min", c.damping_min);
  const std::string pred = cfg.get_or("time.predictor", "linearized");
  if (pred != "linearized" && pred != "previous")
    throw ConfigError("time.predictor: expected 'linearized' or 'previous', got '" + pred + "'");
  c.linearized_predictor = pred == "linearized";
  c.validate();
  return c;
}

RunConfig build_run_config(const ConfigFile& cfg, const std::filesystem::path& base_dir) {
  cfg.require_known(known_keys());
  RunConfig rc;
  try {
    rc.model = build_model(cfg);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  rc.model_name = rc.model.name;
  rc.mesh = build_mesh_spec(cfg, base_dir);
  rc.initial = build_initial_spec(cfg, rc.model.num_species);
  if (rc.initial.kind == InitialSpec::Kind::TestCase2 && rc.mesh.kind == MeshSpec::Kind::Interval)
    throw ConfigError("initial.preset: testcase2 needs a two-dimensional mesh");
  rc.solver = build_solver_config(cfg);
  rc.t_end = cfg.get_double_or("time.t_end", 0.0);
  if (!(rc.t_end >= 0.0)) throw ConfigError("time.t_end must be nonnegative");
  rc.output_dir = cfg.get_or("output.dir", "out");
  if (rc.output_dir.is_relative() && !base_dir.empty() && cfg.has("output.dir")) rc.output_dir = base_dir / rc.output_dir;
  rc.snapshot_every = cfg.get_count_or("output.snapshot_every", 0);
  rc.seed = cfg.get_count_or("run.seed", 0);

  rc.reference_cells = cfg.get_count_or("convergence.reference", rc.reference_cells);
  if (cfg.has("convergence.ladder")) {
    rc.ladder.clear();
    for (double v : cfg.get_list("convergence.ladder")) {
      if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("convergence.ladder: entries must be positive integers");
      rc.ladder.push_back(static_cast<std::size_t>(v));
    }
  }
  if (cfg.has("decay.fit_from") || cfg.has("decay.fit_to"))
    rc.decay_window = std::make_pair(cfg.get_double("decay.fit_from"), cfg.get_double("decay.fit_to"));
  return rc;
}

Mesh make_mesh(const MeshSpec& spec) {
  switch (spec.kind) {
    case MeshSpec::Kind::Interval:
      return build_interval_mesh(0.0, spec.lx, spec.nx);
    case MeshSpec::Kind::Rectangle:
      return build_rectangle_mesh(spec.lx, spec.ly, spec.nx, spec.ny);
    case MeshSpec::Kind::File:
      try {
        return load_mesh(spec.path);
      } catch (const ParseError& e) {
        throw ConfigError("mesh.path: " + spec.path.string() + ": " + e.what());
      } catch (const ValidationError& e) {
        throw ConfigError("mesh.path: " + spec.path.string() + ": " + e.what());
      }
  }
  throw ConfigError("mesh: unsupported kind");
}

InitialField make_initial_field(const InitialSpec& spec, std::size_t num_species) {
  switch (spec.kind) {
    case InitialSpec::Kind::TestCase1:
      return [](const Point& p) { return std::vector<double>{p[0] < 0.5 ? 0.8 : 0.0, 0.2}; };
    case InitialSpec::Kind::TestCase2:
      return [](const Point& p) {
        const bool lower_left = p[0] < 0.5 && p[1] < 0.5;
        const bool upper_right = p[0] > 0.5 && p[1] > 0.5;
        return std::vector<double>{lower_left ? 9.0 / 11.0 : 0.0, upper_right ? 8.0 / 11.0 : 0.0};
      };
    case InitialSpec::Kind::Blocks:
      return [spec, num_species](const Point& p) {
        std::vector<double> v = spec.background;
        v.resize(num_species, 0.0);
        for (const auto& b : spec.blocks)
          if (p[0] >= b.x0 && p[0] < b.x1 && p[1] >= b.y0 && p[1] < b.y1) v = b.values;
        return v;
      };
  }
  throw ConfigError("initial: unsupported preset");
}

}  // namespace crossdiff::cli
