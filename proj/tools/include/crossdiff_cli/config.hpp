#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <crossdiff/mesh.hpp>
#include <crossdiff/models.hpp>
#include <crossdiff/solver.hpp>

namespace crossdiff::cli {

/// Flat `key = value` text split into `[section]`s. Keys are addressed as
/// "section.key"; a key may repeat (e.g. initial.block) and keeps every value
/// in file order.
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static ConfigFile parse(std::istream& is);
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  bool has_section(const std::string& section) const;
  const std::string& get(const std::string& key) const;  // throws ConfigError naming the key
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::size_t get_count(const std::string& key) const;
  std::size_t get_count_or(const std::string& key, std::size_t fallback) const;
  std::vector<double> get_list(const std::string& key) const;
  const std::vector<Entry>& all(const std::string& key) const;

  /// Inserts `key = value` unless the key is already present.
  void set_default(const std::string& key, const std::string& value);

  /// Throws ConfigError for any key not in `known`; catches typos.
  void require_known(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::vector<Entry>> entries_;
};

double parse_double(const std::string& text, const std::string& key);
std::vector<double> parse_list(const std::string& text, const std::string& key);

struct MeshSpec {
  enum class Kind { Interval, Rectangle, File };
  Kind kind = Kind::Interval;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double lx = 1.0;
  double ly = 1.0;
  std::filesystem::path path;
};

/// Axis-aligned box with constant species values; later blocks win.
struct InitialBlock {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  std::vector<double> values;
};

struct InitialSpec {
  enum class Kind { TestCase1, TestCase2, Blocks };
  Kind kind = Kind::TestCase1;
  std::vector<double> background;
  std::vector<InitialBlock> blocks;
};

struct RunConfig {
  std::string model_name;
  Model model;
  MeshSpec mesh;
  InitialSpec initial;
  SolverConfig solver;
  double t_end = 0.0;
  std::filesystem::path output_dir = "out";
  std::size_t snapshot_every = 0;  // 0 disables snapshots
  std::uint64_t seed = 0;

  // [convergence]
  std::size_t reference_cells = 1280;
  std::vector<std::size_t> ladder{40, 80, 160, 320};
  // [decay]
  std::optional<std::pair<double, double>> decay_window;
};

Model build_model(const ConfigFile& cfg);
MeshSpec build_mesh_spec(const ConfigFile& cfg, const std::filesystem::path& base_dir);
InitialSpec build_initial_spec(const ConfigFile& cfg, std::size_t num_species);
SolverConfig build_solver_config(const ConfigFile& cfg);

/// Parses every section; throws ConfigError naming the offending key.
RunConfig build_run_config(const ConfigFile& cfg, const std::filesystem::path& base_dir = {});

Mesh make_mesh(const MeshSpec& spec);
InitialField make_initial_field(const InitialSpec& spec, std::size_t num_species);

/// Every accepted key, for --help and require_known.
const std::vector<std::string>& known_keys();
std::string config_help();

}  // namespace crossdiff::cli
