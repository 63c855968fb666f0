#include "crossdiff/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "crossdiff/errors.hpp"

namespace crossdiff {
namespace {

constexpr double kDiamondTol = 1e-10;
constexpr double kNormalTol = 1e-10;
constexpr double kDomainTol = 1e-12;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double distance(const Point& a, const Point& b) { return std::hypot(b[0] - a[0], b[1] - a[1]); }

}  // namespace

Mesh::Mesh(int dimension, std::vector<Cell> cells, std::vector<InteriorEdge> interior,
           std::vector<BoundaryEdge> boundary, std::optional<double> domain_measure,
           std::optional<std::vector<double>> interior_split)
    : dimension_(dimension),
      cells_(std::move(cells)),
      interior_(std::move(interior)),
      boundary_(std::move(boundary)) {
  if (dimension_ != 1 && dimension_ != 2)
    throw ValidationError("mesh dimension must be 1 or 2, got " + std::to_string(dimension_));
  if (cells_.empty()) throw ValidationError("mesh has no cells");
  if (interior_split && interior_split->size() != interior_.size())
    throw ValidationError("interior split list does not match the number of interior edges");

  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const Cell& c = cells_[k];
    if (!(c.measure > 0.0) || !std::isfinite(c.measure))
      throw ValidationError("cell " + std::to_string(k) + ": measure m(K) must be strictly positive");
    if (!std::isfinite(c.center[0]) || !std::isfinite(c.center[1]))
      throw ValidationError("cell " + std::to_string(k) + ": non-finite center");
    total_measure_ += c.measure;
    if (c.extent) {
      const double d = dimension_ == 1 ? (*c.extent)[0] : std::hypot((*c.extent)[0], (*c.extent)[1]);
      size_ = std::max(size_, d);
    } else {
      size_ = std::max(size_, dimension_ == 1 ? c.measure : std::sqrt(2.0 * c.measure));
    }
  }
  if (domain_measure) {
    if (std::abs(total_measure_ - *domain_measure) > kDomainTol * std::abs(*domain_measure))
      throw ValidationError("sum of cell measures " + fmt17(total_measure_) +
                            " differs from the domain measure " + fmt17(*domain_measure));
  }

  neighbors_.assign(cells_.size(), {});
  for (std::size_t e = 0; e < interior_.size(); ++e) {
    InteriorEdge& s = interior_[e];
    const std::string tag = "interior edge " + std::to_string(e) + ": ";
    if (s.left >= cells_.size() || s.right >= cells_.size())
      throw ValidationError(tag + "cell index out of range");
    if (s.left == s.right) throw ValidationError(tag + "edge joins a cell to itself");
    if (!(s.measure > 0.0) || !std::isfinite(s.measure))
      throw ValidationError(tag + "measure m(sigma) must be strictly positive");
    const double nrm = std::hypot(s.normal[0], s.normal[1]);
    if (std::abs(nrm - 1.0) > kNormalTol) throw ValidationError(tag + "normal is not a unit vector");

    const Point& xk = cells_[s.left].center;
    const Point& xl = cells_[s.right].center;
    s.distance = distance(xk, xl);
    if (!(s.distance > 0.0)) throw ValidationError(tag + "coincident cell centers");
    s.transmissibility = s.measure / s.distance;
    const double normal_offset = (xl[0] - xk[0]) * s.normal[0] + (xl[1] - xk[1]) * s.normal[1];
    if (!(normal_offset > 0.0)) throw ValidationError(tag + "normal must point from K towards L");
    s.diamond_measure = 0.5 * s.measure * normal_offset;
    const double lhs = s.measure * s.distance;
    if (std::abs(lhs - 2.0 * s.diamond_measure) > kDiamondTol * std::max(1.0, lhs))
      throw ValidationError(tag + "dual-diamond identity m(sigma)*d(x_K,x_L) = 2*m(T_K,sigma) violated "
                                  "(center segment not orthogonal to the edge)");
    if (interior_split) {
      const double dk = (*interior_split)[e];
      if (!(dk > 0.0) || !(dk < s.distance))
        throw ValidationError(tag + "d(x_K,sigma) must lie strictly between 0 and d_sigma");
      s.dist_left = dk;
      s.dist_right = s.distance - dk;
    } else {
      s.dist_left = 0.5 * s.distance;
      s.dist_right = 0.5 * s.distance;
    }
    neighbors_[s.left].push_back(s.right);
    neighbors_[s.right].push_back(s.left);
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
      throw ValidationError("two interior edges join the same pair of cells");
  }

  for (std::size_t e = 0; e < boundary_.size(); ++e) {
    BoundaryEdge& b = boundary_[e];
    const std::string tag = "boundary edge " + std::to_string(e) + ": ";
    if (b.cell >= cells_.size()) throw ValidationError(tag + "cell index out of range");
    if (!(b.measure > 0.0) || !std::isfinite(b.measure))
      throw ValidationError(tag + "measure m(sigma) must be strictly positive");
    if (!(b.distance > 0.0) || !std::isfinite(b.distance))
      throw ValidationError(tag + "distance d(x_K,sigma) must be strictly positive");
    b.transmissibility = b.measure / b.distance;
  }
}

void Mesh::write_fvmesh(std::ostream& os) const {
  os << "FVMESH 1 " << dimension_ << '\n';
  os << cells_.size() << ' ' << interior_.size() << ' ' << boundary_.size() << '\n';
  for (const Cell& c : cells_)
    os << fmt17(c.center[0]) << ' ' << fmt17(c.center[1]) << ' ' << fmt17(c.measure) << '\n';
  for (const InteriorEdge& s : interior_) {
    os << s.left << ' ' << s.right << ' ' << fmt17(s.measure) << ' ' << fmt17(s.normal[0]) << ' '
       << fmt17(s.normal[1]);
    // Optional sixth column: only emitted when the edge does not bisect the center segment.
    if (s.dist_left != 0.5 * s.distance) os << ' ' << fmt17(s.dist_left);
    os << '\n';
  }
  for (const BoundaryEdge& b : boundary_)
    os << b.cell << ' ' << fmt17(b.measure) << ' ' << fmt17(b.distance) << '\n';
}

std::string Mesh::to_fvmesh() const {
  std::ostringstream os;
  write_fvmesh(os);
  return os.str();
}

Mesh build_interval_mesh(double a, double b, std::size_t n_cells) {
  if (!(a < b)) throw InvalidArgument("build_interval_mesh: requires a < b");
  if (n_cells < 2) throw InvalidArgument("build_interval_mesh: requires at least 2 cells");
  const double h = (b - a) / static_cast<double>(n_cells);
  std::vector<Cell> cells(n_cells);
  for (std::size_t k = 0; k < n_cells; ++k) {
    cells[k].center = {a + (static_cast<double>(k) + 0.5) * h, 0.0};
    cells[k].measure = h;
    cells[k].extent = Point{h, 0.0};
  }
  std::vector<InteriorEdge> interior(n_cells - 1);
  for (std::size_t k = 0; k + 1 < n_cells; ++k) {
    interior[k].left = k;
    interior[k].right = k + 1;
    interior[k].measure = 1.0;
    interior[k].normal = {1.0, 0.0};
  }
  std::vector<BoundaryEdge> boundary{{0, 1.0, 0.5 * h, 0.0}, {n_cells - 1, 1.0, 0.5 * h, 0.0}};
  return Mesh(1, std::move(cells), std::move(interior), std::move(boundary), b - a);
}

Mesh build_rectangle_mesh(double lx, double ly, std::size_t nx, std::size_t ny) {
  if (!(lx > 0.0) || !(ly > 0.0)) throw InvalidArgument("build_rectangle_mesh: dimensions must be positive");
  if (nx < 2 || ny < 2) throw InvalidArgument("build_rectangle_mesh: requires nx, ny >= 2");
  const double hx = lx / static_cast<double>(nx);
  const double hy = ly / static_cast<double>(ny);
  auto id = [nx](std::size_t i, std::size_t j) { return j * nx + i; };

  std::vector<Cell> cells(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      Cell& c = cells[id(i, j)];
      c.center = {(static_cast<double>(i) + 0.5) * hx, (static_cast<double>(j) + 0.5) * hy};
      c.measure = hx * hy;
      c.extent = Point{hx, hy};
    }

  std::vector<InteriorEdge> interior;
  interior.reserve((nx - 1) * ny + nx * (ny - 1));
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      InteriorEdge s;
      s.left = id(i, j);
      s.right = id(i + 1, j);
      s.measure = hy;
      s.normal = {1.0, 0.0};
      interior.push_back(s);
    }
  for (std::size_t j = 0; j + 1 < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      InteriorEdge s;
      s.left = id(i, j);
      s.right = id(i, j + 1);
      s.measure = hx;
      s.normal = {0.0, 1.0};
      interior.push_back(s);
    }

  std::vector<BoundaryEdge> boundary;
  for (std::size_t i = 0; i < nx; ++i) boundary.push_back({id(i, 0), hx, 0.5 * hy, 0.0});
  for (std::size_t i = 0; i < nx; ++i) boundary.push_back({id(i, ny - 1), hx, 0.5 * hy, 0.0});
  for (std::size_t j = 0; j < ny; ++j) boundary.push_back({id(0, j), hy, 0.5 * hx, 0.0});
  for (std::size_t j = 0; j < ny; ++j) boundary.push_back({id(nx - 1, j), hy, 0.5 * hx, 0.0});

  return Mesh(2, std::move(cells), std::move(interior), std::move(boundary), lx * ly);
}

namespace {

struct LineReader {
  std::istream& is;
  int line_no = 0;

  std::istringstream next(const char* what) {
    std::string line;
    while (std::getline(is, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return std::istringstream(line);
    }
    throw ParseError(std::string("unexpected end of file, expected ") + what, line_no + 1);
  }

  void expect_end(std::istringstream& ss) {
    std::string rest;
    if (ss >> rest) throw ParseError("unexpected trailing token '" + rest + "'", line_no);
  }
};

template <typename T>
T read_field(std::istringstream& ss, const LineReader& r, const char* name) {
  T v{};
  if (!(ss >> v)) throw ParseError(std::string("cannot read ") + name, r.line_no);
  return v;
}

}  // namespace

Mesh parse_fvmesh(std::istream& is) {
  LineReader r{is};
  auto header = r.next("FVMESH header");
  std::string magic;
  int version = 0;
  int dim = 0;
  if (!(header >> magic >> version >> dim) || magic != "FVMESH")
    throw ParseError("expected 'FVMESH 1 <dim>'", r.line_no);
  if (version != 1) throw ParseError("unsupported FVMESH version " + std::to_string(version), r.line_no);
  r.expect_end(header);

  auto counts = r.next("entity counts");
  const auto nc = read_field<std::size_t>(counts, r, "n_cells");
  const auto ni = read_field<std::size_t>(counts, r, "n_interior_edges");
  const auto nb = read_field<std::size_t>(counts, r, "n_boundary_edges");
  r.expect_end(counts);

  std::vector<Cell> cells(nc);
  for (auto& c : cells) {
    auto ss = r.next("cell line");
    c.center[0] = read_field<double>(ss, r, "x");
    c.center[1] = read_field<double>(ss, r, "y");
    c.measure = read_field<double>(ss, r, "measure");
    r.expect_end(ss);
  }

  std::vector<InteriorEdge> interior(ni);
  std::vector<double> split(ni, 0.0);
  bool have_split = false;
  for (std::size_t e = 0; e < ni; ++e) {
    auto ss = r.next("interior edge line");
    InteriorEdge& s = interior[e];
    s.left = read_field<std::size_t>(ss, r, "K");
    s.right = read_field<std::size_t>(ss, r, "L");
    s.measure = read_field<double>(ss, r, "m_sigma");
    s.normal[0] = read_field<double>(ss, r, "nu_x");
    s.normal[1] = read_field<double>(ss, r, "nu_y");
    double dk = 0.0;
    if (ss >> dk) {
      split[e] = dk;
      have_split = true;
    } else {
      split[e] = -1.0;  // bisecting edge, resolved below
    }
    r.expect_end(ss);
  }

  std::vector<BoundaryEdge> boundary(nb);
  for (auto& b : boundary) {
    auto ss = r.next("boundary edge line");
    b.cell = read_field<std::size_t>(ss, r, "K");
    b.measure = read_field<double>(ss, r, "m_sigma");
    b.distance = read_field<double>(ss, r, "d_sigma");
    r.expect_end(ss);
  }

  std::optional<std::vector<double>> split_opt;
  if (have_split) {
    for (std::size_t e = 0; e < ni; ++e) {
      if (split[e] >= 0.0) continue;
      const InteriorEdge& s = interior[e];
      if (s.left >= nc || s.right >= nc) throw ValidationError("interior edge " + std::to_string(e) + ": cell index out of range");
      split[e] = 0.5 * distance(cells[s.left].center, cells[s.right].center);
    }
    split_opt = std::move(split);
  }
  return Mesh(dim, std::move(cells), std::move(interior), std::move(boundary), std::nullopt,
              std::move(split_opt));
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open mesh file " + path.string());
  return parse_fvmesh(in);
}

MeshRegularityReport regularity_zeta(const Mesh& mesh, double threshold) {
  MeshRegularityReport rep;
  std::size_t idx = 0;
  auto visit = [&](double ratio) {
    rep.zeta = std::min(rep.zeta, ratio);
    if (!rep.offending_edge && ratio < threshold) rep.offending_edge = idx;
    ++idx;
  };
  for (const auto& s : mesh.interior_edges()) {
    const double r = std::min(s.dist_left, s.dist_right) / s.distance;
    visit(r);
  }
  // For boundary edges d_sigma is d(x_K, sigma) itself, so each contributes ratio 1.
  for (const auto& b : mesh.boundary_edges()) visit(b.distance / b.distance);
  return rep;
}

StateField cell_averages(const InitialField& field, const Mesh& mesh) {
  constexpr int kSub = 4;
  const auto& cells = mesh.cells();
  const std::size_t n = field(cells.front().center).size();
  if (n == 0) throw InvalidArgument("cell_averages: field returns no species");
  StateField state(n, cells.size());
  std::vector<double> acc(n);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Cell& c = cells[k];
    std::fill(acc.begin(), acc.end(), 0.0);
    auto add = [&](const Point& p, double w) {
      const auto v = field(p);
      if (v.size() != n) throw InvalidArgument("cell_averages: field changes its species count");
      for (std::size_t i = 0; i < n; ++i) acc[i] += w * v[i];
    };
    if (!c.extent) {
      add(c.center, 1.0);
    } else if (mesh.dimension() == 1) {
      const double hx = (*c.extent)[0];
      for (int a = 0; a < kSub; ++a)
        add({c.center[0] + hx * ((a + 0.5) / kSub - 0.5), c.center[1]}, 1.0 / kSub);
    } else {
      const double hx = (*c.extent)[0];
      const double hy = (*c.extent)[1];
      for (int b = 0; b < kSub; ++b)
        for (int a = 0; a < kSub; ++a)
          add({c.center[0] + hx * ((a + 0.5) / kSub - 0.5), c.center[1] + hy * ((b + 0.5) / kSub - 0.5)},
              1.0 / (kSub * kSub));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(acc[i] >= 0.0) || acc[i] > 1.0)
        throw RangeError("cell_averages: species " + std::to_string(i + 1) + " in cell " + std::to_string(k) +
                         " leaves [0,1]");
      state(k, i) = acc[i];
      sum += acc[i];
    }
    if (sum > 1.0 + 1e-12)
      throw RangeError("cell_averages: species sum exceeds 1 in cell " + std::to_string(k));
  }
  return state;
}

}  // namespace crossdiff
