#include "crossdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "crossdiff/errors.hpp"

namespace crossdiff {

namespace {

// y * phi(x / y) with phi(r) = r log r - r + 1, accurate when x is close to y.
double bregman_xlogx(double x, double y) {
  if (x == 0.0) return y;
  const double d = (x - y) / y;
  double phi = 0.0;
  if (std::abs(d) < 1e-2) {
    // phi(1 + d) = sum_{k>=2} (-1)^k d^k / (k (k - 1))
    double term = d * d;
    for (int k = 2; k < 20; ++k) {
      phi += ((k % 2 == 0) ? 1.0 : -1.0) * term / (k * (k - 1.0));
      term *= d;
    }
  } else {
    phi = (1.0 + d) * std::log1p(d) - d;
  }
  return y * phi;
}

}  // namespace

double discrete_entropy(const StateField& state, const Mesh& mesh, const EntropySpec& entropy) {
  const std::size_t n = state.num_species();
  double total = 0.0;
  for (std::size_t k = 0; k < state.num_cells(); ++k) {
    double hk = entropy.h(0, state.solvent(k));
    for (std::size_t i = 0; i < n; ++i) hk += entropy.h(i + 1, state(k, i));
    total += mesh.cells()[k].measure * hk;
  }
  return total;
}

double relative_entropy(const StateField& state, const Mesh& mesh, std::span<const double> steady) {
  const std::size_t n = state.num_species();
  if (steady.size() != n) throw InvalidArgument("relative_entropy: steady state has the wrong size");
  double s0 = 1.0;
  for (double v : steady) {
    if (!(v > 0.0) || !(v < 1.0)) throw DomainError("relative_entropy: steady state must lie inside the simplex");
    s0 -= v;
  }
  if (!(s0 > 0.0)) throw DomainError("relative_entropy: steady state must lie inside the simplex");
  double total = 0.0;
  for (std::size_t k = 0; k < state.num_cells(); ++k) {
    double acc = bregman_xlogx(state.solvent(k), s0);
    for (std::size_t i = 0; i < n; ++i) acc += bregman_xlogx(std::max(0.0, state(k, i)), steady[i]);
    total += mesh.cells()[k].measure * acc;
  }
  return total;
}

double entropy_dissipation(const StateField& state, const EdgeState& edges, const Mesh& mesh, double exponent_s) {
  if (!(exponent_s > 0.0) || exponent_s > 1.0) throw InvalidArgument("entropy_dissipation: s must lie in (0,1]");
  const std::size_t n = state.num_species();
  const auto& ie = mesh.interior_edges();
  const double p = 2.0 * (exponent_s - 1.0);
  double total = 0.0;
  for (std::size_t e = 0; e < ie.size(); ++e) {
    const auto mean = edges.mean(e);
    for (std::size_t i = 0; i < n; ++i) {
      const double jump = state(ie[e].right, i) - state(ie[e].left, i);
      if (jump == 0.0) continue;
      const double us = mean[i + 1];
      double w = 1.0;
      if (p != 0.0) {
        if (!(us > 0.0))
          throw SingularEdge("entropy_dissipation: vanishing edge mean with nonzero jump", e, i + 1);
        w = std::pow(us, p);
      }
      total += ie[e].transmissibility * w * jump * jump;
    }
  }
  return total;
}

double h1_seminorm(std::span<const double> values, const Mesh& mesh) {
  if (values.size() != mesh.num_cells()) throw InvalidArgument("h1_seminorm: one value per cell expected");
  double s = 0.0;
  for (const auto& e : mesh.interior_edges()) {
    const double d = values[e.right] - values[e.left];
    s += e.transmissibility * d * d;
  }
  return std::sqrt(s);
}

StateField coarsen(const StateField& fine, const Mesh& fine_mesh, const Mesh& coarse_mesh) {
  if (fine.num_cells() != fine_mesh.num_cells()) throw InvalidArgument("coarsen: state does not match fine mesh");
  const std::size_t n = fine.num_species();
  const auto& cc = coarse_mesh.cells();
  const auto& fc = fine_mesh.cells();
  for (const auto& c : cc)
    if (!c.extent) throw InvalidArgument("coarsen: coarse mesh cells need known extents");

  auto contains = [&](const Cell& c, const Point& p) {
    const auto& ext = *c.extent;
    const bool in_x = std::abs(p[0] - c.center[0]) < 0.5 * ext[0];
    const bool in_y = coarse_mesh.dimension() == 1 || std::abs(p[1] - c.center[1]) < 0.5 * ext[1];
    return in_x && in_y;
  };

  StateField out(n, cc.size(), fine.time());
  std::vector<double> covered(cc.size(), 0.0);
  std::size_t hint = 0;
  for (std::size_t f = 0; f < fc.size(); ++f) {
    std::size_t c = cc.size();
    for (std::size_t probe = 0; probe < cc.size(); ++probe) {
      const std::size_t idx = (hint + probe) % cc.size();
      if (contains(cc[idx], fc[f].center)) {
        c = idx;
        break;
      }
    }
    if (c == cc.size()) throw InvalidArgument("coarsen: fine cell " + std::to_string(f) + " lies in no coarse cell");
    hint = c;
    covered[c] += fc[f].measure;
    for (std::size_t i = 0; i < n; ++i) out(c, i) += fc[f].measure * fine(f, i);
  }
  for (std::size_t c = 0; c < cc.size(); ++c) {
    if (std::abs(covered[c] - cc[c].measure) > 1e-10 * cc[c].measure)
      throw InvalidArgument("coarsen: meshes are not nested (coarse cell " + std::to_string(c) + ")");
    for (std::size_t i = 0; i < n; ++i) out(c, i) /= covered[c];
  }
  return out;
}

L1Error l1_error(const StateField& a, const StateField& b, const Mesh& mesh) {
  if (a.num_cells() != b.num_cells() || a.num_species() != b.num_species() || a.num_cells() != mesh.num_cells())
    throw InvalidArgument("l1_error: states and mesh do not match");
  L1Error err;
  err.per_species.assign(a.num_species(), 0.0);
  for (std::size_t k = 0; k < a.num_cells(); ++k)
    for (std::size_t i = 0; i < a.num_species(); ++i)
      err.per_species[i] += mesh.cells()[k].measure * std::abs(a(k, i) - b(k, i));
  for (double v : err.per_species) err.total += v;
  return err;
}

std::vector<double> convergence_orders(const std::vector<std::pair<double, double>>& errors) {
  if (errors.size() < 2) throw InvalidArgument("convergence_orders: need at least two entries");
  for (std::size_t j = 0; j < errors.size(); ++j) {
    if (!(errors[j].second > 0.0)) throw InvalidArgument("convergence_orders: errors must be positive");
    if (!(errors[j].first > 0.0)) throw InvalidArgument("convergence_orders: mesh sizes must be positive");
    if (j > 0 && !(errors[j].first < errors[j - 1].first))
      throw InvalidArgument("convergence_orders: mesh sizes must strictly decrease");
  }
  std::vector<double> orders;
  for (std::size_t j = 0; j + 1 < errors.size(); ++j)
    orders.push_back(std::log(errors[j].second / errors[j + 1].second) /
                     std::log(errors[j].first / errors[j + 1].first));
  return orders;
}

DecayFit decay_fit(const std::vector<std::pair<double, double>>& series,
                   std::optional<std::pair<double, double>> window) {
  if (series.empty()) throw InvalidArgument("decay_fit: empty series");
  double t_from = 0.0;
  double t_to = 0.0;
  if (window) {
    std::tie(t_from, t_to) = *window;
  } else {
    double lo = series.front().first;
    double hi = series.front().first;
    for (const auto& [t, h] : series) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    t_from = lo + 0.5 * (hi - lo);
    t_to = hi;
  }
  double st = 0.0, sy = 0.0;
  std::size_t m = 0;
  for (const auto& [t, h] : series) {
    if (t < t_from || t > t_to) continue;
    if (!(h > 0.0)) throw InvalidArgument("decay_fit: nonpositive entropy in the fit window");
    st += t;
    sy += std::log(h);
    ++m;
  }
  if (m < 3) throw InvalidArgument("decay_fit: need at least 3 points in the fit window");
  const double tm = st / static_cast<double>(m);
  const double ym = sy / static_cast<double>(m);
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (const auto& [t, h] : series) {
    if (t < t_from || t > t_to) continue;
    const double dt = t - tm;
    const double dy = std::log(h) - ym;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  if (!(stt > 0.0)) throw InvalidArgument("decay_fit: window contains a single time value");
  DecayFit fit;
  const double slope = sty / stt;
  fit.rate = -slope;
  fit.intercept = ym - slope * tm;
  fit.points = m;
  // A constant series is fitted exactly.
  fit.r_squared = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
  return fit;
}

std::vector<double> thin_film_steady_state(const ReactionSteadyStateParams& p) {
  const double m1 = p.mass1 / p.domain_measure;
  const double m2 = p.mass2 / p.domain_measure;
  const double c = 1.0 - m1 - m2;
  const double k = p.rate;
  // u1 = m1 - x, u2 = m2 + 2x, u0 = c - x and (m2 + 2x)^2 = k (m1 - x)(c - x).
  const double qa = 4.0 - k;
  const double qb = 4.0 * m2 + k * (m1 + c);
  const double qc = m2 * m2 - k * m1 * c;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) throw DomainError("thin_film_steady_state: no real equilibrium");
  const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
  const double roots[2] = {q / qa, qc / q};
  const double lo = -0.5 * m2;
  const double hi = std::min(m1, c);
  for (double x : roots) {
    if (x > lo && x < hi) return {m1 - x, m2 + 2.0 * x};
  }
  throw DomainError("thin_film_steady_state: no admissible equilibrium");
}

double thin_film_steady_alpha_closed_form() { return (-5.0 * std::sqrt(206530.0) + 4504.0) / 10956.0; }

}  // namespace crossdiff
