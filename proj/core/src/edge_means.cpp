#include "crossdiff/edge_means.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "crossdiff/errors.hpp"

namespace crossdiff {
namespace {

constexpr double kNearEqual = 1e-13;
constexpr double kBisectionAbsTol = 1e-14;
constexpr int kBisectionMaxIter = 60;
constexpr int kGaussPoints = 16;

struct GaussLegendre {
  std::array<double, kGaussPoints> nodes{};
  std::array<double, kGaussPoints> weights{};

  GaussLegendre() {
    const int n = kGaussPoints;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre& gauss() {
  static const GaussLegendre g;
  return g;
}

// h_i'(hi) - h_i'(lo). For nearby endpoints the direct difference cancels, so
// the integral of h_i'' is used instead.
double derivative_increment(const EntropySpec& e, std::size_t index, double lo, double hi) {
  if (hi - lo > 0.5 * lo) return e.dh(index, hi) - e.dh(index, lo);
  const auto& g = gauss();
  const double c = 0.5 * (hi + lo);
  const double r = 0.5 * (hi - lo);
  double s = 0.0;
  for (int k = 0; k < kGaussPoints; ++k) s += g.weights[k] * e.d2h(index, c + r * g.nodes[k]);
  return r * s;
}

}  // namespace

MeanBranch mean_branch(double a, double b) {
  if (a > 0.0 && b > 0.0) return a == b ? MeanBranch::Equal : MeanBranch::ChainRule;
  return MeanBranch::Zero;
}

double log_mean(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("log_mean: arguments must be nonnegative");
  if (a == b) return a;
  if (a == 0.0 || b == 0.0) return 0.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double diff = hi - lo;
  const double arith = 0.5 * (lo + hi);
  if (diff < kNearEqual * hi) return arith;
  const double m = diff / std::log1p(diff / lo);
  return std::clamp(m, lo, std::min(hi, arith));
}

double generic_edge_mean(const EntropySpec& entropy, std::size_t index, double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("edge mean: arguments must be nonnegative");
  switch (mean_branch(a, b)) {
    case MeanBranch::Equal:
      return a;
    case MeanBranch::Zero:
      return 0.0;
    case MeanBranch::ChainRule:
      break;
  }
  double lo = std::min(a, b);
  double hi = std::max(a, b);
  const double width = hi - lo;
  const double target = derivative_increment(entropy, index, lo, hi);
  // g(m) = h''(m) (hi - lo) - (h'(hi) - h'(lo)) is decreasing in m.
  auto g = [&](double m) { return entropy.d2h(index, m) * width - target; };
  const double g_lo = g(lo);
  const double g_hi = g(hi);
  if (g_lo < 0.0 || g_hi > 0.0)
    throw NoRootError("edge mean: chain-rule equation has no root in [min, max]; h'' is not decreasing");
  const double tol = std::min(kBisectionAbsTol, 1e-15 * hi);
  for (int it = 0; it < kBisectionMaxIter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double edge_mean(const EntropySpec& entropy, std::size_t index, double a, double b) {
  return entropy.is_boltzmann() ? log_mean(a, b) : generic_edge_mean(entropy, index, a, b);
}

void edge_mean_vector(const EntropySpec& entropy, std::span<const double> uK, std::span<const double> uL,
                      std::span<double> out) {
  const std::size_t n = uK.size();
  out[0] = edge_mean(entropy, 0, solvent_of(uK), solvent_of(uL));
  for (std::size_t i = 0; i < n; ++i) out[i + 1] = edge_mean(entropy, i + 1, uK[i], uL[i]);
}

EdgeState compute_edge_state(const Mesh& mesh, const StateField& state, const EntropySpec& entropy) {
  const std::size_t n = state.num_species();
  if (entropy.num_species() != n) throw InvalidArgument("compute_edge_state: entropy/state species mismatch");
  const auto& edges = mesh.interior_edges();
  EdgeState es(n, edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto uK = state.cell(edges[e].left);
    const auto uL = state.cell(edges[e].right);
    edge_mean_vector(entropy, uK, uL, es.mean(e));
    es.set_branch(e, 0, mean_branch(solvent_of(uK), solvent_of(uL)));
    for (std::size_t i = 0; i < n; ++i) es.set_branch(e, i + 1, mean_branch(uK[i], uL[i]));
  }
  return es;
}

Eigen::MatrixXd h_matrix(const EntropySpec& entropy, std::span<const double> u_sigma) {
  const std::size_t n = u_sigma.size() - 1;
  for (double v : u_sigma)
    if (!(v > 0.0)) throw DomainError("h_matrix: singular at a vanishing edge mean");
  const double h0 = entropy.d2h(0, u_sigma[0]);
  Eigen::MatrixXd H = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), h0);
  for (std::size_t i = 0; i < n; ++i) H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += entropy.d2h(i + 1, u_sigma[i + 1]);
  return H;
}

double chain_rule_residual(const EntropySpec& entropy, std::span<const double> uK, std::span<const double> uL) {
  const std::size_t n = uK.size();
  if (uL.size() != n) throw InvalidArgument("chain_rule_residual: size mismatch");
  auto check_interior = [](std::span<const double> u) {
    double s = 0.0;
    for (double v : u) {
      if (!(v > 0.0) || !(v < 1.0)) throw DomainError("chain_rule_residual: state outside the open simplex");
      s += v;
    }
    if (!(s < 1.0)) throw DomainError("chain_rule_residual: state outside the open simplex");
  };
  check_interior(uK);
  check_interior(uL);

  std::vector<double> us(n + 1);
  edge_mean_vector(entropy, uK, uL, us);
  const Eigen::MatrixXd H = h_matrix(entropy, us);
  Eigen::VectorXd du(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) du(static_cast<Eigen::Index>(j)) = uL[j] - uK[j];
  const Eigen::VectorXd lhs = H * du;

  double u0K = 1.0;
  double u0L = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    u0K -= uK[j];
    u0L -= uL[j];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wL = entropy.dh(i + 1, uL[i]) - entropy.dh(0, u0L);
    const double wK = entropy.dh(i + 1, uK[i]) - entropy.dh(0, u0K);
    worst = std::max(worst, std::abs(lhs(static_cast<Eigen::Index>(i)) - (wL - wK)));
  }
  return worst;
}

}  // namespace crossdiff
