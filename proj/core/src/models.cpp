#include "crossdiff/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crossdiff/edge_means.hpp"
#include "crossdiff/errors.hpp"
#include "crossdiff/sampling.hpp"

namespace crossdiff {

namespace {

Eigen::MatrixXd to_matrix(std::size_t n, const std::vector<double>& buf) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[i * n + j];
  return m;
}

}  // namespace

Eigen::MatrixXd Model::eval_a_sigma(std::span<const double> u_sigma) const {
  std::vector<double> buf(num_species * num_species);
  a_sigma(u_sigma, buf);
  return to_matrix(num_species, buf);
}

Eigen::MatrixXd Model::eval_physical_a(std::span<const double> u) const {
  std::vector<double> buf(num_species * num_species);
  physical_a(u, buf);
  return to_matrix(num_species, buf);
}

Model make_maxwell_stefan(double d0, double d1, double d2) {
  if (!(d0 > 0.0) || !(d1 > 0.0) || !(d2 > 0.0))
    throw InvalidArgument("maxwell_stefan: diffusivities must be positive");
  Model m;
  m.name = "maxwell_stefan";
  m.num_species = 2;
  m.entropy = EntropySpec::boltzmann(2);
  m.exponent_s = 0.5;
  m.parameters = {{"d0", d0}, {"d1", d1}, {"d2", d2}};
  m.a_sigma = [d0, d1, d2](std::span<const double> us, std::span<double> out) {
    const double u0 = us[0], u1 = us[1], u2 = us[2];
    const double alpha = d1 * d2 * u0 + d0 * d1 * u1 + d0 * d2 * u2;
    if (alpha == 0.0) throw SingularDenominator("maxwell_stefan: alpha_sigma(u_sigma) = 0");
    out[0] = (d2 * (u2 + u0) + d0 * u1) / alpha;
    out[1] = (d0 - d1) * u1 / alpha;
    out[2] = (d0 - d2) * u2 / alpha;
    out[3] = (d1 * (u1 + u0) + d0 * u2) / alpha;
  };
  m.physical_a = [d0, d1, d2](std::span<const double> u, std::span<double> out) {
    const double u1 = u[0], u2 = u[1];
    const double alpha = d1 * d2 * (1.0 - u1 - u2) + d0 * d1 * u1 + d0 * d2 * u2;
    out[0] = (d2 + (d0 - d2) * u1) / alpha;
    out[1] = (d0 - d1) * u1 / alpha;
    out[2] = (d0 - d2) * u2 / alpha;
    out[3] = (d1 + (d0 - d1) * u2) / alpha;
  };
  return m;
}

Model make_thin_film(const std::vector<double>& a) {
  const auto n1 = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(a.size()))));
  if (n1 < 2 || n1 * n1 != a.size())
    throw InvalidArgument("thin_film: coefficient table must be (n+1) x (n+1) with n >= 1");
  for (double v : a)
    if (!(v >= 0.0)) throw InvalidArgument("thin_film: coefficients must be nonnegative");
  const std::size_t n = n1 - 1;
  auto coef = [a, n1](std::size_t i, std::size_t j) { return a[i * n1 + j]; };

  Model m;
  m.name = "thin_film";
  m.num_species = n;
  m.entropy = EntropySpec::boltzmann(n);
  m.exponent_s = 0.5;
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n1; ++j)
      if (i != j) m.parameters.emplace_back("a" + std::to_string(i) + std::to_string(j), coef(i, j));

  m.a_sigma = [coef, n](std::span<const double> us, std::span<double> out) {
    for (std::size_t i = 1; i <= n; ++i) {
      double diag = coef(i, 0);
      for (std::size_t k = 1; k <= n; ++k)
        if (k != i) diag += (coef(i, k) - coef(i, 0)) * us[k];
      for (std::size_t j = 1; j <= n; ++j)
        out[(i - 1) * n + (j - 1)] = (j == i) ? diag : -(coef(i, j) - coef(i, 0)) * us[i];
    }
  };
  // Coefficients read off the (n+1)-species form sum_j a_ij (u_j grad u_i - u_i grad u_j)
  // after eliminating grad u_0 = -sum_k grad u_k.
  m.physical_a = [coef, n](std::span<const double> u, std::span<double> out) {
    double u0 = 1.0;
    for (std::size_t k = 0; k < n; ++k) u0 -= u[k];
    auto frac = [&](std::size_t j) { return j == 0 ? u0 : u[j - 1]; };
    for (std::size_t i = 1; i <= n; ++i) {
      double grad_self = 0.0;
      for (std::size_t j = 0; j <= n; ++j)
        if (j != i) grad_self += coef(i, j) * frac(j);
      grad_self += coef(i, 0) * frac(i);
      for (std::size_t j = 1; j <= n; ++j)
        out[(i - 1) * n + (j - 1)] = (j == i) ? grad_self : -coef(i, j) * frac(i) + coef(i, 0) * frac(i);
    }
  };
  return m;
}

Model make_tumor(double beta, double theta, double delta) {
  if (!(beta > 0.0)) throw InvalidArgument("tumor: beta must be positive");
  if (!(theta < 4.0 / std::sqrt(beta))) throw InvalidArgument("tumor: requires theta < 4/sqrt(beta)");
  if (!(delta >= 0.0)) throw InvalidArgument("tumor: artificial diffusion must be nonnegative");
  Model m;
  m.name = "tumor";
  m.num_species = 2;
  m.entropy = EntropySpec::boltzmann(2);
  m.exponent_s = delta > 0.0 ? 0.5 : 1.0;
  m.parameters = {{"beta", beta}, {"theta", theta}, {"delta", delta}};
  m.a_sigma = [beta, theta, delta](std::span<const double> us, std::span<double> out) {
    const double u0 = us[0], u1 = us[1], u2 = us[2];
    const double a = u0 + u1 + u2;
    if (a == 0.0) throw SingularDenominator("tumor: correction factor a(u_sigma) = 0");
    out[0] = (2.0 * u1 * (u0 + u2) - beta * theta * u1 * u2 * u2) / a + delta;
    out[1] = -2.0 * beta * u1 * u2 * (1.0 + theta * u1) / a;
    out[2] = (-2.0 * u1 * u2 + beta * theta * (u0 + u1) * u2 * u2) / a;
    out[3] = 2.0 * beta * u2 * (u0 + u1) * (1.0 + theta * u1) / a + delta;
  };
  m.physical_a = [beta, theta, delta](std::span<const double> u, std::span<double> out) {
    const double u1 = u[0], u2 = u[1];
    out[0] = 2.0 * u1 * (1.0 - u1) - beta * theta * u1 * u2 * u2 + delta;
    out[1] = -2.0 * beta * u1 * u2 * (1.0 + theta * u1);
    out[2] = -2.0 * u1 * u2 + beta * theta * (1.0 - u2) * u2 * u2;
    out[3] = 2.0 * beta * u2 * (1.0 - u2) * (1.0 + theta * u1) + delta;
  };
  return m;
}

Model make_two_species_euler_limit() {
  Model m;
  m.name = "two_species";
  m.num_species = 2;
  m.entropy = EntropySpec::boltzmann(2);
  m.exponent_s = 0.5;
  m.a_sigma = [](std::span<const double> us, std::span<double> out) {
    const double u0 = us[0], u1 = us[1], u2 = us[2];
    const double a = u0 + u1 + u2;
    if (a == 0.0) throw SingularDenominator("two_species: correction factor a(u_sigma) = 0");
    out[0] = (u0 + u2) / a;
    out[1] = -u1 / a;
    out[2] = -u2 / a;
    out[3] = (u0 + u1) / a;
  };
  m.physical_a = [](std::span<const double> u, std::span<double> out) {
    out[0] = 1.0 - u[0];
    out[1] = -u[0];
    out[2] = -u[1];
    out[3] = 1.0 - u[1];
  };
  return m;
}

SourceEvaluator thin_film_reaction(double k) {
  return [k](std::span<const double> u, std::span<double> out) {
    const double u1 = std::max(u[0], 0.0);
    const double u2 = std::max(u[1], 0.0);
    const double u0 = std::max(1.0 - u[0] - u[1], 0.0);
    const double r1 = u2 * u2 - k * u1 * u0;
    out[0] = r1;
    out[1] = -2.0 * r1;
  };
}

Model make_thin_film_long_time() {
  // Row i holds a_i0, a_i1, a_i2; the solvent row is unused by the model.
  Model m = make_thin_film({0.0, 1.0, 0.1,
                            1.0, 0.0, 0.0,
                            0.1, 0.0, 0.0});
  m.name = "thin_film_reaction";
  m.source = thin_film_reaction(1000.0);
  m.parameters.emplace_back("k", 1000.0);
  return m;
}

double a_sigma_consistency_check(const Model& model, std::size_t samples, std::uint64_t seed) {
  const std::size_t n = model.num_species;
  Rng rng(seed);
  std::vector<double> us(n + 1);
  std::vector<double> a1(n * n);
  std::vector<double> a2(n * n);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto u = rng.simplex_point(n);
    double u0 = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      us[i + 1] = u[i];
      u0 -= u[i];
    }
    us[0] = u0;
    model.a_sigma(us, a1);
    model.physical_a(u, a2);
    for (std::size_t k = 0; k < n * n; ++k) worst = std::max(worst, std::abs(a1[k] - a2[k]));
  }
  return worst;
}

QuadraticFormReport quadratic_form_sample(const Model& model, std::size_t samples, std::uint64_t seed,
                                          FormSampling sampling) {
  constexpr double eps = 1e-3;
  const std::size_t n = model.num_species;
  const auto ni = static_cast<Eigen::Index>(n);
  Rng rng(seed);
  QuadraticFormReport rep;
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  std::vector<double> us(n + 1);
  for (std::size_t s = 0; s < samples; ++s) {
    if (sampling == FormSampling::Box) {
      for (auto& v : us) v = rng.uniform(eps, 1.0 - eps);
    } else {
      const auto uK = rng.simplex_point(n);
      const auto uL = rng.simplex_point(n);
      edge_mean_vector(model.entropy, uK, uL, us);
    }
    const auto z = rng.unit_vector(n);
    const Eigen::MatrixXd HA = h_matrix(model.entropy, us) * model.eval_a_sigma(us);
    Eigen::VectorXd zv(ni);
    double weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      zv(static_cast<Eigen::Index>(i)) = z[i];
      weight += std::pow(us[i + 1], 2.0 * (model.exponent_s - 1.0)) * z[i] * z[i];
    }
    const double form = zv.dot(HA * zv);
    const double ratio = form / weight;
    if (ratio < rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst = {us, z, ratio};
    }
    if (!(form > 0.0) && !rep.violation) rep.violation = QuadraticFormSample{us, z, ratio};
  }
  return rep;
}

}  // namespace crossdiff
