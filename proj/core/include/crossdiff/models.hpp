#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "crossdiff/entropy.hpp"

namespace crossdiff {

/// Writes an n x n matrix, row-major, into `out` (size n*n).
/// For `a_sigma` the argument is the edge mean vector (u_0, ..., u_n) of size n + 1;
/// for `physical_a` it is the species vector (u_1, ..., u_n).
using MatrixEvaluator = std::function<void(std::span<const double>, std::span<double>)>;
/// Reaction rates f(u) for u = (u_1, ..., u_n), written into `out` (size n).
using SourceEvaluator = std::function<void(std::span<const double>, std::span<double>)>;

/// Cross-diffusion model: entropy density, the edge diffusion matrix A_sigma
/// and an optional source. Value type; evaluators are pure.
struct Model {
  std::string name;
  std::size_t num_species = 0;
  EntropySpec entropy = EntropySpec::boltzmann(1);
  MatrixEvaluator a_sigma;
  /// Reference A(u) on the simplex; a_sigma((1 - sum u, u)) must reproduce it.
  MatrixEvaluator physical_a;
  SourceEvaluator source;  // empty means zero source
  /// Exponent s of the weighted coercivity bound. Used by diagnostics only.
  double exponent_s = 0.5;
  std::vector<std::pair<std::string, double>> parameters;

  bool has_source() const noexcept { return static_cast<bool>(source); }

  Eigen::MatrixXd eval_a_sigma(std::span<const double> u_sigma) const;
  Eigen::MatrixXd eval_physical_a(std::span<const double> u) const;
};

/// Three-species Maxwell-Stefan (Fock-Onsager form). Throws SingularDenominator
/// when alpha_sigma(u_sigma) = 0.
Model make_maxwell_stefan(double d0, double d1, double d2);

/// Thin-film deposition model. `a` is the (n+1) x (n+1) coefficient table,
/// row-major, index 0 = solvent; n is inferred from its size.
Model make_thin_film(const std::vector<double>& a);

/// Tumor growth with correction factor a(u_sigma) = u_0 + u_1 + u_2 and
/// artificial diffusion `delta` added to the diagonal.
Model make_tumor(double beta, double theta, double delta = 0.0);

/// Two-species model from the Euler-friction diffusion limit.
Model make_two_species_euler_limit();

/// Reaction of the thin-film long-time test: f = (r_1, -2 r_1) with
/// r_1(u) = (u_2^+)^2 - k u_1^+ (1 - u_1 - u_2)^+.
SourceEvaluator thin_film_reaction(double k = 1000.0);

/// Thin-film model a10 = 1, a20 = 0.1, a12 = a21 = 0 with the reaction above.
Model make_thin_film_long_time();

/// Max entrywise |A_sigma((1 - sum u, u)) - A(u)| over `samples` uniform points of D.
double a_sigma_consistency_check(const Model& model, std::size_t samples, std::uint64_t seed);

struct QuadraticFormSample {
  std::vector<double> u_sigma;
  std::vector<double> z;
  double ratio = 0.0;
};

struct QuadraticFormReport {
  /// min over samples of z^T H A_sigma z / sum_i u_{i,sigma}^{2(s-1)} z_i^2.
  double worst_ratio = 0.0;
  QuadraticFormSample worst;
  /// Present if the form was nonpositive at some sample.
  std::optional<QuadraticFormSample> violation;
};

enum class FormSampling {
  /// u_sigma uniform in (eps, 1 - eps)^{n+1}, eps = 1e-3, components independent.
  Box,
  /// u_sigma = edge means of two uniform points of D. Only these satisfy
  /// sum_{i=0}^n u_{i,sigma} <= 1, which the thin-film alpha bound needs.
  EdgeMeans,
};

/// Samples u_sigma and unit z; returns the empirical lower bound for the
/// coercivity constant c_A.
QuadraticFormReport quadratic_form_sample(const Model& model, std::size_t samples, std::uint64_t seed,
                                          FormSampling sampling = FormSampling::Box);

}  // namespace crossdiff
