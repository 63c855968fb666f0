#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Cholesky>

#include <crossdiff/edge_means.hpp>
#include <crossdiff/sampling.hpp>

#include "crossdiff_cli/commands.hpp"

namespace crossdiff::cli {

namespace {

std::string fmt(const char* pattern, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

CheckResult chain_rule_check(std::size_t n, std::size_t samples, std::uint64_t seed) {
  const EntropySpec ent = EntropySpec::boltzmann(n);
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto uK = rng.simplex_point(n);
    const auto uL = rng.simplex_point(n);
    worst = std::max(worst, chain_rule_residual(ent, uK, uL));
  }
  return {"chain_rule_n" + std::to_string(n), worst <= 1e-12, fmt("max residual %.3e (tol 1e-12)", worst)};
}

CheckResult mean_bounds_check(std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t bad = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double a = rng.open_uniform();
    const double b = rng.open_uniform();
    const double m = log_mean(a, b);
    const bool ok = m == log_mean(b, a) && m >= std::min(a, b) && m <= std::max(a, b) && m <= 0.5 * (a + b) &&
                    log_mean(a, a) == a;
    bad += ok ? 0 : 1;
  }
  return {"mean_bounds", bad == 0, std::to_string(bad) + " violations in " + std::to_string(samples) + " pairs"};
}

CheckResult generic_mean_check(std::size_t samples, std::uint64_t seed) {
  const EntropySpec ent = EntropySpec::boltzmann(2);
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double a = rng.open_uniform();
    const double b = rng.open_uniform();
    const double closed = log_mean(a, b);
    worst = std::max(worst, std::abs(generic_edge_mean(ent, 1, a, b) - closed) / closed);
  }
  return {"generic_mean_vs_log_mean", worst <= 1e-13, fmt("max relative gap %.3e (tol 1e-13)", worst)};
}

CheckResult h_matrix_check(std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t bad = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t n = 2 + s % 3;
    const EntropySpec ent = EntropySpec::boltzmann(n);
    std::vector<double> us(n + 1);
    for (auto& v : us) v = rng.open_uniform();
    const Eigen::MatrixXd H = h_matrix(ent, us);
    const bool sym = H == H.transpose();
    const bool spd = Eigen::LLT<Eigen::MatrixXd>(H).info() == Eigen::Success;
    bad += (sym && spd) ? 0 : 1;
  }
  return {"h_matrix_spd", bad == 0, std::to_string(bad) + " failures"};
}

Model perturbed(Model m) {
  const MatrixEvaluator inner = m.a_sigma;
  m.a_sigma = [inner](std::span<const double> us, std::span<double> out) {
    inner(us, out);
    out[1] += 1e-6;
  };
  m.name += "_perturbed";
  return m;
}

CheckResult consistency_check(const Model& model, std::size_t samples, std::uint64_t seed) {
  const double dev = a_sigma_consistency_check(model, samples, seed);
  return {"consistency_" + model.name, dev <= 1e-13, fmt("max deviation %.3e (tol 1e-13)", dev)};
}

}  // namespace

std::vector<CheckResult> run_check_suite(const CheckOptions& o) {
  const std::size_t S = o.samples;
  std::vector<CheckResult> out;
  out.push_back(chain_rule_check(2, S, o.seed));
  out.push_back(chain_rule_check(3, S, o.seed + 1));
  out.push_back(mean_bounds_check(S, o.seed + 2));
  out.push_back(generic_mean_check(S, o.seed + 3));
  out.push_back(h_matrix_check(S, o.seed + 4));

  Model ms = make_maxwell_stefan(1.0 / 0.168, 1.0 / 0.68, 1.0 / 0.883);
  if (o.perturb_model) ms = perturbed(ms);
  const Model symmetric_film = make_thin_film({0.0, 1.0, 0.5,
                                               1.0, 0.0, 0.3,
                                               0.5, 0.3, 0.0});
  const std::vector<Model> models{ms, symmetric_film, make_tumor(4.0, 1.0, 0.0), make_two_species_euler_limit(),
                                  make_thin_film_long_time()};
  for (std::size_t k = 0; k < models.size(); ++k) out.push_back(consistency_check(models[k], S, o.seed + 10 + k));

  {
    const auto rep = quadratic_form_sample(make_two_species_euler_limit(), S, o.seed + 20);
    const bool ok = S == 0 || rep.worst_ratio >= 1.0 - 1e-12;
    out.push_back({"form_two_species", ok, fmt("worst ratio %.15g (>= 1 - 1e-12)", S ? rep.worst_ratio : 1.0)});
  }
  {
    constexpr double alpha = 0.3;  // smallest off-diagonal coefficient of symmetric_film
    const auto rep = quadratic_form_sample(symmetric_film, S, o.seed + 21, FormSampling::EdgeMeans);
    const bool ok = S == 0 || rep.worst_ratio >= alpha * (1.0 - 1e-10);
    out.push_back({"form_thin_film_alpha_bound", ok, fmt("worst ratio %.12g (alpha = 0.3)", S ? rep.worst_ratio : alpha)});
  }
  {
    const auto rep = quadratic_form_sample(ms, S, o.seed + 22);
    out.push_back({"form_" + ms.name + "_positive", !rep.violation,
                   fmt("worst ratio %.6g", S ? rep.worst_ratio : 0.0)});
  }
  {
    const auto rep = quadratic_form_sample(make_tumor(4.0, 1.0, 0.0), S, o.seed + 23);
    out.push_back({"form_tumor_positive", !rep.violation, fmt("worst ratio %.6g", S ? rep.worst_ratio : 0.0)});
  }
  return out;
}

}  // namespace crossdiff::cli
