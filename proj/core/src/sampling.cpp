#include "crossdiff/sampling.hpp"

#include <cmath>
#include <numbers>

namespace crossdiff {

double Rng::open_uniform() {
  double u = 0.0;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

double Rng::normal() {
  const double r = std::sqrt(-2.0 * std::log(open_uniform()));
  return r * std::cos(2.0 * std::numbers::pi * uniform());
}

std::vector<double> Rng::simplex_point(std::size_t n) {
  // Dirichlet(1, ..., 1) over the n + 1 fractions; the solvent is dropped.
  for (;;) {
    std::vector<double> e(n + 1);
    double total = 0.0;
    for (auto& v : e) {
      v = -std::log(open_uniform());
      total += v;
    }
    std::vector<double> u(n);
    double sum = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = e[i + 1] / total;
      sum += u[i];
      ok = ok && u[i] > 0.0;
    }
    if (ok && sum < 1.0) return u;
  }
}

std::vector<double> Rng::unit_vector(std::size_t n) {
  for (;;) {
    std::vector<double> z(n);
    double nrm = 0.0;
    for (auto& v : z) {
      v = normal();
      nrm += v * v;
    }
    nrm = std::sqrt(nrm);
    if (nrm > 1e-12) {
      for (auto& v : z) v /= nrm;
      return z;
    }
  }
}

}  // namespace crossdiff
