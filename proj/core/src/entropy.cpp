#include "crossdiff/entropy.hpp"

#include <cmath>

#include "crossdiff/errors.hpp"

namespace crossdiff {

EntropySpec EntropySpec::boltzmann(std::size_t num_species) {
  if (num_species == 0) throw InvalidArgument("entropy needs at least one species");
  EntropySpec e;
  e.n_ = num_species;
  e.boltzmann_ = true;
  e.name_ = "boltzmann";
  return e;
}

EntropySpec EntropySpec::custom(std::vector<ScalarEntropy> terms, std::string name) {
  if (terms.size() < 2) throw InvalidArgument("entropy needs the solvent term and at least one species");
  constexpr int kSamples = 257;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if (!t.h || !t.dh || !t.d2h) throw InvalidArgument("entropy term " + std::to_string(i) + " is incomplete");
    double prev = 0.0;
    for (int k = 1; k < kSamples; ++k) {
      const double x = static_cast<double>(k) / kSamples;
      const double v = t.d2h(x);
      if (!(v > 0.0))
        throw InvalidArgument("entropy term " + std::to_string(i) + ": h'' must be positive on (0,1)");
      if (k > 1 && !(v < prev))
        throw InvalidArgument("entropy term " + std::to_string(i) + ": h'' must be strictly decreasing on (0,1)");
      prev = v;
    }
  }
  EntropySpec e;
  e.n_ = terms.size() - 1;
  e.boltzmann_ = false;
  e.name_ = std::move(name);
  e.terms_ = std::move(terms);
  return e;
}

double EntropySpec::h(std::size_t index, double x) const {
  if (boltzmann_) return x > 0.0 ? x * (std::log(x) - 1.0) + 1.0 : 1.0;
  return terms_.at(index).h(x);
}

double EntropySpec::dh(std::size_t index, double x) const {
  if (boltzmann_) return std::log(x);
  return terms_.at(index).dh(x);
}

double EntropySpec::d2h(std::size_t index, double x) const {
  if (boltzmann_) return 1.0 / x;
  return terms_.at(index).d2h(x);
}

}  // namespace crossdiff
