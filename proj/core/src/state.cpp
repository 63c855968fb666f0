#include "crossdiff/state.hpp"

#include <algorithm>

namespace crossdiff {

double solvent_of(std::span<const double> u) {
  double s = 1.0;
  for (double v : u) s -= v;
  return std::max(0.0, s);
}

double StateField::solvent(std::size_t k) const { return solvent_of(cell(k)); }

double StateField::species_sum(std::size_t k) const {
  double s = 0.0;
  for (double v : cell(k)) s += v;
  return s;
}

}  // namespace crossdiff
