#pragma once

#include "siw/common.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace siw {

struct FluidParams {
  double rho_plus = 1.0;
  double rho_minus = 1.0;
  double mu_plus = 1.0;
  double mu_minus = 1.0;
  double g = 1.0;
  double sigma_plus = 0.0;
  double sigma_minus = 0.0;
  double L1 = 1.0;
  double L2 = 1.0;
  double b0 = 1.0;

  double density_jump() const { return rho_plus - rho_minus; }
  double critical_sigma() const { return density_jump() * g * std::max(L1 * L1, L2 * L2); }
  double rho(Layer l) const { return l == Layer::Upper ? rho_plus : rho_minus; }
  double mu(Layer l) const { return l == Layer::Upper ? mu_plus : mu_minus; }
};

// Returns one message per violated constraint; empty when valid.
std::vector<std::string> violations(const FluidParams& p);
void validate(const FluidParams& p);

}  // namespace siw
