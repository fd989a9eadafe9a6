#pragma once

#include "siw/fields.hpp"
#include "siw/nonlinear.hpp"

#include <optional>

namespace siw {

struct State {
  double t = 0.0;
  long step = 0;
  VectorField u;
  LayeredField p;
  SurfaceField eta_plus, eta_minus;

  // pressure of the previous step, for the backward difference of d_t p
  LayeredField p_prev;
  double dt_prev = 0.0;

  // forcing frozen over the step that produced this state
  std::optional<ForcingSet> forcing;

  const GridPtr& grid() const { return eta_plus.grid(); }
};

// Equilibrium state on g.
State zero_state(const GridPtr& g);

}  // namespace siw
