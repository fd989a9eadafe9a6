#pragma once

#include "siw/fields.hpp"
#include "siw/params.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace siw {

// Unknowns of one horizontal mode: (u1, u2, u3, p) at every node of each
// layer, upper layer first. Rows use the same layout: the momentum slots of
// boundary nodes hold boundary conditions, the p slot holds the divergence.
class ModeLayout {
 public:
  ModeLayout(int nz_plus, int nz_minus) : nu_(nz_plus), nl_(nz_minus) {}
  explicit ModeLayout(const VerticalGrid& v) : ModeLayout(v.upper.size(), v.lower.size()) {}

  int size() const { return 4 * (nu_ + nl_); }
  int nz(Layer l) const { return l == Layer::Upper ? nu_ : nl_; }
  int index(Layer l, int var, int node) const {
    return (l == Layer::Upper ? 0 : 4 * nu_) + var * nz(l) + node;
  }

 private:
  int nu_, nl_;
};

// Coefficients that distinguish the steady Stokes operator from one implicit
// step: mass = rho/dt per layer, kappa = dt * restoring coefficient. Complex so
// that shifted solves with a complex shift reuse the same assembly.
struct ModeCoeffs {
  cplx mass_plus{0.0};
  cplx mass_minus{0.0};
  cplx kappa_top{0.0};
  cplx kappa_int{0.0};
};

// Restoring coefficients of the linearized normal-stress conditions:
// top = rho_+ g + sigma_+ |n|^2, interface = [rho] g - sigma_- |n|^2.
struct Restoring {
  double top;
  double interface;
};
Restoring restoring(const FluidParams& p, double nabs2, bool surface_tension);

// Coefficients of a backward Euler step of size dt for wavenumber |n|^2.
// The zero mode carries no restoring term: its surface mean is pinned.
ModeCoeffs step_coeffs(const FluidParams& p, double nabs2, cplx dt, bool surface_tension);

Eigen::MatrixXcd assemble_mode_matrix(const VerticalGrid& vg, const FluidParams& p, double n1, double n2,
                                      const ModeCoeffs& c);

// Spectral right-hand side data. Invalid members count as zero.
struct ModeForcing {
  VectorField F1;
  LayeredField F2;
  SurfaceVector top;   // (pI - mu Du) e3 = top on the upper surface
  SurfaceVector jump;  // [(pI - mu Du) e3] = -jump on the interface
};

// Extra implicit-step terms for one mode: inertia mass*u_old on momentum rows
// and the eliminated surface elevation on the two normal-stress rows.
struct ModeStateTerms {
  const VectorField* u_old = nullptr;
  cplx mass_plus{0.0};
  cplx mass_minus{0.0};
  cplx top_normal{0.0};
  cplx int_normal{0.0};
};

Eigen::VectorXcd pack_rhs(const Grid& g, const ModeForcing& f, int m, const ModeStateTerms* extra = nullptr);

// Writes mode m of the solution and the conjugate mode.
void unpack_solution(const Grid& g, const Eigen::VectorXcd& x, int m, VectorField& u, LayeredField& p);

// Dense LU per canonical mode. With cache = true every factorization is done
// once up front; otherwise each solve assembles and factors afresh, which is the
// serial reference path.
class ModeLUBank {
 public:
  using Assemble = std::function<Eigen::MatrixXcd(int mode)>;
  using Rhs = std::function<Eigen::VectorXcd(int mode)>;
  using Sink = std::function<void(int mode, const Eigen::VectorXcd&)>;

  ModeLUBank(GridPtr grid, Assemble assemble, Exec exec, bool cache, std::string context);

  // Solves every canonical mode. sink(m, x) must only write mode m and its
  // conjugate.
  void solve_all(const Rhs& rhs, const Sink& sink) const;
  Eigen::VectorXcd solve(int mode, const Eigen::VectorXcd& b) const;
  const GridPtr& grid() const { return grid_; }
  Exec exec() const { return exec_; }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXcd> factor(int mode) const;

  GridPtr grid_;
  Assemble assemble_;
  Exec exec_;
  bool cache_;
  std::string context_;
  std::vector<int> position_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>> lu_;
};

// Stokes / implicit-step solver over the whole grid.
class ModeSolverBank {
 public:
  using CoeffFn = std::function<ModeCoeffs(int mode)>;
  ModeSolverBank(GridPtr grid, const FluidParams& params, CoeffFn coeffs, Exec exec, bool cache = true,
                 std::string context = "");

  // Solves all modes; extra(m) may return nullptr.
  void solve(const ModeForcing& f, const std::function<const ModeStateTerms*(int)>& extra, VectorField& u,
             LayeredField& p) const;
  const ModeLUBank& bank() const { return bank_; }

 private:
  GridPtr grid_;
  ModeLUBank bank_;
};

// Backward Euler on a single mode with the surface elevation carried along.
// State: u1, u2, u3 on every node (layer-major, variable-major, node-minor)
// followed by eta_top and eta_interface. dt may be complex for shifted solves.
class ModeStepper {
 public:
  ModeStepper(const VerticalGrid& vg, const FluidParams& params, double n1, double n2, cplx dt,
              bool surface_tension);

  int state_size() const { return 3 * (layout_.nz(Layer::Upper) + layout_.nz(Layer::Lower)) + 2; }
  Eigen::VectorXcd step(const Eigen::VectorXcd& state) const;
  cplx dt() const { return dt_; }

 private:
  ModeLayout layout_;
  FluidParams params_;
  ModeCoeffs coeffs_;
  Restoring c_;
  cplx dt_;
  bool zero_mode_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
};

// Two-layer scalar problem for one mode:
//   (1/w)(D^2 - |n|^2) q = f1 inside each layer, q = top at x3 = 1,
//   [q] = jump and [(1/w) D q] = flux_jump at x3 = 0, -(1/w_-) D q = bottom at
//   x3 = -b0. Unknowns: upper nodes, then lower nodes.
Eigen::MatrixXcd assemble_scalar_matrix(const VerticalGrid& vg, double w_plus, double w_minus, double nabs2);

struct ScalarModeData {
  Eigen::VectorXcd f1;  // stacked interior values (boundary entries ignored)
  cplx top{0.0}, jump{0.0}, flux_jump{0.0}, bottom{0.0};
};
Eigen::VectorXcd pack_scalar_rhs(const VerticalGrid& vg, const ScalarModeData& d);

}  // namespace siw
