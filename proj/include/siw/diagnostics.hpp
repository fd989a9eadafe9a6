#pragma once

#include "siw/params.hpp"
#include "siw/state.hpp"

#include <string>
#include <vector>

namespace siw {

struct EnergyReport {
  double t = 0.0;
  long step = 0;

  // energy: ||u||_2^2 + ||dt u||_0^2 + ||p||_1^2 + ||eta||_3^2
  //         + ||dt eta||_{3/2}^2 + ||dt^2 eta||_{-1/2}^2
  double u_h2 = 0, dtu_l2 = 0, p_h1 = 0, eta_h3 = 0, dteta_h32 = 0, ddteta_hm12 = 0;
  double E = 0;

  // dissipation
  double u_h3 = 0, dtu_h1 = 0, grad_dtu_top = 0, jump_mu_grad_dtu = 0, p_h2 = 0, dtp_l2 = 0, dtp_top = 0,
         jump_dtp = 0, eta_h72 = 0, dteta_h52 = 0, ddteta_h12 = 0;
  double D = 0;

  // quadratic form of the linear energy identity, without and with the
  // surface-tension terms, and 1/2 int mu |Du|^2
  double base_energy = 0, base_energy_st = 0, base_dissipation = 0;

  // dt u taken from the linear momentum balance (no forcing available)
  bool dtu_linearized = false;
  // no previous pressure, so the d_t p terms are zero
  bool dtp_missing = false;
  // d_t^2 eta without the d_t G4 contribution
  bool ddteta_linearized = false;
};

// Stable column order of the CSV row.
const std::vector<std::string>& energy_report_columns();
std::vector<double> energy_report_values(const EnergyReport& r);

EnergyReport energy(const State& s, const FluidParams& params, Mode mode, Exec exec = Exec::Parallel);
EnergyReport dissipation(const State& s, const FluidParams& params, Mode mode, Exec exec = Exec::Parallel);
// energy and dissipation in one report
EnergyReport evaluate_report(const State& s, const FluidParams& params, Mode mode, Exec exec = Exec::Parallel);

double base_energy(const State& s, const FluidParams& params, bool with_surface_tension);
double base_dissipation(const VectorField& u, const FluidParams& params);

struct IdentityResidual {
  std::vector<double> residuals;
  double max_abs = 0.0;
};
// residual_n = (B^{n+1} - B^n) / dt + base_dissipation^{n+1} over consecutive
// reports, B the base energy with or without the surface-tension terms.
IdentityResidual energy_identity_residual(const std::vector<EnergyReport>& window, double dt,
                                          bool with_surface_tension);

enum class DecayModel { Exponential, Algebraic };
struct DecayFit {
  DecayModel model = DecayModel::Exponential;
  double rate = 0.0;  // lambda in C e^{-lambda t}, or the power in C (1+t)^{-power}
  double log_c = 0.0;
  double r2 = 0.0;
  int samples = 0;
};
// Least squares on log E; the first trim fraction of the samples is dropped.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& e, DecayModel model,
                   double trim = 0.0);

}  // namespace siw
