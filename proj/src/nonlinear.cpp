#include "siw/nonlinear.hpp"

#include <cmath>

namespace siw {

namespace {

using Surf = Eigen::ArrayXd;

struct Jet {
  std::array<Vol, 3> u;
  std::array<std::array<Vol, 3>, 3> du;   // du[i][k] = d_k u_i
  std::array<std::array<Vol, 6>, 3> ddu;  // ddu[i][pair(k,l)]
  Vol p;
  std::array<Vol, 3> dp;
};

Jet make_jet(const VectorField& u, const LayeredField* p, bool second, Exec exec) {
  Jet j;
  for (int i = 0; i < 3; ++i) {
    j.u[i] = u[i].physical(exec);
    std::array<LayeredField, 3> d{u[i].d(0), u[i].d(1), u[i].d(2)};
    for (int k = 0; k < 3; ++k) j.du[i][k] = d[k].physical(exec);
    if (second)
      for (int k = 0; k < 3; ++k)
        for (int l = k; l < 3; ++l) {
          const LayeredField dd = (k == 2 && l == 2) ? u[i].d3(2) : d[k].d(l);
          j.ddu[i][pair_index(k, l)] = dd.physical(exec);
        }
  }
  if (p) {
    j.p = p->physical(exec);
    for (int k = 0; k < 3; ++k) j.dp[k] = p->d(k).physical(exec);
  }
  return j;
}

// Q - I with Q = A^T A, written as E^T E + E + E^T so it vanishes exactly at
// the flat state. Symmetric, stored by pair index.
struct SymField {
  std::array<Vol, 6> e;
  std::array<bool, 6> nz{};
};

SymField q_deviation(const GeometryCache& c) {
  SymField q;
  const Mat3Field& E = c.Adev;
  for (int k = 0; k < 3; ++k)
    for (int l = k; l < 3; ++l) {
      Vol acc;
      bool any = false;
      auto add = [&](const Vol& v) {
        if (any) {
          acc += v;
        } else {
          acc = v;
          any = true;
        }
      };
      for (int j = 0; j < 3; ++j)
        if (E.has(j, k) && E.has(j, l)) add(E(j, k) * E(j, l));
      if (E.has(k, l)) add(E(k, l));
      if (E.has(l, k)) add(E(l, k));
      if (any) {
        q.e[pair_index(k, l)] = std::move(acc);
        q.nz[pair_index(k, l)] = true;
      }
    }
  return q;
}

// c_l = A_jk d_k(A_jl), the first-order part of Lap_A
std::array<Vol, 3> lap_first_order(const GeometryCache& c, std::array<bool, 3>& nz) {
  std::array<Vol, 3> out;
  nz = {false, false, false};
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        if (!c.Amat.has(j, k) || !c.dA[k].has(j, l)) continue;
        Vol t = c.Amat(j, k) * c.dA[k](j, l);
        if (nz[l]) {
          out[l] += t;
        } else {
          out[l] = std::move(t);
          nz[l] = true;
        }
      }
  return out;
}

void accumulate(Vol& acc, bool& any, const Vol& v) {
  if (any) {
    acc += v;
  } else {
    acc = v;
    any = true;
  }
}

Vol or_zero(const Grid& g, Vol v, bool any) { return any ? std::move(v) : vol_constant(g, 0.0); }

// (Lap_A - Lap) f given its first and second physical derivatives
Vol lap_deviation(const Grid& g, const SymField& q, const std::array<Vol, 3>& cl, const std::array<bool, 3>& clnz,
                  const std::array<Vol, 3>& d, const std::array<Vol, 6>& dd) {
  Vol acc;
  bool any = false;
  for (int k = 0; k < 3; ++k)
    for (int l = k; l < 3; ++l) {
      const int pi = pair_index(k, l);
      if (!q.nz[pi]) continue;
      accumulate(acc, any, (k == l ? 1.0 : 2.0) * (q.e[pi] * dd[pi]));
    }
  for (int l = 0; l < 3; ++l)
    if (clnz[l]) accumulate(acc, any, cl[l] * d[l]);
  return or_zero(g, std::move(acc), any);
}

// (E d f)_i = E_ij d_j f
Vol grad_deviation(const Grid& g, const Mat3Field& E, int i, const std::array<Vol, 3>& d) {
  Vol acc;
  bool any = false;
  for (int j = 0; j < 3; ++j)
    if (E.has(i, j)) accumulate(acc, any, E(i, j) * d[j]);
  return or_zero(g, std::move(acc), any);
}

struct Side {
  Layer layer;
  int node;
};

Side top_side() { return {Layer::Upper, 0}; }
Side interface_side(const Grid& g, Layer l) {
  return l == Layer::Upper ? Side{Layer::Upper, g.nz(Layer::Upper) - 1} : Side{Layer::Lower, 0};
}

Surf tr(const Grid& g, const Vol& v, Side s) { return vol_slice(g, v, s.layer, s.node); }

// X = (D_A u - Du) N + Du (N - e3) on one side of a surface
std::array<Surf, 3> stress_deviation(const Grid& g, const GeometryCache& c, const Jet& j, Side side, int surf) {
  const auto& N = c.N[surf];
  std::array<Surf, 3> out;
  std::array<std::array<Surf, 3>, 3> du;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) du[i][k] = tr(g, j.du[i][k], side);
  std::array<std::array<Surf, 3>, 3> E;
  std::array<std::array<bool, 3>, 3> Enz{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      if (c.Adev.has(i, k)) {
        E[i][k] = tr(g, c.Adev(i, k), side);
        Enz[i][k] = true;
      }
  const int nm = g.nmodes();
  for (int i = 0; i < 3; ++i) {
    Surf acc = Surf::Zero(nm);
    for (int jj = 0; jj < 3; ++jj) {
      // (D_A u - Du)_{i jj} = E_ik d_k u_jj + E_jj,k d_k u_i
      Surf dev = Surf::Zero(nm);
      for (int k = 0; k < 3; ++k) {
        if (Enz[i][k]) dev += E[i][k] * du[jj][k];
        if (Enz[jj][k]) dev += E[jj][k] * du[i][k];
      }
      acc += dev * N[jj];
    }
    // N - e3 = (-d1 eta, -d2 eta, 0)
    for (int jj = 0; jj < 2; ++jj) acc -= (du[i][jj] + du[jj][i]) * c.deta[surf][jj];
    out[i] = std::move(acc);
  }
  return out;
}

SurfaceVector to_spectral(const GridPtr& g, const std::array<Surf, 3>& v) {
  return {SurfaceField::from_physical(g, v[0]), SurfaceField::from_physical(g, v[1]),
          SurfaceField::from_physical(g, v[2])};
}

VectorField to_spectral(const GridPtr& g, const std::array<Vol, 3>& v, Exec exec) {
  return {LayeredField::from_physical(g, v[0], Jump::Continuous, true, exec),
          LayeredField::from_physical(g, v[1], Jump::Continuous, true, exec),
          LayeredField::from_physical(g, v[2], Jump::Continuous, true, exec)};
}

void check_grid(const VectorField& u, const GeometryCache& c) {
  if (u[0].grid() != c.grid) throw InvalidArgument("state and geometry live on different grids");
}

struct StressTerms {
  std::array<Surf, 3> top, jump;
};

// p (e3 - N) + mu X on the top, -([p] (e3 - N) + [mu X]) on the interface,
// with p replaced by p - rho g eta when hydrostatic is true.
StressTerms stress_terms(const Grid& g, const GeometryCache& c, const FluidParams& prm, const Jet& j,
                         bool hydrostatic) {
  StressTerms out;
  const Side top = top_side();
  const Side ip = interface_side(g, Layer::Upper), im = interface_side(g, Layer::Lower);
  {
    const auto X = stress_deviation(g, c, j, top, 0);
    Surf pt = tr(g, j.p, top);
    if (hydrostatic) pt -= prm.rho_plus * prm.g * c.eta[0];
    const int nm = g.nmodes();
    out.top[0] = pt * c.deta[0][0] + prm.mu_plus * X[0];
    out.top[1] = pt * c.deta[0][1] + prm.mu_plus * X[1];
    out.top[2] = Surf::Zero(nm) + prm.mu_plus * X[2];
  }
  {
    const auto Xp = stress_deviation(g, c, j, ip, 1);
    const auto Xm = stress_deviation(g, c, j, im, 1);
    Surf pj = tr(g, j.p, ip) - tr(g, j.p, im);
    if (hydrostatic) pj -= prm.density_jump() * prm.g * c.eta[1];
    for (int i = 0; i < 3; ++i) {
      Surf v = prm.mu_plus * Xp[i] - prm.mu_minus * Xm[i];
      if (i < 2) v += pj * c.deta[1][i];
      out.jump[i] = -v;
    }
  }
  return out;
}

}  // namespace

StokesPerturbation a_stokes_perturbation(const VectorField& u, const LayeredField& p, const GeometryCache& c,
                                         const FluidParams& prm, Exec exec) {
  check_grid(u, c);
  const Grid& g = *c.grid;
  const Jet j = make_jet(u, &p, true, exec);
  const SymField q = q_deviation(c);
  std::array<bool, 3> clnz;
  const auto cl = lap_first_order(c, clnz);

  std::array<Vol, 3> G1;
  Vol G2 = vol_constant(g, 0.0);
  for (int i = 0; i < 3; ++i) {
    G1[i] = scale_layers(lap_deviation(g, q, cl, clnz, j.du[i], j.ddu[i]), prm.mu_plus, prm.mu_minus) -
            grad_deviation(g, c.Adev, i, j.dp);
    for (int k = 0; k < 3; ++k)
      if (c.Adev.has(i, k)) G2 -= c.Adev(i, k) * j.du[i][k];
  }
  const StressTerms s = stress_terms(g, c, prm, j, false);
  StokesPerturbation out;
  out.G1 = to_spectral(c.grid, G1, exec);
  out.G2 = LayeredField::from_physical(c.grid, G2, Jump::Continuous, true, exec);
  out.G3plus = to_spectral(c.grid, s.top);
  out.G3minus = to_spectral(c.grid, s.jump);
  return out;
}

ForcingSet perturbations_no_st(const VectorField& u, const LayeredField& p, const GeometryCache& c,
                               const FluidParams& prm, Exec exec) {
  check_grid(u, c);
  const Grid& g = *c.grid;
  const Jet j = make_jet(u, &p, true, exec);
  const SymField q = q_deviation(c);
  std::array<bool, 3> clnz;
  const auto cl = lap_first_order(c, clnz);

  std::array<Vol, 3> G1;
  Vol G2 = vol_constant(g, 0.0);
  for (int i = 0; i < 3; ++i) {
    // u . grad_A u_i = u_m A_mk d_k u_i
    Vol adv = vol_constant(g, 0.0);
    for (int m = 0; m < 3; ++m)
      for (int k = 0; k < 3; ++k)
        if (c.Amat.has(m, k)) adv += j.u[m] * c.Amat(m, k) * j.du[i][k];
    G1[i] = scale_layers(c.W * j.du[i][2] - adv, prm.rho_plus, prm.rho_minus) +
            scale_layers(lap_deviation(g, q, cl, clnz, j.du[i], j.ddu[i]), prm.mu_plus, prm.mu_minus) -
            grad_deviation(g, c.Adev, i, j.dp);
    for (int k = 0; k < 3; ++k)
      if (c.Adev.has(i, k)) G2 -= c.Adev(i, k) * j.du[i][k];
  }
  const StressTerms s = stress_terms(g, c, prm, j, true);

  ForcingSet out;
  out.mode = Mode::NoSurfaceTension;
  out.G1 = to_spectral(c.grid, G1, exec);
  out.G2 = LayeredField::from_physical(c.grid, G2, Jump::Continuous, true, exec);
  out.G3plus = to_spectral(c.grid, s.top);
  out.G3minus = to_spectral(c.grid, s.jump);
  const std::array<Side, 2> sides{top_side(), interface_side(g, Layer::Lower)};
  for (int sf = 0; sf < 2; ++sf) {
    const Surf G4 = -(tr(g, j.u[0], sides[sf]) * c.deta[sf][0]) - tr(g, j.u[1], sides[sf]) * c.deta[sf][1];
    (sf == 0 ? out.G4plus : out.G4minus) = SurfaceField::from_physical(c.grid, G4);
  }
  return out;
}

ForcingGroups forcing_f_groups(const VectorField& u, const LayeredField& p, const GeometryCache& c,
                               const FluidParams& prm, Exec exec) {
  check_grid(u, c);
  if (!c.has_time_derivative) throw InvalidArgument("forcing f needs the time derivative of eta in the geometry");
  const Grid& g = *c.grid;
  const Jet j = make_jet(u, &p, true, exec);
  const SymField q = q_deviation(c);
  std::array<bool, 3> clnz;
  const auto cl = lap_first_order(c, clnz);
  const Vol zero = vol_constant(g, 0.0);

  // contraction sum_m F_nm u_m for a sparse matrix field
  auto apply = [&](const Mat3Field& F, int n) {
    Vol acc;
    bool any = false;
    for (int m = 0; m < 3; ++m)
      if (F.has(n, m)) accumulate(acc, any, F(n, m) * j.u[m]);
    return or_zero(g, std::move(acc), any);
  };
  // J A_ni X_n, i.e. the pull-back J A^T X
  auto pull = [&](const std::array<Vol, 3>& X, int i) {
    Vol acc = zero;
    for (int n = 0; n < 3; ++n)
      if (c.Amat.has(n, i)) acc += c.Amat(n, i) * X[n];
    return c.J * acc;
  };
  // full Q = I + (Q - I)
  auto Qfull = [&](int k, int l) {
    const int pi = pair_index(k, l);
    Vol v = q.nz[pi] ? q.e[pi] : zero;
    if (k == l) v = v + 1.0;
    return v;
  };

  ForcingGroups out;
  // 1: -rho J A_ji [dt M_jk u_k - W d3 M_jk u_k + K d_k M_jl u_k u_l]
  {
    std::array<Vol, 3> T;
    for (int jj = 0; jj < 3; ++jj) {
      Vol t = apply(c.dtM, jj) - c.W * apply(c.dM[2], jj);
      for (int k = 0; k < 3; ++k) t += c.K * j.u[k] * apply(c.dM[k], jj);
      T[jj] = std::move(t);
    }
    for (int i = 0; i < 3; ++i) out[0][i] = -scale_layers(pull(T, i), prm.rho_plus, prm.rho_minus);
  }
  // 2: rho [W d3 u_i - K u_k d_k u_i]
  for (int i = 0; i < 3; ++i) {
    Vol adv = zero;
    for (int k = 0; k < 3; ++k) adv += j.u[k] * j.du[i][k];
    out[1][i] = scale_layers(c.W * j.du[i][2] - c.K * adv, prm.rho_plus, prm.rho_minus);
  }
  // 3: mu J A_ni A_jk d_k(A_jl) d_l(M_nm) u_m
  {
    std::array<Vol, 3> T;
    for (int n = 0; n < 3; ++n) {
      Vol t = zero;
      for (int l = 0; l < 3; ++l)
        if (clnz[l]) t += cl[l] * apply(c.dM[l], n);
      T[n] = std::move(t);
    }
    for (int i = 0; i < 3; ++i) out[2][i] = scale_layers(pull(T, i), prm.mu_plus, prm.mu_minus);
  }
  // 4: mu A_jk d_k(A_jl) d_l u_i
  for (int i = 0; i < 3; ++i) {
    Vol t = zero;
    for (int l = 0; l < 3; ++l)
      if (clnz[l]) t += cl[l] * j.du[i][l];
    out[3][i] = scale_layers(t, prm.mu_plus, prm.mu_minus);
  }
  // 5: mu J A_ni Q_kl d_k d_l(M_nm) u_m
  {
    std::array<Vol, 3> T;
    for (int n = 0; n < 3; ++n) {
      Vol t = zero;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) t += Qfull(k, l) * apply(c.ddM[pair_index(k, l)], n);
      T[n] = std::move(t);
    }
    for (int i = 0; i < 3; ++i) out[4][i] = scale_layers(pull(T, i), prm.mu_plus, prm.mu_minus);
  }
  // 6: mu J A_ni Q_kl d_l(M_nm) d_k u_m,  7: mu J A_ni Q_kl d_k(M_nm) d_l u_m
  for (int group = 5; group <= 6; ++group) {
    std::array<Vol, 3> T;
    for (int n = 0; n < 3; ++n) {
      Vol t = zero;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const int a = group == 5 ? l : k;  // index carried by M
          const int b = group == 5 ? k : l;  // index carried by u
          for (int m = 0; m < 3; ++m)
            if (c.dM[a].has(n, m)) t += Qfull(k, l) * c.dM[a](n, m) * j.du[m][b];
        }
      T[n] = std::move(t);
    }
    for (int i = 0; i < 3; ++i) out[group][i] = scale_layers(pull(T, i), prm.mu_plus, prm.mu_minus);
  }
  // 8: mu (Q - I)_kl d_k d_l u_i
  for (int i = 0; i < 3; ++i) {
    Vol t = zero;
    for (int k = 0; k < 3; ++k)
      for (int l = k; l < 3; ++l) {
        const int pi = pair_index(k, l);
        if (q.nz[pi]) t += (k == l ? 1.0 : 2.0) * (q.e[pi] * j.ddu[i][pi]);
      }
    out[7][i] = scale_layers(t, prm.mu_plus, prm.mu_minus);
  }
  // 9: (delta_ki - J Q_ik) d_k p = -(J - 1) d_i p - J (Q - I)_ik d_k p
  for (int i = 0; i < 3; ++i) {
    Vol t = -(c.Jm1 * j.dp[i]);
    for (int k = 0; k < 3; ++k) {
      const int pi = pair_index(i, k);
      if (q.nz[pi]) t -= c.J * q.e[pi] * j.dp[k];
    }
    out[8][i] = std::move(t);
  }
  return out;
}

VectorField forcing_f(const VectorField& u, const LayeredField& p, const GeometryCache& c, const FluidParams& prm,
                      Exec exec) {
  const ForcingGroups groups = forcing_f_groups(u, p, c, prm, exec);
  std::array<Vol, 3> total;
  for (int i = 0; i < 3; ++i) {
    total[i] = groups[0][i];
    for (int k = 1; k < 9; ++k) total[i] += groups[k][i];
  }
  return to_spectral(c.grid, total, exec);
}

Eigen::ArrayXd curvature_remainder(const Eigen::ArrayXd& d1, const Eigen::ArrayXd& d2, const Eigen::ArrayXd& d11,
                                   const Eigen::ArrayXd& d12, const Eigen::ArrayXd& d22) {
  const Eigen::ArrayXd s = 1.0 + d1 * d1 + d2 * d2;
  const Eigen::ArrayXd lap = d11 + d22;
  return (s.rsqrt() - 1.0) * lap - s.pow(-1.5) * (d1 * d1 * d11 + 2.0 * d1 * d2 * d12 + d2 * d2 * d22);
}

BoundaryForcing forcing_g(const VectorField& u, const GeometryCache& c, const FluidParams& prm, Exec exec) {
  check_grid(u, c);
  const Grid& g = *c.grid;
  const Jet j = make_jet(u, nullptr, false, exec);
  const int nm = g.nmodes();

  // side terms: mu J T^i . D_A(Mu) N, mu N . D_A(Mu) N / |N|^2, mu (Du e3)_i, mu d3 u3
  struct SideTerms {
    std::array<Surf, 2> tn;
    Surf nn;
    std::array<Surf, 2> due3;
    Surf d33;
  };
  auto side_terms = [&](Side side, int surf, double mu) {
    const auto& N = c.N[surf];
    std::array<Surf, 3> uu;
    std::array<std::array<Surf, 3>, 3> du;
    for (int i = 0; i < 3; ++i) {
      uu[i] = tr(g, j.u[i], side);
      for (int k = 0; k < 3; ++k) du[i][k] = tr(g, j.du[i][k], side);
    }
    // d_k (Mu)_jj = M_jj,l d_k u_l + d_k(M_jj,l) u_l
    std::array<std::array<Surf, 3>, 3> dMu;
    for (int jj = 0; jj < 3; ++jj)
      for (int k = 0; k < 3; ++k) {
        Surf acc = Surf::Zero(nm);
        for (int l = 0; l < 3; ++l) {
          if (c.M.has(jj, l)) acc += tr(g, c.M(jj, l), side) * du[l][k];
          if (c.dM[k].has(jj, l)) acc += tr(g, c.dM[k](jj, l), side) * uu[l];
        }
        dMu[jj][k] = std::move(acc);
      }
    // Q_ij = A_ik d_k (Mu)_j
    std::array<std::array<Surf, 3>, 3> Q;
    for (int i = 0; i < 3; ++i)
      for (int jj = 0; jj < 3; ++jj) {
        Surf acc = Surf::Zero(nm);
        for (int k = 0; k < 3; ++k)
          if (c.Amat.has(i, k)) acc += tr(g, c.Amat(i, k), side) * dMu[jj][k];
        Q[i][jj] = std::move(acc);
      }
    // (D_A(Mu) N)_i
    std::array<Surf, 3> DN;
    for (int i = 0; i < 3; ++i) {
      Surf acc = Surf::Zero(nm);
      for (int jj = 0; jj < 3; ++jj) acc += (Q[i][jj] + Q[jj][i]) * N[jj];
      DN[i] = std::move(acc);
    }
    const Surf Jt = tr(g, c.J, side);
    const Surf n2 = N[0] * N[0] + N[1] * N[1] + N[2] * N[2];
    SideTerms s;
    for (int i = 0; i < 2; ++i) {
      const auto& T = c.T[surf][i];
      s.tn[i] = mu * Jt * (T[0] * DN[0] + T[1] * DN[1] + T[2] * DN[2]);
      s.due3[i] = mu * (du[i][2] + du[2][i]);
    }
    s.nn = mu * (N[0] * DN[0] + N[1] * DN[1] + N[2] * DN[2]) / n2;
    s.d33 = mu * du[2][2];
    return s;
  };
  auto curv = [&](int surf) {
    return curvature_remainder(c.deta[surf][0], c.deta[surf][1], c.ddeta[surf][0], c.ddeta[surf][1],
                               c.ddeta[surf][2]);
  };

  std::array<Surf, 3> gp, gm;
  {
    const SideTerms s = side_terms(top_side(), 0, prm.mu_plus);
    for (int i = 0; i < 2; ++i) gp[i] = s.tn[i] - s.due3[i];
    gp[2] = s.nn - 2.0 * s.d33 - prm.sigma_plus * curv(0);
  }
  {
    const SideTerms a = side_terms(interface_side(g, Layer::Upper), 1, prm.mu_plus);
    const SideTerms b = side_terms(interface_side(g, Layer::Lower), 1, prm.mu_minus);
    for (int i = 0; i < 2; ++i) gm[i] = -((a.tn[i] - b.tn[i]) - (a.due3[i] - b.due3[i]));
    gm[2] = -((a.nn - b.nn) - 2.0 * (a.d33 - b.d33) + prm.sigma_minus * curv(1));
  }
  return {to_spectral(c.grid, gp), to_spectral(c.grid, gm)};
}

SurfaceField kinematic_rate(const VectorField& u, const SurfaceField& eta, int surface) {
  const GridPtr& gp = u[0].grid();
  const Grid& g = *gp;
  const Side side = surface == 0 ? top_side() : interface_side(g, Layer::Lower);
  auto trace = [&](int i) { return u[i].slice(side.layer, side.node); };
  const Surf u1 = trace(0).physical(), u2 = trace(1).physical();
  const Surf G4 = -(u1 * eta.d(0).physical()) - u2 * eta.d(1).physical();
  return trace(2) + SurfaceField::from_physical(gp, G4);
}

}  // namespace siw
