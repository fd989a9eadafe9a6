#include "siw/geometry.hpp"
#include "siw/parallel.hpp"

#include <cmath>
#include <sstream>

namespace siw {

ExtensionSpec vandermonde_coeffs(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw InvalidArgument("extension needs at least one lambda");
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (!(lambdas[j] > 0.0)) throw InvalidArgument("extension lambdas must be strictly positive");
    if (j > 0 && !(lambdas[j] > lambdas[j - 1]))
      throw InvalidArgument("extension lambdas must be strictly increasing");
  }
  const int n = static_cast<int>(lambdas.size());
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) V(i, j) = std::pow(-lambdas[j], i);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
  const auto& s = svd.singularValues();
  const double cond = s[0] / s[n - 1];
  if (!(cond <= 1e12)) {
    std::ostringstream os;
    os << "Vandermonde system for extension order m=" << n - 1 << " is ill-conditioned (cond ~ " << cond << ")";
    throw ConditioningError(os.str());
  }
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
  Eigen::VectorXd a = lu.solve(rhs);
  a += lu.solve(rhs - V * a);
  ExtensionSpec spec;
  spec.m = n - 1;
  spec.lambdas = lambdas;
  spec.alphas.assign(a.data(), a.data() + n);
  spec.residual = (V * a - rhs).cwiseAbs().maxCoeff();
  if (spec.residual > 1e-12) {
    std::ostringstream os;
    os << "Vandermonde residual " << spec.residual << " exceeds 1e-12 for m=" << spec.m;
    throw ConditioningError(os.str());
  }
  return spec;
}

ExtensionSpec default_extension() { return vandermonde_coeffs({1.0, 2.0, 4.0, 8.0, 16.0}); }

namespace {

// vertical profile factor of the extension for one mode at one height
double upper_profile(double nabs, double z, int k) { return std::pow(nabs, k) * std::exp(nabs * (z - 1.0)); }

double lower_profile(double nabs, double z, bool above, const ExtensionSpec& spec, int k) {
  if (!above) return std::pow(nabs, k) * std::exp(nabs * z);
  double s = 0.0;
  for (std::size_t j = 0; j < spec.alphas.size(); ++j) {
    const double r = -nabs * spec.lambdas[j];
    s += spec.alphas[j] * std::pow(r, k) * std::exp(r * z);
  }
  return s;
}

template <class Profile>
LayeredField extend(const SurfaceField& eta, int dz_order, Profile profile) {
  if (dz_order < 0) throw InvalidArgument("negative derivative order");
  const GridPtr& g = eta.grid();
  LayeredField out(g, Jump::Continuous);
  const int nm = g->nmodes();
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const auto& z = g->layer(l).z();
    for (int j = 0; j < z.size(); ++j)
      for (int m = 0; m < nm; ++m) {
        if (eta[m] == 0.0) continue;
        if (m == 0) {
          out.at(l, j, m) = dz_order == 0 ? eta[m] : 0.0;
          continue;
        }
        out.at(l, j, m) = eta[m] * profile(g->nabs(m), z[j], l);
      }
  }
  return out;
}

}  // namespace

LayeredField poisson_extend_upper(const SurfaceField& eta, int dz_order) {
  return extend(eta, dz_order, [&](double nabs, double z, Layer) { return upper_profile(nabs, z, dz_order); });
}

LayeredField poisson_extend_lower(const SurfaceField& eta, const ExtensionSpec& spec, int dz_order) {
  if (spec.alphas.size() != spec.lambdas.size() || spec.alphas.empty())
    throw InvalidArgument("invalid extension spec");
  return extend(eta, dz_order, [&](double nabs, double z, Layer l) {
    return lower_profile(nabs, z, l == Layer::Upper, spec, dz_order);
  });
}

double evaluate_extension(const SurfaceField& eta, ExtensionKind kind, const ExtensionSpec& spec, double x1,
                          double x2, double x3, int d1, int d2, int d3) {
  const Grid& g = *eta.grid();
  double acc = 0.0;
  for (int m = 0; m < g.nmodes(); ++m) {
    if (eta[m] == 0.0) continue;
    const double n1 = g.n1(m), n2 = g.n2(m);
    const cplx phase = std::exp(cplx(0.0, n1 * x1 + n2 * x2)) * std::pow(cplx(0.0, n1), d1) *
                       std::pow(cplx(0.0, n2), d2);
    double prof;
    if (m == 0) {
      prof = d3 == 0 ? 1.0 : 0.0;
    } else if (kind == ExtensionKind::Upper) {
      prof = upper_profile(g.nabs(m), x3, d3);
    } else {
      prof = lower_profile(g.nabs(m), x3, x3 > 0.0, spec, d3);
    }
    acc += (eta[m] * phase).real() * prof;
  }
  return acc;
}

TransformComponents transform_components(Layer layer, double x3, const ExtensionValues& e, double b, double db1,
                                         double db2) {
  const double bt = 1.0 + x3 / b;
  const double c = 1.0 + 1.0 / b;
  const double b2 = b * b;
  TransformComponents t{};
  if (layer == Layer::Upper) {
    const double z2 = x3 * x3;
    t.A = z2 * (e.ep1 - c * e.em1 + db1 * e.em / b2) + e.em1 * bt - x3 * e.em * db1 / b2;
    t.B = z2 * (e.ep2 - c * e.em2 + db2 * e.em / b2) + e.em2 * bt - x3 * e.em * db2 / b2;
    t.J = 2.0 * x3 * (e.ep - c * e.em) + z2 * (e.ep3 - c * e.em3) + 1.0 + e.em / b + e.em3 * bt;
  } else {
    t.A = e.em1 * bt - x3 * e.em * db1 / b2;
    t.B = e.em2 * bt - x3 * e.em * db2 / b2;
    t.J = 1.0 + e.em / b + e.em3 * bt;
  }
  return t;
}

double theta3(Layer layer, double x3, double ep, double em, double b) {
  const double bt = 1.0 + x3 / b;
  if (layer == Layer::Upper) return x3 * x3 * (ep - (1.0 + 1.0 / b) * em) + x3 + bt * em;
  return x3 + bt * em;
}

namespace {

struct ExtPhys {
  Vol v, d1, d2, d3;
};

ExtPhys ext_phys(const LayeredField& e, const LayeredField& e3, Exec exec) {
  return {e.physical(exec), e.d(0).physical(exec), e.d(1).physical(exec), e3.physical(exec)};
}

// flat-bottom components on a whole volume; returns (A, B, J-1)
std::array<Vol, 3> flat_components(const Grid& g, const Vol& z, const ExtPhys& p, const ExtPhys& m) {
  const double b = g.b0();
  const double c = 1.0 + 1.0 / b;
  std::array<Vol, 3> out;
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const Eigen::ArrayXd& zz = z.layer(l);
    const Eigen::ArrayXd bt = 1.0 + zz / b;
    if (l == Layer::Upper) {
      const Eigen::ArrayXd z2 = zz * zz;
      out[0].up = z2 * (p.d1.up - c * m.d1.up) + m.d1.up * bt;
      out[1].up = z2 * (p.d2.up - c * m.d2.up) + m.d2.up * bt;
      out[2].up = 2.0 * zz * (p.v.up - c * m.v.up) + z2 * (p.d3.up - c * m.d3.up) + m.v.up / b + m.d3.up * bt;
    } else {
      out[0].lo = m.d1.lo * bt;
      out[1].lo = m.d2.lo * bt;
      out[2].lo = m.v.lo / b + m.d3.lo * bt;
    }
  }
  return out;
}

Vol theta3_dev(const Grid& g, const Vol& z, const ExtPhys& p, const ExtPhys& m) {
  const double b = g.b0();
  const double c = 1.0 + 1.0 / b;
  Vol out;
  const Eigen::ArrayXd btu = 1.0 + z.up / b;
  out.up = z.up * z.up * (p.v.up - c * m.v.up) + btu * m.v.up;
  out.lo = (1.0 + z.lo / b) * m.v.lo;
  return out;
}

}  // namespace

GeometryCache build_geometry(const SurfaceField& eta_plus, const SurfaceField& eta_minus,
                             const std::optional<SurfaceField>& dt_eta_plus,
                             const std::optional<SurfaceField>& dt_eta_minus, const FluidParams& params,
                             const ExtensionSpec& spec, Exec exec) {
  const GridPtr& gp = eta_plus.grid();
  const Grid& g = *gp;
  if (eta_minus.grid() != gp) throw InvalidArgument("surfaces live on different grids");
  if (std::abs(params.b0 - g.b0()) > 1e-14 * g.b0()) throw InvalidArgument("params.b0 differs from grid b0");
  if (dt_eta_plus.has_value() != dt_eta_minus.has_value())
    throw InvalidArgument("time derivatives must be given for both surfaces or neither");

  GeometryCache c;
  c.grid = gp;
  c.params = params;
  c.spec = spec;
  c.eta_plus = eta_plus;
  c.eta_minus = eta_minus;
  c.has_time_derivative = dt_eta_plus.has_value();
  c.dt_eta_plus = dt_eta_plus.value_or(SurfaceField(gp));
  c.dt_eta_minus = dt_eta_minus.value_or(SurfaceField(gp));

  c.eta_bar_plus = poisson_extend_upper(eta_plus);
  c.eta_bar_minus = poisson_extend_lower(eta_minus, spec);
  const ExtPhys P = ext_phys(c.eta_bar_plus, poisson_extend_upper(eta_plus, 1), exec);
  const ExtPhys Mx = ext_phys(c.eta_bar_minus, poisson_extend_lower(eta_minus, spec, 1), exec);

  c.x3 = vol_x3(g);
  c.btilde = c.x3 * (1.0 / g.b0()) + 1.0;
  auto comps = flat_components(g, c.x3, P, Mx);
  c.A = comps[0];
  c.B = comps[1];
  c.Jm1 = comps[2];
  c.J = c.Jm1 + 1.0;
  c.K = vol_constant(g, 1.0) / c.J;
  c.Km1 = -(c.Jm1 * c.K);
  c.AK = c.A * c.K;
  c.BK = c.B * c.K;

  if (c.has_time_derivative) {
    const ExtPhys Pt = ext_phys(poisson_extend_upper(c.dt_eta_plus), poisson_extend_upper(c.dt_eta_plus, 1), exec);
    const ExtPhys Mt = ext_phys(poisson_extend_lower(c.dt_eta_minus, spec),
                                poisson_extend_lower(c.dt_eta_minus, spec, 1), exec);
    auto tc = flat_components(g, c.x3, Pt, Mt);
    c.At = tc[0];
    c.Bt = tc[1];
    c.Jt = tc[2];
    c.W = theta3_dev(g, c.x3, Pt, Mt) * c.K;
  } else {
    const Vol zero = vol_constant(g, 0.0);
    c.At = c.Bt = c.Jt = c.W = zero;
  }
  c.Kt = -(c.K * c.K * c.Jt);

  // diffeomorphism report
  DiffeoReport& d = c.diffeo;
  d.min_j = std::numeric_limits<double>::infinity();
  d.max_j = -d.min_j;
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const Eigen::ArrayXd& Jl = c.J.layer(l);
    Eigen::Index idx;
    const double mn = Jl.minCoeff(&idx);
    if (mn < d.min_j) {
      d.min_j = mn;
      d.min_layer = l;
      d.min_node = int(idx / g.nmodes());
      d.min_point = int(idx % g.nmodes());
    }
    d.max_j = std::max(d.max_j, Jl.maxCoeff());
  }
  d.ok = d.min_j > 0.0;
  if (!d.ok) {
    std::ostringstream os;
    const int i1 = d.min_point / g.N2(), i2 = d.min_point % g.N2();
    os << "flattening map is not a diffeomorphism: min J = " << d.min_j << " at x1=" << g.x1(i1)
       << ", x2=" << g.x2(i2) << ", x3=" << g.layer(d.min_layer).z()[d.min_node];
    throw DiffeoError(os.str(), d.min_j);
  }

  const Vol one = vol_constant(g, 1.0);
  // Amat = [[1,0,-AK],[0,1,-BK],[0,0,K]]
  c.Amat.set(0, 0, one);
  c.Amat.set(1, 1, one);
  c.Amat.set(0, 2, -c.AK);
  c.Amat.set(1, 2, -c.BK);
  c.Amat.set(2, 2, c.K);
  c.Adev.set(0, 2, -c.AK);
  c.Adev.set(1, 2, -c.BK);
  c.Adev.set(2, 2, c.Km1);
  // grad Theta = [[1,0,0],[0,1,0],[A,B,J]]
  c.theta.set(0, 0, one);
  c.theta.set(1, 1, one);
  c.theta.set(2, 0, c.A);
  c.theta.set(2, 1, c.B);
  c.theta.set(2, 2, c.J);
  // M = K grad Theta
  c.M.set(0, 0, c.K);
  c.M.set(1, 1, c.K);
  c.M.set(2, 0, c.AK);
  c.M.set(2, 1, c.BK);
  c.M.set(2, 2, one);
  const Vol AKt = c.At * c.K + c.A * c.Kt;
  const Vol BKt = c.Bt * c.K + c.B * c.Kt;
  c.dtM.set(0, 0, c.Kt);
  c.dtM.set(1, 1, c.Kt);
  c.dtM.set(2, 0, AKt);
  c.dtM.set(2, 1, BKt);
  // M^{-1} = [[J,0,0],[0,J,0],[-A,-B,1]]
  c.R.set(0, 0, c.Kt * c.J);
  c.R.set(1, 1, c.Kt * c.J);
  c.R.set(2, 0, AKt * c.J);
  c.R.set(2, 1, BKt * c.J);

  // derivatives of the deviation fields Km1, AK, BK
  const SpectralView sk(gp, c.Km1, exec), sa(gp, c.AK, exec), sb(gp, c.BK, exec);
  for (int k = 0; k < 3; ++k) {
    const Vol dK = sk.d(k), dAK = sa.d(k), dBK = sb.d(k);
    c.dA[k].set(0, 2, -dAK);
    c.dA[k].set(1, 2, -dBK);
    c.dA[k].set(2, 2, dK);
    c.dM[k].set(0, 0, dK);
    c.dM[k].set(1, 1, dK);
    c.dM[k].set(2, 0, dAK);
    c.dM[k].set(2, 1, dBK);
    for (int l = k; l < 3; ++l) {
      const int p = pair_index(k, l);
      const Vol ddK = sk.dd(k, l);
      c.ddM[p].set(0, 0, ddK);
      c.ddM[p].set(1, 1, ddK);
      c.ddM[p].set(2, 0, sa.dd(k, l));
      c.ddM[p].set(2, 1, sb.dd(k, l));
    }
  }

  // surface quantities
  const std::array<const SurfaceField*, 2> etas{&eta_plus, &eta_minus};
  for (int s = 0; s < 2; ++s) {
    const SurfaceField& e = *etas[s];
    c.eta[s] = e.physical();
    c.deta[s][0] = e.d(0).physical();
    c.deta[s][1] = e.d(1).physical();
    c.ddeta[s][0] = e.d(0).d(0).physical();
    c.ddeta[s][1] = e.d(0).d(1).physical();
    c.ddeta[s][2] = e.d(1).d(1).physical();
    c.N[s] = {-c.deta[s][0], -c.deta[s][1], Eigen::ArrayXd::Ones(g.nmodes())};
    const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(g.nmodes());
    const Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(g.nmodes());
    c.T[s][0] = {ones, zero, c.deta[s][0]};
    c.T[s][1] = {zero, ones, c.deta[s][1]};
  }
  return c;
}

DiffeoReport check_diffeo(const GeometryCache& cache, double j_floor) {
  DiffeoReport r = cache.diffeo;
  r.ok = r.min_j >= j_floor;
  return r;
}

}  // namespace siw
