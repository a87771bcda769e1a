#include "chb/model.hpp"

#include <cmath>
#include <stdexcept>

namespace chb {

double Mobility::operator()(double phi, double eps) const {
  if (kind == Kind::kConstant) return m0;
  const double w = 1.0 - phi * phi;
  return std::sqrt(w * w + eps * eps) / pe;
}

void PhysicalParams::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (s_stab < 0.0) throw std::invalid_argument("S must be nonnegative");
  if (c0 < 0.0) throw std::invalid_argument("c0 must be nonnegative");
  if (mobility.is_constant()) {
    if (!(mobility.m0 > 0.0))
      throw std::invalid_argument("mobility must be positive");
  } else if (!(mobility.pe > 0.0)) {
    throw std::invalid_argument("Peclet number must be positive");
  }
  if (buoyancy && !(buoyancy->lambda >= 0.0))
    throw std::invalid_argument("buoyancy strength must be nonnegative");
}

double double_well(double phi) {
  const double w = phi * phi - 1.0;
  return 0.25 * w * w;
}

double double_well_prime(double phi) { return phi * (phi * phi - 1.0); }

namespace {

// dealias -> cube pointwise -> dealias; the only aliasing source in the
// model is this cubic.
ScalarField guarded_cube(const ScalarField& phi) {
  ScalarField d = dealias(phi);
  ScalarField cube(phi.grid());
  auto src = d.real();
  auto dst = cube.real_mut();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = src[i] * src[i] * src[i];
  return dealias(cube);
}

}  // namespace

ScalarField f_prime_stabilized(const ScalarField& phi, double s_stab) {
  ScalarField out = guarded_cube(phi);
  auto s = out.spec_mut();
  auto ps = phi.spec();
  const double c = s_stab + 1.0;
  for (std::size_t i = 0; i < s.size(); ++i) s[i] -= c * ps[i];
  return out;
}

ScalarField chemical_potential(const ScalarField& phi,
                               const PhysicalParams& par) {
  ScalarField out = guarded_cube(phi);
  auto s = out.spec_mut();
  auto ps = phi.spec();
  const auto& g = *phi.grid();
  const int nxs = g.spec_nx();
  const double e2 = par.eps * par.eps;
  for (int iy = 0; iy < g.n(); ++iy) {
    const double ky = g.ky(iy);
    for (int jx = 0; jx < nxs; ++jx) {
      const std::size_t i = static_cast<std::size_t>(iy) * nxs + jx;
      const double k2 = g.kx(jx) * g.kx(jx) + ky * ky;
      s[i] += (e2 * k2 - 1.0) * ps[i];
    }
  }
  return out;
}

ScalarField mobility_field(const ScalarField& phi, const PhysicalParams& par) {
  ScalarField out(phi.grid());
  auto dst = out.real_mut();
  if (par.mobility.is_constant()) {
    for (auto& v : dst) v = par.mobility.m0;
    return out;
  }
  ScalarField d = dealias(phi);
  auto src = d.real();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = par.mobility(src[i], par.eps);
  return out;
}

double energy(const ScalarField& phi, const PhysicalParams& par) {
  const double grad_part =
      0.5 * par.eps * par.eps * grad_squared_integral(phi);
  double bulk = 0.0;
  for (double v : phi.real()) bulk += double_well(v);
  return grad_part + bulk * phi.grid()->cell_area();
}

double shifted_energy(const ScalarField& phi, const PhysicalParams& par) {
  return energy(phi, par) + par.c0;
}

namespace {

// int |D(u)|^2 with D = grad u + (grad u)^T, via Parseval:
// |D|^2 = 4(dx u1)^2 + 2(dy u1 + dx u2)^2 + 4(dy u2)^2.
double deformation_squared_integral(const VectorField& u) {
  const auto& g = *u.grid();
  auto ux = u.x.spec();
  auto uy = u.y.spec();
  const int nxs = g.spec_nx();
  const int n = g.n();
  double sum = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    const double ky = g.ky(iy);
    for (int jx = 0; jx < nxs; ++jx) {
      const std::size_t i = static_cast<std::size_t>(iy) * nxs + jx;
      const double mult = (jx == 0 || 2 * jx == n) ? 1.0 : 2.0;
      const double kx = g.kx(jx);
      const double dxu1 = kx * kx * std::norm(ux[i]);
      const double dyu2 = ky * ky * std::norm(uy[i]);
      const double off = std::norm(ky * ux[i] + kx * uy[i]);
      sum += mult * (4.0 * dxu1 + 2.0 * off + 4.0 * dyu2);
    }
  }
  return sum * g.length() * g.length();
}

}  // namespace

double dissipation_rate(const ScalarField& phi, const ScalarField& mu,
                        const VectorField& u, const PhysicalParams& par) {
  require_same_grid(phi, mu);
  require_same_grid(phi, u.x);

  double mobility_part = 0.0;
  if (par.mobility.is_constant()) {
    mobility_part = par.mobility.m0 * grad_squared_integral(mu);
  } else {
    ScalarField m = mobility_field(phi, par);
    VectorField gm = gradient(mu);
    auto mv = m.real();
    auto gx = gm.x.real();
    auto gy = gm.y.real();
    double sum = 0.0;
    for (std::size_t i = 0; i < mv.size(); ++i)
      sum += mv[i] * (gx[i] * gx[i] + gy[i] * gy[i]);
    mobility_part = sum * phi.grid()->cell_area();
  }

  const double u_sq = inner(u.x, u.x) + inner(u.y, u.y);
  const double d_sq = deformation_squared_integral(u);
  return mobility_part + (par.eta / par.gamma) * u_sq +
         0.5 * (par.nu / par.gamma) * d_sq;
}

VectorField buoyancy_force(const ScalarField& phi, const PhysicalParams& par) {
  VectorField b(phi.grid());
  if (!par.buoyancy) return b;
  const double lambda = par.buoyancy->lambda;
  const double bar = par.buoyancy->phi_bar;
  auto src = phi.real();
  auto by = b.y.real_mut();
  for (std::size_t i = 0; i < by.size(); ++i)
    by[i] = -lambda * (src[i] - bar);
  return b;
}

}  // namespace chb
