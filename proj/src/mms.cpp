#include "chb/mms.hpp"

#include <cmath>
#include <stdexcept>

namespace chb::mms {

namespace {

template <class F>
ScalarField sample(const GridPtr& grid, F&& f) {
  ScalarField out(grid);
  auto v = out.real_mut();
  const int n = grid->n();
  for (int iy = 0; iy < n; ++iy) {
    const double y = grid->node_y(iy);
    for (int ix = 0; ix < n; ++ix)
      v[static_cast<std::size_t>(iy) * n + ix] = f(grid->node_x(ix), y);
  }
  return out;
}

}  // namespace

PhysicalParams reference_params() {
  PhysicalParams par;
  par.eps = 1.0;
  par.gamma = 2.0;
  par.nu = 1.0;
  par.eta = 1.0;
  par.s_stab = 0.0;
  par.c0 = 0.0;
  par.mobility = Mobility::constant(1.0);
  return par;
}

ScalarField exact_phi(const GridPtr& grid, double t) {
  const double ct = std::cos(t);
  return sample(grid, [ct](double x, double y) {
    return std::cos(x) * std::sin(y) * ct;
  });
}

VectorField exact_velocity(const GridPtr& grid, double t) {
  const double st = std::sin(t);
  return {sample(grid,
                 [st](double x, double y) {
                   return std::sin(x) * std::sin(y) * st;
                 }),
          sample(grid, [st](double x, double y) {
            return std::cos(x) * std::cos(y) * st;
          })};
}

ScalarField exact_pressure(const GridPtr& grid, double t) {
  const double st = std::sin(t);
  return sample(grid, [st](double x, double y) {
    return std::cos(x) * std::sin(y) * st;
  });
}

FieldState exact_state(const GridPtr& grid, double t,
                       const PhysicalParams& par) {
  ScalarField phi = exact_phi(grid, t);
  ScalarField mu = chemical_potential(phi, par);
  return {t, std::move(phi), std::move(mu), exact_velocity(grid, t),
          exact_pressure(grid, t)};
}

StepSources forcing(const GridPtr& grid, double t, const PhysicalParams& par) {
  if (!par.mobility.is_constant())
    throw std::invalid_argument("sources are defined for constant mobility");
  const double m0 = par.mobility.m0;

  ScalarField phi = exact_phi(grid, t);
  VectorField u = exact_velocity(grid, t);
  ScalarField p = exact_pressure(grid, t);
  ScalarField mu = chemical_potential(phi, par);

  const double st = std::sin(t);
  ScalarField phi_t = sample(grid, [st](double x, double y) {
    return -std::cos(x) * std::sin(y) * st;
  });

  ScalarField lap_mu = laplacian(mu);
  VectorField grad_mu = gradient(mu);
  VectorField grad_p = gradient(p);

  // div(u phi) from the pointwise flux; the exact fields are band-limited
  // far inside the grid, so the products are alias-free
  VectorField flux(grid);
  {
    auto ph = phi.real();
    auto ux = u.x.real();
    auto uy = u.y.real();
    auto fx = flux.x.real_mut();
    auto fy = flux.y.real_mut();
    for (std::size_t i = 0; i < fx.size(); ++i) {
      fx[i] = ux[i] * ph[i];
      fy[i] = uy[i] * ph[i];
    }
  }
  ScalarField conv = divergence(flux);

  StepSources src{ScalarField(grid), VectorField(grid)};
  {
    auto g = src.g_phi.real_mut();
    auto pt = phi_t.real();
    auto lm = lap_mu.real();
    auto cv = conv.real();
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = pt[i] - m0 * lm[i] + cv[i];
  }

  // -nu div D(u) with D(u) = grad u + (grad u)^T
  ScalarField dxx = scaled(gradient_x(u.x), 2.0);
  ScalarField dyy = scaled(gradient_y(u.y), 2.0);
  ScalarField dxy(grid);
  {
    ScalarField gyx = gradient_y(u.x);
    ScalarField gxy = gradient_x(u.y);
    auto s = dxy.spec_mut();
    auto a = gyx.spec();
    auto b = gxy.spec();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = a[i] + b[i];
  }
  ScalarField div_d_x(grid), div_d_y(grid);
  {
    auto sx = div_d_x.spec_mut();
    auto sy = div_d_y.spec_mut();
    ScalarField t1 = gradient_x(dxx);
    ScalarField t2 = gradient_y(dxy);
    ScalarField t3 = gradient_x(dxy);
    ScalarField t4 = gradient_y(dyy);
    auto a1 = t1.spec();
    auto a2 = t2.spec();
    auto a3 = t3.spec();
    auto a4 = t4.spec();
    for (std::size_t i = 0; i < sx.size(); ++i) {
      sx[i] = a1[i] + a2[i];
      sy[i] = a3[i] + a4[i];
    }
  }

  {
    auto gx = src.g_u.x.real_mut();
    auto gy = src.g_u.y.real_mut();
    auto ph = phi.real();
    auto ux = u.x.real();
    auto uy = u.y.real();
    auto ddx = div_d_x.real();
    auto ddy = div_d_y.real();
    auto px = grad_p.x.real();
    auto py = grad_p.y.real();
    auto mx = grad_mu.x.real();
    auto my = grad_mu.y.real();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] = -par.nu * ddx[i] + par.eta * ux[i] + px[i] +
              par.gamma * ph[i] * mx[i];
      gy[i] = -par.nu * ddy[i] + par.eta * uy[i] + py[i] +
              par.gamma * ph[i] * my[i];
    }
  }
  return src;
}

History bootstrap_history(const GridPtr& grid, int order, double tau,
                          double t0, const PhysicalParams& par) {
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument("order must be in 1..4");
  if (!(tau > 0.0)) throw std::invalid_argument("step size must be positive");
  History hist(shifted_energy(exact_phi(grid, t0), par));
  for (int j = order - 1; j >= 0; --j) {
    FieldState s = exact_state(grid, t0 - j * tau, par);
    const double e1 = shifted_energy(s.phi, par);
    hist.push(std::move(s), e1);
  }
  return hist;
}

namespace {

double l2_diff(const ScalarField& a, const ScalarField& b) {
  ScalarField d(a.grid());
  auto s = d.spec_mut();
  auto sa = a.spec();
  auto sb = b.spec();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = sa[i] - sb[i];
  return l2_norm(d);
}

}  // namespace

ErrorTable accuracy_run(int n, int order, double tau, double t_final,
                        const PhysicalParams& par) {
  if (!(t_final > 0.0)) throw std::invalid_argument("final time must be positive");
  GridPtr grid = make_grid(n);
  const long nsteps = std::max(1L, std::lround(t_final / tau));
  const double tau_eff = t_final / static_cast<double>(nsteps);

  History hist = bootstrap_history(grid, order, tau_eff, 0.0, par);
  for (long i = 0; i < nsteps; ++i) {
    StepSources src = forcing(grid, hist.t() + tau_eff, par);
    StepOutcome out = step(hist, par, tau_eff, order, &src);
    hist.push(std::move(out.state), out.e1_new);
    hist.set_r(out.r_new);
  }

  const double t_end = hist.t();
  const FieldState& num = hist.state(0);
  ErrorTable err;
  err.tau = tau_eff;
  err.phi = l2_diff(num.phi, exact_phi(grid, t_end));
  VectorField ue = exact_velocity(grid, t_end);
  err.u1 = l2_diff(num.u.x, ue.x);
  err.u2 = l2_diff(num.u.y, ue.y);
  ScalarField pe = exact_pressure(grid, t_end);
  err.px = l2_diff(gradient_x(num.p), gradient_x(pe));
  err.py = l2_diff(gradient_y(num.p), gradient_y(pe));
  return err;
}

}  // namespace chb::mms
