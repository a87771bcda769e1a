#include "chb/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chb {

void History::push(FieldState state, double e1) {
  entries_.insert(entries_.begin(), Entry{std::move(state), e1});
  if (entries_.size() > static_cast<std::size_t>(kMaxOrder))
    entries_.pop_back();
}

namespace {

BdfCoeffs coeffs_for(const History& hist, double tau, int order) {
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument("step order must be in 1..4");
  if (hist.size() < order)
    throw std::invalid_argument("history holds fewer levels than the order");
  if (!(tau > 0.0)) throw std::invalid_argument("step size must be positive");
  std::array<double, kMaxOrder + 1> times{};
  for (int j = 0; j < order; ++j) times[order - 1 - j] = hist.state(j).t;
  times[order] = hist.t() + tau;
  return bdf_weights(order, std::span(times.data(), order + 1));
}

// Weighted spectral combination of history fields, newest first.
template <class Get>
ScalarField combo(const History& hist, std::span<const double> w, int count,
                  Get get) {
  ScalarField out(get(hist.state(0)).grid());
  auto s = out.spec_mut();
  for (int j = 0; j < count; ++j) {
    auto h = get(hist.state(j)).spec();
    const double wj = w[j];
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += wj * h[i];
  }
  return out;
}

ScalarField extrapolated_phi(const History& hist, const BdfCoeffs& c) {
  return combo(hist, c.b, c.order,
               [](const FieldState& s) -> const ScalarField& { return s.phi; });
}

ScalarField extrapolated_mu(const History& hist, const BdfCoeffs& c) {
  return combo(hist, c.b, c.order,
               [](const FieldState& s) -> const ScalarField& { return s.mu; });
}

}  // namespace

PhaseResult phase_solve(const History& hist, const PhysicalParams& par,
                        double tau, int order, const ScalarField* g_phi) {
  par.validate();
  const BdfCoeffs c = coeffs_for(hist, tau, order);
  const GridPtr grid = hist.state(0).phi.grid();
  const auto& g = *grid;

  // rhs = A_k(phi)/tau
  ScalarField rhs = combo(hist, c.a, order, [](const FieldState& s) -> const ScalarField& {
    return s.phi;
  });
  {
    auto s = rhs.spec_mut();
    const double inv_tau = 1.0 / tau;
    for (auto& v : s) v *= inv_tau;
  }

  ScalarField phi_star = extrapolated_phi(hist, c);
  ScalarField phi_d = dealias(phi_star);

  // advection: div(B(u) B(phi)), products dealiased
  {
    ScalarField ux = dealias(combo(
        hist, c.b, order,
        [](const FieldState& s) -> const ScalarField& { return s.u.x; }));
    ScalarField uy = dealias(combo(
        hist, c.b, order,
        [](const FieldState& s) -> const ScalarField& { return s.u.y; }));
    VectorField w(grid);
    auto pd = phi_d.real();
    auto uxr = ux.real();
    auto uyr = uy.real();
    auto wx = w.x.real_mut();
    auto wy = w.y.real_mut();
    for (std::size_t i = 0; i < wx.size(); ++i) {
      wx[i] = uxr[i] * pd[i];
      wy[i] = uyr[i] * pd[i];
    }
    ScalarField conv = divergence({dealias(w.x), dealias(w.y)});
    auto s = rhs.spec_mut();
    auto cv = conv.spec();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] -= cv[i];
  }

  ScalarField fp = f_prime_stabilized(phi_star, par.s_stab);

  // Mobility split: the grid maximum of M(B(phi)) goes implicit, the
  // deviation is treated explicitly with the extrapolated mu.
  double m0 = par.mobility.m0;
  if (!par.mobility.is_constant()) {
    ScalarField mf = mobility_field(phi_star, par);
    auto mv = mf.real();
    m0 = *std::max_element(mv.begin(), mv.end());

    ScalarField mu_star = extrapolated_mu(hist, c);
    VectorField gm = gradient(dealias(mu_star));
    VectorField dev(grid);
    auto gx = gm.x.real();
    auto gy = gm.y.real();
    auto dx = dev.x.real_mut();
    auto dy = dev.y.real_mut();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double dm = mv[i] - m0;
      dx[i] = dm * gx[i];
      dy[i] = dm * gy[i];
    }
    ScalarField div_dev = divergence({dealias(dev.x), dealias(dev.y)});
    auto s = rhs.spec_mut();
    auto dv = div_dev.spec();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += dv[i];
  }

  if (g_phi) {
    require_same_grid(rhs, *g_phi);
    auto s = rhs.spec_mut();
    auto gs = g_phi->spec();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += gs[i];
  }

  // (alpha/tau + M0*eps^2*|k|^4 + M0*S*|k|^2) phi~ = rhs - M0*|k|^2 * F'_S
  PhaseResult out{ScalarField(grid), ScalarField(grid), 0.0};
  {
    auto ps = out.phi.spec_mut();
    auto ms = out.mu.spec_mut();
    auto rs = rhs.spec();
    auto fs = fp.spec();
    const double e2 = par.eps * par.eps;
    const double s_lin = par.s_stab;
    const double a_tau = c.alpha / tau;
    const int nxs = g.spec_nx();
    for (int iy = 0; iy < g.n(); ++iy) {
      const double ky = g.ky(iy);
      for (int jx = 0; jx < nxs; ++jx) {
        const std::size_t i = static_cast<std::size_t>(iy) * nxs + jx;
        const double k2 = g.kx(jx) * g.kx(jx) + ky * ky;
        const Complex num = rs[i] - m0 * k2 * fs[i];
        const double den = a_tau + m0 * (e2 * k2 * k2 + s_lin * k2);
        ps[i] = num / den;
        ms[i] = (e2 * k2 + s_lin) * ps[i] + fs[i];
      }
    }
  }

  // zero-mode bookkeeping: alpha*mean(phi~) must equal the history
  // combination (plus the source mean when forced)
  {
    double hist_mean = 0.0;
    for (int j = 0; j < order; ++j)
      hist_mean += c.a[j] * hist.state(j).phi.spec()[0].real();
    const double src = g_phi ? tau * g_phi->spec()[0].real() : 0.0;
    out.mass_residual =
        std::abs(c.alpha * out.phi.spec()[0].real() - hist_mean - src);
  }
  return out;
}

BrinkmanResult brinkman_solve_forcing(const VectorField& f,
                                      const PhysicalParams& par) {
  require_same_grid(f.x, f.y);
  const GridPtr grid = f.x.grid();
  const auto& g = *grid;
  BrinkmanResult out{VectorField(grid), ScalarField(grid)};
  auto fx = f.x.spec();
  auto fy = f.y.spec();
  auto ux = out.u.x.spec_mut();
  auto uy = out.u.y.spec_mut();
  auto ps = out.p.spec_mut();
  const int nxs = g.spec_nx();
  for (int iy = 0; iy < g.n(); ++iy) {
    const double ky = g.ky(iy);
    for (int jx = 0; jx < nxs; ++jx) {
      const std::size_t i = static_cast<std::size_t>(iy) * nxs + jx;
      const double kx = g.kx(jx);
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) {
        // mean flow balances the mean forcing through the Darcy drag
        ux[i] = fx[i] / par.eta;
        uy[i] = fy[i] / par.eta;
        ps[i] = Complex{0.0, 0.0};
        continue;
      }
      const Complex k_dot_f = kx * fx[i] + ky * fy[i];
      const double den = par.nu * k2 + par.eta;
      ux[i] = (fx[i] - kx * k_dot_f / k2) / den;
      uy[i] = (fy[i] - ky * k_dot_f / k2) / den;
      ps[i] = Complex{0.0, -1.0} * k_dot_f / k2;
    }
  }
  return out;
}

BrinkmanResult brinkman_solve(const ScalarField& phi_ext,
                              const ScalarField& mu_ext,
                              const PhysicalParams& par,
                              const VectorField* g_u) {
  require_same_grid(phi_ext, mu_ext);
  const GridPtr grid = phi_ext.grid();

  ScalarField phi_d = dealias(phi_ext);
  VectorField gm = gradient(dealias(mu_ext));
  VectorField f(grid);
  {
    auto ph = phi_d.real();
    auto gx = gm.x.real();
    auto gy = gm.y.real();
    auto fx = f.x.real_mut();
    auto fy = f.y.real_mut();
    for (std::size_t i = 0; i < fx.size(); ++i) {
      fx[i] = -par.gamma * ph[i] * gx[i];
      fy[i] = -par.gamma * ph[i] * gy[i];
    }
    if (par.buoyancy) {
      const double lambda = par.buoyancy->lambda;
      const double bar = par.buoyancy->phi_bar;
      for (std::size_t i = 0; i < fy.size(); ++i)
        fy[i] -= lambda * (ph[i] - bar);
    }
  }
  VectorField fm{dealias(f.x), dealias(f.y)};
  if (g_u) {
    require_same_grid(fm.x, g_u->x);
    auto fx = fm.x.spec_mut();
    auto fy = fm.y.spec_mut();
    auto gx = g_u->x.spec();
    auto gy = g_u->y.spec();
    for (std::size_t i = 0; i < fx.size(); ++i) {
      fx[i] += gx[i];
      fy[i] += gy[i];
    }
  }
  return brinkman_solve_forcing(fm, par);
}

SavResult sav_update_scalar(double r_prev, double tau, double kappa, double e1,
                            double source_work) {
  if (!(tau > 0.0)) throw std::invalid_argument("step size must be positive");
  if (r_prev < 0.0)
    throw std::invalid_argument("auxiliary variable must be nonnegative");
  if (!(e1 > 0.0))
    throw std::runtime_error(
        "shifted energy must stay positive (increase the c0 shift)");
  if (kappa < 0.0)
    throw std::invalid_argument("dissipation rate must be nonnegative");
  SavResult out;
  out.r_tilde = (r_prev + tau * source_work) / (1.0 + tau * kappa / e1);
  out.xi = out.r_tilde / e1;
  return out;
}

SavResult sav_update(double r_prev, double tau, const ScalarField& phi_t,
                     const ScalarField& mu_t, const VectorField& u_t,
                     const PhysicalParams& par, double source_work) {
  const double e1 = shifted_energy(phi_t, par);
  const double kappa = dissipation_rate(phi_t, mu_t, u_t, par);
  return sav_update_scalar(r_prev, tau, kappa, e1, source_work);
}

double zeta_factor(double xi, int order) {
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument("order must be in 1..4");
  double pw = 1.0;
  for (int i = 0; i <= order; ++i) pw *= 1.0 - xi;
  return 1.0 - pw;
}

ScaledSolution scale_solution(double xi, int order, const ScalarField& phi_t,
                              const VectorField& u_t, const ScalarField& p_t) {
  const double z = zeta_factor(xi, order);
  return {z, scaled(phi_t, z), scaled(u_t, z), scaled(p_t, z)};
}

RelaxResult relax(double r_tilde, double e1_tilde, double e1_new,
                  double kappa_tilde, double kappa_new, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(e1_tilde > 0.0) || !(e1_new > 0.0))
    throw std::invalid_argument("shifted energies must be positive");
  if (r_tilde < 0.0 || kappa_tilde < 0.0 || kappa_new < 0.0)
    throw std::invalid_argument("relax inputs must be nonnegative");

  const double xi_kt = (r_tilde / e1_tilde) * kappa_tilde;

  RelaxResult out;
  if (kappa_new <= 0.0) {
    // Nothing dissipates at the new state, so delta*kappa_new vanishes and
    // the choice reduces to keeping the bounds 0 <= r <= E1, r nonincreasing.
    if (r_tilde <= e1_new) {
      const double r_prev_implied = r_tilde + tau * xi_kt;
      if (e1_new > r_prev_implied) {
        out = {1.0, 0.0, r_tilde, 4};
      } else {
        out = {0.0, 0.0, e1_new, 1};
      }
    } else {
      out = {0.0, 0.0, e1_new, 2};
    }
    return out;
  }

  if (r_tilde == e1_new) {
    out.which_case = 1;
    out.sigma0 = 0.0;
    out.delta = xi_kt / kappa_new;
  } else if (r_tilde > e1_new) {
    out.which_case = 2;
    out.sigma0 = 0.0;
    out.delta = (r_tilde - e1_new) / (tau * kappa_new) + xi_kt / kappa_new;
  } else if (r_tilde - e1_new + tau * xi_kt >= 0.0) {
    out.which_case = 3;
    out.sigma0 = 0.0;
    // nonnegative by the case condition; max guards rounding at the boundary
    out.delta = std::max(
        0.0, (r_tilde - e1_new) / (tau * kappa_new) + xi_kt / kappa_new);
  } else {
    out.which_case = 4;
    out.sigma0 = std::clamp(1.0 - tau * xi_kt / (e1_new - r_tilde), 0.0, 1.0);
    out.delta = 0.0;
    // sigma0*r~ + (1-sigma0)*E1 written so that 1-sigma0 never rounds away:
    // the blend equals r~ + tau*xi*kappa~, the implied previous r exactly
    out.r_new = std::min(r_tilde + tau * xi_kt, e1_new);
    return out;
  }
  out.r_new = out.sigma0 * r_tilde + (1.0 - out.sigma0) * e1_new;
  return out;
}

StepOutcome step(const History& hist, const PhysicalParams& par, double tau,
                 int order, const StepSources* sources, bool relax_r) {
  par.validate();
  const BdfCoeffs c = coeffs_for(hist, tau, order);

  PhaseResult ph =
      phase_solve(hist, par, tau, order, sources ? &sources->g_phi : nullptr);

  BrinkmanResult br = brinkman_solve(extrapolated_phi(hist, c),
                                     extrapolated_mu(hist, c), par,
                                     sources ? &sources->g_u : nullptr);

  const double e1_tilde = shifted_energy(ph.phi, par);
  const double kappa_tilde = dissipation_rate(ph.phi, ph.mu, br.u, par);
  double work = 0.0;
  if (sources) {
    // forced energy balance: dE/dt = -kappa + (g_phi, mu) + (g_u, u)/gamma
    work = inner(sources->g_phi, ph.mu) +
           (inner(sources->g_u.x, br.u.x) + inner(sources->g_u.y, br.u.y)) /
               par.gamma;
  }
  const SavResult sav =
      sav_update_scalar(hist.r(), tau, kappa_tilde, e1_tilde, work);

  ScaledSolution sc = scale_solution(sav.xi, order, ph.phi, br.u, br.p);
  ScalarField mu_new = chemical_potential(sc.phi, par);
  const double energy_new = energy(sc.phi, par);
  const double e1_new = energy_new + par.c0;
  const double kappa_new = dissipation_rate(sc.phi, mu_new, sc.u, par);

  RelaxResult rel;
  if (relax_r) {
    rel = relax(sav.r_tilde, e1_tilde, e1_new, kappa_tilde, kappa_new, tau);
  } else {
    rel = {1.0, 0.0, sav.r_tilde, 0};
  }

  StepOutcome out{
      FieldState{hist.t() + tau, std::move(sc.phi), std::move(mu_new),
                 std::move(sc.u), std::move(sc.p)},
      sav.r_tilde,
      sav.xi,
      sc.zeta,
      rel.sigma0,
      rel.delta,
      std::abs(1.0 - sav.xi),
      rel.r_new,
      rel.which_case,
      e1_tilde,
      e1_new,
      energy_new,
      kappa_tilde,
      kappa_new,
      ph.mass_residual};
  return out;
}

}  // namespace chb
