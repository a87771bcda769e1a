#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "chb/mms.hpp"

using namespace chb;

namespace {

template <class F>
double max_err(const ScalarField& got, F&& expect) {
  const auto& g = *got.grid();
  auto v = got.real();
  const int n = g.n();
  double m = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      m = std::max(m, std::abs(v[static_cast<std::size_t>(iy) * n + ix] -
                               expect(g.node_x(ix), g.node_y(iy))));
  return m;
}

double spec_max_abs(const ScalarField& f) {
  double m = 0.0;
  for (const auto& c : f.spec()) m = std::max(m, std::abs(c));
  return m;
}

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

}  // namespace

TEST_CASE("exact fields at reference times") {
  GridPtr g = make_grid(32);

  ScalarField phi0 = mms::exact_phi(g, 0.0);
  CHECK(max_err(phi0, [](double x, double y) {
          return std::cos(x) * std::sin(y);
        }) < 1e-15);

  VectorField u0 = mms::exact_velocity(g, 0.0);
  CHECK(l2_norm(u0.x) == 0.0);
  CHECK(l2_norm(u0.y) == 0.0);
  CHECK(l2_norm(mms::exact_pressure(g, 0.0)) == 0.0);

  const double th = std::numbers::pi / 2.0;
  VectorField uh = mms::exact_velocity(g, th);
  CHECK(max_err(uh.x, [](double x, double y) {
          return std::sin(x) * std::sin(y);
        }) < 1e-15);
  CHECK(max_err(uh.y, [](double x, double y) {
          return std::cos(x) * std::cos(y);
        }) < 1e-15);
}

TEST_CASE("the exact velocity is divergence free") {
  GridPtr g = make_grid(32);
  for (double t : {0.3, 1.0, 2.5}) {
    ScalarField div_u = divergence(mms::exact_velocity(g, t));
    CHECK(spec_max_abs(div_u) < 1e-13);
  }
}

TEST_CASE("reference parameters") {
  PhysicalParams par = mms::reference_params();
  CHECK(par.eps == 1.0);
  CHECK(par.gamma == 2.0);
  CHECK(par.nu == 1.0);
  CHECK(par.eta == 1.0);
  CHECK(par.s_stab == 0.0);
  CHECK(par.c0 == 0.0);
  CHECK(par.mobility.is_constant());
  CHECK(par.mobility.m0 == 1.0);
  CHECK_FALSE(par.buoyancy.has_value());
}

TEST_CASE("phase source matches the hand-derived closed form") {
  GridPtr g = make_grid(32);
  const double t = 0.7;
  PhysicalParams par = mms::reference_params();
  StepSources src = mms::forcing(g, t, par);

  const double st = std::sin(t), ct = std::cos(t);
  const double ct3 = ct * ct * ct;
  // g_phi = phi_t - lap(mu) + u.grad(phi) with mu = phi + phi^3:
  //   lap(phi) = -2 phi, lap(phi^3) expanded termwise below
  auto expect = [&](double x, double y) {
    const double cx = std::cos(x), sx = std::sin(x);
    const double cy = std::cos(y), sy = std::sin(y);
    const double phi_t = -cx * sy * st;
    const double lap_cube =
        ct3 * ((6.0 * cx - 9.0 * cx * cx * cx) * sy * sy * sy +
               cx * cx * cx * (6.0 * sy - 9.0 * sy * sy * sy));
    const double lap_mu = -2.0 * cx * sy * ct + lap_cube;
    const double conv = st * ct * (cx * cx * cy * cy - sx * sx * sy * sy);
    return phi_t - lap_mu + conv;
  };
  // two spectral derivative passes amplify roundoff on the cubic term
  CHECK(max_err(src.g_phi, expect) < 1e-10);
  CHECK(std::abs(src.g_phi.mean()) < 1e-14);
}

TEST_CASE("momentum source matches the hand-derived closed form") {
  GridPtr g = make_grid(32);
  const double t = 0.7;
  PhysicalParams par = mms::reference_params();
  StepSources src = mms::forcing(g, t, par);

  const double st = std::sin(t), ct = std::cos(t);
  // -div D(u) = -lap(u) = 2u for this velocity, so the viscous and drag
  // parts combine to (2 nu + eta) u = 3u; grad mu = (1 + 3 phi^2) grad phi.
  auto expect_x = [&](double x, double y) {
    const double cx = std::cos(x), sx = std::sin(x);
    const double sy = std::sin(y);
    const double phi = cx * sy * ct;
    const double phi_x = -sx * sy * ct;
    const double p_x = -sx * sy * st;
    return 3.0 * sx * sy * st + p_x +
           2.0 * phi * (1.0 + 3.0 * phi * phi) * phi_x;
  };
  auto expect_y = [&](double x, double y) {
    const double cx = std::cos(x);
    const double cy = std::cos(y), sy = std::sin(y);
    const double phi = cx * sy * ct;
    const double phi_y = cx * cy * ct;
    const double p_y = cx * cy * st;
    return 3.0 * cx * cy * st + p_y +
           2.0 * phi * (1.0 + 3.0 * phi * phi) * phi_y;
  };
  CHECK(max_err(src.g_u.x, expect_x) < 1e-11);
  CHECK(max_err(src.g_u.y, expect_y) < 1e-11);
}

TEST_CASE("sources require constant mobility") {
  GridPtr g = make_grid(16);
  PhysicalParams par = mms::reference_params();
  par.mobility = Mobility::degenerate(1.0);
  CHECK_THROWS(mms::forcing(g, 0.5, par));
}

TEST_CASE("history bootstrap stamps exact levels at negative times") {
  GridPtr g = make_grid(32);
  PhysicalParams par = mms::reference_params();
  History hist = mms::bootstrap_history(g, 3, 0.1, 0.0, par);
  CHECK(hist.size() == 3);
  CHECK(hist.t() == doctest::Approx(0.0));
  CHECK(hist.state(1).t == doctest::Approx(-0.1));
  CHECK(hist.state(2).t == doctest::Approx(-0.2));

  // E(cos x sin y) at eps=1: pi^2 from the gradient, 41 pi^2/64 from the well
  const double e1_exact = 105.0 * kPi2 / 64.0;
  CHECK(hist.r() == doctest::Approx(e1_exact).epsilon(1e-12));
  CHECK(hist.e1(0) == doctest::Approx(e1_exact).epsilon(1e-12));

  ScalarField phi_back = mms::exact_phi(g, -0.2);
  auto a = hist.state(2).phi.real();
  auto b = phi_back.real();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  CHECK(m == 0.0);  // sampled identically

  CHECK_THROWS(mms::bootstrap_history(g, 0, 0.1, 0.0, par));
  CHECK_THROWS(mms::bootstrap_history(g, 5, 0.1, 0.0, par));
  CHECK_THROWS(mms::bootstrap_history(g, 2, 0.0, 0.0, par));
}

TEST_CASE("forced runs track the exact solution at second order") {
  mms::ErrorTable coarse = mms::accuracy_run(32, 2, 0.05, 0.5);
  mms::ErrorTable fine = mms::accuracy_run(32, 2, 0.025, 0.5);
  CHECK(coarse.phi < 0.05);
  CHECK(std::isfinite(coarse.u1));
  CHECK(std::isfinite(coarse.px));
  const double ratio = coarse.phi / fine.phi;
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.2);
}

TEST_CASE("the step count rounds to hit the final time exactly") {
  mms::ErrorTable e = mms::accuracy_run(16, 1, 0.3, 1.0);
  CHECK(e.tau == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}
