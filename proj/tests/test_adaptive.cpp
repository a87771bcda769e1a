#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "chb/adaptive.hpp"

using namespace chb;

namespace {

template <class F>
ScalarField sample(const GridPtr& grid, F&& f) {
  ScalarField out(grid);
  auto v = out.real_mut();
  const int n = grid->n();
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      v[static_cast<std::size_t>(iy) * n + ix] =
          f(grid->node_x(ix), grid->node_y(iy));
  return out;
}

FieldState rest_state(double t, ScalarField phi, const PhysicalParams& par) {
  ScalarField mu = chemical_potential(phi, par);
  GridPtr g = phi.grid();
  return FieldState{t, std::move(phi), std::move(mu), VectorField(g),
                    ScalarField(g)};
}

OrderConfig basic_block() {
  OrderConfig c;
  c.rho = 0.5;
  c.tol = 1e-3;
  c.r_exp = 0.5;
  c.m_exp = 1.0;
  c.tau_min = 1e-6;
  c.tau_max = 1e-2;
  c.gamma_star = 1.0;
  return c;
}

}  // namespace

TEST_CASE("parameter block validation") {
  OrderConfig c = basic_block();
  CHECK_NOTHROW(c.validate());
  c.rho = 0.0;
  CHECK_THROWS(c.validate());
  c = basic_block();
  c.rho = 1.5;
  CHECK_THROWS(c.validate());
  c = basic_block();
  c.tol = 0.0;
  CHECK_THROWS(c.validate());
  c = basic_block();
  c.r_exp = 0.0;
  CHECK_THROWS(c.validate());
  c = basic_block();
  c.m_exp = 1.5;
  CHECK_THROWS(c.validate());
  c = basic_block();
  c.tau_min = 0.0;
  CHECK_THROWS(c.validate());
  c = basic_block();
  c.tau_min = 1.0;  // above tau_max
  CHECK_THROWS(c.validate());
  c = basic_block();
  c.gamma_star = -1.0;
  CHECK_THROWS(c.validate());

  AdaptiveConfig a;
  CHECK_NOTHROW(a.validate());
  CHECK_THROWS(a.block(0));
  CHECK_THROWS(a.block(5));
  a.t_switch = -1.0;
  CHECK_THROWS(a.validate());
  a = AdaptiveConfig{};
  a.max_retries = -1;
  CHECK_THROWS(a.validate());
}

TEST_CASE("dead-beat proposal closed form") {
  OrderConfig c = basic_block();
  c.rho = 0.75;
  CHECK(a_dp(c, 1e-3, 1e-3) == doctest::Approx(7.5e-4).epsilon(1e-14));
  CHECK(a_dp(c, 4e-3, 0.2) == doctest::Approx(0.75 * 0.1).epsilon(1e-14));
  CHECK_THROWS(a_dp(c, 0.0, 1e-3));
  CHECK_THROWS(a_dp(c, 1e-3, 0.0));
}

TEST_CASE("proposal clamp with the energy-slope cap") {
  OrderConfig c = basic_block();
  SUBCASE("flat energy leaves tau_max as the cap") {
    CHECK(clamp_step(c, 5e-3, 0.0) == doctest::Approx(5e-3));
    CHECK(clamp_step(c, 5.0, 0.0) == doctest::Approx(c.tau_max));
  }
  SUBCASE("steep energy slope shrinks the cap") {
    c.tau_max = 2.0;
    CHECK(clamp_step(c, 5.0, -std::sqrt(3.0)) == doctest::Approx(1.0));
  }
  SUBCASE("the floor always wins") {
    CHECK(clamp_step(c, 1e-9, 0.0) == doctest::Approx(c.tau_min));
  }
}

TEST_CASE("energy slope estimate from the history") {
  GridPtr g = make_grid(8);
  PhysicalParams par;
  History hist;
  CHECK(estimate_energy_rate(hist) == 0.0);
  hist.push(rest_state(0.0, ScalarField(g), par), 5.0);
  CHECK(estimate_energy_rate(hist) == 0.0);
  hist.push(rest_state(0.5, ScalarField(g), par), 4.0);
  CHECK(estimate_energy_rate(hist) == doctest::Approx(-2.0));
}

TEST_CASE("controller accepts a quiet step at once") {
  OrderConfig c = basic_block();
  std::vector<double> taus;
  ControlDecision d = control_step(c, 20, 1e-3, 0.0, [&](double tau) {
    taus.push_back(tau);
    return 5e-4;
  });
  CHECK(taus.size() == 1);
  CHECK(d.tau_used == doctest::Approx(1e-3));
  CHECK(d.retries == 0);
  CHECK(d.e == doctest::Approx(5e-4));
  CHECK(d.tau_next ==
        doctest::Approx(0.5 * std::sqrt(2.0) * 1e-3).epsilon(1e-13));
}

TEST_CASE("controller clamps the entry step into its bounds") {
  OrderConfig c = basic_block();
  std::vector<double> taus;
  control_step(c, 20, 1.0, 0.0, [&](double tau) {
    taus.push_back(tau);
    return 0.0;
  });
  CHECK(taus.size() == 1);
  CHECK(taus[0] == doctest::Approx(c.tau_max));
}

TEST_CASE("rejections shrink the step until the floor accepts") {
  OrderConfig c = basic_block();
  std::vector<double> taus;
  ControlDecision d = control_step(c, 20, 1e-3, 0.0, [&](double tau) {
    taus.push_back(tau);
    return 1.0;  // hopeless indicator
  });
  CHECK(taus.size() == 3);
  CHECK(taus[1] < taus[0]);
  CHECK(taus[2] < taus[1]);
  CHECK(taus[2] == doctest::Approx(c.tau_min));
  CHECK(d.tau_used == doctest::Approx(c.tau_min));
  CHECK(d.retries == 2);
}

TEST_CASE("exhausted retry budget forces the floor step") {
  OrderConfig c = basic_block();
  c.tau_min = 1e-12;  // far below where the proposal would land
  std::vector<double> taus;
  ControlDecision d = control_step(c, 1, 1e-3, 0.0, [&](double tau) {
    taus.push_back(tau);
    return 1.0;
  });
  CHECK(taus.size() == 2);
  CHECK(taus[1] == doctest::Approx(1e-12));
  CHECK(d.retries == 1);
}

TEST_CASE("zero retry budget accepts every attempt") {
  OrderConfig c = basic_block();
  ControlDecision d =
      control_step(c, 0, 1e-3, 0.0, [](double) { return 1.0; });
  CHECK(d.retries == 0);
  CHECK(d.tau_used == doctest::Approx(1e-3));
}

TEST_CASE("a vanishing indicator still yields a finite proposal") {
  OrderConfig c = basic_block();
  ControlDecision d =
      control_step(c, 20, 1e-3, 0.0, [](double) { return 0.0; });
  CHECK(std::isfinite(d.tau_next));
  CHECK(d.tau_next == doctest::Approx(c.tau_max));
}

TEST_CASE("controller rejects invalid inputs") {
  OrderConfig c = basic_block();
  CHECK_THROWS(control_step(c, 20, 0.0, 0.0, [](double) { return 0.0; }));
  CHECK_THROWS(control_step(c, -1, 1e-3, 0.0, [](double) { return 0.0; }));
  CHECK_THROWS(control_step(c, 20, 1e-3, 0.0, [](double) { return -1.0; }));
}

TEST_CASE("requested order is lowered to the available history") {
  GridPtr g = make_grid(16);
  PhysicalParams par;
  par.eps = 0.5;
  par.s_stab = 1.0;
  ScalarField phi0 = sample(
      g, [](double x, double y) { return 0.1 * std::cos(x) * std::sin(y); });
  const double e1 = shifted_energy(phi0, par);
  History hist(e1);
  hist.push(rest_state(0.0, phi0, par), e1);

  AdaptiveConfig cfg;
  for (int k = 1; k <= kMaxOrder; ++k) {
    cfg.block(k) = basic_block();
    cfg.block(k).tol = 1e9;  // accept everything; this test is about orders
    cfg.block(k).tau_max = 0.02;
  }

  std::vector<int> orders;
  for (int i = 0; i < 5; ++i) {
    AdaptiveStepResult res = adaptive_step(hist, par, cfg, 3, 0.01);
    orders.push_back(res.order_used);
    CHECK(res.retries == 0);
    hist.push(std::move(res.outcome.state), res.outcome.e1_new);
    hist.set_r(res.outcome.r_new);
  }
  CHECK(orders == std::vector<int>{1, 2, 3, 3, 3});
}

TEST_CASE("hybrid stepping switches order at the advertised time") {
  GridPtr g = make_grid(16);
  PhysicalParams par;
  par.eps = 0.5;
  par.s_stab = 1.0;
  ScalarField phi0 = sample(
      g, [](double x, double y) { return 0.1 * std::cos(x) * std::sin(y); });
  const double e1 = shifted_energy(phi0, par);
  History hist(e1);
  hist.push(rest_state(0.0, phi0, par), e1);

  AdaptiveConfig cfg;
  cfg.t_switch = 0.121;  // six steps of 0.02 land just past 0.12 in binary
  for (int k = 1; k <= kMaxOrder; ++k) {
    cfg.block(k) = basic_block();
    cfg.block(k).tol = 1e9;
    cfg.block(k).tau_max = 0.02;
  }

  std::vector<int> orders;
  for (int i = 0; i < 7; ++i) {
    AdaptiveStepResult res = hybrid_step(hist, par, cfg, 0.02);
    orders.push_back(res.order_used);
    CHECK(res.tau_used == doctest::Approx(0.02));
    hist.push(std::move(res.outcome.state), res.outcome.e1_new);
    hist.set_r(res.outcome.r_new);
  }
  CHECK(orders == std::vector<int>{1, 2, 3, 3, 3, 3, 2});
}

TEST_CASE("a zero switch time keeps the hybrid at order two") {
  GridPtr g = make_grid(16);
  PhysicalParams par;
  par.eps = 0.5;
  par.s_stab = 1.0;
  ScalarField phi0 = sample(
      g, [](double x, double y) { return 0.1 * std::cos(x) * std::sin(y); });
  const double e1 = shifted_energy(phi0, par);
  History hist(e1);
  hist.push(rest_state(0.0, phi0, par), e1);

  AdaptiveConfig cfg;  // t_switch = 0
  for (int k = 1; k <= kMaxOrder; ++k) {
    cfg.block(k) = basic_block();
    cfg.block(k).tol = 1e9;
    cfg.block(k).tau_max = 0.02;
  }

  AdaptiveStepResult first = hybrid_step(hist, par, cfg, 0.02);
  CHECK(first.order_used == 1);  // bootstrap from a single level
  hist.push(std::move(first.outcome.state), first.outcome.e1_new);
  hist.set_r(first.outcome.r_new);
  AdaptiveStepResult second = hybrid_step(hist, par, cfg, 0.02);
  CHECK(second.order_used == 2);
  hist.push(std::move(second.outcome.state), second.outcome.e1_new);
  hist.set_r(second.outcome.r_new);
  AdaptiveStepResult third = hybrid_step(hist, par, cfg, 0.02);
  CHECK(third.order_used == 2);  // never three past the switch
}
