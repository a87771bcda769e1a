#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "chb/coeffs.hpp"

using namespace chb;

namespace {

std::vector<double> uniform_times(int order, double tau) {
  std::vector<double> t(order + 1);
  for (int i = 0; i <= order; ++i) t[i] = i * tau;
  return t;
}

}  // namespace

TEST_CASE("uniform weights match the classical BDF tables") {
  struct Row {
    int order;
    double alpha;
    std::array<double, 4> a;
    std::array<double, 4> b;
  };
  const Row rows[] = {
      {1, 1.0, {1.0, 0, 0, 0}, {1.0, 0, 0, 0}},
      {2, 1.5, {2.0, -0.5, 0, 0}, {2.0, -1.0, 0, 0}},
      {3, 11.0 / 6.0, {3.0, -1.5, 1.0 / 3.0, 0}, {3.0, -3.0, 1.0, 0}},
      {4, 25.0 / 12.0, {4.0, -3.0, 4.0 / 3.0, -0.25}, {4.0, -6.0, 4.0, -1.0}},
  };
  for (const auto& row : rows) {
    CAPTURE(row.order);
    for (double tau : {1.0, 0.25, 1e-3}) {
      auto t = uniform_times(row.order, tau);
      BdfCoeffs c = bdf_weights(row.order, t);
      CHECK(c.alpha == doctest::Approx(row.alpha).epsilon(1e-12));
      for (int i = 0; i < row.order; ++i) {
        CHECK(c.a[i] == doctest::Approx(row.a[i]).epsilon(1e-12));
        CHECK(c.b[i] == doctest::Approx(row.b[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("a nonuniform second-order stencil matches hand values") {
  // steps 1 then 2: levels at t = 0, 1, target 3
  const std::array<double, 3> t{0.0, 1.0, 3.0};
  BdfCoeffs c = bdf_weights(2, t);
  CHECK(c.alpha == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(c.a[0] == doctest::Approx(3.0).epsilon(1e-14));       // weight of t=1
  CHECK(c.a[1] == doctest::Approx(-4.0 / 3.0).epsilon(1e-14));  // of t=0
  CHECK(c.b[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(c.b[1] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(c.tau == doctest::Approx(2.0));
}

TEST_CASE("weights are exact on polynomials for random nonuniform stamps") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> ratio(0.1, 10.0);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);

  for (int order = 1; order <= 4; ++order) {
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> t(order + 1);
      t[0] = coef(gen);
      double step = 0.01 * (1.0 + ratio(gen));
      for (int i = 1; i <= order; ++i) {
        t[i] = t[i - 1] + step;
        step *= ratio(gen);
      }
      BdfCoeffs c = bdf_weights(order, t);

      // p(s) = sum c_d s^d up to degree = order
      std::vector<double> pc(order + 1);
      for (auto& v : pc) v = coef(gen);
      auto p = [&](double s) {
        double acc = 0.0, pw = 1.0;
        for (double v : pc) {
          acc += v * pw;
          pw *= s;
        }
        return acc;
      };
      auto dp = [&](double s) {
        double acc = 0.0, pw = 1.0;
        for (int d = 1; d <= order; ++d) {
          acc += d * pc[d] * pw;
          pw *= s;
        }
        return acc;
      };

      const double s0 = t[order];
      // differentiation: (alpha*p(s0) - sum_j a_j p(s_{older})) / tau = p'(s0)
      double comb = c.alpha * p(s0);
      for (int j = 0; j < order; ++j) comb -= c.a[j] * p(t[order - 1 - j]);
      const double scale = std::max(1.0, std::abs(dp(s0)));
      CHECK(std::abs(comb / c.tau - dp(s0)) / scale < 1e-10);

      // extrapolation is exact one degree lower
      std::vector<double> history(order);
      for (int j = 0; j < order; ++j) {
        double s = t[order - 1 - j];
        double acc = 0.0, pw = 1.0;
        for (int d = 0; d < order; ++d) {
          acc += pc[d] * pw;
          pw *= s;
        }
        history[j] = acc;
      }
      double target = 0.0, pw = 1.0;
      for (int d = 0; d < order; ++d) {
        target += pc[d] * pw;
        pw *= s0;
      }
      const double ex = extrapolate(c, history);
      CHECK(std::abs(ex - target) / std::max(1.0, std::abs(target)) < 1e-10);
    }
  }
}

TEST_CASE("weight sums reproduce constants") {
  const std::array<double, 5> t{0.0, 0.3, 0.45, 1.1, 1.2};
  BdfCoeffs c = bdf_weights(4, t);
  double sum_a = 0.0, sum_b = 0.0;
  for (int j = 0; j < 4; ++j) {
    sum_a += c.a[j];
    sum_b += c.b[j];
  }
  CHECK(sum_a == doctest::Approx(c.alpha).epsilon(1e-12));
  CHECK(sum_b == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("invalid requests are rejected") {
  CHECK_THROWS(bdf_weights(0, std::array<double, 1>{0.0}));
  CHECK_THROWS(bdf_weights(5, std::array<double, 6>{0, 1, 2, 3, 4, 5}));
  CHECK_THROWS(bdf_weights(2, std::array<double, 3>{0.0, 1.0, 1.0}));
  CHECK_THROWS(bdf_weights(2, std::array<double, 3>{0.0, 2.0, 1.0}));
  CHECK_THROWS(bdf_weights(2, std::array<double, 2>{0.0, 1.0}));
}
