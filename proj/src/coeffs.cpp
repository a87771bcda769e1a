#include "chb/coeffs.hpp"

#include <stdexcept>

namespace chb {

BdfCoeffs bdf_weights(int order, std::span<const double> times) {
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument("bdf order must be in 1..4");
  if (static_cast<int>(times.size()) != order + 1)
    throw std::invalid_argument("bdf_weights needs order+1 time stamps");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("time stamps must be strictly increasing");

  BdfCoeffs c;
  c.order = order;

  // s[0] = t^{n+1}, s[1] = t^n, ... (newest first)
  std::array<double, kMaxOrder + 1> s{};
  for (int i = 0; i <= order; ++i) s[i] = times[order - i];
  for (int i = 0; i <= order; ++i) c.times[i] = s[i];
  c.tau = s[0] - s[1];

  // Derivative of the Lagrange basis over all order+1 nodes, evaluated at
  // the newest node s[0]:
  //   l_0'(s0)  = sum_{m>0} 1/(s0 - s_m)
  //   l_i'(s0)  = prod_{m != i, m != 0} (s0 - s_m) / prod_{m != i} (s_i - s_m)
  double d0 = 0.0;
  for (int m = 1; m <= order; ++m) d0 += 1.0 / (s[0] - s[m]);
  c.alpha = c.tau * d0;
  for (int i = 1; i <= order; ++i) {
    double num = 1.0;
    double den = 1.0;
    for (int m = 0; m <= order; ++m) {
      if (m == i) continue;
      if (m != 0) num *= s[0] - s[m];
      den *= s[i] - s[m];
    }
    c.a[i - 1] = -c.tau * num / den;
  }

  // Extrapolation: Lagrange basis over the history nodes s[1..order],
  // evaluated at s[0].
  for (int i = 1; i <= order; ++i) {
    double w = 1.0;
    for (int m = 1; m <= order; ++m) {
      if (m == i) continue;
      w *= (s[0] - s[m]) / (s[i] - s[m]);
    }
    c.b[i - 1] = w;
  }
  return c;
}

double extrapolate(const BdfCoeffs& c, std::span<const double> values) {
  if (static_cast<int>(values.size()) != c.order)
    throw std::invalid_argument("extrapolate needs order history values");
  double acc = 0.0;
  for (int j = 0; j < c.order; ++j) acc += c.b[j] * values[j];
  return acc;
}

}  // namespace chb
