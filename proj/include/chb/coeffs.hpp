// Variable-step backward-differentiation weights, orders 1..4.
//
// For stamps t^{n-k+1} < ... < t^n < t^{n+1} the weights satisfy, for every
// polynomial v of degree <= k,
//
//   alpha * v(t^{n+1}) - sum_j a[j] * v(t^{n-j}) = tau * v'(t^{n+1}),
//
// with tau = t^{n+1} - t^n, and the extrapolation weights reproduce
// polynomials of degree <= k-1:  sum_j b[j] * v(t^{n-j}) = v(t^{n+1}).
// Both sets are built from Lagrange bases over the actual stamps, so they
// reduce to the classical BDF tables for uniform steps.

#pragma once

#include <array>
#include <span>

namespace chb {

inline constexpr int kMaxOrder = 4;

struct BdfCoeffs {
  int order = 0;
  double tau = 0.0;                     // t^{n+1} - t^n
  double alpha = 0.0;
  std::array<double, kMaxOrder> a{};      // history weights, newest first
  std::array<double, kMaxOrder> b{};      // extrapolation weights, newest first
  std::array<double, kMaxOrder + 1> times{};  // newest first, order+1 entries
};

// times: order+1 strictly increasing stamps, oldest first.
BdfCoeffs bdf_weights(int order, std::span<const double> times);

// values: order entries, newest first; returns sum_j b[j] * values[j].
double extrapolate(const BdfCoeffs& c, std::span<const double> values);

}  // namespace chb
