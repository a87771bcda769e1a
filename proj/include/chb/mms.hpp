#pragma once
// Manufactured-solution harness on the periodic square.  The closed-form
// fields
//   phi = cos x sin y cos t
//   u   = (sin x sin y, cos x cos y) sin t      (divergence-free)
//   p   = cos x sin y sin t
// are made an exact solution of the forced system by compensating sources,
// which gives a clean measurement of the temporal convergence order.

#include "chb/stepper.hpp"

namespace chb::mms {

// eps = 1, gamma = 2, M = nu = eta = 1, S = 0, c0 = 0
PhysicalParams reference_params();

ScalarField exact_phi(const GridPtr& grid, double t);
VectorField exact_velocity(const GridPtr& grid, double t);
ScalarField exact_pressure(const GridPtr& grid, double t);

// Sampled fields with mu recomputed from phi.
FieldState exact_state(const GridPtr& grid, double t,
                       const PhysicalParams& par);

// Residual sources of the continuous system at the exact solution:
//   g_phi = phi_t - div(M grad mu) + div(u phi)
//   g_u   = -nu div D(u) + eta u + grad p + gamma phi grad mu
// built by applying the spectral operators to the sampled fields.
StepSources forcing(const GridPtr& grid, double t, const PhysicalParams& par);

// Exact levels at t0, t0-tau, ..., t0-(order-1)*tau with r = E1(phi(t0)).
History bootstrap_history(const GridPtr& grid, int order, double tau,
                          double t0, const PhysicalParams& par);

struct ErrorTable {
  double tau = 0.0;
  double phi = 0.0, u1 = 0.0, u2 = 0.0, px = 0.0, py = 0.0;
};

// Fixed-step forced run from t = 0 to t_final; discrete L2 errors against
// the exact fields at the end.  Pressure is compared through its gradient.
ErrorTable accuracy_run(int n, int order, double tau, double t_final,
                        const PhysicalParams& par = reference_params());

}  // namespace chb::mms
