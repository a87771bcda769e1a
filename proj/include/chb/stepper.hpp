// One time step of the relaxed, variable-step IMEX-BDFk scheme for the
// Cahn-Hilliard-Brinkman system.  Given k accepted levels and the scalar
// auxiliary variable r^n, a step of size tau produces:
//
//   1. (alpha*phi~ - sum_j a_j phi^{n-j})/tau
//          = div(M grad mu~) - div(B(u) B(phi)) [+ g_phi],
//      mu~ = -eps^2 lap(phi~) + S*phi~ + F'_S(B(phi)),
//      with B(.) the k-th order extrapolation; the mobility is split as
//      M0 = max_grid M(B(phi)) implicit plus an explicit deviation term.
//   2. eta*u~ - nu*lap(u~) + grad p~ = -gamma*B(phi) grad B(mu) [+ b + g_u],
//      div u~ = 0, solved mode-wise with the Leray projector.
//   3. r~ = r^n / (1 + tau*kappa~/E1(phi~)), xi = r~/E1(phi~),
//      zeta = 1 - (1-xi)^{k+1}, (phi,u,p)^{n+1} = zeta*(phi~,u~,p~),
//      mu^{n+1} recomputed from phi^{n+1}.
//   4. r^{n+1} = sigma0*r~ + (1-sigma0)*E1(phi^{n+1}) chosen so that
//      (r^{n+1}-r~)/tau = -delta*kappa^{n+1} + xi*kappa~ with
//      sigma0 in [0,1], delta >= 0; this forces r^{n+1} <= r^n.
//
// Steps never mutate the history; the caller pushes accepted states.

#pragma once

#include <vector>

#include "chb/coeffs.hpp"
#include "chb/model.hpp"

namespace chb {

// Optional manufactured-solution sources, evaluated at the target time.
struct StepSources {
  ScalarField g_phi;
  VectorField g_u;
};

class History {
 public:
  History() = default;
  explicit History(double r0) : aux_{r0} {}

  // Newest level is index 0.  Keeps at most kMaxOrder levels.
  void push(FieldState state, double e1);
  int size() const { return static_cast<int>(entries_.size()); }
  const FieldState& state(int j = 0) const { return entries_.at(j).state; }
  double e1(int j = 0) const { return entries_.at(j).e1; }
  double t() const { return entries_.at(0).state.t; }
  double r() const { return aux_.r; }
  void set_r(double r) { aux_.r = r; }

 private:
  struct Entry {
    FieldState state;
    double e1;
  };
  std::vector<Entry> entries_;
  AuxState aux_;
};

struct PhaseResult {
  ScalarField phi;
  ScalarField mu;
  double mass_residual = 0.0;  // |alpha*mean(phi~) - sum_j a_j mean(phi^j)|
};

PhaseResult phase_solve(const History& hist, const PhysicalParams& par,
                        double tau, int order,
                        const ScalarField* g_phi = nullptr);

struct BrinkmanResult {
  VectorField u;
  ScalarField p;
};

// Solves eta*u - nu*lap(u) + grad p = f, div u = 0, mean(p) = 0.
BrinkmanResult brinkman_solve_forcing(const VectorField& f,
                                      const PhysicalParams& par);

// Builds f = -gamma * phi_ext * grad(mu_ext) (+ buoyancy + g_u), products
// under the 2/3 rule, then solves as above.
BrinkmanResult brinkman_solve(const ScalarField& phi_ext,
                              const ScalarField& mu_ext,
                              const PhysicalParams& par,
                              const VectorField* g_u = nullptr);

struct SavResult {
  double r_tilde = 0.0;
  double xi = 0.0;
};

// Closed form of (r~ - r^n)/tau = -(r~/e1)*kappa + work.
SavResult sav_update_scalar(double r_prev, double tau, double kappa, double e1,
                            double source_work = 0.0);
SavResult sav_update(double r_prev, double tau, const ScalarField& phi_t,
                     const ScalarField& mu_t, const VectorField& u_t,
                     const PhysicalParams& par, double source_work = 0.0);

double zeta_factor(double xi, int order);

struct ScaledSolution {
  double zeta = 0.0;
  ScalarField phi;
  VectorField u;
  ScalarField p;
};
ScaledSolution scale_solution(double xi, int order, const ScalarField& phi_t,
                              const VectorField& u_t, const ScalarField& p_t);

struct RelaxResult {
  double sigma0 = 0.0;
  double delta = 0.0;
  double r_new = 0.0;
  int which_case = 0;  // 1..4; 0 when relaxation is disabled
};

RelaxResult relax(double r_tilde, double e1_tilde, double e1_new,
                  double kappa_tilde, double kappa_new, double tau);

struct StepOutcome {
  FieldState state;
  double r_tilde = 0.0;
  double xi = 0.0;
  double zeta = 0.0;
  double sigma0 = 0.0;
  double delta = 0.0;
  double e = 0.0;  // |1 - xi|, the adaptivity indicator
  double r_new = 0.0;
  int relax_case = 0;
  double e1_tilde = 0.0;
  double e1_new = 0.0;
  double energy_new = 0.0;
  double kappa_tilde = 0.0;
  double kappa_new = 0.0;
  double mass_residual = 0.0;
};

// relax_r = false reproduces the unrelaxed scheme (r^{n+1} = r~).
StepOutcome step(const History& hist, const PhysicalParams& par, double tau,
                 int order, const StepSources* sources = nullptr,
                 bool relax_r = true);

}  // namespace chb
