// Phase-field model ingredients for the Cahn-Hilliard-Brinkman system:
// double-well potential F(phi) = (phi^2-1)^2/4, mobility laws, free energy
//   E(phi) = int (eps^2/2)|grad phi|^2 + F(phi),
// and the dissipation rate
//   kappa = int M(phi)|grad mu|^2 + (eta/gamma)|u|^2 + (nu/(2*gamma))|D(u)|^2,
// with D(u) = grad u + (grad u)^T.

#pragma once

#include <optional>

#include "chb/spectral.hpp"

namespace chb {

struct Mobility {
  enum class Kind { kConstant, kDegenerate };

  Kind kind = Kind::kConstant;
  double m0 = 1.0;  // constant value
  double pe = 1.0;  // Peclet number for the degenerate law

  static Mobility constant(double value) {
    return {Kind::kConstant, value, 1.0};
  }
  // M(phi) = (1/Pe) * sqrt((1-phi^2)^2 + eps^2); strictly positive.
  static Mobility degenerate(double peclet) {
    return {Kind::kDegenerate, 1.0, peclet};
  }

  bool is_constant() const { return kind == Kind::kConstant; }
  double operator()(double phi, double eps) const;
};

// Body force b = (0, -lambda*(phi - phi_bar)) in the momentum balance.
struct Buoyancy {
  double lambda = 0.0;
  double phi_bar = 0.0;
};

struct PhysicalParams {
  double eps = 1.0;     // interface width
  double gamma = 1.0;   // capillary coefficient
  double nu = 1.0;      // viscosity
  double eta = 1.0;     // Darcy drag
  double s_stab = 0.0;  // linear stabilization S
  double c0 = 0.0;      // energy shift: E1 = E + c0
  Mobility mobility{};
  std::optional<Buoyancy> buoyancy{};

  void validate() const;  // throws std::invalid_argument
};

// Complete solution snapshot at one time level.
struct FieldState {
  double t = 0.0;
  ScalarField phi;
  ScalarField mu;
  VectorField u;
  ScalarField p;
};

// Scalar auxiliary variable tracking the shifted energy.
struct AuxState {
  double r = 0.0;
};

double double_well(double phi);
double double_well_prime(double phi);

// phi^3 - (S+1)*phi with the cubic evaluated under the 2/3 dealiasing rule;
// the linear part is exact.
ScalarField f_prime_stabilized(const ScalarField& phi, double s_stab);

// mu = -eps^2 lap(phi) + F'(phi), cubic dealias-guarded.
ScalarField chemical_potential(const ScalarField& phi,
                               const PhysicalParams& par);

// Pointwise M(phi) on the collocation grid (phi dealiased first).
ScalarField mobility_field(const ScalarField& phi, const PhysicalParams& par);

double energy(const ScalarField& phi, const PhysicalParams& par);
double shifted_energy(const ScalarField& phi, const PhysicalParams& par);

double dissipation_rate(const ScalarField& phi, const ScalarField& mu,
                        const VectorField& u, const PhysicalParams& par);

VectorField buoyancy_force(const ScalarField& phi, const PhysicalParams& par);

}  // namespace chb
