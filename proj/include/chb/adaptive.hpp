#pragma once
// Accept/reject step-size control driven by the auxiliary-ratio indicator
// e = |1 - xi|.  A trial step is accepted once e^m <= tol (or the floor
// tau_min is reached); the next step follows the dead-beat proposal
// a_dp = rho*(tol/e^m)^r * tau, capped by tau_max shrunk through the
// current energy slope: tau_max / sqrt(1 + (gamma_star*E')^2).
//
// The hybrid controller runs order 3 while t_{n+1} <= t_switch and order 2
// afterwards, each with its own parameter block and sharing one history.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "chb/stepper.hpp"

namespace chb {

struct OrderConfig {
  double rho = 0.75;      // safety factor in (0, 1]
  double tol = 1e-3;      // acceptance tolerance for e^m
  double r_exp = 0.5;     // adaptivity-speed exponent
  double m_exp = 1.0;     // indicator exponent in (0, 1]
  double tau_min = 1e-6;
  double tau_max = 1e-2;
  double gamma_star = 1.0;  // energy-slope coefficient of the cap
  void validate() const;
};

struct AdaptiveConfig {
  std::array<OrderConfig, kMaxOrder> orders{};  // block k lives at orders[k-1]
  double t_switch = 0.0;  // hybrid: order 3 through here, order 2 after
  int max_retries = 20;
  const OrderConfig& block(int order) const;
  OrderConfig& block(int order);
  void validate() const;
};

// Dead-beat step proposal from the (floored, exponentiated) indicator e_m.
double a_dp(const OrderConfig& cfg, double e_m, double tau);

// max(tau_min, min(tau_prop, tau_max / sqrt(1 + (gamma_star*energy_rate)^2)))
double clamp_step(const OrderConfig& cfg, double tau_prop, double energy_rate);

// Backward difference of the shifted energy over the last accepted step;
// 0 with fewer than two levels.
double estimate_energy_rate(const History& hist);

struct ControlDecision {
  double tau_used = 0.0;
  double tau_next = 0.0;
  double e = 0.0;
  int retries = 0;
};

// Core accept/reject loop.  `attempt(tau)` runs one trial step and returns
// its indicator e = |1 - xi|; rejected trials are simply recomputed with a
// smaller step.  Kept generic so tests can drive it with synthetic
// indicator responses.
template <class Attempt>
ControlDecision control_step(const OrderConfig& cfg, int max_retries,
                             double tau, double energy_rate,
                             Attempt&& attempt) {
  cfg.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("step size must be positive");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");

  double tau_try = std::clamp(tau, cfg.tau_min, cfg.tau_max);
  int retries = 0;
  for (;;) {
    const double e = attempt(tau_try);
    if (!(e >= 0.0)) throw std::runtime_error("indicator must be nonnegative");
    // the acceptance test uses the raw indicator; the floor below only
    // guards the step proposal against e = 0
    const bool ok = std::pow(e, cfg.m_exp) <= cfg.tol;
    const double e_m = std::pow(std::max(e, 1e-16), cfg.m_exp);
    if (ok || tau_try <= cfg.tau_min || retries >= max_retries) {
      const double next = clamp_step(cfg, a_dp(cfg, e_m, tau_try), energy_rate);
      return {tau_try, next, e, retries};
    }
    ++retries;
    if (retries >= max_retries) {
      tau_try = cfg.tau_min;  // retry budget exhausted: take the floor step
    } else {
      tau_try = clamp_step(cfg, a_dp(cfg, e_m, tau_try), energy_rate);
    }
  }
}

struct AdaptiveStepResult {
  StepOutcome outcome;
  double tau_used = 0.0;
  double tau_next = 0.0;
  int retries = 0;
  int order_used = 0;
};

// One adaptive step at the given order's parameter block.  The effective
// BDF order is lowered to the available history depth while bootstrapping.
AdaptiveStepResult adaptive_step(const History& hist,
                                 const PhysicalParams& par,
                                 const AdaptiveConfig& cfg, int order,
                                 double tau,
                                 const StepSources* sources = nullptr);

// Hybrid-order step: order 3 while t + tau <= cfg.t_switch, else order 2.
AdaptiveStepResult hybrid_step(const History& hist, const PhysicalParams& par,
                               const AdaptiveConfig& cfg, double tau,
                               const StepSources* sources = nullptr);

}  // namespace chb
