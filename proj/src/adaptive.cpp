#include "chb/adaptive.hpp"

#include <algorithm>

namespace chb {

void OrderConfig::validate() const {
  if (!(rho > 0.0) || rho > 1.0)
    throw std::invalid_argument("safety factor rho must be in (0, 1]");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(r_exp > 0.0))
    throw std::invalid_argument("adaptivity exponent must be positive");
  if (!(m_exp > 0.0) || m_exp > 1.0)
    throw std::invalid_argument("indicator exponent must be in (0, 1]");
  if (!(tau_min > 0.0) || !(tau_min <= tau_max))
    throw std::invalid_argument("need 0 < tau_min <= tau_max");
  if (gamma_star < 0.0)
    throw std::invalid_argument("energy coefficient must be nonnegative");
}

const OrderConfig& AdaptiveConfig::block(int order) const {
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument("order must be in 1..4");
  return orders[order - 1];
}

OrderConfig& AdaptiveConfig::block(int order) {
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument("order must be in 1..4");
  return orders[order - 1];
}

void AdaptiveConfig::validate() const {
  for (const auto& c : orders) c.validate();
  if (t_switch < 0.0)
    throw std::invalid_argument("switch time must be nonnegative");
  if (max_retries < 0)
    throw std::invalid_argument("max_retries must be nonnegative");
}

double a_dp(const OrderConfig& cfg, double e_m, double tau) {
  if (!(e_m > 0.0)) throw std::invalid_argument("indicator must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument("step size must be positive");
  return cfg.rho * std::pow(cfg.tol / e_m, cfg.r_exp) * tau;
}

double clamp_step(const OrderConfig& cfg, double tau_prop,
                  double energy_rate) {
  const double ge = cfg.gamma_star * energy_rate;
  const double cap = cfg.tau_max / std::sqrt(1.0 + ge * ge);
  return std::max(cfg.tau_min, std::min(tau_prop, cap));
}

double estimate_energy_rate(const History& hist) {
  if (hist.size() < 2) return 0.0;
  const double dt = hist.state(0).t - hist.state(1).t;
  return (hist.e1(0) - hist.e1(1)) / dt;
}

AdaptiveStepResult adaptive_step(const History& hist,
                                 const PhysicalParams& par,
                                 const AdaptiveConfig& cfg, int order,
                                 double tau, const StepSources* sources) {
  const OrderConfig& block = cfg.block(order);
  const int order_eff = std::min(order, hist.size());
  const double energy_rate = estimate_energy_rate(hist);

  std::optional<StepOutcome> kept;
  auto attempt = [&](double tau_try) {
    kept = step(hist, par, tau_try, order_eff, sources);
    return kept->e;
  };
  ControlDecision d =
      control_step(block, cfg.max_retries, tau, energy_rate, attempt);
  return {std::move(*kept), d.tau_used, d.tau_next, d.retries, order_eff};
}

AdaptiveStepResult hybrid_step(const History& hist, const PhysicalParams& par,
                               const AdaptiveConfig& cfg, double tau,
                               const StepSources* sources) {
  const int desired = (hist.t() + tau <= cfg.t_switch) ? 3 : 2;
  return adaptive_step(hist, par, cfg, desired, tau, sources);
}

}  // namespace chb
