#pragma once
// Experiment driver: seeded initial data, the simulation loop for fixed and
// adaptive stepping, per-step records, and the file formats used to compare
// runs (CSV traces, binary state files, graymap snapshots).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chb/adaptive.hpp"

namespace chb {

enum class ExperimentId {
  convergence,       // manufactured-solution setup (see mms.hpp)
  coarsening,        // randomly perturbed mixture, fixed steps
  adaptive_compare,  // same mixture under the adaptive controllers
  buoyancy,          // sandwiched light layer with variable mobility
  custom
};

enum class SchemeKind { fixed, algorithm1, algorithm2 };

struct RunConfig {
  ExperimentId experiment = ExperimentId::coarsening;
  SchemeKind scheme = SchemeKind::fixed;
  int n = 64;
  int order = 2;      // BDF order for fixed stepping and algorithm1
  double tau = 1e-3;  // fixed step size, or the adaptive starting step
  double t_final = 1.0;
  std::uint64_t seed = 42;
  bool relax = true;  // off runs the plain (unrelaxed) scheme; fixed only
  PhysicalParams params;
  AdaptiveConfig adaptive;
  std::vector<double> snapshot_times;
  std::string out_dir;  // empty: no files written
  void validate() const;
};

// One CSV row per accepted step.
struct RunRecord {
  double t = 0.0, tau = 0.0;
  int order = 0;
  double energy = 0.0, e1 = 0.0, r = 0.0;
  double xi = 0.0, zeta = 0.0, sigma0 = 0.0, delta = 0.0, e = 0.0;
  int retries = 0;
  double wall_ms = 0.0;
};

struct RunResult {
  FieldState state;  // final accepted state
  double r = 0.0;    // final auxiliary value
  long steps = 0;    // accepted steps
  long rejects = 0;  // rejected trials across the run
  double wall_s = 0.0;
};

using StepObserver = std::function<void(const RunRecord&, const FieldState&)>;

// phi = -0.5 - 0.001*(2*Rand - 1), one uniform [0,1) deviate per node in
// row-major order from a 64-bit Mersenne Twister seeded as given.
ScalarField coarsening_initial(const GridPtr& grid, std::uint64_t seed);

// Two tanh fronts sandwiching a light layer around y = pi/2, even in
// x about x = pi.
ScalarField layered_initial(const GridPtr& grid, double eps);

// Fill params, scheme choice, and adaptive blocks with the preset values
// for the chosen experiment; custom leaves the config untouched.
void apply_experiment_defaults(RunConfig& cfg);

// Integrate from t = 0; per-step records go to the observer and, when
// out_dir is set, to out_dir/trace.csv alongside snapshots and the final
// state.  Deterministic for a fixed config and seed.
RunResult run(const RunConfig& cfg, const StepObserver& observe = {});

// Binary state files: magic "CHBSTATE1", u32 n, f64 t, then phi, u1, u2, p
// as f64 row-major, all little-endian.
void save_state(const std::filesystem::path& path, const FieldState& state);
FieldState load_state(const std::filesystem::path& path,
                      double length = kTwoPi);

struct ErrorReport {
  double phi = 0.0, u1 = 0.0, u2 = 0.0, px = 0.0, py = 0.0;
};

// Discrete L2 norms of the differences; pressure through its gradient.
ErrorReport compare_states(const FieldState& a, const FieldState& b);

// 8-bit binary graymap, v = round(255*clamp((phi+1.1)/2.2, 0, 1)),
// rows from y = 0.
void write_pgm(const std::filesystem::path& path, const ScalarField& phi);

// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace chb
