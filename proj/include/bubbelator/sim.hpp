#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bubbelator/errors.hpp"
#include "bubbelator/model.hpp"

namespace bubbelator {

struct IntegratorOptions {
  double atol = 1e-10;
  double rtol = 1e-8;
  /// Full state is stored every `state_stride` accepted steps (and at both ends).
  int state_stride = 100;
  /// Relative mass drift above this aborts the run with NumericError.
  double mass_drift_bound = 1e-8;
  /// Initial step; 0 picks one from the local derivative scale.
  double first_dt = 0.0;
  double max_dt = std::numeric_limits<double>::infinity();
  /// Constant step without error control (used for convergence studies).
  std::optional<double> fixed_dt;
  std::size_t max_steps = 50'000'000;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double min_dt = std::numeric_limits<double>::infinity();
  double max_dt = 0.0;
};

struct Trajectory {
  /// Times of all accepted steps (t0 first), with n_1 and relative mass drift there.
  std::vector<double> times;
  std::vector<double> n1;
  std::vector<double> mass_drift;
  /// Full-state snapshots.
  std::vector<StateVector> states;
  StepStats step_stats;
  double max_mass_drift = 0.0;
  /// Smallest density seen at any accepted step; negative means positivity was lost.
  double min_density = std::numeric_limits<double>::infinity();
  bool positive = true;
};

/// Step size collapsed below 1e-14 t_end.
class StiffnessError : public NumericError {
 public:
  StiffnessError(const std::string& what, double t) : NumericError(what), t(t) {}
  double t;
};

/// The state became NaN or infinite.
class BlowUpError : public NumericError {
 public:
  BlowUpError(const std::string& what, double last_good_t) : NumericError(what), last_good_t(last_good_t) {}
  double last_good_t;
};

/// Dormand-Prince 5(4) integration from s0.t to t_end.
Trajectory integrate(const ModelParams& p, const StateVector& s0, double t_end,
                     const IntegratorOptions& opts = {});

struct OscillationMetrics {
  double amplitude = 0.0;
  double mean = 0.0;
  /// Mean spacing of upward mean crossings; absent if fewer than two.
  std::optional<double> period;
  int crossings = 0;
  /// Density index (1-based) the metrics refer to.
  int component = 1;
};

/// Peak-to-trough amplitude and period of n_1 over the last `window` fraction
/// of the trajectory's time span. Crossings use a hysteresis band of 5% of
/// the amplitude, and at least `noise_floor` relative to the mean: an
/// explicit integrator resting at a stable equilibrium jitters at the level of
/// its relative tolerance, which must not count as oscillation.
OscillationMetrics oscillation_metrics(const Trajectory& traj, double window = 0.5, double noise_floor = 1e-6);

/// Constant equilibrium plus delta times the real part of `mode`, with the
/// component along (1, ..., M) removed so the mass is unchanged. Without a
/// mode, the eigenvector of the rightmost eigenvalue with positive imaginary
/// part is used.
StateVector perturbed_equilibrium(const ModelParams& p, double delta,
                                  const std::optional<Eigen::VectorXcd>& mode = std::nullopt);

/// n_1 = n1, all other densities = fill.
StateVector step_initial_data(const ModelParams& p, double n1, double fill);

}  // namespace bubbelator
