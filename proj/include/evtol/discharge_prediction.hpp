#pragma once

#include <vector>

#include "evtol/battery.hpp"
#include "evtol/profile.hpp"
#include "evtol/rng.hpp"

namespace evtol::prediction {

inline constexpr double kObservationWindow = 20.0;  // s
inline constexpr double kObservationPeriod = 0.01;  // s
inline constexpr double kDefaultNoiseSigma = 0.005;  // V
inline constexpr int kGridSize = 50;

struct Observation {
  std::vector<battery::TrajectorySample> samples;
  double noise_sigma = 0.0;
  double period = kObservationPeriod;
  double initial_z = 1.0;  // flights start from a full charge
};

struct HealthEstimate {
  double q_max_hat = 0.0;
  double r0_hat = 0.0;
  double residual = 0.0;  // RMS volts
  bool q_at_bound = false;
  bool r0_at_bound = false;
};

struct HealthEmbedding {
  double pc1 = 0.0;
  double pc2 = 0.0;
};

struct DischargePrediction {
  battery::VoltageTrajectory trajectory;
  double predicted_eod_margin = 0.0;  // s; positive means the profile completes
  bool feasible = false;
};

// Estimator search box: the sampling ranges widened to 0.5x / 2x.
struct EstimatorBox {
  battery::HealthRanges grid{};
  double widen_lo = 0.5;
  double widen_hi = 2.0;

  double q_min() const { return grid.q_lo * widen_lo; }
  double q_max() const { return grid.q_hi * widen_hi; }
  double r0_min() const { return grid.r0_lo * widen_lo; }
  double r0_max() const { return grid.r0_hi * widen_hi; }
};

// First 20 s of `profile` under the true parameters, sampled every `period`
// seconds (inclusive endpoints) with i.i.d. Gaussian voltage noise.
Observation observe(const battery::BatteryParams& params, const CurrentProfile& profile,
                    double initial_z, double noise_sigma, Rng& rng,
                    double period = kObservationPeriod);

// Grid-initialized least squares over (q_max, r0).
HealthEstimate infer_health(const Observation& obs, const EstimatorBox& box = {});

HealthEmbedding embed(const HealthEstimate& est, const battery::HealthRanges& ranges = {});

DischargePrediction predict(const HealthEstimate& est, const CurrentProfile& planned,
                            double initial_z);

// Exposed for testing and benchmarking: sum of squared residuals over the
// 50x50 coarse grid, flattened row-major (q index major). The OpenMP and
// serial variants must agree exactly.
struct GridScan {
  std::vector<double> sse;
  int best_q = 0;
  int best_r = 0;
};

GridScan grid_scan(const Observation& obs, const EstimatorBox& box = {});
GridScan grid_scan_serial(const Observation& obs, const EstimatorBox& box = {});

// Model response at the observation sample times for given parameters.
std::vector<double> model_voltages(const Observation& obs, double q_max, double r0);

}  // namespace evtol::prediction
