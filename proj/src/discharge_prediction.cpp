#include "evtol/discharge_prediction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "evtol/errors.hpp"

namespace evtol::prediction {

namespace {

constexpr double kTimeEps = 1e-9;

// Currents and interval widths needed to replay an observation.
struct Replay {
  std::vector<double> dt;       // width of the interval ending at sample k (0 for k = 0)
  std::vector<double> current;  // current during that interval
  std::vector<double> voltage;
  double z0 = 1.0;
};

Replay make_replay(const Observation& obs) {
  if (obs.samples.size() < 3) throw ArgumentError("observation needs at least three samples");
  Replay r;
  r.z0 = obs.initial_z;
  const auto n = obs.samples.size();
  r.dt.resize(n);
  r.current.resize(n);
  r.voltage.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = obs.samples[k];
    if (k > 0 && !(s.t > obs.samples[k - 1].t)) {
      throw ArgumentError("observation times must be strictly increasing");
    }
    r.dt[k] = k == 0 ? 0.0 : s.t - obs.samples[k - 1].t;
    r.current[k] = s.current;
    r.voltage[k] = s.voltage;
  }
  return r;
}

battery::BatteryParams with_health(double q_max, double r0) {
  battery::BatteryParams p;
  p.q_max = q_max;
  p.r0 = r0;
  return p;
}

// Open-circuit voltage minus measured voltage at each sample for a given
// capacity; the residual for resistance r is a_k - I_k r.
void ocv_gap(const Replay& rp, double q_max, std::vector<double>& a) {
  const auto params = with_health(q_max, 0.0);
  a.resize(rp.voltage.size());
  battery::BatteryState state{rp.z0, 0.0, 0.0};
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (k > 0) state = battery::step(state, rp.current[k], rp.dt[k], params);
    a[k] = battery::ocv(state.z, params) - rp.voltage[k];
  }
}

void scan_row(const Replay& rp, const EstimatorBox& box, int qi, double* row) {
  const auto& g = box.grid;
  const double q = g.q_lo + (g.q_hi - g.q_lo) * qi / (kGridSize - 1);
  std::vector<double> a;
  ocv_gap(rp, q, a);
  double A = 0.0, B = 0.0, C = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    A += a[k] * a[k];
    B += a[k] * rp.current[k];
    C += rp.current[k] * rp.current[k];
  }
  for (int ri = 0; ri < kGridSize; ++ri) {
    const double r = g.r0_lo + (g.r0_hi - g.r0_lo) * ri / (kGridSize - 1);
    row[ri] = std::max(0.0, A - 2.0 * r * B + r * r * C);
  }
}

void pick_best(GridScan& scan) {
  // Lowest flattened index wins ties, i.e. lexicographically smallest (q, r).
  const auto it = std::min_element(scan.sse.begin(), scan.sse.end());
  const auto idx = static_cast<int>(it - scan.sse.begin());
  scan.best_q = idx / kGridSize;
  scan.best_r = idx % kGridSize;
}

void check_identifiable(const Replay& rp) {
  const bool all_zero = std::all_of(rp.current.begin(), rp.current.end(),
                                    [](double i) { return i == 0.0; });
  if (all_zero) {
    throw UnidentifiableError(
        "observation carries no current: r0 is unidentifiable and q_max is pinned to the box");
  }
}

double sse_of(const Replay& rp, double theta, double r0, std::vector<double>& resid) {
  battery::BatteryParams p = with_health(1.0 / theta, r0);
  resid.resize(rp.voltage.size());
  battery::BatteryState state{rp.z0, 0.0, 0.0};
  double sse = 0.0;
  for (std::size_t k = 0; k < resid.size(); ++k) {
    if (k > 0) state = battery::step(state, rp.current[k], rp.dt[k], p);
    resid[k] = rp.voltage[k] - (battery::ocv(state.z, p) - rp.current[k] * r0);
    sse += resid[k] * resid[k];
  }
  return sse;
}

}  // namespace

Observation observe(const battery::BatteryParams& params, const CurrentProfile& profile,
                    double initial_z, double noise_sigma, Rng& rng, double period) {
  if (!(period > 0.0 && period <= 1.0)) throw ArgumentError("observation period must lie in (0, 1] s");
  if (!(noise_sigma >= 0.0)) throw ArgumentError("noise sigma must be non-negative");
  if (profile.duration() < kObservationWindow - kTimeEps) {
    throw ArgumentError("profile shorter than the 20 s observation window");
  }
  const auto window = profile.truncated(kObservationWindow);
  const auto n = static_cast<long>(std::llround(kObservationWindow / period));

  Observation obs;
  obs.noise_sigma = noise_sigma;
  obs.period = period;
  obs.initial_z = initial_z;
  obs.samples.reserve(static_cast<std::size_t>(n) + 1);

  // Segment boundaries in absolute time.
  std::vector<double> ends;
  double acc = 0.0;
  for (const auto& s : window.segments) ends.push_back(acc += s.duration);
  auto segment_at = [&](double t) {
    // Segment owning the half-open interval (start, end] that contains t.
    for (std::size_t i = 0; i < ends.size(); ++i) {
      if (t <= ends[i] + kTimeEps && window.segments[i].duration > 0.0) return i;
    }
    return ends.size() - 1;
  };

  std::normal_distribution<double> noise(0.0, 1.0);
  battery::BatteryState state{initial_z, 0.0, 0.0};
  double current = window.segments[segment_at(0.0)].current;
  for (long k = 0; k <= n; ++k) {
    const double t1 = static_cast<double>(k) * period;
    if (k > 0) {
      const double t0 = static_cast<double>(k - 1) * period;
      double cursor = t0;
      // Split the interval at segment boundaries it straddles.
      for (std::size_t i = 0; i < ends.size(); ++i) {
        if (ends[i] <= cursor + kTimeEps || window.segments[i].duration <= 0.0) continue;
        const double stop = std::min(ends[i], t1);
        const double width = (stop == t1 && cursor == t0) ? t1 - t0 : stop - cursor;
        if (width > 0.0) {
          state = battery::step(state, window.segments[i].current, width, params);
          current = window.segments[i].current;
        }
        cursor = stop;
        if (cursor >= t1 - kTimeEps) break;
      }
    }
    double v = battery::terminal_voltage(state.z, current, params);
    if (noise_sigma > 0.0) v += noise_sigma * noise(rng);
    obs.samples.push_back({t1, current, v});
  }
  return obs;
}

GridScan grid_scan_serial(const Observation& obs, const EstimatorBox& box) {
  const auto rp = make_replay(obs);
  GridScan scan;
  scan.sse.assign(static_cast<std::size_t>(kGridSize) * kGridSize, 0.0);
  for (int qi = 0; qi < kGridSize; ++qi) scan_row(rp, box, qi, scan.sse.data() + qi * kGridSize);
  pick_best(scan);
  return scan;
}

GridScan grid_scan(const Observation& obs, const EstimatorBox& box) {
  const auto rp = make_replay(obs);
  GridScan scan;
  scan.sse.assign(static_cast<std::size_t>(kGridSize) * kGridSize, 0.0);
#pragma omp parallel for schedule(static)
  for (int qi = 0; qi < kGridSize; ++qi) scan_row(rp, box, qi, scan.sse.data() + qi * kGridSize);
  pick_best(scan);
  return scan;
}

std::vector<double> model_voltages(const Observation& obs, double q_max, double r0) {
  const auto rp = make_replay(obs);
  const auto p = with_health(q_max, r0);
  std::vector<double> v(rp.voltage.size());
  battery::BatteryState state{rp.z0, 0.0, 0.0};
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k > 0) state = battery::step(state, rp.current[k], rp.dt[k], p);
    v[k] = battery::ocv(state.z, p) - rp.current[k] * r0;
  }
  return v;
}

HealthEstimate infer_health(const Observation& obs, const EstimatorBox& box) {
  const auto rp = make_replay(obs);
  check_identifiable(rp);
  const auto scan = grid_scan(obs, box);
  const auto& g = box.grid;

  // Levenberg-Marquardt in (theta = 1/q_max, r0), started from the grid cell.
  const double theta_lo = 1.0 / box.q_max();
  const double theta_hi = 1.0 / box.q_min();
  double theta = 1.0 / (g.q_lo + (g.q_hi - g.q_lo) * scan.best_q / (kGridSize - 1));
  double r0 = g.r0_lo + (g.r0_hi - g.r0_lo) * scan.best_r / (kGridSize - 1);

  std::vector<double> resid;
  std::vector<double> trial;
  double sse = sse_of(rp, theta, r0, resid);
  double lambda = 1e-3;
  const battery::BatteryParams shape{};
  for (int iter = 0; iter < 200; ++iter) {
    // Jacobian of the model voltage; residual = measured - model.
    double jtj[2][2] = {{0, 0}, {0, 0}};
    double jte[2] = {0, 0};
    double charge = 0.0;
    double z = rp.z0;
    for (std::size_t k = 0; k < resid.size(); ++k) {
      charge += rp.current[k] * rp.dt[k];
      z = std::max(0.0, rp.z0 - charge * theta);
      const double dv_dtheta =
          z > 0.0 ? -(shape.v_full - shape.v_min) * shape.p_exp * std::pow(z, shape.p_exp - 1.0) * charge
                  : 0.0;
      const double dv_dr = -rp.current[k];
      jtj[0][0] += dv_dtheta * dv_dtheta;
      jtj[0][1] += dv_dtheta * dv_dr;
      jtj[1][1] += dv_dr * dv_dr;
      jte[0] += dv_dtheta * resid[k];
      jte[1] += dv_dr * resid[k];
    }
    jtj[1][0] = jtj[0][1];

    bool improved = false;
    double step_theta = 0.0, step_r = 0.0;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      const double a = jtj[0][0] * (1.0 + lambda);
      const double d = jtj[1][1] * (1.0 + lambda);
      const double b = jtj[0][1];
      const double det = a * d - b * b;
      if (!(std::abs(det) > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double cand_theta = std::clamp(theta + (d * jte[0] - b * jte[1]) / det, theta_lo, theta_hi);
      const double cand_r = std::clamp(r0 + (a * jte[1] - b * jte[0]) / det, box.r0_min(), box.r0_max());
      const double cand_sse = sse_of(rp, cand_theta, cand_r, trial);
      if (cand_sse < sse) {
        step_theta = cand_theta - theta;
        step_r = cand_r - r0;
        theta = cand_theta;
        r0 = cand_r;
        sse = cand_sse;
        resid.swap(trial);
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
    if (std::abs(step_theta) <= 1e-12 * theta && std::abs(step_r) <= 1e-12 * std::max(r0, 1e-6)) break;
  }

  HealthEstimate est;
  est.q_max_hat = 1.0 / theta;
  est.r0_hat = r0;
  est.residual = std::sqrt(sse / static_cast<double>(resid.size()));
  est.q_at_bound = theta <= theta_lo * (1 + 1e-12) || theta >= theta_hi * (1 - 1e-12);
  est.r0_at_bound = r0 <= box.r0_min() * (1 + 1e-12) || r0 >= box.r0_max() * (1 - 1e-12);
  return est;
}

HealthEmbedding embed(const HealthEstimate& est, const battery::HealthRanges& ranges) {
  HealthEmbedding e;
  e.pc1 = std::clamp((est.q_max_hat - ranges.q_lo) / (ranges.q_hi - ranges.q_lo), 0.0, 1.0);
  e.pc2 = std::clamp((est.r0_hat - ranges.r0_lo) / (ranges.r0_hi - ranges.r0_lo), 0.0, 1.0);
  return e;
}

DischargePrediction predict(const HealthEstimate& est, const CurrentProfile& planned,
                            double initial_z) {
  if (planned.empty()) throw ArgumentError("planned profile is empty");
  const auto params = with_health(est.q_max_hat, est.r0_hat);
  DischargePrediction out;
  out.trajectory = battery::simulate_discharge(params, planned, initial_z);
  const double duration = planned.duration();
  if (out.trajectory.eod_reached()) {
    out.predicted_eod_margin = *out.trajectory.eod_time - duration;
  } else {
    double last_current = 0.0;
    for (const auto& s : planned.segments) {
      if (s.duration > 0.0) last_current = s.current;
    }
    out.predicted_eod_margin = last_current > 0.0
                                   ? params.q_max * out.trajectory.final_z / last_current
                                   : std::numeric_limits<double>::infinity();
  }
  out.feasible = out.predicted_eod_margin > 0.0;
  return out;
}

}  // namespace evtol::prediction
