#include "psse/dynamics.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace psse {

CVector propagate(const CMatrix& F, const CVector& v, const CVector& xi) {
  if (F.rows() != F.cols() || F.cols() != v.size() || xi.size() != v.size()) {
    throw std::invalid_argument("propagate: dimension mismatch");
  }
  return F * v + xi;
}

CVector sample_initial_state(const NoiseModel& noise, int bus_count, Rng& rng,
                             int reference_bus) {
  CVector v(bus_count);
  for (int n = 0; n < bus_count; ++n) {
    double mag = rng.normal(noise.init_mag_mean, noise.init_mag_std);
    double angle = rng.uniform(-noise.init_angle_bound, noise.init_angle_bound);
    if (n == reference_bus) angle = 0.0;
    v(n) = std::polar(mag, angle);
  }
  return v;
}

CVector sample_process_noise(const NoiseModel& noise, int bus_count, Rng& rng) {
  CVector xi(bus_count);
  for (int n = 0; n < bus_count; ++n) {
    double mag = rng.uniform(-noise.process_mag_bound, noise.process_mag_bound);
    double angle = rng.uniform(-noise.process_angle_bound, noise.process_angle_bound);
    assert(std::abs(mag) <= noise.process_mag_bound);
    xi(n) = mag * std::polar(1.0, angle);
  }
  return xi;
}

RVector sample_measurement_noise(const NoiseModel& noise, int count, Rng& rng) {
  RVector eta(count);
  for (int i = 0; i < count; ++i) {
    eta(i) = rng.uniform(-noise.meas_bound, noise.meas_bound);
    assert(std::abs(eta(i)) <= noise.meas_bound);
  }
  return eta;
}

Trajectory simulate(const GridModel& grid, const MeasurementPlan& plan,
                    const std::vector<CMatrix>& transitions, const NoiseModel& noise, int steps,
                    Rng& rng, const CVector* initial_state) {
  if (steps < 1) throw std::invalid_argument("simulate: steps must be >= 1");
  validate_plan(grid, plan);
  if (static_cast<int>(transitions.size()) < steps - 1) {
    throw std::invalid_argument("simulate: need steps-1 transition matrices");
  }

  const int n = grid.bus_count;
  CVector v0;
  if (initial_state != nullptr) {
    if (initial_state->size() != n) throw std::invalid_argument("simulate: bad initial state");
    v0 = *initial_state;
  } else {
    v0 = sample_initial_state(noise, n, rng);
  }

  std::vector<CVector> process(steps - 1);
  for (int k = 0; k + 1 < steps; ++k) process[k] = sample_process_noise(noise, n, rng);
  const int measurement_count = static_cast<int>(plan.size());
  std::vector<RVector> meas_noise(steps);
  for (int k = 0; k < steps; ++k) {
    meas_noise[k] = sample_measurement_noise(noise, measurement_count, rng);
  }

  std::vector<CMatrix> matrices = plan_matrices(grid, plan);

  Trajectory traj;
  traj.plan = plan;
  traj.states.reserve(steps);
  traj.measurements.reserve(steps);
  traj.transitions.assign(transitions.begin(), transitions.begin() + (steps - 1));

  traj.states.push_back(v0);
  for (int k = 0; k + 1 < steps; ++k) {
    traj.states.push_back(propagate(transitions[k], traj.states.back(), process[k]));
  }
  for (int k = 0; k < steps; ++k) {
    RVector z(measurement_count);
    for (int l = 0; l < measurement_count; ++l) {
      z(l) = evaluate_measurement(matrices[l], traj.states[k]) + meas_noise[k](l);
    }
    traj.measurements.push_back(z);
  }
  return traj;
}

}  // namespace psse
