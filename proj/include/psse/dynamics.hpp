#pragma once

#include <vector>

#include "psse/grid.hpp"
#include "psse/rng.hpp"
#include "psse/types.hpp"

namespace psse {

// Noise bounds for the simulated system. Process noise entries are
// m*exp(j*theta) with m and theta independently uniform on
// [-process_mag_bound, process_mag_bound] resp. [-angle_bound, angle_bound];
// a negative m is a phase flip. Measurement noise is additive uniform on
// [-meas_bound, meas_bound]. The initial state has magnitudes
// Normal(init_mag_mean, init_mag_std) and angles uniform on
// [-init_angle_bound, init_angle_bound], with the reference-bus angle
// forced to zero.
struct NoiseModel {
  double process_mag_bound = 0.05;
  double process_angle_bound = 0.05;
  double meas_bound = 0.05;
  double init_mag_mean = 1.0;
  double init_mag_std = 0.1;
  double init_angle_bound = 0.5 * kPi;
};

struct Trajectory {
  std::vector<CVector> states;        // v_0 .. v_{K}
  std::vector<RVector> measurements;  // z_0 .. z_K, one entry per plan descriptor
  std::vector<CMatrix> transitions;   // F_0 .. F_{K-1}
  MeasurementPlan plan;

  int last_index() const { return static_cast<int>(states.size()) - 1; }
};

// v_next = F v + xi.
CVector propagate(const CMatrix& F, const CVector& v, const CVector& xi);

// Draw order per bus: magnitude, then angle. The angle is drawn for every
// bus (including the reference) and then overridden to zero at the
// reference, so the consumed draw count does not depend on which bus is
// the reference.
CVector sample_initial_state(const NoiseModel& noise, int bus_count, Rng& rng,
                             int reference_bus = 0);

// Draw order per entry: magnitude, then angle.
CVector sample_process_noise(const NoiseModel& noise, int bus_count, Rng& rng);

RVector sample_measurement_noise(const NoiseModel& noise, int count, Rng& rng);

// Simulates `steps` states v_0..v_{steps-1} and their noisy measurements.
// Needs steps-1 transition matrices. Draw order: initial state (skipped
// when initial_state is supplied), then all process noises in time order,
// then all measurement noises in time order.
Trajectory simulate(const GridModel& grid, const MeasurementPlan& plan,
                    const std::vector<CMatrix>& transitions, const NoiseModel& noise, int steps,
                    Rng& rng, const CVector* initial_state = nullptr);

}  // namespace psse
