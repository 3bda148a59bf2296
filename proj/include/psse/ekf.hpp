#pragma once

#include <functional>
#include <vector>

#include "psse/dynamics.hpp"
#include "psse/grid.hpp"
#include "psse/types.hpp"

namespace psse {

// Real 2N x 2N embedding [[Re A, -Im A], [Im A, Re A]] of a complex N x N
// matrix. For Hermitian H the embedding is symmetric and satisfies
// x^T Ht x = v^H H v with x = [Re v; Im v].
RMatrix real_embedding(const CMatrix& A);

RVector real_state(const CVector& v);
CVector complex_state(const RVector& x);

struct EkfState {
  RVector mean;  // [Re v; Im v]
  RMatrix cov;
};

// Values of the quadratic forms x^T Ht_l x.
RVector quadratic_measurements(const std::vector<RMatrix>& forms, const RVector& x);

// Exact gradient rows 2 (Ht_l x)^T of the quadratic forms.
RMatrix measurement_jacobian(const std::vector<RMatrix>& forms, const RVector& x);

// Measurement model as value + Jacobian callbacks so the filter core can
// also run on linear (or stubbed) models.
struct MeasurementFn {
  std::function<RVector(const RVector&)> value;
  std::function<RMatrix(const RVector&)> jacobian;
};

struct EkfOptions {
  bool record_diagnostics = false;
};

struct EkfResult {
  std::vector<CVector> estimates;  // one per measurement time
  bool regularized = false;        // an innovation covariance needed regularizing
  std::vector<double> cov_min_eigenvalue;  // per update, when diagnostics are on
  std::vector<double> cov_asymmetry;       // per update, when diagnostics are on
};

// Textbook extended Kalman filter with Joseph-form covariance updates.
// transitions_real holds the real embeddings of F_0..F_{K-1}; z has one
// vector per time step (the first is used for the update at k = 0).
EkfResult ekf_filter(const MeasurementFn& model, const std::vector<RMatrix>& transitions_real,
                     const std::vector<RVector>& z, const EkfState& init, const RMatrix& Q,
                     const RMatrix& R, const EkfOptions& options = {});

// EKF over the grid's quadratic measurement model.
EkfResult ekf_run(const GridModel& grid, const MeasurementPlan& plan,
                  const std::vector<RVector>& z, const std::vector<CMatrix>& transitions,
                  const EkfState& init, const RMatrix& Q, const RMatrix& R,
                  const EkfOptions& options = {});

// Isotropic scale for the process-noise covariance: an entry m e^{j theta}
// with m, theta uniform on [-a, a] has Var(Re) + Var(Im) = E[m^2] = a^2/3,
// so the average per-component variance is (a^2/3) / 2. Verified against a
// 1e6-draw sampling experiment in the tests.
inline constexpr double kProcessNoiseIsotropicScale = 0.5;

EkfState flat_start(int bus_count, double init_std);
RMatrix process_covariance(const NoiseModel& noise, int bus_count);
RMatrix measurement_covariance(const NoiseModel& noise, int count);

}  // namespace psse
