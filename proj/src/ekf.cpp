#include "psse/ekf.hpp"

#include <cmath>
#include <stdexcept>

namespace psse {

RMatrix real_embedding(const CMatrix& A) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n) throw std::invalid_argument("real_embedding: matrix must be square");
  RMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = A.real();
  out.topRightCorner(n, n) = -A.imag();
  out.bottomLeftCorner(n, n) = A.imag();
  out.bottomRightCorner(n, n) = A.real();
  return out;
}

RVector real_state(const CVector& v) {
  const int n = static_cast<int>(v.size());
  RVector x(2 * n);
  x.head(n) = v.real();
  x.tail(n) = v.imag();
  return x;
}

CVector complex_state(const RVector& x) {
  if (x.size() % 2 != 0) throw std::invalid_argument("complex_state: odd length");
  const int n = static_cast<int>(x.size()) / 2;
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(x(i), x(n + i));
  return v;
}

RVector quadratic_measurements(const std::vector<RMatrix>& forms, const RVector& x) {
  RVector out(static_cast<int>(forms.size()));
  for (int l = 0; l < static_cast<int>(forms.size()); ++l) {
    if (forms[l].rows() != x.size() || forms[l].cols() != x.size()) {
      throw std::invalid_argument("quadratic_measurements: dimension mismatch");
    }
    out(l) = x.dot(forms[l] * x);
  }
  return out;
}

RMatrix measurement_jacobian(const std::vector<RMatrix>& forms, const RVector& x) {
  RMatrix jac(static_cast<int>(forms.size()), x.size());
  for (int l = 0; l < static_cast<int>(forms.size()); ++l) {
    if (forms[l].rows() != x.size() || forms[l].cols() != x.size()) {
      throw std::invalid_argument("measurement_jacobian: dimension mismatch");
    }
    jac.row(l) = 2.0 * (forms[l] * x).transpose();
  }
  return jac;
}

EkfResult ekf_filter(const MeasurementFn& model, const std::vector<RMatrix>& transitions_real,
                     const std::vector<RVector>& z, const EkfState& init, const RMatrix& Q,
                     const RMatrix& R, const EkfOptions& options) {
  if (z.empty()) throw std::invalid_argument("ekf_filter: no measurements");
  const int steps = static_cast<int>(z.size());
  if (static_cast<int>(transitions_real.size()) < steps - 1) {
    throw std::invalid_argument("ekf_filter: need a transition per step");
  }
  const int dim = static_cast<int>(init.mean.size());
  if (init.cov.rows() != dim || init.cov.cols() != dim || Q.rows() != dim || Q.cols() != dim) {
    throw std::invalid_argument("ekf_filter: dimension mismatch");
  }

  EkfResult result;
  result.estimates.reserve(steps);
  RVector mean = init.mean;
  RMatrix cov = init.cov;
  const RMatrix identity = RMatrix::Identity(dim, dim);

  for (int k = 0; k < steps; ++k) {
    if (k > 0) {
      const RMatrix& F = transitions_real[k - 1];
      mean = F * mean;
      cov = F * cov * F.transpose() + Q;
      cov = 0.5 * (cov + cov.transpose());
    }

    RVector predicted = model.value(mean);
    RMatrix jac = model.jacobian(mean);
    if (predicted.size() != z[k].size() || jac.rows() != z[k].size()) {
      throw std::invalid_argument("ekf_filter: measurement dimension mismatch");
    }
    if (R.rows() != predicted.size() || R.cols() != predicted.size()) {
      throw std::invalid_argument("ekf_filter: R dimension mismatch");
    }

    RMatrix innovation_cov = jac * cov * jac.transpose() + R;
    Eigen::LDLT<RMatrix> ldlt(innovation_cov);
    bool singular = ldlt.info() != Eigen::Success || !innovation_cov.allFinite() ||
                    ldlt.vectorD().minCoeff() <= 0.0;
    if (singular) {
      innovation_cov += 1e-10 * RMatrix::Identity(innovation_cov.rows(), innovation_cov.cols());
      ldlt.compute(innovation_cov);
      result.regularized = true;
    }
    RMatrix gain = ldlt.solve(jac * cov).transpose();

    mean += gain * (z[k] - predicted);
    RMatrix shrink = identity - gain * jac;
    cov = shrink * cov * shrink.transpose() + gain * R * gain.transpose();
    cov = 0.5 * (cov + cov.transpose());

    if (options.record_diagnostics) {
      Eigen::SelfAdjointEigenSolver<RMatrix> es(cov, Eigen::EigenvaluesOnly);
      result.cov_min_eigenvalue.push_back(es.eigenvalues().minCoeff());
      result.cov_asymmetry.push_back((cov - cov.transpose()).norm());
    }
    result.estimates.push_back(complex_state(mean));
  }
  return result;
}

EkfResult ekf_run(const GridModel& grid, const MeasurementPlan& plan,
                  const std::vector<RVector>& z, const std::vector<CMatrix>& transitions,
                  const EkfState& init, const RMatrix& Q, const RMatrix& R,
                  const EkfOptions& options) {
  std::vector<CMatrix> matrices = plan_matrices(grid, plan);
  std::vector<RMatrix> forms;
  forms.reserve(matrices.size());
  for (const CMatrix& H : matrices) forms.push_back(real_embedding(H));

  MeasurementFn model;
  model.value = [forms](const RVector& x) { return quadratic_measurements(forms, x); };
  model.jacobian = [forms](const RVector& x) { return measurement_jacobian(forms, x); };

  std::vector<RMatrix> transitions_real;
  transitions_real.reserve(transitions.size());
  for (const CMatrix& F : transitions) transitions_real.push_back(real_embedding(F));

  return ekf_filter(model, transitions_real, z, init, Q, R, options);
}

EkfState flat_start(int bus_count, double init_std) {
  EkfState state;
  state.mean = RVector::Zero(2 * bus_count);
  state.mean.head(bus_count).setOnes();
  state.cov = init_std * init_std * RMatrix::Identity(2 * bus_count, 2 * bus_count);
  return state;
}

RMatrix process_covariance(const NoiseModel& noise, int bus_count) {
  double a = noise.process_mag_bound;
  double variance = kProcessNoiseIsotropicScale * a * a / 3.0;
  return variance * RMatrix::Identity(2 * bus_count, 2 * bus_count);
}

RMatrix measurement_covariance(const NoiseModel& noise, int count) {
  double a = noise.meas_bound;
  return (a * a / 3.0) * RMatrix::Identity(count, count);
}

}  // namespace psse
