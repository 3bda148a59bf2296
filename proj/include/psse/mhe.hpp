#pragma once

#include <vector>

#include "psse/grid.hpp"
#include "psse/rng.hpp"
#include "psse/sdr.hpp"
#include "psse/types.hpp"

namespace psse {

// One sliding window ending at time k: the M+1 measurement vectors
// z_{k-M}..z_k and the M transition matrices F_{k-M}..F_{k-1}.
struct Window {
  int k = 0;
  int length = 0;  // M
  std::vector<RVector> measurements;
  std::vector<CMatrix> transitions;

  void validate() const;  // throws std::invalid_argument
};

enum class ExtractionMethod { kEigen, kRandomized };

struct MheConfig {
  int window = 2;  // M
  double mu = 1.0;
  double lambda = 0.0075;
  SolverConfig solver;
  ExtractionMethod extraction = ExtractionMethod::kEigen;
  int randomized_count = 100;
};

// Estimator bookkeeping between windows: the prior vector for the window
// origin, its outer product, and the most recent window-origin estimate.
struct MheState {
  CVector prior_vec;
  CMatrix prior_lift;
  CVector last_smoothed;
};

MheState make_mhe_state(const CVector& prior);

// Composed transition products: T_0 = I, T_s = F_{k-M+s-1} ... F_{k-M}.
// Returns M+1 matrices for M inputs. `dimension` is only consulted when
// the transition list is empty (it cannot be inferred then).
std::vector<CMatrix> build_transition_products(const std::vector<CMatrix>& transitions,
                                               int dimension = -1);

// T^H H T: expresses the measurement at window offset s against the
// window-origin lift.
CMatrix build_lifted_measurement(const CMatrix& H, const CMatrix& T);

// Next window's prior: prior_vec = F * last_smoothed, prior_lift its outer
// product.
MheState propagate_prior(const MheState& state, const CMatrix& F);

struct MheStepResult {
  std::vector<CVector> estimates;  // window origin through current time, M+1 entries
  MheState next_state;
  double cost = 0.0;
  int iterations = 0;
  bool converged = true;
  bool degenerate = false;
};

// One window solve: assembles the relaxed problem from the lifted
// measurement matrices and the weighted prior, solves it, extracts the
// window-origin state, and propagates it noise-free through the window.
MheStepResult mhe_step(const std::vector<CMatrix>& plan_matrices, const Window& window,
                       const MheState& state, const MheConfig& cfg, int reference_bus = 0,
                       Rng* extraction_rng = nullptr);

struct MheRunResult {
  int first_k = 0;                    // = M
  std::vector<CVector> filtered;      // estimate of v_k given the window ending at k
  std::vector<CVector> window_origin; // estimate of v_{k-M} given the same window
  std::vector<double> costs;
  std::vector<char> converged;
  std::vector<double> window_seconds;
};

// Slides the window one step at a time over k = M..K. Estimates are
// produced only for k >= M.
MheRunResult run_mhe(const std::vector<CMatrix>& plan_matrices,
                     const std::vector<RVector>& measurements,
                     const std::vector<CMatrix>& transitions, const CVector& initial_prior,
                     const MheConfig& cfg, int reference_bus = 0, Rng* extraction_rng = nullptr);

MheRunResult run_mhe(const GridModel& grid, const MeasurementPlan& plan,
                     const std::vector<RVector>& measurements,
                     const std::vector<CMatrix>& transitions, const CVector& initial_prior,
                     const MheConfig& cfg, int reference_bus = 0, Rng* extraction_rng = nullptr);

}  // namespace psse
