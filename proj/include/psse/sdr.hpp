#pragma once

#include <iosfwd>
#include <vector>

#include "psse/rng.hpp"
#include "psse/types.hpp"

namespace psse {

// One residual term w * (z - Tr(H V))^2 of the relaxed objective.
struct SdrTerm {
  CMatrix H;  // Hermitian
  double z = 0.0;
  double weight = 1.0;
};

// min_V  prior_weight * ||V - prior||_F^2 + sum_i w_i (z_i - Tr(H_i V))^2
// over Hermitian PSD V. prior_vec, when present, is the vector whose outer
// product the prior is; the randomized extraction uses it to evaluate the
// unlifted cost.
struct SdrProblem {
  CMatrix prior;      // empty when there is no prior term
  CVector prior_vec;  // optional
  double prior_weight = 0.0;
  std::vector<SdrTerm> terms;

  int dimension() const;
  void validate() const;  // throws std::invalid_argument
};

struct SolverConfig {
  int max_iterations = 50000;
  // Stop after 5 consecutive iterations whose cost change is at most
  // rel_tolerance relative to the current cost (with a small floor so
  // costs that reach zero terminate).
  double rel_tolerance = 1e-9;
  bool acceleration = true;
};

struct SolverTraceRow {
  int iteration = 0;
  double cost = 0.0;
  double min_eigenvalue = 0.0;
};
using SolverTrace = std::vector<SolverTraceRow>;

struct LiftedEstimate {
  CMatrix V;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Frobenius-nearest PSD matrix: symmetrize, eigendecompose, clamp negative
// eigenvalues, reassemble.
CMatrix psd_project(const CMatrix& A);

// Projected-gradient minimization of the relaxed objective over the PSD
// cone, with monotone acceleration and a fixed step from a power-iteration
// Lipschitz estimate. Deterministic for a given (problem, config).
// Non-convergence is reported through the `converged` flag, never thrown.
LiftedEstimate solve_relaxed(const SdrProblem& p, const SolverConfig& cfg,
                             SolverTrace* trace = nullptr);

// Rotates v by a unit scalar so the reference-bus entry has zero phase;
// when that entry vanishes, aligns against the largest-magnitude entry.
CVector align_phase(const CVector& v, int reference_bus);

struct ExtractedState {
  CVector v;
  bool degenerate = false;  // set when the lifted matrix was (numerically) zero
};

// sqrt(sigma_1) q_1 from the dominant eigenpair, reference-aligned.
ExtractedState rank1_extract_eig(const CMatrix& V, int reference_bus);

// Gaussian randomization: draws `count` complex normal vectors with
// covariance V, reference-aligns each, and returns the one with the lowest
// unlifted cost. The eigendecomposition candidate is always in the pool.
ExtractedState rank1_extract_randomized(const CMatrix& V, const SdrProblem& p, int count,
                                        int reference_bus, Rng& rng);

// The original (non-lifted) cost at state v:
// prior_weight * ||v - prior_vec||^2 + sum_i w_i (z_i - v^H H_i v)^2.
// Falls back to the lifted prior distance when only the prior matrix is
// known.
double unlifted_cost(const SdrProblem& p, const CVector& v);

void write_trace_csv(const SolverTrace& trace, std::ostream& out);

}  // namespace psse
