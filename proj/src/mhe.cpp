#include "psse/mhe.hpp"

#include <chrono>
#include <stdexcept>

namespace psse {

void Window::validate() const {
  if (length < 0) throw std::invalid_argument("window: negative length");
  if (static_cast<int>(measurements.size()) != length + 1) {
    throw std::invalid_argument("window: expected M+1 measurement vectors");
  }
  if (static_cast<int>(transitions.size()) != length) {
    throw std::invalid_argument("window: expected M transition matrices");
  }
  for (const CMatrix& F : transitions) {
    if (F.rows() != F.cols()) throw std::invalid_argument("window: transitions must be square");
  }
}

MheState make_mhe_state(const CVector& prior) {
  MheState state;
  state.prior_vec = prior;
  state.prior_lift = prior * prior.adjoint();
  state.last_smoothed = prior;
  return state;
}

std::vector<CMatrix> build_transition_products(const std::vector<CMatrix>& transitions,
                                               int dimension) {
  int n = dimension;
  for (const CMatrix& F : transitions) {
    if (F.rows() != F.cols()) {
      throw std::invalid_argument("build_transition_products: transitions must be square");
    }
    if (n < 0) n = static_cast<int>(F.rows());
    if (F.rows() != n) {
      throw std::invalid_argument("build_transition_products: inconsistent dimensions");
    }
  }
  if (n < 0) {
    throw std::invalid_argument(
        "build_transition_products: dimension required for an empty window");
  }
  std::vector<CMatrix> products;
  products.reserve(transitions.size() + 1);
  products.push_back(CMatrix::Identity(n, n));
  for (const CMatrix& F : transitions) {
    products.push_back(F * products.back());
  }
  return products;
}

CMatrix build_lifted_measurement(const CMatrix& H, const CMatrix& T) {
  if (H.rows() != H.cols() || T.rows() != T.cols() || H.rows() != T.rows()) {
    throw std::invalid_argument("build_lifted_measurement: dimension mismatch");
  }
  return T.adjoint() * H * T;
}

MheState propagate_prior(const MheState& state, const CMatrix& F) {
  MheState next;
  next.prior_vec = F * state.last_smoothed;
  next.prior_lift = next.prior_vec * next.prior_vec.adjoint();
  next.last_smoothed = state.last_smoothed;
  return next;
}

MheStepResult mhe_step(const std::vector<CMatrix>& plan_matrices, const Window& window,
                       const MheState& state, const MheConfig& cfg, int reference_bus,
                       Rng* extraction_rng) {
  window.validate();
  if (plan_matrices.empty()) throw std::invalid_argument("mhe_step: empty measurement plan");
  const int n = static_cast<int>(plan_matrices.front().rows());
  const int measurement_count = static_cast<int>(plan_matrices.size());
  for (const RVector& z : window.measurements) {
    if (z.size() != measurement_count) {
      throw std::invalid_argument("mhe_step: measurement vector length mismatch");
    }
  }

  std::vector<CMatrix> products = build_transition_products(window.transitions, n);

  SdrProblem problem;
  problem.prior = state.prior_lift;
  problem.prior_vec = state.prior_vec;
  problem.prior_weight = cfg.mu;
  problem.terms.reserve(static_cast<std::size_t>(window.length + 1) * measurement_count);
  for (int s = 0; s <= window.length; ++s) {
    for (int l = 0; l < measurement_count; ++l) {
      SdrTerm term;
      term.H = (s == 0) ? plan_matrices[l]
                        : build_lifted_measurement(plan_matrices[l], products[s]);
      term.z = window.measurements[s](l);
      term.weight = cfg.lambda;
      problem.terms.push_back(std::move(term));
    }
  }

  LiftedEstimate lifted = solve_relaxed(problem, cfg.solver);

  ExtractedState origin;
  if (cfg.extraction == ExtractionMethod::kRandomized && extraction_rng != nullptr) {
    origin = rank1_extract_randomized(lifted.V, problem, cfg.randomized_count, reference_bus,
                                      *extraction_rng);
  } else {
    origin = rank1_extract_eig(lifted.V, reference_bus);
  }

  MheStepResult result;
  result.cost = lifted.cost;
  result.iterations = lifted.iterations;
  result.converged = lifted.converged;
  result.degenerate = origin.degenerate;
  result.estimates.reserve(window.length + 1);
  result.estimates.push_back(origin.v);
  for (int s = 0; s < window.length; ++s) {
    result.estimates.push_back(window.transitions[s] * result.estimates.back());
  }

  MheState updated = state;
  updated.last_smoothed = origin.v;
  // With an empty window there is no transition to advance the prior with;
  // the caller propagates it (run_mhe uses F_k).
  result.next_state = window.transitions.empty()
                          ? make_mhe_state(origin.v)
                          : propagate_prior(updated, window.transitions.front());
  return result;
}

MheRunResult run_mhe(const std::vector<CMatrix>& plan_matrices,
                     const std::vector<RVector>& measurements,
                     const std::vector<CMatrix>& transitions, const CVector& initial_prior,
                     const MheConfig& cfg, int reference_bus, Rng* extraction_rng) {
  const int last_k = static_cast<int>(measurements.size()) - 1;
  const int window_len = cfg.window;
  if (window_len < 0) throw std::invalid_argument("run_mhe: window length must be >= 0");
  if (last_k < window_len) {
    throw std::invalid_argument("run_mhe: need at least M+1 measurement vectors");
  }
  if (static_cast<int>(transitions.size()) < last_k) {
    throw std::invalid_argument("run_mhe: need a transition matrix per step");
  }

  MheRunResult out;
  out.first_k = window_len;
  MheState state = make_mhe_state(initial_prior);
  for (int k = window_len; k <= last_k; ++k) {
    Window window;
    window.k = k;
    window.length = window_len;
    window.measurements.assign(measurements.begin() + (k - window_len),
                               measurements.begin() + (k + 1));
    window.transitions.assign(transitions.begin() + (k - window_len),
                              transitions.begin() + k);

    auto start = std::chrono::steady_clock::now();
    MheStepResult step = mhe_step(plan_matrices, window, state, cfg, reference_bus,
                                  extraction_rng);
    std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    out.window_origin.push_back(step.estimates.front());
    out.filtered.push_back(step.estimates.back());
    out.costs.push_back(step.cost);
    out.converged.push_back(step.converged ? 1 : 0);
    out.window_seconds.push_back(elapsed.count());

    if (window_len >= 1) {
      state = step.next_state;
    } else if (k < last_k) {
      // An instantaneous window carries no transitions, so the advance to
      // the next prior happens here with F_k.
      MheState smoothed = state;
      smoothed.last_smoothed = step.estimates.front();
      state = propagate_prior(smoothed, transitions[k]);
    }
  }
  return out;
}

MheRunResult run_mhe(const GridModel& grid, const MeasurementPlan& plan,
                     const std::vector<RVector>& measurements,
                     const std::vector<CMatrix>& transitions, const CVector& initial_prior,
                     const MheConfig& cfg, int reference_bus, Rng* extraction_rng) {
  return run_mhe(plan_matrices(grid, plan), measurements, transitions, initial_prior, cfg,
                 reference_bus, extraction_rng);
}

}  // namespace psse
