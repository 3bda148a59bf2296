#include "psse/sdr.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "psse/csv.hpp"

namespace psse {

namespace {

CMatrix hermitian_part(const CMatrix& A) { return 0.5 * (A + A.adjoint()); }

double min_eigenvalue(const CMatrix& A) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(A), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// The objective in vectorized form. Row i of S is conj(vec(H_i))^T, so
// (S vec(V))_i = Tr(H_i V), real whenever both are Hermitian.
struct CompiledObjective {
  int n = 0;
  double mu = 0.0;
  bool has_prior = false;
  CVector prior_vec;  // vec of the prior matrix
  CMatrix S;          // terms x n^2
  RVector z;
  RVector w;

  explicit CompiledObjective(const SdrProblem& p) {
    n = p.dimension();
    mu = p.prior_weight;
    has_prior = p.prior.size() > 0 && p.prior_weight > 0.0;
    if (has_prior) prior_vec = p.prior.reshaped();
    const int terms = static_cast<int>(p.terms.size());
    S.resize(terms, n * n);
    z.resize(terms);
    w.resize(terms);
    for (int i = 0; i < terms; ++i) {
      S.row(i) = p.terms[i].H.reshaped().conjugate();
      z(i) = p.terms[i].z;
      w(i) = p.terms[i].weight;
    }
  }

  RVector residual(const CVector& vec_v) const {
    if (S.rows() == 0) return RVector();
    return z - (S * vec_v).real();
  }

  double cost(const CVector& vec_v) const {
    double c = 0.0;
    if (has_prior) c += mu * (vec_v - prior_vec).squaredNorm();
    if (S.rows() > 0) {
      RVector r = residual(vec_v);
      c += (w.array() * r.array().square()).sum();
    }
    return c;
  }

  CVector gradient(const CVector& vec_v) const {
    CVector g = CVector::Zero(n * n);
    if (has_prior) g += 2.0 * mu * (vec_v - prior_vec);
    if (S.rows() > 0) {
      RVector r = residual(vec_v);
      g -= 2.0 * (S.adjoint() * (w.array() * r.array()).matrix().cast<Complex>());
    }
    return g;
  }

  // Action of the Hessian (as an operator on Hermitian matrices).
  CVector curvature_apply(const CVector& vec_x) const {
    CVector y = 2.0 * mu * vec_x;
    if (S.rows() > 0) {
      RVector sr = (S * vec_x).real();
      y += 2.0 * (S.adjoint() * (w.array() * sr.array()).matrix().cast<Complex>());
    }
    return y;
  }

  // Always-valid upper bound on the largest Hessian eigenvalue.
  double curvature_bound() const {
    double b = 2.0 * mu;
    for (int i = 0; i < S.rows(); ++i) b += 2.0 * w(i) * S.row(i).squaredNorm();
    return b;
  }
};

CMatrix unvec(const CVector& x, int n) {
  return Eigen::Map<const CMatrix>(x.data(), n, n);
}

// Power iteration for the largest Hessian eigenvalue, from a fixed
// pseudo-random Hermitian start so the estimate is deterministic. The
// Rayleigh quotient approaches the true value from below; the caller adds
// a safety factor.
double estimate_curvature(const CompiledObjective& obj) {
  if (obj.S.rows() == 0) return 2.0 * obj.mu;
  const int n = obj.n;
  std::mt19937_64 engine(0x9e3779b97f4a7c15ull);
  auto draw = [&engine] { return static_cast<double>(engine() >> 11) * 0x1.0p-53 - 0.5; };
  CMatrix X(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) X(i, j) = Complex(draw(), draw());
  }
  X = hermitian_part(X);
  if (X.norm() == 0.0) X = CMatrix::Identity(n, n);
  CVector x = X.reshaped();
  x /= x.norm();

  double rq = 0.0;
  double prev = -1.0;
  for (int iter = 0; iter < 200; ++iter) {
    CVector y = obj.curvature_apply(x);
    rq = x.dot(y).real();
    double ny = y.norm();
    if (!std::isfinite(ny) || ny == 0.0) return obj.curvature_bound();
    x = y / ny;
    if (iter > 5 && std::abs(rq - prev) <= 1e-6 * std::max(std::abs(rq), 1e-300)) break;
    prev = rq;
  }
  if (!std::isfinite(rq) || rq <= 0.0) return obj.curvature_bound();
  return rq;
}

}  // namespace

int SdrProblem::dimension() const {
  if (prior.size() > 0) return static_cast<int>(prior.rows());
  if (!terms.empty()) return static_cast<int>(terms.front().H.rows());
  return 0;
}

void SdrProblem::validate() const {
  if (terms.empty() && !(prior_weight > 0.0 && prior.size() > 0)) {
    throw std::invalid_argument("sdr problem: needs at least one term or a weighted prior");
  }
  if (prior_weight < 0.0 || !std::isfinite(prior_weight)) {
    throw std::invalid_argument("sdr problem: prior weight must be nonnegative");
  }
  const int n = dimension();
  if (n <= 0) throw std::invalid_argument("sdr problem: empty dimension");
  if (prior.size() > 0 && (prior.rows() != n || prior.cols() != n)) {
    throw std::invalid_argument("sdr problem: prior dimension mismatch");
  }
  if (prior_vec.size() > 0 && prior_vec.size() != n) {
    throw std::invalid_argument("sdr problem: prior vector dimension mismatch");
  }
  for (const SdrTerm& t : terms) {
    if (t.H.rows() != n || t.H.cols() != n) {
      throw std::invalid_argument("sdr problem: term dimension mismatch");
    }
    if (t.weight <= 0.0 || !std::isfinite(t.weight) || !std::isfinite(t.z)) {
      throw std::invalid_argument("sdr problem: bad term weight or value");
    }
    if ((t.H - t.H.adjoint()).norm() > 1e-9 * std::max(1.0, t.H.norm())) {
      throw std::invalid_argument("sdr problem: term matrix is not Hermitian");
    }
  }
}

CMatrix psd_project(const CMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("psd_project: matrix must be square");
  if (!A.allFinite()) throw std::invalid_argument("psd_project: non-finite input");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(A));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("psd_project: eigendecomposition failed");
  }
  RVector lam = es.eigenvalues().cwiseMax(0.0);
  CMatrix out =
      es.eigenvectors() * lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return hermitian_part(out);
}

LiftedEstimate solve_relaxed(const SdrProblem& p, const SolverConfig& cfg, SolverTrace* trace) {
  p.validate();
  if (cfg.rel_tolerance <= 0.0) throw std::invalid_argument("solver: tolerance must be positive");
  const CompiledObjective obj(p);
  const int n = obj.n;

  const double lipschitz = 1.05 * estimate_curvature(obj);
  const double step = 1.0 / std::max(lipschitz, 1e-12);

  CMatrix x = obj.has_prior ? psd_project(p.prior) : CMatrix::Zero(n, n);
  CMatrix y = x;
  double t = 1.0;
  double f_x = obj.cost(x.reshaped());
  const double stop_floor = 1e-9 * (f_x + 1.0);

  LiftedEstimate result;
  result.converged = false;
  int consecutive_small = 0;
  int iter = 0;

  for (iter = 1; iter <= cfg.max_iterations; ++iter) {
    y = hermitian_part(y);
    CVector grad = obj.gradient(y.reshaped());
    CMatrix candidate = psd_project(y - step * unvec(grad, n));
    double f_candidate = obj.cost(candidate.reshaped());

    // Monotone acceptance: the new iterate never has a larger cost than
    // the previous one, which keeps the cost sequence non-increasing even
    // with an accelerated momentum step.
    CMatrix x_new;
    double f_new;
    if (f_candidate <= f_x) {
      x_new = candidate;
      f_new = f_candidate;
    } else {
      x_new = x;
      f_new = f_x;
    }

    if (cfg.acceleration) {
      double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_new + (t / t_next) * (candidate - x_new) + ((t - 1.0) / t_next) * (x_new - x);
      t = t_next;
    } else {
      y = x_new;
    }
    x = x_new;

    double delta = f_x - f_new;
    f_x = f_new;
    if (trace != nullptr) trace->push_back({iter, f_x, min_eigenvalue(x)});

    if (delta <= cfg.rel_tolerance * std::max(f_x, stop_floor)) {
      if (++consecutive_small >= 5) {
        result.converged = true;
        break;
      }
    } else {
      consecutive_small = 0;
    }
  }

  result.V = hermitian_part(x);
  result.cost = f_x;
  result.iterations = std::min(iter, cfg.max_iterations);
  return result;
}

CVector align_phase(const CVector& v, int reference_bus) {
  if (reference_bus < 0 || reference_bus >= v.size()) {
    throw std::invalid_argument("align_phase: reference bus out of range");
  }
  if (v.size() == 0) return v;
  Eigen::Index pivot = reference_bus;
  double vmax = v.cwiseAbs().maxCoeff(&pivot);
  if (vmax == 0.0) return v;
  if (std::abs(v(reference_bus)) > 1e-12 * vmax) pivot = reference_bus;
  double theta = std::arg(v(pivot));
  return v * std::polar(1.0, -theta);
}

ExtractedState rank1_extract_eig(const CMatrix& V, int reference_bus) {
  if (V.rows() != V.cols()) throw std::invalid_argument("rank1_extract: matrix must be square");
  const int n = static_cast<int>(V.rows());
  if (reference_bus < 0 || reference_bus >= n) {
    throw std::invalid_argument("rank1_extract: reference bus out of range");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(V));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("rank1_extract: eigendecomposition failed");
  }
  double sigma1 = es.eigenvalues()(n - 1);
  if (!(sigma1 > 0.0)) {
    return {CVector::Zero(n), true};
  }
  CVector v = std::sqrt(sigma1) * es.eigenvectors().col(n - 1);
  return {align_phase(v, reference_bus), false};
}

double unlifted_cost(const SdrProblem& p, const CVector& v) {
  double c = 0.0;
  if (p.prior_weight > 0.0) {
    if (p.prior_vec.size() == v.size()) {
      c += p.prior_weight * (v - p.prior_vec).squaredNorm();
    } else if (p.prior.size() > 0) {
      c += p.prior_weight * (v * v.adjoint() - p.prior).squaredNorm();
    }
  }
  for (const SdrTerm& t : p.terms) {
    double r = t.z - (v.adjoint() * t.H * v)(0, 0).real();
    c += t.weight * r * r;
  }
  return c;
}

ExtractedState rank1_extract_randomized(const CMatrix& V, const SdrProblem& p, int count,
                                        int reference_bus, Rng& rng) {
  if (count < 1) throw std::invalid_argument("rank1_extract_randomized: count must be >= 1");
  ExtractedState best = rank1_extract_eig(V, reference_bus);
  if (best.degenerate) return best;

  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(V));
  RVector lam = es.eigenvalues().cwiseMax(0.0);
  CMatrix sqrt_v = es.eigenvectors() * lam.cwiseSqrt().cast<Complex>().asDiagonal() *
                   es.eigenvectors().adjoint();

  double best_cost = unlifted_cost(p, best.v);
  const int n = static_cast<int>(V.rows());
  CVector g(n);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < n; ++j) g(j) = rng.complex_normal();
    CVector candidate = align_phase(sqrt_v * g, reference_bus);
    double c = unlifted_cost(p, candidate);
    if (c < best_cost) {
      best_cost = c;
      best.v = candidate;
    }
  }
  return best;
}

void write_trace_csv(const SolverTrace& trace, std::ostream& out) {
  out << "iteration,cost,min_eigenvalue\n";
  for (const SolverTraceRow& row : trace) {
    out << row.iteration << ',' << format_g17(row.cost) << ',' << format_g17(row.min_eigenvalue)
        << '\n';
  }
}

}  // namespace psse
