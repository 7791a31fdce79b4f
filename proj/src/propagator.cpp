#include "bhlr/propagator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "bhlr/error.hpp"
#include "bhlr/parallel.hpp"

namespace bhlr {

StateEnsemble::StateEnsemble(std::shared_ptr<const FockBasis> basis, std::vector<Member> members)
    : basis_(std::move(basis)), members_(std::move(members)) {
  if (!basis_) throw std::invalid_argument("state ensemble needs a basis");
  if (members_.empty()) throw std::invalid_argument("state ensemble needs at least one member");
  double total = 0.0;
  for (const auto& m : members_) {
    if (!(m.weight > 0.0)) throw std::invalid_argument("ensemble weights must be positive");
    if (static_cast<std::size_t>(m.psi.size()) != basis_->size())
      throw std::invalid_argument("ensemble member does not match the basis dimension");
    if (std::abs(m.psi.norm() - 1.0) > 1e-10)
      throw std::invalid_argument("ensemble member is not normalized");
    total += m.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("ensemble weights must sum to 1");
}

StateEnsemble StateEnsemble::pure(std::shared_ptr<const FockBasis> basis, Vec psi) {
  std::vector<Member> m;
  m.push_back({1.0, std::move(psi)});
  return StateEnsemble(std::move(basis), std::move(m));
}

Complex StateEnsemble::expectation(const SparseOperator& A) const {
  Complex s = 0.0;
  for (const auto& m : members_) s += m.weight * m.psi.dot(A.apply(m.psi));
  return s;
}

Mat StateEnsemble::density_matrix() const {
  const auto n = static_cast<Eigen::Index>(basis_->size());
  Mat rho = Mat::Zero(n, n);
  for (const auto& m : members_) rho.noalias() += m.weight * m.psi * m.psi.adjoint();
  return rho;
}

void PropagatorSettings::validate() const {
  if (krylov_dim < 2) throw std::invalid_argument("krylov_dim must be >= 2");
  if (!(step_tolerance > 0.0)) throw std::invalid_argument("step_tolerance must be positive");
  if (max_substeps < 1) throw std::invalid_argument("max_substeps must be >= 1");
}

namespace {

struct Krylov {
  Mat V;                      // orthonormal columns 0..k-1
  Eigen::VectorXd alpha;      // diagonal of T
  Eigen::VectorXd beta;       // subdiagonal of T (size k-1)
  double beta_next = 0.0;     // norm of the residual after the last column
  int k = 0;
};

Krylov lanczos(const SparseOperator& H, const Vec& v0, int m) {
  const auto n = static_cast<Eigen::Index>(H.dim());
  m = static_cast<int>(std::min<Eigen::Index>(m, n));
  Krylov K;
  K.V.resize(n, m);
  std::vector<double> a, b;
  K.V.col(0) = v0;
  Vec w;
  double scale = 0.0;
  for (int j = 0; j < m; ++j) {
    H.apply(K.V.col(j), w);
    double alpha = K.V.col(j).dot(w).real();
    a.push_back(alpha);
    w -= alpha * K.V.col(j);
    if (j > 0) w -= b.back() * K.V.col(j - 1);
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      Vec h = K.V.leftCols(j + 1).adjoint() * w;
      w -= K.V.leftCols(j + 1) * h;
    }
    double beta = w.norm();
    scale = std::max({scale, std::abs(alpha), beta});
    K.k = j + 1;
    K.beta_next = beta;
    if (j + 1 == m) break;
    if (beta <= 1e-13 * std::max(scale, 1.0)) break;  // invariant subspace
    b.push_back(beta);
    K.V.col(j + 1) = w / beta;
  }
  K.alpha = Eigen::Map<Eigen::VectorXd>(a.data(), K.k);
  K.beta = Eigen::VectorXd(std::max(K.k - 1, 0));
  for (int j = 0; j + 1 < K.k; ++j) K.beta[j] = b[j];
  return K;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tridiagonal_eig(const Krylov& K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (K.k == 1) {
    Eigen::MatrixXd t(1, 1);
    t(0, 0) = K.alpha[0];
    es.compute(t);
  } else {
    es.computeFromTridiagonal(K.alpha, K.beta, Eigen::ComputeEigenvectors);
  }
  return es;
}

}  // namespace

Vec evolve(const SparseOperator& H, const Vec& psi, double t, const PropagatorSettings& s,
           EvolveStats* stats) {
  s.validate();
  if (static_cast<std::size_t>(psi.size()) != H.dim())
    throw std::invalid_argument("state does not match the Hamiltonian dimension");
  EvolveStats local;
  Vec v = psi;
  double remaining = std::abs(t);
  const double sign = t < 0 ? -1.0 : 1.0;
  while (remaining > 0.0) {
    double nv = v.norm();
    if (nv == 0.0) break;
    if (local.substeps >= s.max_substeps)
      throw ConvergenceError("Krylov propagation exceeded max_substeps", local.error_estimate);
    Krylov K = lanczos(H, v / nv, s.krylov_dim);
    auto es = tridiagonal_eig(K);
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Eigen::MatrixXd& S = es.eigenvectors();
    double dt = remaining;
    Eigen::VectorXcd c;
    double err = 0.0;
    for (int attempt = 0;; ++attempt) {
      Eigen::VectorXcd phase(K.k);
      for (int j = 0; j < K.k; ++j) phase[j] = std::polar(1.0, -sign * theta[j] * dt) * S(0, j);
      c = S.cast<Complex>() * phase;
      err = K.beta_next * std::abs(c[K.k - 1]) * nv;
      if (err <= s.step_tolerance) break;
      if (attempt > 200)
        throw ConvergenceError("Krylov step size underflow", err);
      double shrink = 0.9 * std::pow(s.step_tolerance / err, 1.0 / K.k);
      dt *= std::clamp(shrink, 0.1, 0.9);
    }
    v = nv * (K.V.leftCols(K.k) * c);
    remaining -= dt;
    if (remaining < 1e-15 * std::abs(t)) remaining = 0.0;
    ++local.substeps;
    local.error_estimate += err;
  }
  if (stats) *stats = local;
  return v;
}

StateEnsemble evolve(const SparseOperator& H, const StateEnsemble& rho, double t,
                     const PropagatorSettings& s) {
  std::vector<Member> out(rho.size());
  parallel_for(rho.size(), [&](std::size_t k) {
    const auto& m = rho.members()[k];
    Vec v = evolve(H, m.psi, t, s);
    v /= v.norm();
    out[k] = {m.weight, std::move(v)};
  });
  return StateEnsemble(rho.basis_ptr(), std::move(out));
}

Complex heisenberg_expectation(const StateEnsemble& rho, const SparseOperator& O,
                               const SparseOperator& H, double t, const PropagatorSettings& s) {
  std::vector<Complex> part(rho.size());
  parallel_for(rho.size(), [&](std::size_t k) {
    Vec phi = evolve(H, rho.members()[k].psi, t, s);
    part[k] = rho.members()[k].weight * phi.dot(O.apply(phi));
  });
  Complex total = 0.0;
  for (auto p : part) total += p;
  return total;
}

Complex commutator_expectation(const StateEnsemble& rho, const SparseOperator& O,
                               const SparseOperator& Otilde, const SparseOperator& H, double t,
                               const PropagatorSettings& s) {
  const bool self_adjoint = Otilde.hermitian() || Otilde.is_exactly_hermitian();
  std::vector<Complex> part(rho.size());
  parallel_for(rho.size(), [&](std::size_t k) {
    const Vec& psi = rho.members()[k].psi;
    // <psi|O(t) Õ|psi> = <U psi| O U Õ psi>
    // <psi|Õ O(t)|psi> = <U Õ† psi| O U psi>
    Vec phi = evolve(H, psi, t, s);
    Vec chi = evolve(H, Otilde.apply(psi), t, s);
    Vec chi_dag = self_adjoint ? chi : evolve(H, Otilde.adjoint().apply(psi), t, s);
    Complex first = phi.dot(O.apply(chi));
    Complex second = chi_dag.dot(O.apply(phi));
    part[k] = rho.members()[k].weight * (first - second);
  });
  Complex total = 0.0;
  for (auto p : part) total += p;
  return total;
}

DenseEvolution::DenseEvolution(const Mat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigendecomposition failed", 0.0);
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
}

Mat DenseEvolution::unitary(double t) const {
  Eigen::VectorXcd ph(evals_.size());
  for (Eigen::Index j = 0; j < evals_.size(); ++j) ph[j] = std::polar(1.0, -evals_[j] * t);
  return evecs_ * ph.asDiagonal() * evecs_.adjoint();
}

Vec DenseEvolution::apply(double t, const Vec& v) const {
  Eigen::VectorXcd c = evecs_.adjoint() * v;
  for (Eigen::Index j = 0; j < evals_.size(); ++j) c[j] *= std::polar(1.0, -evals_[j] * t);
  return evecs_ * c;
}

Mat DenseEvolution::heisenberg(const Mat& O, double t) const {
  Mat U = unitary(t);
  return U.adjoint() * O * U;
}

double trace_norm(const Mat& A) {
  Eigen::BDCSVD<Mat> svd(A);
  return svd.singularValues().sum();
}

double frobenius_norm(const Mat& A) { return A.norm(); }

Mat psd_sqrt(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

Mat operator_abs(const Mat& A) { return psd_sqrt(A.adjoint() * A); }

double operator_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(A);
  return svd.singularValues()[0];
}

double weighted_commutator_trace_norm(const StateEnsemble& rho, const SparseOperator& O,
                                      const SparseOperator& Otilde, const SparseOperator& H,
                                      double t, std::size_t dense_threshold) {
  if (H.dim() > dense_threshold)
    throw DimensionError("trace norm needs a dense matrix of dimension " +
                         std::to_string(H.dim()) + " above the dense threshold " +
                         std::to_string(dense_threshold) + "; use expectation mode instead");
  DenseEvolution U(H);
  Mat Ot = U.heisenberg(O.to_dense(), t);
  Mat Od = Otilde.to_dense();
  Mat K = rho.density_matrix() * (Ot * Od - Od * Ot);
  return trace_norm(K);
}

double frobenius_term(const LinearMap& M, const StateEnsemble& rho) {
  std::vector<double> part(rho.size());
  parallel_for(rho.size(), [&](std::size_t k) {
    part[k] = rho.members()[k].weight * M(rho.members()[k].psi).squaredNorm();
  });
  double s = 0.0;
  for (double p : part) s += p;
  return std::sqrt(s);
}

double frobenius_term(const SparseOperator& M, const StateEnsemble& rho) {
  return frobenius_term([&M](const Vec& v) { return M.apply(v); }, rho);
}

GroundState ground_state(const SparseOperator& H, const GroundStateSettings& s) {
  if (s.krylov_dim < 2) throw std::invalid_argument("krylov_dim must be >= 2");
  const auto n = static_cast<Eigen::Index>(H.dim());
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> g;
  Vec v(n);
  for (auto& x : v) x = Complex(g(rng), g(rng));
  v.normalize();
  GroundState out{0.0, v, INFINITY, 0};
  for (int restart = 0; restart <= s.max_restarts; ++restart) {
    Krylov K = lanczos(H, v, s.krylov_dim);
    auto es = tridiagonal_eig(K);
    Eigen::VectorXcd y = es.eigenvectors().col(0).cast<Complex>();
    Vec psi = K.V.leftCols(K.k) * y;
    psi.normalize();
    Vec Hpsi = H.apply(psi);
    double E = psi.dot(Hpsi).real();
    double res = (Hpsi - E * psi).norm();
    out = {E, psi, res, restart};
    if (res <= s.tolerance) return out;
    v = psi;
  }
  throw ConvergenceError("restarted Lanczos did not converge", out.residual);
}

}  // namespace bhlr
