#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "bhlr/fock.hpp"

namespace bhlr {

struct Member {
  double weight;
  Vec psi;
};

// rho = sum_k w_k |psi_k><psi_k|.
class StateEnsemble {
 public:
  // Validates weights (positive, summing to 1 within 1e-12) and member norms
  // (1 within 1e-10).
  StateEnsemble(std::shared_ptr<const FockBasis> basis, std::vector<Member> members);
  static StateEnsemble pure(std::shared_ptr<const FockBasis> basis, Vec psi);

  const FockBasis& basis() const { return *basis_; }
  const std::shared_ptr<const FockBasis>& basis_ptr() const { return basis_; }
  const std::vector<Member>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }

  // tr(rho A), accumulated in member order.
  Complex expectation(const SparseOperator& A) const;
  Mat density_matrix() const;

 private:
  std::shared_ptr<const FockBasis> basis_;
  std::vector<Member> members_;
};

struct PropagatorSettings {
  int krylov_dim = 30;
  double step_tolerance = 1e-10;
  int max_substeps = 10000;

  void validate() const;
};

struct EvolveStats {
  int substeps = 0;
  double error_estimate = 0.0;  // sum of per-step estimates
};

// e^{-iHt} psi by Lanczos with full reorthogonalization and adaptive substeps.
Vec evolve(const SparseOperator& H, const Vec& psi, double t, const PropagatorSettings& s = {},
           EvolveStats* stats = nullptr);
StateEnsemble evolve(const SparseOperator& H, const StateEnsemble& rho, double t,
                     const PropagatorSettings& s = {});

// tr(rho O(t)) with O(t) = e^{iHt} O e^{-iHt}.
Complex heisenberg_expectation(const StateEnsemble& rho, const SparseOperator& O,
                               const SparseOperator& H, double t, const PropagatorSettings& s = {});
// tr(rho [O(t), Otilde]).
Complex commutator_expectation(const StateEnsemble& rho, const SparseOperator& O,
                               const SparseOperator& Otilde, const SparseOperator& H, double t,
                               const PropagatorSettings& s = {});

// Full eigendecomposition of a Hermitian matrix, used for dense evolution.
class DenseEvolution {
 public:
  explicit DenseEvolution(const Mat& H);
  explicit DenseEvolution(const SparseOperator& H) : DenseEvolution(H.to_dense()) {}

  Mat unitary(double t) const;  // e^{-iHt}
  Vec apply(double t, const Vec& v) const;
  Mat heisenberg(const Mat& O, double t) const;  // e^{iHt} O e^{-iHt}
  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  const Mat& eigenvectors() const { return evecs_; }

 private:
  Eigen::VectorXd evals_;
  Mat evecs_;
};

constexpr std::size_t kDefaultDenseThreshold = 4096;

double trace_norm(const Mat& A);
double frobenius_norm(const Mat& A);
// Square root of a positive semidefinite Hermitian matrix (negative
// eigenvalues from round-off are clipped).
Mat psd_sqrt(const Mat& A);
// |A| = sqrt(A† A).
Mat operator_abs(const Mat& A);
double operator_norm(const Mat& A);

// ||rho [O(t), Otilde]||_1, dense. Throws DimensionError above the threshold.
double weighted_commutator_trace_norm(const StateEnsemble& rho, const SparseOperator& O,
                                      const SparseOperator& Otilde, const SparseOperator& H,
                                      double t, std::size_t dense_threshold = kDefaultDenseThreshold);

// ||M sqrt(rho)||_F = sqrt(sum_k w_k ||M psi_k||^2). M is any linear map
// given as a vector pipeline (operators and propagations chained).
using LinearMap = std::function<Vec(const Vec&)>;
double frobenius_term(const LinearMap& M, const StateEnsemble& rho);
double frobenius_term(const SparseOperator& M, const StateEnsemble& rho);

struct GroundStateSettings {
  int krylov_dim = 60;
  double tolerance = 1e-8;
  int max_restarts = 500;
  unsigned long long seed = 12345;
};

struct GroundState {
  double energy;
  Vec psi;
  double residual;
  int restarts;
};

// Lowest eigenpair by restarted Lanczos; residual ||H psi - E psi|| <= tolerance.
GroundState ground_state(const SparseOperator& H, const GroundStateSettings& s = {});

}  // namespace bhlr
