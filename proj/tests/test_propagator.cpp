#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "bhlr/error.hpp"
#include "bhlr/hamiltonian.hpp"
#include "bhlr/parallel.hpp"
#include "bhlr/propagator.hpp"
#include "doctest.h"

using namespace bhlr;

namespace {

std::shared_ptr<const Lattice> ring(int L) { return std::make_shared<Lattice>(build_torus(L, 1)); }

Vec random_state(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec v(n);
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v.normalized();
}

Vec basis_vector(const FockBasis& b, std::vector<int> n) {
  Vec v = Vec::Zero(b.size());
  v[*b.index_of(std::span<const int>(n))] = 1.0;
  return v;
}

// Padé scaling-and-squaring oracle, independent of the Lanczos path.
Mat expm_oracle(const Mat& H, double t) { return Mat(Complex(0, -t) * H).exp(); }

}  // namespace

TEST_CASE("two-level Rabi oscillation") {
  auto b = std::make_shared<FockBasis>(ring(2), FixedN{1});
  for (double J : {1.0, 0.37}) {
    ModelSpec spec;
    spec.J = J;
    spec.interaction = custom_table({0.0, 0.0});
    auto H = assemble(*b, spec);
    auto n0 = number_operator(*b, 0);
    Vec psi = basis_vector(*b, {1, 0});
    for (int k = 0; k < 100; ++k) {
      double t = 5.0 * k / 99.0;
      Vec v = evolve(H, psi, t);
      double n = v.dot(n0.apply(v)).real();
      CHECK(std::abs(n - std::pow(std::cos(J * t), 2)) <= 1e-8);
    }
  }
}

TEST_CASE("Krylov agrees with the dense oracle") {
  auto b = std::make_shared<FockBasis>(ring(5), FixedN{3});
  ModelSpec spec;
  spec.J = 1.0;
  auto H = assemble(*b, spec);
  Mat Hd = H.to_dense();
  Vec psi = random_state(b->size(), 1);
  CHECK((evolve(H, psi, 0.0) - psi).norm() == 0.0);
  for (double t : {0.01, 0.3, 1.0, 2.5, -1.7}) {
    Vec ref = expm_oracle(Hd, t) * psi;
    CHECK((evolve(H, psi, t) - ref).norm() <= 1e-8);
    DenseEvolution de(Hd);
    CHECK((de.apply(t, psi) - ref).norm() <= 1e-10);
    CHECK((de.unitary(t) - expm_oracle(Hd, t)).norm() <= 1e-10);
  }
}

TEST_CASE("unitarity, reversibility, conservation") {
  auto b = std::make_shared<FockBasis>(ring(6), FixedN{4});
  ModelSpec spec;
  spec.J = 1.0;
  auto H = assemble(*b, spec);
  Vec psi = random_state(b->size(), 2);
  double E0 = psi.dot(H.apply(psi)).real();
  for (double t : {0.5, 2.0, 5.0}) {
    EvolveStats st;
    Vec v = evolve(H, psi, t, {}, &st);
    CHECK(std::abs(v.norm() - 1.0) <= 1e-9);
    CHECK(std::abs(v.norm() - 1.0) <= 1e-10 * st.substeps + 1e-14);
    CHECK(std::abs(v.dot(H.apply(v)).real() - E0) <= 1e-8);
    Vec back = evolve(H, v, -t);
    CHECK((back - psi).norm() <= 1e-8);
  }
  PropagatorSettings bad;
  bad.krylov_dim = 1;
  CHECK_THROWS(evolve(H, psi, 1.0, bad));
  PropagatorSettings tiny;
  tiny.krylov_dim = 2;
  tiny.max_substeps = 2;
  CHECK_THROWS_AS(evolve(H, psi, 5.0, tiny), ConvergenceError);
}

TEST_CASE("expectations") {
  auto b = std::make_shared<FockBasis>(ring(4), FixedN{3});
  ModelSpec spec;
  spec.J = 0.8;
  auto H = assemble(*b, spec);
  std::vector<Member> mem{{0.3, random_state(b->size(), 4)}, {0.7, random_state(b->size(), 5)}};
  StateEnsemble rho(b, mem);
  auto id = SparseOperator::identity(b->size());
  auto N = total_number(*b);
  auto n1 = number_operator(*b, 1);
  CHECK(heisenberg_expectation(rho, n1, H, 0.0).real() == doctest::Approx(rho.expectation(n1).real()));
  for (double t : {0.4, 3.0}) {
    CHECK(std::abs(heisenberg_expectation(rho, id, H, t) - 1.0) <= 1e-10);
    CHECK(std::abs(heisenberg_expectation(rho, N, H, t) - 3.0) <= 1e-8);
    // Linearity in the ensemble.
    Complex parts = 0.0;
    for (const auto& m : mem)
      parts += m.weight * heisenberg_expectation(StateEnsemble::pure(b, m.psi), n1, H, t);
    CHECK(std::abs(parts - heisenberg_expectation(rho, n1, H, t)) <= 1e-12);
  }
  // Ensemble validation.
  CHECK_THROWS(StateEnsemble(b, {{0.5, random_state(b->size(), 1)}}));
  CHECK_THROWS(StateEnsemble(b, {{1.0, Vec::Ones(b->size())}}));
}

TEST_CASE("commutator expectation against dense oracle") {
  auto b = std::make_shared<FockBasis>(ring(5), FixedN{3});
  ModelSpec spec;
  spec.J = 1.0;
  auto H = assemble(*b, spec);
  Mat Hd = H.to_dense();
  StateEnsemble rho(b, {{0.4, random_state(b->size(), 7)}, {0.6, random_state(b->size(), 8)}});
  Mat rd = rho.density_matrix();
  auto O = projector_eq(*b, 0, 0);
  auto Ot = projector_eq(*b, 2, 0);
  CHECK(std::abs(commutator_expectation(rho, O, Ot, H, 0.0)) <= 1e-12);
  CHECK(std::abs(commutator_expectation(rho, O, O, H, 0.0)) <= 1e-12);
  // Non-Hermitian Õ exercises the third propagation.
  auto Onh = hop_term(*b, 2, 3);
  for (double t : {0.2, 1.1}) {
    Mat U = expm_oracle(Hd, t);
    Mat Ott = U.adjoint() * O.to_dense() * U;
    for (const auto* X : {&Ot, &Onh}) {
      Mat Xd = X->to_dense();
      Complex ref = (rd * (Ott * Xd - Xd * Ott)).trace();
      CHECK(std::abs(commutator_expectation(rho, O, *X, H, t) - ref) <= 1e-9);
    }
    double tn = weighted_commutator_trace_norm(rho, O, Ot, H, t);
    CHECK(tn + 1e-12 >= std::abs(commutator_expectation(rho, O, Ot, H, t)));
  }
  CHECK(weighted_commutator_trace_norm(rho, O, Ot, H, 0.0) <= 1e-12);
  CHECK_THROWS_AS(weighted_commutator_trace_norm(rho, O, Ot, H, 0.1, 10), DimensionError);
}

TEST_CASE("trace norm") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Mat K(6, 6);
    for (Eigen::Index i = 0; i < K.size(); ++i) K.data()[i] = Complex(g(rng), g(rng));
    Vec psi = random_state(6, 100 + trial);
    Mat rho = psi * psi.adjoint();
    CHECK(trace_norm(rho * K) + 1e-12 >= std::abs((rho * K).trace()));
  }
  // Pure rho, Hermitian rank-2 K: rho K = |psi><psi|K has the single singular
  // value ||K psi||.
  Vec psi = random_state(4, 3);
  Vec a = random_state(4, 4), c = random_state(4, 5);
  Mat K = a * c.adjoint() + c * a.adjoint();
  Mat M = psi * psi.adjoint() * K;
  CHECK(trace_norm(M) == doctest::Approx((K * psi).norm()).epsilon(1e-12));
  Mat two = Mat::Zero(2, 2);
  two(0, 1) = 3.0;
  two(1, 0) = Complex(0, -2.0);
  CHECK(trace_norm(two) == doctest::Approx(5.0));
}

TEST_CASE("Frobenius terms") {
  auto b = std::make_shared<FockBasis>(ring(4), FixedN{3});
  StateEnsemble rho(b, {{0.25, random_state(b->size(), 1)}, {0.75, random_state(b->size(), 2)}});
  CHECK(frobenius_term(SparseOperator::identity(b->size()), rho) == doctest::Approx(1.0));
  auto P = projector_ge(*b, 0, 2);
  CHECK(frobenius_term(P, rho) == doctest::Approx(std::sqrt(rho.expectation(P).real())));
  ModelSpec spec;
  auto H = assemble(*b, spec);
  Mat rd = rho.density_matrix();
  Mat M = H.to_dense() * P.to_dense();
  double ref = (M * psd_sqrt(rd)).norm();
  CHECK(std::abs(frobenius_term(H * P, rho) - ref) <= 1e-10 * std::max(1.0, ref));
}

TEST_CASE("ground states") {
  auto b2 = std::make_shared<FockBasis>(ring(2), FixedN{1});
  ModelSpec spec;
  spec.J = -0.6;
  spec.interaction = custom_table({0.5, 2.0});
  auto g = ground_state(assemble(*b2, spec));
  CHECK(g.energy == doctest::Approx(2.5 - 0.6));
  CHECK(g.residual <= 1e-8);

  auto b = std::make_shared<FockBasis>(ring(6), FixedN{6});
  spec.J = 0.0;
  spec.interaction = power_p(2.0);
  auto H0 = assemble(*b, spec);
  double emin = INFINITY;
  for (std::size_t k = 0; k < b->size(); ++k) emin = std::min(emin, H0.at(k, k).real());
  CHECK(ground_state(H0).energy == doctest::Approx(emin));

  spec.J = 1.0;
  auto H = assemble(*b, spec);
  auto gs = ground_state(H);
  CHECK(gs.residual <= 1e-8);
  Eigen::SelfAdjointEigenSolver<Mat> es(H.to_dense(), Eigen::EigenvaluesOnly);
  CHECK(gs.energy == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-10));
}

TEST_CASE("results do not depend on the worker count") {
  auto b = std::make_shared<FockBasis>(ring(6), FixedN{3});
  ModelSpec spec;
  auto H = assemble(*b, spec);
  std::vector<Member> mem;
  for (int k = 0; k < 5; ++k) mem.push_back({0.2, random_state(b->size(), 20 + k)});
  StateEnsemble rho(b, mem);
  auto O = projector_eq(*b, 0, 0);
  auto Ot = projector_eq(*b, 3, 0);
  set_worker_count(1);
  Complex one = commutator_expectation(rho, O, Ot, H, 0.7);
  set_worker_count(3);
  Complex three = commutator_expectation(rho, O, Ot, H, 0.7);
  set_worker_count(1);
  CHECK(one == three);
}
