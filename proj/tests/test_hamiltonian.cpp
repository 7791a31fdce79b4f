#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "bhlr/hamiltonian.hpp"
#include "doctest.h"

using namespace bhlr;

namespace {

std::shared_ptr<const Lattice> ring(int L) { return std::make_shared<Lattice>(build_torus(L, 1)); }

bool same(const SparseOperator& a, const SparseOperator& b) { return (a - b).pruned().nnz() == 0; }

}  // namespace

TEST_CASE("interaction presets") {
  auto w = power_p(4.0);
  CHECK(w(0) == 0.0);
  CHECK(w(3) == 81.0);
  auto s = power_p_shifted(4.0, 2.0);
  CHECK(s(0) == 2.0);
  CHECK(s(1) == 0.0);
  CHECK(s(3) == 32.0);
  auto mu = power_p(2.0, 1.0, 0.5);
  CHECK(mu(2) == doctest::Approx(3.0));
  auto t = custom_table({0.0, 1.5, 7.0});
  CHECK(t(2) == 7.0);
  CHECK_THROWS(t(3));
}

TEST_CASE("two-site spectrum") {
  for (double J : {0.3, -1.2}) {
    FockBasis b(ring(2), FixedN{1});
    ModelSpec spec;
    spec.J = J;
    spec.interaction = custom_table({0.25, 1.5});
    Eigen::SelfAdjointEigenSolver<Mat> es(assemble(b, spec).to_dense());
    CHECK(es.eigenvalues()[0] == doctest::Approx(1.75 - std::abs(J)));
    CHECK(es.eigenvalues()[1] == doctest::Approx(1.75 + std::abs(J)));
  }
}

TEST_CASE("diagonal model and symmetries") {
  auto lat = ring(3);
  FockBasis b(lat, FixedN{3});
  ModelSpec spec;
  spec.J = 0.0;
  auto H = assemble(b, spec);
  for (std::size_t k = 0; k < b.size(); ++k) {
    double e = 0.0;
    for (int i = 0; i < 3; ++i) e += std::pow(b.occupation(k, i), 4);
    CHECK(H.at(k, k).real() == e);
  }
  spec.J = 0.7;
  H = assemble(b, spec);
  CHECK(H.is_exactly_hermitian());
  auto G = lift_translation(b, translations(*lat)[0]);
  CHECK(commutator(H, G).nnz() == 0);
  CHECK(commutator(H, total_number(b)).nnz() == 0);

  spec.edge_J[Edge{0, 1}] = 0.2;
  CHECK(commutator(assemble(b, spec), G).nnz() > 0);
  CHECK(spec.Jbar(*lat) == doctest::Approx(0.7));
}

TEST_CASE("subsystems and boundary hopping") {
  auto lat = ring(5);
  FockBasis b(lat, FixedN{3});
  ModelSpec spec;
  spec.J = 1.0;
  auto H = assemble(b, spec);
  CHECK(same(subsystem(b, spec, lat->all()).H, H));
  auto single = subsystem(b, spec, {2});
  CHECK(same(single.H, number_operator(b, 2, 4.0)));

  auto part = subsystem(b, spec, {0, 1, 2});
  CHECK(same(part.H0, hopping_operator(b, 0, 1) + hopping_operator(b, 1, 2)));

  auto L4 = ring(4);
  FockBasis b4(L4, FixedN{2});
  auto dh = boundary_hopping(b4, spec, {0, 1});
  CHECK(same(dh, hopping_operator(b4, 1, 2) + hopping_operator(b4, 3, 0)));
  CHECK(boundary_hopping(b4, spec, L4->all()).nnz() == 0);

  for (VertexSet X : {VertexSet{0, 1}, VertexSet{1}, VertexSet{0, 2}}) {
    auto H0 = assemble_parts(b4, spec).H0;
    auto in = subsystem(b4, spec, X).H0;
    auto out = subsystem(b4, spec, complement(*L4, X)).H0;
    CHECK(same(H0, in + out + boundary_hopping(b4, spec, X)));
  }
}

TEST_CASE("strip wrap edges") {
  auto sq = build_torus(5, 2);
  CHECK(strip_wrap_edges(sq, 1, 2).empty());
  auto w = strip_wrap_edges(sq, 1, 3);
  CHECK(w.size() == 5);
  for (auto e : w) CHECK(sq.distance(e.a, e.b) == 2);
  // Columns spanning the whole torus already wrap.
  CHECK(strip_wrap_edges(sq, 0, 4).empty());
}

TEST_CASE("truncated Hamiltonians") {
  auto lat = ring(5);
  FockBasis b(lat, FixedN{4});
  ModelSpec spec;
  spec.J = 1.0;
  auto parts = assemble_parts(b, spec);
  auto H = parts.H;
  CHECK(same(truncate(H, b, {2, 3}, 4), H));
  CHECK(same(truncate(H, b, {}, 0), H));

  VertexSet Xt = set_difference(ball(*lat, {0}, 2), ball(*lat, {0}, 1));
  CHECK(Xt == VertexSet{2, 3});
  for (int q = 0; q <= 4; ++q) {
    auto P = projector_region(b, Xt, q);
    auto Ht = truncate(H, b, Xt, q);
    CHECK(Ht.is_exactly_hermitian());
    CHECK(commutator(Ht, P).nnz() == 0);
    CHECK(same(Ht, P * H * P));
    CHECK(same(Ht, P * parts.H0 * P + parts.W * P));
    for (std::size_t r = 0; r < b.size(); ++r)
      for (std::size_t c = 0; c < b.size(); ++c)
        if (P.at(r, r).real() == 1.0 && P.at(c, c).real() == 1.0) REQUIRE(Ht.at(r, c) == H.at(r, c));
  }
}

TEST_CASE("sparse and dense products agree") {
  auto lat = std::make_shared<Lattice>(build_torus(3, 2));
  FockBasis b(lat, FixedN{3});
  REQUIRE(b.size() <= 2000);
  ModelSpec spec;
  spec.J = -0.8;
  auto H = assemble(b, spec);
  Mat d = H.to_dense();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Vec v(b.size());
  for (auto& x : v) x = Complex(g(rng), g(rng));
  CHECK((H.apply(v) - d * v).norm() <= 1e-12 * v.norm() * d.norm());
  Eigen::SelfAdjointEigenSolver<Mat> es(d);
  CHECK(es.info() == Eigen::Success);
}
