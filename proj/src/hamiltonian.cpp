#include "bhlr/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bhlr {

Interaction power_p(double p, double U, double mu) {
  Interaction in;
  in.name = "power_p";
  in.p = p;
  in.U = U;
  in.w = [p, U, mu](int n) { return (n == 0 ? 0.0 : U * std::pow(n, p)) - mu * n; };
  if (mu != 0.0) {
    in.c_wtilde = std::abs(mu);
    in.eps = p - 1.0;
  }
  return in;
}

Interaction power_p_shifted(double p, double U, double mu) {
  Interaction in;
  in.name = "power_p_shifted";
  in.p = p;
  in.U = U;
  in.w = [p, U, mu](int n) {
    double x = n - 1.0;
    double base = std::floor(p) == p ? std::pow(x, p) : std::pow(std::abs(x), p);
    return U * base - mu * n;
  };
  // |(n-1)^p - n^p| <= p (n+1)^(p-1) for p >= 1.
  in.c_wtilde = std::abs(U) * p + std::abs(mu);
  in.eps = 1.0;
  return in;
}

Interaction custom_table(std::vector<double> table) {
  if (table.empty()) throw std::invalid_argument("interaction table must be nonempty");
  Interaction in;
  in.name = "custom_table";
  in.w = [t = std::move(table)](int n) {
    if (n < 0 || n >= static_cast<int>(t.size()))
      throw std::out_of_range("occupation " + std::to_string(n) + " beyond interaction table");
    return t[n];
  };
  return in;
}

double ModelSpec::hopping(const Edge& e) const {
  auto it = edge_J.find(e);
  return it == edge_J.end() ? J : it->second;
}

double ModelSpec::Jbar(const Lattice& lat) const {
  double m = 0.0;
  for (const auto& e : lat.edges()) m = std::max(m, std::abs(hopping(e)));
  return m;
}

SparseOperator hopping_sum(const FockBasis& basis, const ModelSpec& spec,
                           std::span<const Edge> edges) {
  std::vector<Triplet> t;
  std::vector<Occ> n(basis.sites());
  for (std::size_t c = 0; c < basis.size(); ++c) {
    auto s = basis.state(c);
    for (const auto& e : edges) {
      double J = spec.hopping(e);
      if (J == 0.0) continue;
      for (auto [i, j] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
        if (s[j] == 0) continue;
        std::copy(s.begin(), s.end(), n.begin());
        double amp = J * std::sqrt((n[i] + 1.0) * n[j]);
        n[i] += 1;
        n[j] -= 1;
        if (auto r = basis.index_of(std::span<const Occ>(n))) t.emplace_back(*r, c, amp);
      }
    }
  }
  return SparseOperator::from_triplets(basis.size(), std::move(t), true);
}

SparseOperator interaction_sum(const FockBasis& basis, const ModelSpec& spec, const VertexSet& X) {
  // Cache w on every occupation that can occur.
  std::vector<double> w(basis.max_occupation() + 1);
  for (int n = 0; n <= basis.max_occupation(); ++n) w[n] = spec.interaction(n);
  return diagonal_operator(basis, [&](std::span<const Occ> s) {
    double e = 0.0;
    for (Vertex i : X) e += w[s[i]];
    return e;
  });
}

SubsystemHamiltonian assemble_parts(const FockBasis& basis, const ModelSpec& spec) {
  return subsystem(basis, spec, basis.lattice().all());
}

SparseOperator assemble(const FockBasis& basis, const ModelSpec& spec) {
  return assemble_parts(basis, spec).H;
}

SubsystemHamiltonian subsystem(const FockBasis& basis, const ModelSpec& spec, const VertexSet& X,
                               std::span<const Edge> extra_edges) {
  if (spec.range != 1) throw std::invalid_argument("only on-site interactions are implemented");
  std::vector<Edge> edges;
  for (const auto& e : basis.lattice().edges())
    if (contains(X, e.a) && contains(X, e.b)) edges.push_back(e);
  for (const auto& e : extra_edges) {
    Edge f{std::min(e.a, e.b), std::max(e.a, e.b)};
    if (f.a == f.b) continue;
    if (!contains(X, f.a) || !contains(X, f.b))
      throw std::invalid_argument("extra edge leaves the subsystem");
    edges.push_back(f);
  }
  SubsystemHamiltonian out;
  out.H0 = hopping_sum(basis, spec, edges);
  out.W = interaction_sum(basis, spec, X);
  out.H = SparseOperator((out.H0 + out.W).matrix(), true);
  return out;
}

std::vector<Edge> strip_wrap_edges(const Lattice& lat, int first_column, int last_column) {
  if (!lat.is_torus() || lat.dimension() != 2)
    throw std::invalid_argument("strip wrap edges need a 2D torus");
  std::vector<Edge> out;
  if (last_column - first_column + 1 < 3) return out;
  for (int y = 0; y < lat.side(); ++y) {
    int a[2] = {first_column, y};
    int b[2] = {last_column, y};
    Vertex u = lat.vertex_at(a), v = lat.vertex_at(b);
    if (!lat.adjacent(u, v)) out.push_back(Edge{std::min(u, v), std::max(u, v)});
  }
  return out;
}

SparseOperator boundary_hopping(const FockBasis& basis, const ModelSpec& spec, const VertexSet& X) {
  std::vector<Edge> edges;
  for (const auto& e : basis.lattice().edges())
    if (contains(X, e.a) != contains(X, e.b)) edges.push_back(e);
  return hopping_sum(basis, spec, edges);
}

SparseOperator truncate(const SparseOperator& H, const FockBasis& basis, const VertexSet& Xtilde,
                        int qbar) {
  if (qbar < 0) throw std::invalid_argument("qbar must be >= 0");
  std::vector<char> keep(basis.size(), 1);
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (Vertex i : Xtilde)
      if (basis.occupation(k, i) > qbar) keep[k] = 0;
  SpMat m = H.matrix();
  m.prune([&keep](const Eigen::Index& r, const Eigen::Index& c, const Complex&) {
    return keep[r] && keep[c];
  });
  return SparseOperator(std::move(m), H.hermitian());
}

}  // namespace bhlr
