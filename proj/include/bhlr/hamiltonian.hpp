#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bhlr/fock.hpp"

namespace bhlr {

// On-site interaction w(n), n >= 0.
struct Interaction {
  std::string name;
  std::function<double(int)> w;
  // Growth data used by the moment constant: w(n) = U n^p + w̃(n) with
  // |w̃(n)| <= c_wtilde (n+1)^(p-eps).
  double p = 0.0;
  double U = 1.0;
  double c_wtilde = 0.0;
  double eps = 1.0;

  double operator()(int n) const { return w(n); }
};

// U n^p - mu n.
Interaction power_p(double p, double U = 1.0, double mu = 0.0);
// U (n-1)^p - mu n.
Interaction power_p_shifted(double p, double U = 1.0, double mu = 0.0);
// w(n) = table[n]; occupations beyond the table are an error.
Interaction custom_table(std::vector<double> table);

struct ModelSpec {
  double J = 1.0;                      // coefficient of every edge
  std::map<Edge, double> edge_J;       // per-edge overrides
  Interaction interaction = power_p(4.0);
  int range = 1;                       // interaction range k (on-site only)

  double hopping(const Edge& e) const;
  double Jbar(const Lattice& lat) const;
  bool uniform() const { return edge_J.empty(); }
};

struct SubsystemHamiltonian {
  SparseOperator H;  // H0 + W
  SparseOperator H0;
  SparseOperator W;
};

// Sum over unordered edges J_ij (b_i† b_j + b_j† b_i) on the given edge list,
// each edge counted once.
SparseOperator hopping_sum(const FockBasis& basis, const ModelSpec& spec,
                           std::span<const Edge> edges);
SparseOperator interaction_sum(const FockBasis& basis, const ModelSpec& spec, const VertexSet& X);

SparseOperator assemble(const FockBasis& basis, const ModelSpec& spec);
SubsystemHamiltonian assemble_parts(const FockBasis& basis, const ModelSpec& spec);
// Hopping on edges inside X and interaction on sites inside X. extra_edges
// (e.g. the wrap edges of a periodized strip) are added to the hopping part.
SubsystemHamiltonian subsystem(const FockBasis& basis, const ModelSpec& spec, const VertexSet& X,
                               std::span<const Edge> extra_edges = {});
// Horizontal wrap edges that close columns [first, last] of a 2D torus into a
// cylinder. Empty when the strip has fewer than 3 columns.
std::vector<Edge> strip_wrap_edges(const Lattice& lat, int first_column, int last_column);
// Hopping terms on edges with exactly one endpoint in X.
SparseOperator boundary_hopping(const FockBasis& basis, const ModelSpec& spec, const VertexSet& X);
// Π̄ H Π̄ with Π̄ = prod_{i in Xtilde} Π_{n_i <= qbar}.
SparseOperator truncate(const SparseOperator& H, const FockBasis& basis, const VertexSet& Xtilde,
                        int qbar);

}  // namespace bhlr
