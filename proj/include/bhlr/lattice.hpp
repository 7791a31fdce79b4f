#pragma once

#include <span>
#include <utility>
#include <vector>

namespace bhlr {

using Vertex = int;
// Sorted, duplicate-free list of vertices.
using VertexSet = std::vector<Vertex>;

struct Edge {
  Vertex a;
  Vertex b;  // a < b
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Translation {
  std::vector<int> shift;
  std::vector<Vertex> perm;  // perm[i] = image of vertex i

  Vertex operator()(Vertex i) const { return perm[i]; }
  Translation compose(const Translation& after) const;  // after ∘ this
  Translation inverse() const;
};

class Lattice {
 public:
  // Discrete D-dimensional torus of side L. Vertex index is sum_k x_k L^k,
  // so coordinate 0 varies fastest. For L=2 the two neighbours along an
  // axis coincide and are stored as one simple edge.
  static Lattice torus(int L, int D);
  // Arbitrary simple graph; side() is 0 and translations are unavailable.
  static Lattice from_edges(int n_vertices, std::vector<Edge> edges, int D);

  int dimension() const { return D_; }
  int side() const { return L_; }
  int size() const { return n_; }
  bool is_torus() const { return L_ > 0; }

  std::span<const Edge> edges() const { return edges_; }
  std::span<const Vertex> neighbors(Vertex i) const;
  int degree(Vertex i) const { return static_cast<int>(neighbors(i).size()); }
  bool adjacent(Vertex i, Vertex j) const { return distance(i, j) == 1; }

  int distance(Vertex i, Vertex j) const { return dist_[i * n_ + j]; }
  int distance(const VertexSet& X, Vertex i) const;
  int distance(const VertexSet& X, const VertexSet& Y) const;
  // Largest pairwise distance (graph diameter in the usual sense).
  int max_distance() const { return max_dist_; }
  double gamma() const { return gamma_; }

  std::vector<int> coordinates(Vertex i) const;
  Vertex vertex_at(std::span<const int> coords) const;  // coords taken mod L

  VertexSet all() const;

 private:
  Lattice() = default;
  void finish();

  int D_ = 0;
  int L_ = 0;
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> adj_offsets_;
  std::vector<Vertex> adj_;
  std::vector<int> dist_;
  int max_dist_ = 0;
  double gamma_ = 1.0;
};

Lattice build_torus(int L, int D);

VertexSet make_set(std::vector<Vertex> v);
VertexSet set_union(const VertexSet& a, const VertexSet& b);
VertexSet set_difference(const VertexSet& a, const VertexSet& b);
VertexSet complement(const Lattice& lat, const VertexSet& X);
bool contains(const VertexSet& X, Vertex i);

// {i : d(X,i) <= r}; ball(X, 0) == X.
VertexSet ball(const Lattice& lat, const VertexSet& X, int r);
// {i in X : d(i, X^c) = 1}.
VertexSet boundary(const Lattice& lat, const VertexSet& X);
// 1 + largest pairwise distance inside X.
int diameter(const Lattice& lat, const VertexSet& X);
// Smallest gamma >= 1 with |∂(i[l])| <= gamma * max(l,1)^(D-1) for all i, l.
double surface_constant(const Lattice& lat);

// One generator per axis, shifting coordinate k by +1.
std::vector<Translation> translations(const Lattice& lat);
Translation translation_by(const Lattice& lat, std::span<const int> shift);

}  // namespace bhlr
