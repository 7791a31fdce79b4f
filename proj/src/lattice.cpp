#include "bhlr/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

namespace bhlr {

Translation Translation::compose(const Translation& after) const {
  Translation out;
  out.shift = shift;
  for (std::size_t k = 0; k < shift.size() && k < after.shift.size(); ++k)
    out.shift[k] += after.shift[k];
  out.perm.resize(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out.perm[i] = after.perm[perm[i]];
  return out;
}

Translation Translation::inverse() const {
  Translation out;
  out.shift = shift;
  for (auto& s : out.shift) s = -s;
  out.perm.resize(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out.perm[perm[i]] = static_cast<Vertex>(i);
  return out;
}

Lattice Lattice::torus(int L, int D) {
  if (L < 2) throw std::invalid_argument("torus side L must be >= 2");
  if (D < 1) throw std::invalid_argument("torus dimension D must be >= 1");
  Lattice lat;
  lat.D_ = D;
  lat.L_ = L;
  long long n = 1;
  for (int k = 0; k < D; ++k) {
    n *= L;
    if (n > 1'000'000) throw std::invalid_argument("torus too large");
  }
  lat.n_ = static_cast<int>(n);
  std::set<Edge> edges;
  std::vector<int> x(D);
  for (Vertex i = 0; i < lat.n_; ++i) {
    x = lat.coordinates(i);
    for (int k = 0; k < D; ++k) {
      auto y = x;
      y[k] = (y[k] + 1) % L;
      Vertex j = lat.vertex_at(y);
      edges.insert(Edge{std::min(i, j), std::max(i, j)});
    }
  }
  lat.edges_.assign(edges.begin(), edges.end());
  lat.finish();
  return lat;
}

Lattice Lattice::from_edges(int n_vertices, std::vector<Edge> edges, int D) {
  if (n_vertices < 1) throw std::invalid_argument("graph needs at least one vertex");
  Lattice lat;
  lat.D_ = D;
  lat.L_ = 0;
  lat.n_ = n_vertices;
  std::set<Edge> set;
  for (auto e : edges) {
    if (e.a == e.b) continue;
    if (e.a < 0 || e.b < 0 || e.a >= n_vertices || e.b >= n_vertices)
      throw std::invalid_argument("edge endpoint out of range");
    set.insert(Edge{std::min(e.a, e.b), std::max(e.a, e.b)});
  }
  lat.edges_.assign(set.begin(), set.end());
  lat.finish();
  return lat;
}

void Lattice::finish() {
  std::vector<std::vector<Vertex>> nb(n_);
  for (auto e : edges_) {
    nb[e.a].push_back(e.b);
    nb[e.b].push_back(e.a);
  }
  adj_offsets_.assign(n_ + 1, 0);
  adj_.clear();
  for (int i = 0; i < n_; ++i) {
    std::sort(nb[i].begin(), nb[i].end());
    adj_.insert(adj_.end(), nb[i].begin(), nb[i].end());
    adj_offsets_[i + 1] = static_cast<int>(adj_.size());
  }

  const int inf = n_ + 1;
  dist_.assign(static_cast<std::size_t>(n_) * n_, inf);
  std::vector<Vertex> queue(n_);
  for (Vertex s = 0; s < n_; ++s) {
    int* d = &dist_[static_cast<std::size_t>(s) * n_];
    d[s] = 0;
    int head = 0, tail = 0;
    queue[tail++] = s;
    while (head < tail) {
      Vertex u = queue[head++];
      for (Vertex v : neighbors(u)) {
        if (d[v] == inf) {
          d[v] = d[u] + 1;
          queue[tail++] = v;
        }
      }
    }
  }
  max_dist_ = *std::max_element(dist_.begin(), dist_.end());
  gamma_ = surface_constant(*this);
}

std::span<const Vertex> Lattice::neighbors(Vertex i) const {
  return {adj_.data() + adj_offsets_[i],
          static_cast<std::size_t>(adj_offsets_[i + 1] - adj_offsets_[i])};
}

int Lattice::distance(const VertexSet& X, Vertex i) const {
  int best = n_ + 1;
  for (Vertex x : X) best = std::min(best, distance(x, i));
  return best;
}

int Lattice::distance(const VertexSet& X, const VertexSet& Y) const {
  int best = n_ + 1;
  for (Vertex y : Y) best = std::min(best, distance(X, y));
  return best;
}

std::vector<int> Lattice::coordinates(Vertex i) const {
  if (!is_torus()) throw std::logic_error("coordinates require a torus");
  std::vector<int> x(D_);
  for (int k = 0; k < D_; ++k) {
    x[k] = i % L_;
    i /= L_;
  }
  return x;
}

Vertex Lattice::vertex_at(std::span<const int> coords) const {
  if (!is_torus()) throw std::logic_error("coordinates require a torus");
  Vertex i = 0;
  for (int k = D_ - 1; k >= 0; --k) i = i * L_ + ((coords[k] % L_) + L_) % L_;
  return i;
}

VertexSet Lattice::all() const {
  VertexSet v(n_);
  for (int i = 0; i < n_; ++i) v[i] = i;
  return v;
}

Lattice build_torus(int L, int D) { return Lattice::torus(L, D); }

VertexSet make_set(std::vector<Vertex> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

VertexSet set_union(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

VertexSet set_difference(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

VertexSet complement(const Lattice& lat, const VertexSet& X) {
  return set_difference(lat.all(), X);
}

bool contains(const VertexSet& X, Vertex i) {
  return std::binary_search(X.begin(), X.end(), i);
}

VertexSet ball(const Lattice& lat, const VertexSet& X, int r) {
  if (X.empty()) throw std::invalid_argument("ball of an empty set");
  if (r < 0) throw std::invalid_argument("ball radius must be nonnegative");
  VertexSet out;
  for (Vertex i = 0; i < lat.size(); ++i)
    if (lat.distance(X, i) <= r) out.push_back(i);
  return out;
}

VertexSet boundary(const Lattice& lat, const VertexSet& X) {
  VertexSet out;
  for (Vertex i : X) {
    for (Vertex j : lat.neighbors(i)) {
      if (!contains(X, j)) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

int diameter(const Lattice& lat, const VertexSet& X) {
  if (X.empty()) return 0;
  int m = 0;
  for (Vertex i : X)
    for (Vertex j : X) m = std::max(m, lat.distance(i, j));
  return 1 + m;
}

double surface_constant(const Lattice& lat) {
  // For a single base vertex i, j lies in ∂(i[l]) iff d(i,j) <= l and some
  // neighbour k has d(i,k) > l, i.e. l < max_k d(i,k). So j counts for
  // l in [d(i,j), maxnb(j)).
  double g = 1.0;
  const int D = lat.dimension();
  const int dmax = lat.max_distance();
  std::vector<int> count(dmax + 2);
  for (Vertex i = 0; i < lat.size(); ++i) {
    std::fill(count.begin(), count.end(), 0);
    for (Vertex j = 0; j < lat.size(); ++j) {
      int far = -1;
      for (Vertex k : lat.neighbors(j)) far = std::max(far, lat.distance(i, k));
      for (int l = lat.distance(i, j); l < far; ++l) ++count[l];
    }
    for (int l = 0; l <= dmax; ++l) {
      double denom = std::pow(static_cast<double>(std::max(l, 1)), D - 1);
      g = std::max(g, count[l] / denom);
    }
  }
  return g;
}

Translation translation_by(const Lattice& lat, std::span<const int> shift) {
  if (!lat.is_torus()) throw std::logic_error("translations require a torus");
  Translation t;
  t.shift.assign(shift.begin(), shift.end());
  t.perm.resize(lat.size());
  for (Vertex i = 0; i < lat.size(); ++i) {
    auto x = lat.coordinates(i);
    for (int k = 0; k < lat.dimension(); ++k) x[k] += shift[k];
    t.perm[i] = lat.vertex_at(x);
  }
  return t;
}

std::vector<Translation> translations(const Lattice& lat) {
  std::vector<Translation> out;
  for (int k = 0; k < lat.dimension(); ++k) {
    std::vector<int> s(lat.dimension(), 0);
    s[k] = 1;
    out.push_back(translation_by(lat, s));
  }
  return out;
}

}  // namespace bhlr
