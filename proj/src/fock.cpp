#include "bhlr/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "bhlr/error.hpp"

namespace bhlr {

double FockBasis::count(int sites, const Sector& sector) {
  if (const auto* f = std::get_if<FixedN>(&sector)) {
    // C(N + m - 1, m - 1) in floating point; only used for the size cap.
    double c = 1.0;
    for (int k = 1; k <= sites - 1; ++k) c = c * (f->N + k) / k;
    return c;
  }
  const auto& cap = std::get<Capped>(sector);
  return std::pow(cap.n_max + 1.0, sites);
}

FockBasis::FockBasis(std::shared_ptr<const Lattice> lat, Sector sector, std::size_t max_states)
    : lat_(std::move(lat)), sector_(sector), m_(lat_->size()) {
  if (const auto* f = std::get_if<FixedN>(&sector_)) {
    if (f->N < 0) throw std::invalid_argument("particle number must be >= 0");
    if (f->N > 65535) throw std::invalid_argument("particle number too large");
  } else if (std::get<Capped>(sector_).n_max < 0) {
    throw std::invalid_argument("occupation cap must be >= 0");
  }
  double predicted = count(m_, sector_);
  if (predicted > static_cast<double>(max_states))
    throw DimensionError("basis would have " + std::to_string(predicted) +
                         " states, above the cap of " + std::to_string(max_states));
  size_ = static_cast<std::size_t>(std::llround(predicted));
  occ_.assign(size_ * m_, 0);

  if (fixed_n()) {
    const int N = particles();
    ways_.assign(m_ + 1, std::vector<double>(N + 1, 0.0));
    ways_[0][0] = 1.0;
    for (int s = 1; s <= m_; ++s) {
      ways_[s][0] = 1.0;
      for (int k = 1; k <= N; ++k) ways_[s][k] = ways_[s][k - 1] + ways_[s - 1][k];
    }
    std::vector<Occ> cur(m_, 0);
    std::size_t k = 0;
    // Depth-first fill gives ascending lexicographic order.
    auto fill = [&](auto&& self, int site, int rem) -> void {
      if (site == m_ - 1) {
        cur[site] = static_cast<Occ>(rem);
        std::copy(cur.begin(), cur.end(), occ_.begin() + k * m_);
        ++k;
        return;
      }
      for (int v = 0; v <= rem; ++v) {
        cur[site] = static_cast<Occ>(v);
        self(self, site + 1, rem - v);
      }
    };
    fill(fill, 0, N);
    if (k != size_) throw std::logic_error("FixedN enumeration count mismatch");
  } else {
    const int radix = n_max() + 1;
    for (std::size_t k = 0; k < size_; ++k) {
      std::size_t r = k;
      for (int i = m_ - 1; i >= 0; --i) {
        occ_[k * m_ + i] = static_cast<Occ>(r % radix);
        r /= radix;
      }
    }
  }
}

int FockBasis::particles() const {
  if (!fixed_n()) throw std::logic_error("particles() requires a FixedN basis");
  return std::get<FixedN>(sector_).N;
}

int FockBasis::n_max() const {
  if (fixed_n()) throw std::logic_error("n_max() requires a Capped basis");
  return std::get<Capped>(sector_).n_max;
}

int FockBasis::count_in(std::size_t k, const VertexSet& X) const {
  int s = 0;
  for (Vertex i : X) s += occupation(k, i);
  return s;
}

std::optional<std::size_t> FockBasis::index_of(std::span<const Occ> n) const {
  if (static_cast<int>(n.size()) != m_) return std::nullopt;
  if (fixed_n()) {
    int rem = particles();
    double r = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (n[i] > rem) return std::nullopt;
      for (int v = 0; v < n[i]; ++v) r += ways_[m_ - i - 1][rem - v];
      rem -= n[i];
    }
    if (rem != 0) return std::nullopt;
    return static_cast<std::size_t>(r);
  }
  const int cap = n_max();
  std::size_t r = 0;
  for (int i = 0; i < m_; ++i) {
    if (n[i] > cap) return std::nullopt;
    r = r * (cap + 1) + n[i];
  }
  return r;
}

std::optional<std::size_t> FockBasis::index_of(std::span<const int> n) const {
  std::vector<Occ> v(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0 || n[i] > 65535) return std::nullopt;
    v[i] = static_cast<Occ>(n[i]);
  }
  return index_of(std::span<const Occ>(v));
}

// ---------------------------------------------------------------------------

SparseOperator::SparseOperator(SpMat m, bool hermitian) : m_(std::move(m)), hermitian_(hermitian) {
  m_.makeCompressed();
}

SparseOperator SparseOperator::from_triplets(std::size_t dim, std::vector<Triplet> t,
                                             bool hermitian) {
  SpMat m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(t.begin(), t.end());
  return SparseOperator(std::move(m), hermitian);
}

SparseOperator SparseOperator::identity(std::size_t dim) {
  SpMat m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setIdentity();
  return SparseOperator(std::move(m), true);
}

SparseOperator SparseOperator::zero(std::size_t dim) {
  return SparseOperator(SpMat(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)), true);
}

SparseOperator SparseOperator::diagonal(const std::vector<double>& d) {
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (std::size_t k = 0; k < d.size(); ++k)
    if (d[k] != 0.0) t.emplace_back(k, k, d[k]);
  return from_triplets(d.size(), std::move(t), true);
}

bool SparseOperator::is_exactly_hermitian() const {
  for (Eigen::Index r = 0; r < m_.outerSize(); ++r)
    for (SpMat::InnerIterator it(m_, r); it; ++it)
      if (at(it.col(), it.row()) != std::conj(it.value())) return false;
  return true;
}

Complex SparseOperator::at(std::size_t r, std::size_t c) const {
  const auto* outer = m_.outerIndexPtr();
  const auto* inner = m_.innerIndexPtr();
  const auto* begin = inner + outer[r];
  const auto* end = inner + outer[r + 1];
  const auto* it = std::lower_bound(begin, end, static_cast<SpMat::StorageIndex>(c));
  if (it == end || *it != static_cast<SpMat::StorageIndex>(c)) return {0.0, 0.0};
  return m_.valuePtr()[it - inner];
}

double SparseOperator::max_abs() const {
  double m = 0.0;
  for (Eigen::Index k = 0; k < m_.nonZeros(); ++k) m = std::max(m, std::abs(m_.valuePtr()[k]));
  return m;
}

Vec SparseOperator::apply(const Vec& v) const {
  Vec out;
  apply(v, out);
  return out;
}

void SparseOperator::apply(const Vec& v, Vec& out) const {
  if (v.size() != m_.cols()) throw std::invalid_argument("operator/vector dimension mismatch");
  out.resize(m_.rows());
  const auto* outer = m_.outerIndexPtr();
  const auto* inner = m_.innerIndexPtr();
  const auto* val = m_.valuePtr();
  for (Eigen::Index r = 0; r < m_.rows(); ++r) {
    Complex s = 0.0;
    for (auto k = outer[r]; k < outer[r + 1]; ++k) s += val[k] * v[inner[k]];
    out[r] = s;
  }
}

Mat SparseOperator::to_dense() const { return Mat(m_); }

SparseOperator SparseOperator::adjoint() const {
  SpMat a = m_.adjoint();
  return SparseOperator(std::move(a), hermitian_);
}

SparseOperator SparseOperator::pruned(double tol) const {
  SpMat m = m_;
  m.prune([tol](const Eigen::Index&, const Eigen::Index&, const Complex& v) {
    return std::abs(v) > tol;
  });
  return SparseOperator(std::move(m), hermitian_);
}

void SparseOperator::write_triplets(std::ostream& os) const {
  char buf[128];
  for (Eigen::Index r = 0; r < m_.outerSize(); ++r) {
    for (SpMat::InnerIterator it(m_, r); it; ++it) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g %.17g\n", static_cast<long long>(r),
                    static_cast<long long>(it.col()), it.value().real(), it.value().imag());
      os << buf;
    }
  }
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  SpMat m = a.m_ * b.m_;
  return SparseOperator(std::move(m), false);
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  SpMat m = a.m_ + b.m_;
  return SparseOperator(std::move(m), a.hermitian_ && b.hermitian_);
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
  SpMat m = a.m_ - b.m_;
  return SparseOperator(std::move(m), a.hermitian_ && b.hermitian_);
}

SparseOperator operator*(Complex s, const SparseOperator& a) {
  SpMat m = s * a.m_;
  return SparseOperator(std::move(m), a.hermitian_ && s.imag() == 0.0);
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
  return (a * b - b * a).pruned();
}

// ---------------------------------------------------------------------------

SparseOperator diagonal_operator(const FockBasis& basis,
                                 const std::function<double(std::span<const Occ>)>& f) {
  std::vector<double> d(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) d[k] = f(basis.state(k));
  return SparseOperator::diagonal(d);
}

namespace {

void check_site(const FockBasis& basis, Vertex i) {
  if (i < 0 || i >= basis.sites()) throw std::out_of_range("site index out of range");
}

}  // namespace

SparseOperator number_operator(const FockBasis& basis, Vertex i, double p) {
  check_site(basis, i);
  if (p <= 0.0) throw std::invalid_argument("number operator power must be positive");
  return diagonal_operator(basis, [i, p](std::span<const Occ> n) {
    return n[i] == 0 ? 0.0 : std::pow(static_cast<double>(n[i]), p);
  });
}

SparseOperator total_number(const FockBasis& basis) {
  return diagonal_operator(basis, [](std::span<const Occ> n) {
    double s = 0.0;
    for (Occ v : n) s += v;
    return s;
  });
}

SparseOperator hop_term(const FockBasis& basis, Vertex i, Vertex j) {
  check_site(basis, i);
  check_site(basis, j);
  if (i == j) throw std::invalid_argument("hopping needs two distinct sites");
  std::vector<Triplet> t;
  std::vector<Occ> n(basis.sites());
  for (std::size_t c = 0; c < basis.size(); ++c) {
    auto s = basis.state(c);
    if (s[j] == 0) continue;
    std::copy(s.begin(), s.end(), n.begin());
    double amp = std::sqrt((n[i] + 1.0) * n[j]);
    n[i] += 1;
    n[j] -= 1;
    if (auto r = basis.index_of(std::span<const Occ>(n))) t.emplace_back(*r, c, amp);
  }
  return SparseOperator::from_triplets(basis.size(), std::move(t), false);
}

SparseOperator hopping_operator(const FockBasis& basis, Vertex i, Vertex j) {
  SparseOperator a = hop_term(basis, i, j);
  SpMat m = a.matrix() + SpMat(a.matrix().adjoint());
  return SparseOperator(std::move(m), true);
}

SparseOperator annihilation(const FockBasis& basis, Vertex i) {
  check_site(basis, i);
  if (basis.fixed_n()) throw std::logic_error("b_i leaves a FixedN sector; use a Capped basis");
  std::vector<Triplet> t;
  std::vector<Occ> n(basis.sites());
  for (std::size_t c = 0; c < basis.size(); ++c) {
    auto s = basis.state(c);
    if (s[i] == 0) continue;
    std::copy(s.begin(), s.end(), n.begin());
    double amp = std::sqrt(static_cast<double>(n[i]));
    n[i] -= 1;
    t.emplace_back(*basis.index_of(std::span<const Occ>(n)), c, amp);
  }
  return SparseOperator::from_triplets(basis.size(), std::move(t), false);
}

SparseOperator creation(const FockBasis& basis, Vertex i) {
  return annihilation(basis, i).adjoint();
}

SparseOperator projector_region(const FockBasis& basis, const VertexSet& X, int q) {
  if (q < 0) throw std::invalid_argument("projector cutoff must be >= 0");
  return diagonal_operator(basis, [&X, q](std::span<const Occ> n) {
    for (Vertex i : X)
      if (n[i] > q) return 0.0;
    return 1.0;
  });
}

SparseOperator projector_le(const FockBasis& basis, Vertex i, int q) {
  check_site(basis, i);
  return diagonal_operator(basis, [i, q](std::span<const Occ> n) { return n[i] <= q ? 1.0 : 0.0; });
}

SparseOperator projector_eq(const FockBasis& basis, Vertex i, int m) {
  check_site(basis, i);
  return diagonal_operator(basis, [i, m](std::span<const Occ> n) { return n[i] == m ? 1.0 : 0.0; });
}

SparseOperator projector_ge(const FockBasis& basis, Vertex i, int q) {
  check_site(basis, i);
  return diagonal_operator(basis, [i, q](std::span<const Occ> n) { return n[i] >= q ? 1.0 : 0.0; });
}

SparseOperator projector_count(const FockBasis& basis, const VertexSet& X, int m) {
  return diagonal_operator(basis, [&X, m](std::span<const Occ> n) {
    int s = 0;
    for (Vertex i : X) s += n[i];
    return s == m ? 1.0 : 0.0;
  });
}

SparseOperator weighted_number_operator(const FockBasis& basis, const std::vector<double>& weights) {
  if (static_cast<int>(weights.size()) != basis.sites())
    throw std::invalid_argument("one weight per site required");
  for (double w : weights)
    if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
  return diagonal_operator(basis, [&weights](std::span<const Occ> n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) s += weights[j] * n[j];
    return s;
  });
}

std::vector<double> damped_weights(const Lattice& lat, Vertex i) {
  std::vector<double> w(lat.size());
  for (Vertex j = 0; j < lat.size(); ++j) w[j] = std::exp(-0.75 * lat.distance(i, j));
  return w;
}

SparseOperator lift_translation(const FockBasis& basis, const Translation& t) {
  if (static_cast<int>(t.perm.size()) != basis.sites())
    throw std::invalid_argument("translation does not match the basis lattice");
  std::vector<Triplet> trip;
  trip.reserve(basis.size());
  std::vector<Occ> out(basis.sites());
  for (std::size_t c = 0; c < basis.size(); ++c) {
    auto s = basis.state(c);
    for (int i = 0; i < basis.sites(); ++i) out[t.perm[i]] = s[i];
    trip.emplace_back(*basis.index_of(std::span<const Occ>(out)), c, 1.0);
  }
  return SparseOperator::from_triplets(basis.size(), std::move(trip), false);
}

int observable_q0(const SparseOperator& op, const FockBasis& basis, const VertexSet& X0,
                  double tol) {
  if (op.dim() != basis.size()) throw std::invalid_argument("operator does not match basis");
  VertexSet outside = complement(basis.lattice(), X0);
  int q0 = 0;
  const SpMat& m = op.matrix();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SpMat::InnerIterator it(m, r); it; ++it) {
      double a = std::abs(it.value());
      if (a <= tol) continue;
      auto c = static_cast<std::size_t>(it.col());
      for (Vertex i : outside) {
        int diff = basis.occupation(r, i) - basis.occupation(c, i);
        if (diff != 0 && a * std::abs(diff) > tol)
          throw SupportError("operator changes the occupation of site " + std::to_string(i) +
                             " outside its declared support");
      }
      q0 = std::max(q0, std::abs(basis.count_in(r, X0) - basis.count_in(c, X0)));
    }
  }
  return q0;
}

}  // namespace bhlr
