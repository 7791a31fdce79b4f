#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "bhlr/lattice.hpp"

namespace bhlr {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<Complex>;
using Occ = std::uint16_t;

struct FixedN {
  int N;
};
struct Capped {
  int n_max;
};
using Sector = std::variant<FixedN, Capped>;

class FockBasis {
 public:
  static constexpr std::size_t kDefaultMaxStates = 5'000'000;

  // States are enumerated in ascending lexicographic order of the
  // occupation vector, site 0 most significant.
  FockBasis(std::shared_ptr<const Lattice> lat, Sector sector,
            std::size_t max_states = kDefaultMaxStates);

  const Lattice& lattice() const { return *lat_; }
  const std::shared_ptr<const Lattice>& lattice_ptr() const { return lat_; }
  const Sector& sector() const { return sector_; }
  bool fixed_n() const { return std::holds_alternative<FixedN>(sector_); }
  // Total particle number (FixedN) or per-site cap (Capped).
  int particles() const;
  int n_max() const;
  // Largest occupation any site can carry in this basis.
  int max_occupation() const { return fixed_n() ? particles() : n_max(); }

  std::size_t size() const { return size_; }
  int sites() const { return m_; }
  std::span<const Occ> state(std::size_t k) const {
    return {occ_.data() + k * m_, static_cast<std::size_t>(m_)};
  }
  int occupation(std::size_t k, Vertex i) const { return occ_[k * m_ + i]; }
  int count_in(std::size_t k, const VertexSet& X) const;
  // nullopt when the vector is not in this sector.
  std::optional<std::size_t> index_of(std::span<const Occ> n) const;
  std::optional<std::size_t> index_of(std::span<const int> n) const;

  // Predicted size without enumerating.
  static double count(int sites, const Sector& sector);

 private:
  std::shared_ptr<const Lattice> lat_;
  Sector sector_;
  int m_ = 0;
  std::size_t size_ = 0;
  std::vector<Occ> occ_;
  // binom_[s][k] = number of ways to put k bosons on s sites (FixedN ranking).
  std::vector<std::vector<double>> ways_;
};

class SparseOperator {
 public:
  SparseOperator() = default;
  explicit SparseOperator(SpMat m, bool hermitian = false);
  static SparseOperator from_triplets(std::size_t dim, std::vector<Triplet> t,
                                      bool hermitian = false);
  static SparseOperator identity(std::size_t dim);
  static SparseOperator zero(std::size_t dim);
  static SparseOperator diagonal(const std::vector<double>& d);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t nnz() const { return static_cast<std::size_t>(m_.nonZeros()); }
  bool hermitian() const { return hermitian_; }
  const SpMat& matrix() const { return m_; }

  // Entrywise check r,c -> conj(c,r), no tolerance.
  bool is_exactly_hermitian() const;
  Complex at(std::size_t r, std::size_t c) const;
  double max_abs() const;

  Vec apply(const Vec& v) const;
  void apply(const Vec& v, Vec& out) const;
  Mat to_dense() const;
  SparseOperator adjoint() const;
  // Drops entries with |value| <= tol (exact zeros by default).
  SparseOperator pruned(double tol = 0.0) const;

  // One "row col re im" line per stored entry, sorted by (row, col).
  void write_triplets(std::ostream& os) const;

  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator*(Complex s, const SparseOperator& a);

 private:
  SpMat m_;
  bool hermitian_ = false;
};

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);

// Diagonal operator with entries f(occupation vector).
SparseOperator diagonal_operator(const FockBasis& basis,
                                 const std::function<double(std::span<const Occ>)>& f);

// n_i^p with 0^p = 0.
SparseOperator number_operator(const FockBasis& basis, Vertex i, double p = 1.0);
SparseOperator total_number(const FockBasis& basis);
// b_i† b_j (not Hermitian). Transitions beyond the cap of a Capped basis are dropped.
SparseOperator hop_term(const FockBasis& basis, Vertex i, Vertex j);
// b_i† b_j + b_j† b_i.
SparseOperator hopping_operator(const FockBasis& basis, Vertex i, Vertex j);
// Capped bases only; b_i† drops the transition n_max -> n_max+1.
SparseOperator annihilation(const FockBasis& basis, Vertex i);
SparseOperator creation(const FockBasis& basis, Vertex i);

// prod_{i in X} Π_{n_i <= q}.
SparseOperator projector_region(const FockBasis& basis, const VertexSet& X, int q);
SparseOperator projector_le(const FockBasis& basis, Vertex i, int q);
SparseOperator projector_eq(const FockBasis& basis, Vertex i, int m);
SparseOperator projector_ge(const FockBasis& basis, Vertex i, int q);
// Π_{n_X = m} with n_X the number of particles in X.
SparseOperator projector_count(const FockBasis& basis, const VertexSet& X, int m);

// sum_j weights[j] n_j.
SparseOperator weighted_number_operator(const FockBasis& basis,
                                        const std::vector<double>& weights);
// Weights exp(-0.75 d(i,j)).
std::vector<double> damped_weights(const Lattice& lat, Vertex i);

SparseOperator lift_translation(const FockBasis& basis, const Translation& t);

// Smallest q0 such that op never changes n_X0 by more than q0. Throws
// SupportError when op fails to commute with n_i for some i outside X0.
int observable_q0(const SparseOperator& op, const FockBasis& basis, const VertexSet& X0,
                  double tol = 1e-12);

}  // namespace bhlr
