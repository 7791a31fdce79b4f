#include "bhlr/states.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "bhlr/error.hpp"
#include "bhlr/parallel.hpp"

namespace bhlr {

StateEnsemble mott(BasisPtr basis, const std::vector<int>& pattern) {
  auto k = basis->index_of(std::span<const int>(pattern));
  if (!k) throw std::invalid_argument("Mott pattern is not a state of this basis");
  Vec v = Vec::Zero(basis->size());
  v[*k] = 1.0;
  return StateEnsemble::pure(std::move(basis), std::move(v));
}

StateEnsemble mott_uniform(BasisPtr basis, int fill) {
  std::vector<int> pattern(basis->sites(), fill);
  return mott(std::move(basis), pattern);
}

Vec random_state(const FockBasis& basis, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec v(basis.size());
  for (auto& x : v) {
    double re = g(rng);
    x = Complex(re, g(rng));
  }
  return v.normalized();
}

Vec random_hardcore_state(const FockBasis& basis, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec v = Vec::Zero(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    auto s = basis.state(k);
    if (std::any_of(s.begin(), s.end(), [](Occ n) { return n > 1; })) continue;
    double re = g(rng);
    v[k] = Complex(re, g(rng));
  }
  if (v.norm() == 0.0) throw std::invalid_argument("basis has no hard-core configuration");
  return v.normalized();
}

StateEnsemble random_ensemble(BasisPtr basis, int members, unsigned long long seed) {
  if (members < 1) throw std::invalid_argument("ensemble needs at least one member");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> w(members);
  double total = 0.0;
  for (auto& x : w) total += (x = u(rng));
  std::vector<Member> m;
  for (int k = 0; k < members; ++k) m.push_back({w[k] / total, random_state(*basis, rng())});
  // Renormalize so the weights sum to one up to the last rounding.
  double s = 0.0;
  for (auto& x : m) s += x.weight;
  for (auto& x : m) x.weight /= s;
  return StateEnsemble(std::move(basis), std::move(m));
}

StateEnsemble strip_superposition(BasisPtr basis) {
  const Lattice& lat = basis->lattice();
  if (!lat.is_torus() || lat.dimension() != 2) throw std::invalid_argument("needs a 2D torus");
  const int R = lat.side();
  if (R % 2 != 0) throw std::invalid_argument("strip superposition needs even R");
  if (!basis->fixed_n() || basis->particles() != R * R)
    throw std::invalid_argument("strip superposition lives in FixedN(R^2)");
  Vec v = Vec::Zero(basis->size());
  for (int parity : {1, 0}) {
    std::vector<int> occ(lat.size());
    for (Vertex i = 0; i < lat.size(); ++i) occ[i] = lat.coordinates(i)[0] % 2 == parity ? 2 : 0;
    v[*basis->index_of(std::span<const int>(occ))] = 1.0 / std::sqrt(2.0);
  }
  return StateEnsemble::pure(std::move(basis), std::move(v));
}

double pair_objective(double J, double U, double lambda1, double lambda2) {
  double T1 = std::abs(J) / U;
  return 2.0 * U * (lambda2 * lambda2 - T1 * lambda1 * lambda2);
}

PairParams optimize_pair_params(double J, double U) {
  if (!(U > 0.0)) throw std::invalid_argument("pair optimization needs U > 0");
  double T1 = std::abs(J) / U;
  // lambda1 = cos(th), lambda2 = sin(th)/sqrt(2) turns the objective into
  // U((1 - cos 2th)/2 - (T1/sqrt 2) sin 2th).
  double th = 0.5 * std::atan2(std::sqrt(2.0) * T1, 1.0);
  PairParams out;
  out.lambda1 = std::cos(th);
  out.lambda2 = std::sin(th) / std::sqrt(2.0);
  out.energy_per_site = 0.5 * U * (1.0 - std::sqrt(1.0 + 2.0 * T1 * T1));
  return out;
}

Vec pair_trial_state(const FockBasis& basis, const std::vector<std::pair<Vertex, Vertex>>& pairs,
                     double lambda1, double lambda2, double J) {
  const double s = J < 0 ? -1.0 : 1.0;
  const int n_pairs = static_cast<int>(pairs.size());
  Vec v = Vec::Zero(basis.size());
  long long combos = 1;
  for (int k = 0; k < n_pairs; ++k) combos *= 3;
  std::vector<int> occ(basis.sites());
  for (long long c = 0; c < combos; ++c) {
    std::fill(occ.begin(), occ.end(), 1);
    double amp = 1.0;
    long long r = c;
    for (const auto& [a, b] : pairs) {
      switch (r % 3) {
        case 0:
          amp *= lambda1;
          break;
        case 1:
          occ[a] = 2, occ[b] = 0, amp *= -lambda2 * s;
          break;
        default:
          occ[a] = 0, occ[b] = 2, amp *= -lambda2 * s;
      }
      r /= 3;
    }
    auto k = basis.index_of(std::span<const int>(occ));
    if (!k) throw std::invalid_argument("pair trial state needs FixedN(#sites)");
    v[*k] += amp;
  }
  return v;
}

Strip make_strip(const Lattice& torus, int first_column, int columns, bool periodize) {
  if (!torus.is_torus() || torus.dimension() != 2) throw std::invalid_argument("needs a 2D torus");
  const int R = torus.side();
  if (columns < 1 || columns > R) throw std::invalid_argument("strip width out of range");
  Strip s;
  s.first_column = first_column;
  s.columns = columns;
  s.to_torus.resize(columns * R);
  auto local = [columns](int x, int y) { return x + columns * y; };
  std::vector<Edge> edges;
  for (int y = 0; y < R; ++y) {
    for (int x = 0; x < columns; ++x) {
      int c[2] = {first_column + x, y};
      s.to_torus[local(x, y)] = torus.vertex_at(c);
      edges.push_back({local(x, y), local(x, (y + 1) % R)});
      if (x + 1 < columns) edges.push_back({local(x, y), local(x + 1, y)});
    }
    if (columns >= 3 && (periodize || columns == R))
      edges.push_back({local(columns - 1, y), local(0, y)});
  }
  s.lattice = std::make_shared<Lattice>(Lattice::from_edges(columns * R, edges, 2));
  return s;
}

LowEnergyStrip low_energy_strip(const Lattice& torus, int first_column, int columns,
                                const ModelSpec& spec, const GroundStateSettings& gs,
                                std::size_t max_states) {
  if (!spec.uniform()) throw std::invalid_argument("low-energy strip needs a uniform model");
  LowEnergyStrip out;
  out.strip = make_strip(torus, first_column, columns, true);
  const int sites = out.strip.lattice->size();
  out.basis = std::make_shared<FockBasis>(out.strip.lattice, FixedN{sites}, max_states);
  SparseOperator H = assemble(*out.basis, spec);
  GroundState g = ground_state(H, gs);
  out.psi = g.psi;
  out.energy = g.energy;
  out.residual = g.residual;
  out.e1 = -g.energy / sites;
  out.e2 = spec.interaction.U;

  std::vector<std::pair<Vertex, Vertex>> pairs;
  const int R = torus.side();
  for (int y = 0; y < R; ++y)
    for (int x = 0; x + 1 < columns; x += 2) pairs.push_back({x + columns * y, x + 1 + columns * y});
  PairParams pp = optimize_pair_params(spec.J, spec.interaction.U);
  Vec trial = pair_trial_state(*out.basis, pairs, pp.lambda1, pp.lambda2, spec.J);
  out.pair_trial_energy = trial.dot(H.apply(trial)).real();
  out.pair_formula_energy = sites * pp.energy_per_site;
  return out;
}

Vec embed_strip(const FockBasis& full, const LowEnergyStrip& s, const std::vector<int>& fixed) {
  if (static_cast<int>(fixed.size()) != full.sites())
    throw std::invalid_argument("fixed occupations must cover the torus");
  Vec v = Vec::Zero(full.size());
  std::vector<int> occ(fixed);
  for (std::size_t k = 0; k < s.basis->size(); ++k) {
    if (s.psi[k] == Complex(0.0)) continue;
    auto st = s.basis->state(k);
    for (std::size_t j = 0; j < st.size(); ++j) occ[s.strip.to_torus[j]] = st[j];
    auto idx = full.index_of(std::span<const int>(occ));
    if (!idx) throw std::invalid_argument("embedded strip state leaves the full sector");
    v[*idx] = s.psi[k];
  }
  return v;
}

StateEnsemble low_energy_strip_state(BasisPtr full, const LowEnergyStrip& s) {
  std::vector<int> zeros(full->sites(), 0);
  Vec v = embed_strip(*full, s, zeros);
  v /= v.norm();
  return StateEnsemble::pure(std::move(full), std::move(v));
}

BadStateParams make_bad_state_params(int R, int ell, double gamma0_request) {
  if (ell < 3) throw std::invalid_argument("bad state needs ell >= 3");
  if (R % ell != 0) throw std::invalid_argument("R must be a multiple of ell");
  if (!(gamma0_request > 0.0 && gamma0_request < 1.0))
    throw std::invalid_argument("gamma0 must lie in (0, 1)");
  BadStateParams p;
  p.R = R;
  p.ell = ell;
  p.ell0 = std::max(1, static_cast<int>(std::floor(gamma0_request * ell)));
  p.ell0 = std::min(p.ell0, ell - 2);  // q = ell - ell0 >= 2
  p.q = ell - p.ell0;
  p.gamma0 = static_cast<double>(p.ell0) / (ell - 1);
  validate(p);
  return p;
}

void validate(const BadStateParams& p) {
  if (p.ell < 3 || p.R % p.ell != 0 || p.q < 2 || p.ell0 < 1 || p.q + p.ell0 != p.ell)
    throw ConstraintError("inconsistent bad-state parameters");
  if (!(p.gamma0 > 0.0 && p.gamma0 < 1.0)) throw ConstraintError("gamma0 must lie in (0, 1)");
}

BadState bad_state(BasisPtr basis, const BadStateParams& params, const ModelSpec& spec,
                   const GroundStateSettings& gs) {
  validate(params);
  const Lattice& lat = basis->lattice();
  if (!lat.is_torus() || lat.dimension() != 2 || lat.side() != params.R)
    throw std::invalid_argument("bad state needs the R x R torus");
  const int R = params.R;
  if (!basis->fixed_n() || basis->particles() != R * R)
    throw std::invalid_argument("bad state lives in FixedN(R^2)");

  LowEnergyStrip strip = low_energy_strip(lat, 1, params.ell0, spec, gs);
  const int periods = R / params.ell;

  // Column of every torus vertex relative to its period.
  std::vector<int> fixed(lat.size(), 0);
  for (Vertex v = 0; v < lat.size(); ++v)
    if (lat.coordinates(v)[0] % params.ell == 0) fixed[v] = params.q;

  // Product of the strip state over periods; factors sorted before
  // multiplying so the amplitude depends only on the multiset of factors.
  Vec psi0 = Vec::Zero(basis->size());
  const auto sdim = static_cast<long long>(strip.basis->size());
  long long combos = 1;
  for (int c = 0; c < periods; ++c) combos *= sdim;
  std::vector<int> occ(fixed);
  std::vector<Complex> factors(periods);
  for (long long combo = 0; combo < combos; ++combo) {
    long long r = combo;
    bool zero = false;
    for (int c = 0; c < periods; ++c) {
      auto k = static_cast<std::size_t>(r % sdim);
      r /= sdim;
      factors[c] = strip.psi[k];
      if (factors[c] == Complex(0.0)) zero = true;
      auto st = strip.basis->state(k);
      for (std::size_t j = 0; j < st.size(); ++j) {
        auto xy = lat.coordinates(strip.strip.to_torus[j]);
        xy[0] += c * params.ell;
        occ[lat.vertex_at(xy)] = st[j];
      }
    }
    if (zero) continue;
    std::sort(factors.begin(), factors.end(), [](Complex a, Complex b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    Complex amp = 1.0;
    for (auto f : factors) amp *= f;
    psi0[*basis->index_of(std::span<const int>(occ))] = amp;
  }
  psi0 /= psi0.norm();

  SparseOperator shift = lift_translation(*basis, translations(lat)[0]);
  std::vector<Member> members;
  Vec cur = psi0;
  for (int s = 0; s < params.ell; ++s) {
    members.push_back({1.0 / params.ell, cur});
    cur = shift.apply(cur);
  }
  return BadState{params, std::move(strip), StateEnsemble(std::move(basis), std::move(members))};
}

std::vector<double> site_distribution(const StateEnsemble& rho, Vertex i) {
  const FockBasis& b = rho.basis();
  std::vector<double> P(b.max_occupation() + 1, 0.0);
  for (const auto& m : rho.members()) {
    std::vector<double> part(P.size(), 0.0);
    for (std::size_t k = 0; k < b.size(); ++k) part[b.occupation(k, i)] += std::norm(m.psi[k]);
    for (std::size_t n = 0; n < P.size(); ++n) P[n] += m.weight * part[n];
  }
  return P;
}

std::vector<MomentReport> measure_moments(const StateEnsemble& rho, const SparseOperator& H,
                                          double p, const std::vector<int>& q_list) {
  const int sites = rho.basis().sites();
  const double energy = rho.expectation(H).real() / sites;
  std::vector<MomentReport> out(sites);
  parallel_for(sites, [&](std::size_t i) {
    auto P = site_distribution(rho, static_cast<Vertex>(i));
    MomentReport r;
    r.site = static_cast<Vertex>(i);
    r.p = p;
    r.value = 0.0;
    for (std::size_t n = 1; n < P.size(); ++n) r.value += P[n] * std::pow(static_cast<double>(n), p);
    for (int q : q_list) {
      double t = 0.0;
      for (std::size_t n = std::max(q, 0); n < P.size(); ++n) t += P[n];
      r.tail[q] = t;
    }
    r.energy_density = energy;
    out[i] = std::move(r);
  });
  return out;
}

bool translation_invariant(const StateEnsemble& rho, const Translation& t, double tol) {
  SparseOperator G = lift_translation(rho.basis(), t);
  for (const auto& m : rho.members()) {
    Vec g = G.apply(m.psi);
    bool found = false;
    for (const auto& n : rho.members()) {
      if (std::abs(n.weight - m.weight) > 1e-15) continue;
      if (std::abs(n.psi.dot(g)) >= 1.0 - tol) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

bool translation_orbit_exact(const StateEnsemble& rho, const Translation& t) {
  SparseOperator G = lift_translation(rho.basis(), t);
  for (const auto& m : rho.members()) {
    Vec g = G.apply(m.psi);
    bool found = false;
    for (const auto& n : rho.members()) {
      if (n.weight == m.weight && n.psi == g) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace bhlr
