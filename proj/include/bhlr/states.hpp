#pragma once

#include <map>
#include <memory>
#include <vector>

#include "bhlr/hamiltonian.hpp"
#include "bhlr/propagator.hpp"

namespace bhlr {

using BasisPtr = std::shared_ptr<const FockBasis>;

StateEnsemble mott(BasisPtr basis, const std::vector<int>& pattern);
StateEnsemble mott_uniform(BasisPtr basis, int fill);

// Seeded complex Gaussian amplitudes, normalized.
Vec random_state(const FockBasis& basis, unsigned long long seed);
// Same, restricted to configurations with every occupation <= 1.
Vec random_hardcore_state(const FockBasis& basis, unsigned long long seed);
// Random weights and members.
StateEnsemble random_ensemble(BasisPtr basis, int members, unsigned long long seed);

// (|m_ev> + |m_odd>)/sqrt(2) on an R x R torus, R even, FixedN(R^2):
// alternating columns of occupation 0 and 2.
StateEnsemble strip_superposition(BasisPtr basis);

struct PairParams {
  double lambda1;
  double lambda2;
  double energy_per_site;
};
// 2U(lambda2^2 - T1 lambda1 lambda2), T1 = |J|/U, on lambda1^2 + 2 lambda2^2 = 1.
double pair_objective(double J, double U, double lambda1, double lambda2);
// Analytic minimizer; energy (U/2)(1 - sqrt(1 + 2 T1^2)).
PairParams optimize_pair_params(double J, double U);
// Product over pairs of lambda1|11> - lambda2 sign(J)(|20> + |02>), times |1>
// on every unpaired site.
Vec pair_trial_state(const FockBasis& basis, const std::vector<std::pair<Vertex, Vertex>>& pairs,
                     double lambda1, double lambda2, double J);

// A block of consecutive columns of a 2D torus, as a graph of its own.
struct Strip {
  std::shared_ptr<const Lattice> lattice;  // columns x rows, local index x + columns*y
  std::vector<Vertex> to_torus;            // local vertex -> torus vertex
  int first_column;
  int columns;
};
// Vertical ring edges, horizontal edges between neighbouring columns and,
// when periodize is set and columns >= 3, wrap edges closing the strip.
Strip make_strip(const Lattice& torus, int first_column, int columns, bool periodize);

struct LowEnergyStrip {
  Strip strip;
  BasisPtr basis;            // FixedN(columns * rows) on the strip
  Vec psi;                   // ground state of the periodized strip Hamiltonian
  double energy;
  double residual;
  double e1;                 // -energy / |strip|
  double e2;                 // interaction scale U
  double pair_trial_energy;  // exact <H> of the pair trial state on the strip
  double pair_formula_energy;  // |strip| * optimize_pair_params energy per site
};
LowEnergyStrip low_energy_strip(const Lattice& torus, int first_column, int columns,
                                const ModelSpec& spec, const GroundStateSettings& gs = {},
                                std::size_t max_states = 200'000);

// Places strip amplitudes on the torus; sites outside the strip take the
// fixed occupations (others_occupation[v] for torus vertex v).
Vec embed_strip(const FockBasis& full, const LowEnergyStrip& s, const std::vector<int>& fixed);
StateEnsemble low_energy_strip_state(BasisPtr full, const LowEnergyStrip& s);

struct BadStateParams {
  int R;
  int ell;
  double gamma0;
  int q;
  int ell0;
};
// Integer design: ell0 from floor(gamma0 ell), q = ell - ell0 (at least 2),
// then gamma0 = ell0/(ell-1) so the particle count is exactly R^2.
BadStateParams make_bad_state_params(int R, int ell, double gamma0_request);
void validate(const BadStateParams& p);

struct BadState {
  BadStateParams params;
  LowEnergyStrip strip;
  StateEnsemble rho;
};
// Lines of occupation q at columns 0, ell, 2ell, ...; each line followed by
// ell0 columns holding the strip ground state and ell-1-ell0 empty columns.
// The ensemble averages the state over the ell horizontal shifts.
BadState bad_state(BasisPtr basis, const BadStateParams& params, const ModelSpec& spec,
                   const GroundStateSettings& gs = {});

// P_i(n) = tr(rho Π_{n_i = n}), n = 0..max occupation.
std::vector<double> site_distribution(const StateEnsemble& rho, Vertex i);

struct MomentReport {
  Vertex site;
  double p;
  double value;                 // tr(rho n_i^p)
  std::map<int, double> tail;   // q -> tr(rho Π_{n_i >= q})
  double energy_density;        // tr(rho H)/|Λ|
};
std::vector<MomentReport> measure_moments(const StateEnsemble& rho, const SparseOperator& H,
                                          double p, const std::vector<int>& q_list);

// Every member maps under Γ(t) to a member with the same weight, up to a
// phase: |<psi_j|Γ psi_k>| >= 1 - tol.
bool translation_invariant(const StateEnsemble& rho, const Translation& t, double tol = 1e-10);
// Every member maps under Γ(t) bit-for-bit onto a member with identical weight.
bool translation_orbit_exact(const StateEnsemble& rho, const Translation& t);

}  // namespace bhlr
