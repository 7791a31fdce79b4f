#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bhlr/bounds.hpp"
#include "bhlr/hamiltonian.hpp"
#include "bhlr/propagator.hpp"
#include "bhlr/states.hpp"

namespace bhlr {

struct LatticeConfig {
  int L = 6;
  int D = 1;
};

struct SectorConfig {
  std::string kind = "fixed";  // fixed | capped
  int N = 4;                   // particles (fixed)
  int n_max = 2;               // per-site cap (capped)
};

struct ModelConfig {
  double J = 1.0;
  std::string interaction = "power_p";  // power_p | power_p_shifted | custom_table
  double p = 4.0;
  double U = 1.0;
  double mu = 0.0;
  std::vector<double> table;  // custom_table only
};

struct StateConfig {
  // mott | random | random_hardcore | random_mixed | strip_superposition
  std::string preset = "mott";
  int fill = 1;
  std::vector<int> pattern;  // mott with an explicit occupation pattern
  int members = 3;           // random_mixed
  unsigned long long seed = 1;
};

struct ObservableConfig {
  // empty_site: Π_{n_i=0}; number_truncated: n_i Π_{n_i<=cutoff}; phase: exp(i phi n_i)
  std::string preset = "empty_site";
  int site = 0;
  int cutoff = 2;
  double phase = 0.5;
};

struct Tolerances {
  int krylov_dim = 30;
  double krylov_tolerance = 1e-10;
  std::size_t dense_threshold = kDefaultDenseThreshold;
  double norm_drift = 1e-9;
  double energy_drift = 1e-8;
  double number_drift = 1e-10;
  double quadrature = 1e-6;
  double psd = 1e-9;
  double slope = 0.3;
  double floor = 1e-12;  // absolute level treated as round-off
};

struct LightconeConfig {
  std::vector<int> distances{1, 2, 3};
  bool trace_norm = false;
  bool calibrate = true;
  double envelope_C = 1.0;  // used when calibrate is off
  // Small-t window for the slope fit; slopes are checked for slope_distances.
  double fit_t_min = 1e-3;
  double fit_t_max = 1e-2;
  int fit_points = 10;
  std::vector<int> slope_distances;
};

struct MomentsConfig {
  std::vector<int> q_list{1, 2, 3, 4};
};

struct TruncationConfig {
  int center = 0;
  int radius = 2;
  double tau = 1.0;
  std::vector<int> qbar;  // empty: 1..N
  double decay_slack = 0.5;
};

struct DuhamelConfig {
  int center = 0;
  int radius = 2;
  std::vector<int> qbar{1, 2, 3};
  std::vector<double> tau_fractions{0.25, 0.5, 1.0};  // multiples of tau0
  std::vector<double> taus;                           // absolute, overrides fractions
};

struct OpineqConfig {
  int instances = 50;
  int max_sites = 3;
  int max_m = 3;
  std::size_t max_dim = 500;
  int hop_max_N = 12;  // hopping bound: rings L = 2..4, N = 1..hop_max_N
  int markov_states = 200;
  int markov_L = 4;
  int markov_N = 6;
  int markov_q_max = 6;
  std::vector<double> markov_p{2.0, 4.0};
};

struct BadstateConfig {
  int R = 3;
  int ell = 3;
  double gamma0 = 0.4;
};

struct InterpConfig {
  int samples = 100;
};

struct BoundsConfig {
  std::vector<double> t{1.0, 10.0, 100.0};
  std::vector<int> R{10, 100};
  int r0 = 1;
};

struct ExperimentConfig {
  LatticeConfig lattice;
  SectorConfig sector;
  ModelConfig model;
  StateConfig state;
  ObservableConfig O;
  ObservableConfig Otilde;
  std::vector<double> times{0.0, 0.5, 1.0, 2.0};
  Tolerances tol;
  unsigned long long seed = 1;
  LightconeConfig lightcone;
  MomentsConfig moments;
  TruncationConfig truncation;
  DuhamelConfig duhamel;
  OpineqConfig opineq;
  BadstateConfig badstate;
  InterpConfig interp;
  BoundsConfig bounds;

  // Throws ConfigError with the offending field path.
  void validate() const;
  PropagatorSettings propagator() const;
};

std::shared_ptr<const Lattice> make_lattice(const LatticeConfig& c);
BasisPtr make_basis(std::shared_ptr<const Lattice> lat, const SectorConfig& c);
ModelSpec make_model(const ModelConfig& c);
StateEnsemble make_state(BasisPtr basis, const StateConfig& c);
// The preset placed on `site`; verified to be a q0-observable supported on {site}.
SparseOperator make_observable(const FockBasis& basis, const ObservableConfig& c, Vertex site);

struct ScanRecord {
  double t;
  int R;
  double value;  // |tr(rho [O(t), Otilde])|, NaN when the point failed
  std::optional<double> trace_norm;
  std::optional<double> envelope_trace;
  std::optional<double> envelope_expect;
  double wall_seconds = 0.0;
  std::string error;
};

struct Check {
  std::string name;
  bool pass;
  double value;  // measured quantity (worst case)
  double limit;  // threshold it is compared against
  std::string detail;
  // Diagnostics that can miss without an implementation error (shape tests
  // with a calibrated constant) are reported but do not decide pass().
  bool gating = true;
};

struct Report {
  std::string experiment;
  std::vector<Check> checks;
  std::vector<ScanRecord> records;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();

  bool pass() const;
  void add(std::string name, bool pass, double value, double limit, std::string detail = {});
  void add_diagnostic(std::string name, bool pass, double value, double limit,
                      std::string detail = {});
  nlohmann::ordered_json to_json() const;
  // Aligned-column summary for terminals.
  std::string text() const;
};

struct PowerFit {
  double exponent;
  double intercept;
  double residual;  // rms of the log-space residuals
};
// Least squares on (log x, log y). Needs >= 3 points, all positive.
PowerFit fit_power_law(const std::vector<std::pair<double, double>>& points);

// Vertex of smallest index at graph distance d from i.
Vertex vertex_at_distance(const Lattice& lat, Vertex i, int d);

std::vector<ScanRecord> lightcone_scan(const ExperimentConfig& cfg);
// Scan plus slope fits, trace-norm dominance and envelope calibration.
Report lightcone_audit(const ExperimentConfig& cfg);
// Norm, energy and particle-number drift along the configured time grid.
Report conservation_audit(const ExperimentConfig& cfg);
Report moment_conservation_audit(const ExperimentConfig& cfg);
Report truncation_error_audit(const ExperimentConfig& cfg);
Report duhamel_inequality_audit(const ExperimentConfig& cfg);
Report operator_inequality_audit(const ExperimentConfig& cfg);
Report badstate_audit(const ExperimentConfig& cfg);
Report interpolation_audit(const ExperimentConfig& cfg);
// Evaluator table (velocity, thresholds, tau0, schedules, moment constant).
Report bounds_table(const ExperimentConfig& cfg);

// Appended to every report: audited inequalities are theorems.
extern const char* const kTheoremNote;

}  // namespace bhlr
