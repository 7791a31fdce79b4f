#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "bhlr/error.hpp"
#include "bhlr/experiments.hpp"
#include "bhlr/parallel.hpp"
#include "doctest.h"

using namespace bhlr;

namespace {

Mat expm_oracle(const Mat& H, double t) { return Mat(Complex(0, -t) * H).exp(); }

const Check& find(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  FAIL("missing check " << name);
  throw std::logic_error("unreachable");
}

ExperimentConfig ring_config(int L, int N, const std::string& state) {
  ExperimentConfig c;
  c.lattice = {L, 1};
  c.sector.N = N;
  c.state.preset = state;
  c.state.seed = 3;
  return c;
}

// Π̄ built from occupations directly.
Mat truncation_projector(const FockBasis& b, const VertexSet& Xt, int qbar) {
  Mat P = Mat::Zero(b.size(), b.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    bool keep = true;
    for (Vertex i : Xt) keep = keep && b.occupation(k, i) <= qbar;
    P(k, k) = keep ? 1.0 : 0.0;
  }
  return P;
}

}  // namespace

TEST_CASE("power-law fit") {
  std::vector<std::pair<double, double>> sq, flat, noisy;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  for (double x : {0.5, 1.0, 2.0, 3.0, 5.0, 8.0}) {
    sq.emplace_back(x, x * x);
    flat.emplace_back(x, 4.2);
    noisy.emplace_back(x, x * x * x * (1.0 + u(rng)));
  }
  CHECK(fit_power_law(sq).exponent == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit_power_law(sq).residual < 1e-12);
  CHECK(std::abs(fit_power_law(flat).exponent) < 1e-12);
  CHECK(std::abs(fit_power_law(noisy).exponent - 3.0) < 0.01);
  CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, 0.0}, {3.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("config validation names the field") {
  ExperimentConfig c;
  c.times.clear();
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "times");
  }
  c = ExperimentConfig{};
  c.lightcone.distances = {1, -2};
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "lightcone.distances[1]");
  }
  c = ExperimentConfig{};
  c.model.interaction = "cubic";
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("observable presets are local q0 = 0 operators") {
  auto lat = make_lattice({5, 1});
  auto b = make_basis(lat, {"fixed", 3, 2});
  for (const char* preset : {"empty_site", "number_truncated", "phase"}) {
    ObservableConfig oc;
    oc.preset = preset;
    oc.cutoff = 1;
    auto O = make_observable(*b, oc, 2);
    CHECK(observable_q0(O, *b, make_set({2})) == 0);
    for (std::size_t k = 0; k < b->size(); ++k) {
      int n = b->occupation(k, 2);
      Complex expect = std::string(preset) == "empty_site" ? Complex(n == 0)
                       : std::string(preset) == "number_truncated" ? Complex(n <= 1 ? n : 0)
                                                                  : std::polar(1.0, 0.5 * n);
      CHECK(std::abs(O.at(k, k) - expect) < 1e-15);
    }
  }
  CHECK_THROWS_AS(make_observable(*b, {}, 7), ConfigError);
}

TEST_CASE("light-cone scan") {
  auto c = ring_config(6, 3, "random_hardcore");
  c.times = {0.0, 0.3, 1.0, 2.0};
  c.lightcone.distances = {1, 2, 3};
  c.lightcone.trace_norm = true;
  c.tol.krylov_tolerance = 1e-13;
  auto recs = lightcone_scan(c);
  REQUIRE(recs.size() == 12);
  // Canonical order: time major, distance minor.
  CHECK(recs[0].t == 0.0);
  CHECK(recs[1].R == 2);
  CHECK(recs[3].t == 0.3);
  for (const auto& r : recs) {
    CHECK(r.error.empty());
    CHECK(r.value >= 0.0);
    REQUIRE(r.trace_norm);
    CHECK(*r.trace_norm >= r.value - 1e-12);
    if (r.t == 0.0) CHECK(r.value == 0.0);
    CHECK_FALSE(r.envelope_trace);  // p = 4 is not above 2D+2
    CHECK(r.envelope_expect);
  }
  // Front arrival at short distance.
  CHECK(recs[6].t == 1.0);
  CHECK(recs[6].R == 1);
  CHECK(recs[6].value > 1e-3);

  // Dense oracle for one point.
  auto lat = make_lattice(c.lattice);
  auto b = make_basis(lat, c.sector);
  Mat H = assemble(*b, make_model(c.model)).to_dense();
  Mat O = projector_eq(*b, 0, 0).to_dense(), Ot = projector_eq(*b, 2, 0).to_dense();
  Vec psi = random_hardcore_state(*b, 3);
  Mat U = expm_oracle(H, 1.0);
  Mat Ott = U.adjoint() * O * U;
  Complex ref = psi.dot((Ott * Ot - Ot * Ott) * psi);
  CHECK(recs[7].R == 2);
  CHECK(recs[7].value == doctest::Approx(std::abs(ref)).epsilon(1e-9));
}

TEST_CASE("scan output does not depend on the worker count") {
  auto c = ring_config(6, 3, "random_mixed");
  c.times = {0.5, 1.5, 3.0};
  c.lightcone.trace_norm = true;
  set_worker_count(1);
  auto a = lightcone_scan(c);
  set_worker_count(3);
  auto b = lightcone_scan(c);
  set_worker_count(1);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].t == b[k].t);
    CHECK(a[k].R == b[k].R);
    CHECK(a[k].value == b[k].value);
    CHECK(*a[k].trace_norm == *b[k].trace_norm);
    CHECK(*a[k].envelope_expect == *b[k].envelope_expect);
  }
}

TEST_CASE("light-cone audit slopes") {
  auto c = ring_config(8, 4, "random_hardcore");
  c.state.seed = 7;
  c.times = {0.0};
  c.lightcone.distances = {2, 3};
  c.lightcone.slope_distances = {2, 3};
  c.tol.krylov_tolerance = 1e-14;
  auto r = lightcone_audit(c);
  CHECK(find(r, "slope_d2").pass);
  CHECK(find(r, "slope_d3").pass);
  CHECK(r.pass());
}

TEST_CASE("moment audit") {
  SUBCASE("bound holds on the Mott recipe") {
    auto c = ring_config(4, 4, "mott");
    c.times.clear();
    for (int k = 0; k < 50; ++k) c.times.push_back(5.0 * k / 49);
    auto r = moment_conservation_audit(c);
    CHECK(r.pass());
    // Mott state at unit filling: E_rho = 1, C = 3.5 (J = 1, D = 1, p = 4).
    CHECK(r.data["energy_density"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.data["bound"].get<double>() == doctest::Approx(9.0).epsilon(1e-12));
  }
  SUBCASE("J = 0 keeps moments constant") {
    auto c = ring_config(4, 8, "mott");
    c.state.fill = 2;
    c.model.J = 0.0;
    c.times = {0.0, 1.0, 3.0};
    auto r = moment_conservation_audit(c);
    for (const auto& s : r.data["samples"])
      CHECK(s["sup_moment"].get<double>() == doctest::Approx(16.0).epsilon(1e-12));
  }
  SUBCASE("preconditions") {
    auto c = ring_config(4, 4, "random");
    CHECK_THROWS_AS(moment_conservation_audit(c), ConstraintError);
    c = ring_config(4, 4, "mott");
    c.model.U = 2.0;
    CHECK_THROWS_AS(moment_conservation_audit(c), ConstraintError);
  }
}

TEST_CASE("conservation audit") {
  auto c = ring_config(6, 4, "random");
  c.times = {0.0, 1.0, 2.5, 5.0};
  auto r = conservation_audit(c);
  CHECK(r.pass());
  CHECK(find(r, "energy_drift").value <= 1e-8);
}

TEST_CASE("truncation audit") {
  auto c = ring_config(5, 4, "mott");
  c.state.pattern = {1, 1, 1, 1, 0};
  c.truncation.tau = 0.7;
  c.truncation.qbar = {1, 2, 3, 4};
  auto r = truncation_error_audit(c);
  CHECK(find(r, "monotone").pass);
  CHECK(find(r, "exact_when_untruncated").pass);
  auto rows = r.data["errors"];
  CHECK(rows[3]["trace_error"].get<double>() == 0.0);

  // Oracle for qbar = 1 with an independently built Π̄ H Π̄.
  auto lat = make_lattice(c.lattice);
  auto b = make_basis(lat, c.sector);
  Mat H = assemble(*b, make_model(c.model)).to_dense();
  Mat P = truncation_projector(*b, make_set({2, 3}), 1);
  Mat Ht = P * H * P;
  Mat O = projector_eq(*b, 0, 0).to_dense();
  Mat rho = mott(b, {1, 1, 1, 1, 0}).density_matrix();
  Mat U = expm_oracle(H, 0.7), Ut = expm_oracle(Ht, 0.7);
  Mat D = (U.adjoint() * O * U - Ut.adjoint() * O * Ut) * rho;
  CHECK(rows[0]["trace_error"].get<double>() ==
        doctest::Approx(Eigen::BDCSVD<Mat>(D).singularValues().sum()).epsilon(1e-8));
}

TEST_CASE("Duhamel audit") {
  SUBCASE("random instances") {
    for (const char* st : {"random", "random_mixed"}) {
      auto c = ring_config(5, 3, st);
      auto r = duhamel_inequality_audit(c);
      CHECK(r.pass());
      for (const auto& p : r.data["points"]) {
        for (const auto& t : p["terms_trace"]) CHECK(t.get<double>() >= 0.0);
        for (const auto& t : p["terms_expect"]) CHECK(t.get<double>() >= 0.0);
      }
    }
  }
  SUBCASE("untruncated annulus gives zero on both sides") {
    auto c = ring_config(5, 3, "random");
    c.duhamel.qbar = {3};
    auto r = duhamel_inequality_audit(c);
    for (const auto& p : r.data["points"]) {
      CHECK(p["lhs_trace"].get<double>() == 0.0);
      CHECK(p["rhs_trace"].get<double>() == 0.0);
      CHECK(p["rhs_expect"].get<double>() == 0.0);
    }
    CHECK(r.pass());
  }
  SUBCASE("LHS and a Frobenius term against dense oracles") {
    auto c = ring_config(5, 3, "random");
    c.duhamel.qbar = {1};
    c.duhamel.taus = {0.05};
    auto r = duhamel_inequality_audit(c);
    auto p = r.data["points"][0];
    auto lat = make_lattice(c.lattice);
    auto b = make_basis(lat, c.sector);
    Mat H = assemble(*b, make_model(c.model)).to_dense();
    Mat P = truncation_projector(*b, make_set({2, 3}), 1);
    Mat Ht = P * H * P;
    Mat O = projector_eq(*b, 0, 0).to_dense();
    Vec psi = random_state(*b, 3);
    Mat rho = psi * psi.adjoint();
    Mat U = expm_oracle(H, 0.05), Ut = expm_oracle(Ht, 0.05);
    Mat D = (U.adjoint() * O * U - Ut.adjoint() * O * Ut) * rho;
    CHECK(p["lhs_trace"].get<double>() ==
          doctest::Approx(Eigen::BDCSVD<Mat>(D).singularValues().sum()).epsilon(1e-8));
    // ||Π^c sqrt(rho)||_F^2 = tr(Π^c rho).
    Mat Pc = Mat::Identity(b->size(), b->size()) - P;
    double T3 = std::sqrt((Pc * rho).trace().real());
    CHECK(p["terms_trace"][2].get<double>() == doctest::Approx(T3).epsilon(1e-12));
    CHECK(p["quadrature_error_trace"].get<double>() <= 1e-6);
  }
}

TEST_CASE("operator inequality audit") {
  ExperimentConfig c;
  c.opineq.instances = 12;
  c.opineq.max_dim = 125;
  c.opineq.hop_max_N = 5;
  c.opineq.markov_states = 6;
  auto r = operator_inequality_audit(c);
  CHECK(r.pass());
  auto first = r.data["psd_instances"][0];
  CHECK(first["m"] == 1);  // identity instance
  CHECK(first["q0"] == 0);
}

TEST_CASE("bad state audit") {
  ExperimentConfig c;
  c.model.interaction = "power_p_shifted";
  auto r = badstate_audit(c);
  CHECK(find(r, "translation_orbit").pass);
  CHECK(find(r, "particle_number").pass);
  CHECK(find(r, "tail_at_q").pass);
  CHECK(find(r, "tail_at_q").value >= 1.0 / 3.0);
  CHECK(r.pass());
}

TEST_CASE("interpolation audit and bounds table") {
  ExperimentConfig c;
  auto r = interpolation_audit(c);
  CHECK(r.pass());
  CHECK(find(r, "bound_at_q_equals_p").pass);
  auto b = bounds_table(c);
  CHECK(b.pass());
  CHECK(b.data["improvement_thresholds"].size() == 4);
}

TEST_CASE("report serialization") {
  Report r;
  r.experiment = "demo";
  r.add("a", true, 1.0, 2.0);
  r.add_diagnostic("b", false, 3.0, 2.0);
  CHECK(r.pass());
  r.add("c", false, 0.0, 1.0, "broken");
  CHECK_FALSE(r.pass());
  auto j = r.to_json();
  CHECK(j["pass"] == false);
  CHECK(j["checks"].size() == 3);
  CHECK(j["checks"][1]["gating"] == false);
  CHECK(r.text().find("FAIL") != std::string::npos);
}
