// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "bhlr/experiments.hpp"

using namespace bhlr;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_seconds, const std::function<Outcome()>& f) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool in_time = secs < limit_seconds;
  bool ok = o.pass && in_time;
  failures += !ok;
  std::printf("%s  %2d  %-34s %8.2f s (limit %g s)  %s%s\n", ok ? "PASS" : "FAIL", id, name, secs,
              limit_seconds, o.detail.c_str(), in_time ? "" : "  [over time limit]");
  std::fflush(stdout);
}

const Check& check_of(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  throw std::runtime_error("report " + r.experiment + " has no check " + name);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ExperimentConfig ring(int L, int N) {
  ExperimentConfig c;
  c.lattice = {L, 1};
  c.sector.N = N;
  return c;
}

}  // namespace

int main() {
  criterion(1, "two-level dynamics", 1.0, [] {
    auto c = ring(2, 1);
    c.model.interaction = "custom_table";
    c.model.table = {0.0, 0.0};
    auto lat = make_lattice(c.lattice);
    auto b = make_basis(lat, c.sector);
    auto H = assemble(*b, make_model(c.model));
    auto rho = mott(b, {1, 0});
    auto n0 = number_operator(*b, 0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      double t = 5.0 * k / 99;
      double v = heisenberg_expectation(rho, n0, H, t).real();
      worst = std::max(worst, std::abs(v - std::cos(t) * std::cos(t)));
    }
    return Outcome{worst <= 1e-8, fmt("max |<n0(t)> - cos^2 t| = %.2e", worst)};
  });

  criterion(2, "conservation laws", 30.0, [] {
    auto c = ring(6, 4);
    c.state.preset = "random";
    c.state.seed = 21;
    c.times.clear();
    for (int k = 0; k <= 50; ++k) c.times.push_back(0.1 * k);
    auto r = conservation_audit(c);
    return Outcome{r.pass(), fmt("norm %.1e, energy %.1e, number %.1e",
                                 check_of(r, "norm_drift").value,
                                 check_of(r, "energy_drift").value,
                                 check_of(r, "number_drift").value)};
  });

  criterion(3, "moment bound", 60.0, [] {
    // Brute force of max_n (-n^4/2 + 4 J D n) with J = D = 1, c = 0.
    double brute = -std::numeric_limits<double>::infinity();
    for (int n = 0; n <= 100000; ++n) {
      double x = n;
      brute = std::max(brute, -x * x * x * x / 2.0 + 4.0 * x);
    }
    double mc = moment_constant(1.0, 4.0, 1, 1.0, 0.0);
    auto c = ring(4, 4);
    c.state.preset = "mott";
    c.times.clear();
    for (int k = 0; k < 50; ++k) c.times.push_back(5.0 * k / 49);
    auto r = moment_conservation_audit(c);
    bool constant_ok = mc == brute && r.data["moment_constant"].get<double>() == brute;
    const auto& b = check_of(r, "moment_bound");
    return Outcome{r.pass() && constant_ok,
                   fmt("sup moment %.4f <= bound %.4f; constant %.4f", b.value, b.limit, mc)};
  });

  // Criteria 4-6 share one audit run.
  Report opineq;
  double opineq_seconds = 0.0;
  {
    ExperimentConfig c;
    c.seed = 5;
    auto t0 = std::chrono::steady_clock::now();
    try {
      opineq = operator_inequality_audit(c);
    } catch (const std::exception& e) {
      opineq.experiment = "opineq";
      opineq.add("markov_tail", false, 0, 0, e.what());
      opineq.add("q0_operator_inequality", false, 0, 0, e.what());
      opineq.add("hopping_bound", false, 0, 0, e.what());
    }
    opineq_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  auto from_opineq = [&](const char* check, const char* what) {
    return [&, check, what] {
      const auto& ch = check_of(opineq, check);
      return Outcome{ch.pass, std::string(what) + fmt(" %.3e (shared audit run %.2f s)", ch.value,
                                                      opineq_seconds)};
    };
  };
  criterion(4, "Markov tails", 10.0, from_opineq("markov_tail", "min(moment/q^p - tail) ="));
  criterion(5, "q0-observable operator inequality", 60.0,
            from_opineq("q0_operator_inequality", "min eig/||RHS|| ="));
  criterion(6, "hopping bound", 30.0, from_opineq("hopping_bound", "min eig/scale ="));

  criterion(7, "Duhamel inequality", 120.0, [] {
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity(), qerr = 0.0;
    for (const char* preset : {"random", "random_mixed", "mott"}) {
      auto c = ring(5, 3);
      c.state.preset = preset;
      c.state.seed = 11;
      c.state.pattern = {1, 0, 1, 1, 0};
      auto r = duhamel_inequality_audit(c);
      ok = ok && r.pass();
      worst = std::min(worst, check_of(r, "trace_form").value);
      qerr = std::max(qerr, check_of(r, "quadrature_error").value);
    }
    return Outcome{ok, fmt("min(RHS - LHS) = %.2e, quadrature error %.1e", worst, qerr)};
  });

  criterion(8, "truncation-error trend", 120.0, [] {
    auto c = ring(6, 6);
    c.state.preset = "mott";
    c.truncation.tau = 1.0;
    c.truncation.radius = 2;
    auto r = truncation_error_audit(c);
    const auto& f = check_of(r, "decay_exponent");
    return Outcome{check_of(r, "monotone").pass && f.pass,
                   fmt("monotone; fitted exponent %.2f <= %.2f", f.value, f.limit)};
  });

  criterion(9, "light-cone leading order", 120.0, [] {
    auto c = ring(8, 4);
    c.state.preset = "random_hardcore";
    c.state.seed = 7;
    c.times = {0.0, 1.0, 2.0, 4.0};
    c.tol.krylov_tolerance = 1e-14;
    c.lightcone.distances = {1, 2, 3, 4};
    c.lightcone.trace_norm = true;
    c.lightcone.slope_distances = {2, 3};
    auto r = lightcone_audit(c);
    bool ok = check_of(r, "points_evaluated").pass && check_of(r, "slope_d2").pass &&
              check_of(r, "slope_d3").pass && check_of(r, "trace_norm_dominates").pass;
    return Outcome{ok, fmt("slopes %.3f (d=2), %.3f (d=3); min(trace - |exp|) = %.1e",
                           check_of(r, "slope_d2").value, check_of(r, "slope_d3").value,
                           check_of(r, "trace_norm_dominates").value)};
  });

  criterion(10, "pair-state optimization", 1.0, [] {
    double worst = 0.0;
    const int n = 200000;
    for (double U : {0.5, 1.0, 2.0, 4.0, 8.0})
      for (double J : {-1.5, -0.3, 0.1, 0.7, 2.0}) {
        // Grid search on the constraint curve lambda1^2 + 2 lambda2^2 = 1.
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k) {
          double th = -M_PI + 2.0 * M_PI * k / n;
          best = std::min(best, pair_objective(J, U, std::cos(th), std::sin(th) / std::sqrt(2.0)));
        }
        double T1 = std::abs(J) / U;
        double formula = 0.5 * U * (1.0 - std::sqrt(1.0 + 2.0 * T1 * T1));
        worst = std::max(worst, std::abs(best - formula));
      }
    return Outcome{worst <= 1e-6, fmt("max |grid - formula| = %.2e", worst)};
  });

  criterion(11, "bad-state audit", 120.0, [] {
    ExperimentConfig c;
    c.model.interaction = "power_p_shifted";
    c.badstate = {3, 3, 0.4};
    auto r = badstate_audit(c);
    bool ok = check_of(r, "translation_orbit").pass && check_of(r, "particle_design").pass &&
              check_of(r, "particle_number").pass && check_of(r, "tail_at_q").pass;
    return Outcome{ok, fmt("min tail at q = %.6f >= 1/ell = %.6f", check_of(r, "tail_at_q").value,
                           check_of(r, "tail_at_q").limit)};
  });

  criterion(12, "formula checks", 1.0, [] {
    int p2 = improvement_threshold(2, Mode::Expect).smallest_p;
    int p3 = improvement_threshold(3, Mode::Expect).smallest_p;
    double t0 = tau0(1.0, 1.0, 1, 1);
    bool tau_ok = std::abs(t0 - 1.0 / (256.0 * std::exp(2.0))) <= 1e-12;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad = 0;
    for (int k = 0; k < 100; ++k) {
      double t = std::pow(10.0, 4.0 * u(rng));
      int R = 2 + static_cast<int>(9998 * u(rng));
      int D = 1 + k % 3;
      double tz = tau0(0.5 + 1.5 * u(rng), 1.0 + 3.0 * u(rng), 1, D);
      auto s = schedule(t, R, 1, tz, D, 2.0 * D + 4.0);
      double ulp = std::nextafter(t, INFINITY) - t;
      bad += !(std::abs(double(s.mbar) * s.tau - t) <= ulp && s.tau <= tz);
    }
    return Outcome{p2 == 6 && p3 == 6 && tau_ok && bad == 0,
                   fmt("smallest p: %g (D=2), %g (D=3); schedule violations %g", p2, p3, bad)};
  });

  criterion(13, "interpolation audit", 5.0, [] {
    ExperimentConfig c;
    c.seed = 13;
    auto r = interpolation_audit(c);
    return Outcome{r.pass(), fmt("min(RHS - LHS) = %.2e over 100 samples; bound(q=p) = %g",
                                 check_of(r, "lyapunov").value,
                                 check_of(r, "bound_at_q_equals_p").value)};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
