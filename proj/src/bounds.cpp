#include "bhlr/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bhlr/error.hpp"

namespace bhlr {

const char* to_string(Mode m) { return m == Mode::Trace ? "trace" : "expect"; }

bool constraint_holds(int D, double p, Mode mode) {
  return mode == Mode::Trace ? p > 2.0 * D + 2.0 : p > D + 1.0;
}

void check_constraint(int D, double p, Mode mode) {
  if (D < 1) throw ConstraintError("dimension D must be >= 1");
  if (!constraint_holds(D, p, mode))
    throw ConstraintError(std::string(to_string(mode)) + " mode requires p > " +
                          (mode == Mode::Trace ? "2D+2" : "D+1") + " (D=" + std::to_string(D) +
                          ", p=" + std::to_string(p) + ")");
}

double envelope_exponent(int D, double p, Mode mode) {
  check_constraint(D, p, mode);
  return mode == Mode::Trace ? p / 2.0 - D - 1.0 : p - D - 1.0;
}

double velocity(double t, int D, double p, Mode mode, bool alternate_exponent) {
  double e = envelope_exponent(D, p, mode);
  double num = alternate_exponent ? D - 1.0 : static_cast<double>(D);
  return std::pow(t, num / e);
}

double envelope(double t, double R, const BoundParams& params, Mode mode) {
  if (!(R > 0.0)) throw std::invalid_argument("envelope distance must be positive");
  double v = velocity(t, params.D, params.p, mode, params.alternate_exponent);
  return params.C * std::pow(v * t / R, envelope_exponent(params.D, params.p, mode));
}

MomentConstant moment_constant_detail(double J, double p, int D, double eps, double c_wtilde) {
  if (!(p > 1.0)) throw std::invalid_argument("moment constant needs p > 1");
  if (!(eps > 0.0)) throw std::invalid_argument("moment constant needs eps > 0");
  auto positive = [&](double n) { return c_wtilde * std::pow(n + 1.0, p - eps) + 4.0 * J * D * n; };
  auto f = [&](double n) { return -std::pow(n, p) / 2.0 + positive(n); };
  constexpr long long cap = 1'000'000;
  MomentConstant best{f(0.0), 0, 1};
  double prev = best.value;
  int decreases = 0;
  for (long long n = 1; n <= cap; ++n) {
    double v = f(static_cast<double>(n));
    best.evaluated = n + 1;
    if (v > best.value) {
      best.value = v;
      best.argmax = n;
    }
    decreases = v < prev ? decreases + 1 : 0;
    prev = v;
    bool dominated = std::pow(static_cast<double>(n), p) / 2.0 > positive(static_cast<double>(n));
    if (dominated && decreases >= 3) break;
  }
  return best;
}

double moment_constant(double J, double p, int D, double eps, double c_wtilde) {
  return moment_constant_detail(J, p, D, eps, c_wtilde).value;
}

double moment_bound(double energy_density, double constant) {
  return 2.0 * (energy_density + constant);
}

double tau0(double Jbar, double gamma, int k, int D) {
  if (!(Jbar > 0.0) || !(gamma > 0.0) || k < 1 || D < 1)
    throw std::invalid_argument("tau0 needs positive arguments");
  constexpr double e2 = std::numbers::e * std::numbers::e;
  return 1.0 / (64.0 * e2 * Jbar * gamma * gamma * gamma * k * std::pow(2.0 * k, 2.0 * D));
}

Schedule schedule(double t, int R, int r0, double tau0_value, int D, double p) {
  if (!(t >= 1.0)) throw std::invalid_argument("schedule needs t >= 1");
  if (R <= r0) throw std::invalid_argument("schedule needs R > r0");
  if (!(tau0_value > 0.0)) throw std::invalid_argument("schedule needs tau0 > 0");
  Schedule s;
  s.t = t;
  s.R = R;
  s.r0 = r0;
  s.tau0 = tau0_value;
  s.mbar = static_cast<long long>(std::ceil(t / tau0_value));
  double m = static_cast<double>(s.mbar);
  // Nearest double to t/mbar whose product with mbar is exactly t.
  double base = t / m;
  s.tau = base;
  double down = base, up = base;
  for (int step = 0; step < 64; ++step) {
    if (down * m == t && down <= tau0_value) {
      s.tau = down;
      break;
    }
    if (up * m == t && up <= tau0_value) {
      s.tau = up;
      break;
    }
    down = std::nextafter(down, 0.0);
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
  }
  if (s.tau > tau0_value) s.tau = tau0_value;
  s.r = static_cast<int>((R - r0) / s.mbar);
  if (s.mbar <= 1'000'000)
    for (long long j = 0; j <= s.mbar; ++j) s.radii.push_back(static_cast<int>(r0 + j * s.r));
  double e = p / 2.0 - D - 1.0;
  s.zeta = e > 0.0 ? 1.0 + (D - 1.0) / e : std::numeric_limits<double>::quiet_NaN();
  return s;
}

double short_time_envelope(double r, double boundary_size, double shell_size, double p, int k,
                           double C, Mode mode) {
  if (!(r >= 1.0)) throw std::invalid_argument("short-time envelope needs r >= 1");
  double poly = mode == Mode::Trace ? -p / 2.0 + 1.0 : -p + 1.0;
  return C * (boundary_size * r * std::exp(-r / (4.0 * k)) + shell_size * std::pow(r, poly));
}

Threshold improvement_threshold(int D, Mode mode) {
  if (D < 2) throw std::invalid_argument("improvement threshold needs D >= 2");
  // threshold = num / (D-1) exactly; smallest integer p with p (D-1) > num.
  long long num = mode == Mode::Trace ? (2LL * D + 2) * (D - 1) + 2LL * D
                                      : (D + 1LL) * (D - 1) + D;
  Threshold th;
  th.value = static_cast<double>(num) / (D - 1);
  th.smallest_p = static_cast<int>(num / (D - 1) + 1);
  return th;
}

double interpolated_particle_bound(double t, double q, double p, int D, double C) {
  if (!(q >= p)) throw std::invalid_argument("interpolated bound needs q >= p");
  if (!(t >= 1.0)) throw std::invalid_argument("interpolated bound needs t >= 1");
  if (q == p) return C;
  return C * std::pow(t, D * (1.0 - p / q));
}

double lq_norm(const std::vector<double>& prob, const std::vector<double>& x, double q) {
  if (prob.size() != x.size()) throw std::invalid_argument("distribution size mismatch");
  if (!(q > 0.0)) throw std::invalid_argument("norm exponent must be positive");
  double s = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n)
    if (prob[n] > 0.0 && x[n] != 0.0) s += prob[n] * std::pow(std::abs(x[n]), q);
  return std::pow(s, 1.0 / q);
}

double lyapunov_theta(double p, double q, double q1) {
  if (!(p <= q && q <= q1) || !(p > 0.0)) throw std::invalid_argument("need 0 < p <= q <= q1");
  if (p == q1) return 0.0;
  return (1.0 / p - 1.0 / q) / (1.0 / p - 1.0 / q1);
}

}  // namespace bhlr
