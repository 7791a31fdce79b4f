#pragma once

#include <vector>

namespace bhlr {

enum class Mode { Trace, Expect };
const char* to_string(Mode m);

struct BoundParams {
  int D = 1;
  double p = 4.0;
  double Jbar = 1.0;
  double gamma = 1.0;
  int k = 1;
  double C_p = 1.0;
  int q0 = 0;
  double C = 1.0;  // calibration constant of the envelope
  bool alternate_exponent = false;
};

// Throws ConstraintError unless p > 2D+2 (trace) or p > D+1 (expect).
void check_constraint(int D, double p, Mode mode);
bool constraint_holds(int D, double p, Mode mode);

// t^{D/(p/2-D-1)} (trace) or t^{D/(p-D-1)} (expect). The alternate form
// uses D-1 in the numerator.
double velocity(double t, int D, double p, Mode mode, bool alternate_exponent = false);
// p/2-D-1 (trace) or p-D-1 (expect).
double envelope_exponent(int D, double p, Mode mode);
// C (v(t) t / R)^{envelope_exponent}.
double envelope(double t, double R, const BoundParams& params, Mode mode);

struct MomentConstant {
  double value;
  long long argmax;
  long long evaluated;  // number of n values visited
};
// max_{n >= 0} (-n^p/2 + c (n+1)^{p-eps} + 4 J D n).
MomentConstant moment_constant_detail(double J, double p, int D, double eps, double c_wtilde);
double moment_constant(double J, double p, int D, double eps, double c_wtilde);
// 2 (E_rho + C).
double moment_bound(double energy_density, double constant);

// 1 / (2^6 e^2 Jbar gamma^3 k (2k)^{2D}).
double tau0(double Jbar, double gamma, int k, int D);

struct Schedule {
  double t;
  int R;
  int r0;
  double tau0;
  long long mbar;
  double tau;
  int r;
  std::vector<int> radii;  // r0 + j r, j = 0..mbar (left empty when mbar > 1e6)
  double zeta;             // 1 + (D-1)/(p/2-D-1)
};
// mbar = ceil(t/tau0), tau = t/mbar chosen so that mbar*tau == t in floating
// point, r = floor((R-r0)/mbar).
Schedule schedule(double t, int R, int r0, double tau0, int D, double p);

// C (b r e^{-r/(4k)} + s r^{-p/2+1}) (trace) or exponent -p+1 (expect).
double short_time_envelope(double r, double boundary_size, double shell_size, double p, int k,
                           double C, Mode mode);

struct Threshold {
  double value;
  int smallest_p;  // smallest integer strictly above value
};
Threshold improvement_threshold(int D, Mode mode);

// C t^{D(1-p/q)}.
double interpolated_particle_bound(double t, double q, double p, int D, double C);

// (sum_n prob[n] |x_n|^q)^{1/q}.
double lq_norm(const std::vector<double>& prob, const std::vector<double>& x, double q);
// theta with 1/q = (1-theta)/p + theta/q1.
double lyapunov_theta(double p, double q, double q1);

}  // namespace bhlr
