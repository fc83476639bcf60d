#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kslab/diagnostics.hpp"
#include "kslab/dynamics.hpp"
#include "kslab/motility.hpp"

namespace kslab {

/// w = (I - L)^-1 u.
Field compute_w(const LinOp& op, const Field& u, double tol, SolverKind kind = SolverKind::Direct);

/// || (w+ - w)/dt + g u+ - (I - L)^-1 [g u+] ||_inf with g = gamma(v).
/// Pass v^n for the scheme's frozen convention.
double key_identity_residual(const Field& w, const Field& w_next, const Field& u_next, const Field& v, double dt,
                             const MotilityFamily& gamma, const LinOp& op, double tol);

struct EnergyTerms {
  double energy = 0.0;       // sum w u h^d
  double dissipation = 0.0;  // sum u^2 gamma(v) h^d
};
EnergyTerms energy_h1(const Field& w, const Field& u, const Field& v, const MotilityFamily& gamma);
EnergyTerms energy_h1(const LinOp& op, const Field& u, const Field& v, const MotilityFamily& gamma, double tol);

/// Gamma(s) = int_1^s eta^-l d eta.
double gamma_big(double s, double l);

enum class Verdict { Bounded, Growing, Inconclusive };
std::string_view to_string(Verdict v);

struct ClassifyThresholds {
  double bounded_variation = 0.05;
  double bounded_slope = 1e-3;
  double growing_slope = 1e-2;
  double monotone_fraction = 0.9;
  int min_records = 16;

  bool operator==(const ClassifyThresholds&) const = default;
};

struct Classification {
  Verdict verdict = Verdict::Inconclusive;
  double log_slope = 0.0;          // least-squares d log(series) / dt on the trailing half
  double monotone_fraction = 0.0;  // share of non-decreasing consecutive pairs
  double variation = 0.0;          // (max - min) / (max + min)
  int window = 0;
  std::string note;
};

/// Trailing-half classification of a positive series.
Classification classify_run(std::span<const double> t, std::span<const double> series,
                            const ClassifyThresholds& th = {});
Classification classify_run(const RunDiagnostics& d, const ClassifyThresholds& th = {});

/// Least-squares slope of y against t.
double fit_slope(std::span<const double> t, std::span<const double> y);

struct LadderLevel {
  double p = 0.0;
  double sup = 0.0;
  double slope = 0.0;  // log-slope over the trailing half
  bool passes = false;
};

struct LadderReport {
  std::vector<LadderLevel> levels;
  bool inconclusive = false;  // too few records
  bool all_pass = false;
};

/// Levels p = 2^k, k = 1..K (K <= 8).
LadderReport lp_ladder(const RunDiagnostics& d, int K, double slope_tol = 1e-3);

struct RatioReport {
  double a_est = 0.0;
  double b_est = 0.0;
  double trend = 0.0;  // d max(v/w) / dt over the trailing half of the burned-in records
  int records = 0;
};

RatioReport two_sided_ratio(const RunDiagnostics& d, double burn_in = 1.0);

struct EnvelopeCheckReport {
  double max_excess = 0.0;  // max over records of  w_growth / exp(gamma_obs t) - 1
  double gamma_obs = 0.0;
  bool holds = false;
};

/// w <= w0 exp(gamma_obs t) (1 + slack) at every record.
EnvelopeCheckReport envelope_check(const RunDiagnostics& d, double slack = 1e-6);

struct EnergyInequalityReport {
  double c_fit = 0.0;                 // max ratio over the calibration pairs
  double max_validation_ratio = 0.0;  // max ratio over the remaining pairs
  int calibration_pairs = 0;
  int validation_pairs = 0;
  bool holds = false;
};

/// Per record pair: (dE/dt + E + dissipation) / sum(w^2 / gamma(v)) h^d. The
/// constant is fitted on the first `calibration_fraction` of pairs and must
/// bound the rest within the factor `slack`.
EnergyInequalityReport energy_inequality_check(const RunDiagnostics& d, double calibration_fraction = 0.25,
                                               double slack = 2.0);

struct KeyInequalityReport {
  double k = 0.0, l = 0.0;
  double c1 = 0.0, c2 = 0.0;  // envelope c1 s^-k <= gamma <= c2 s^-l on the observed v range
  double a_est = 0.0, b_est = 0.0;
  double c3_calibration = 0.0;
  double c3_full = 0.0;
  int calibration_records = 0;
  int full_records = 0;
  bool stable = false;
  std::string note;
};

/// Fits C3 >= 0 in  w_t + c1 B^-k w^-k u <= c2 A^-l (Gamma(w) + C3)  over the
/// stored field records after burn-in. Needs keep_fields. Throws ConfigError
/// when the envelope does not hold for (k, l).
KeyInequalityReport key_inequality_check(const RunDiagnostics& d, const MotilityFamily& gamma, double k, double l,
                                         double calibration_fraction = 0.25, double burn_in = 1.0);

/// log( sum exp(R z) h^d ),  z = (I - L)^-1 f.
double exp_integral_log(const LinOp& op, const Field& f, double R, double tol);

struct BrezisMerleReport {
  double lambda = 0.0, R = 0.0, width = 0.0;
  int n = 0;
  double log_coarse = 0.0;  // log of the integral at n x n
  double log_fine = 0.0;    // and at 2n x 2n
  double relative_change = 0.0;
};

/// Unit square, centered Gaussian f of mass lambda. width <= 0 means sigma = h
/// at each resolution (near-Dirac family).
BrezisMerleReport brezis_merle_check(double lambda, double R, double width, int n, double tol = 1e-10);

/// One step of the direct scheme (I - dt L D) u+ = u against the face-averaged
/// flux form  div(gamma grad u + u gamma' grad v), both with v frozen.
/// Returns ||u_direct - u_flux||_inf.
double flux_form_crosscheck(const LinOp& op, const MotilityFamily& gamma, const State& s, double dt);

}  // namespace kslab
