#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace kslab {

enum class MotilityKind {
  Exponential,           // exp(-chi s)
  StretchedExponential,  // exp(-s^alpha), 0 < alpha < 1
  Algebraic,             // s^-k
  AlgebraicLog,          // s^-k1 log^-k2(1+s)
  BoundedOscillatory,    // a + b sin(omega s)
  PeakedNonMonotonic,    // c + M / (1 + ((s - s0)/sigma)^2)
};

std::string_view to_string(MotilityKind kind);
MotilityKind parse_motility_kind(std::string_view name);

/// Family-specific parameters. Only the fields belonging to the family's kind
/// are meaningful; the rest stay at zero so that equality comparison is exact.
struct MotilityParams {
  double chi = 0.0;
  double alpha = 0.0;
  double k = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double a = 0.0;
  double b = 0.0;
  double omega = 0.0;
  double c = 0.0;
  double m = 0.0;
  double s0 = 0.0;
  double sigma = 0.0;

  bool operator==(const MotilityParams&) const = default;
};

/// A signal-dependent motility function gamma(s) together with its analytic
/// derivative. Immutable after construction; safe to share between runs.
class MotilityFamily {
 public:
  MotilityFamily(MotilityKind kind, MotilityParams params);

  static MotilityFamily exponential(double chi);
  static MotilityFamily stretched_exponential(double alpha);
  static MotilityFamily algebraic(double k);
  static MotilityFamily algebraic_log(double k1, double k2);
  static MotilityFamily bounded_oscillatory(double a, double b, double omega);
  static MotilityFamily peaked(double c, double m, double s0, double sigma);

  MotilityKind kind() const noexcept { return kind_; }
  const MotilityParams& params() const noexcept { return params_; }

  /// gamma(s); throws DomainError for s <= 0 (or non-finite s).
  double operator()(double s) const;
  /// gamma'(s).
  double derivative(double s) const;
  /// log gamma(s), finite even where gamma underflows.
  double log_value(double s) const;

  /// Natural length scale on which gamma varies (oscillation period, peak
  /// width); infinity for scale-free families.
  double length_scale() const noexcept;

  /// Names of the parameters used by this kind, in canonical order.
  static const std::vector<std::string>& parameter_names(MotilityKind kind);
  double parameter(std::string_view name) const;

  std::string describe() const;

  bool operator==(const MotilityFamily&) const = default;

 private:
  MotilityKind kind_;
  MotilityParams params_;
};

enum class AssumptionId { A1, A2, A4, GrowthCond };
std::string_view to_string(AssumptionId id);
AssumptionId parse_assumption_id(std::string_view name);

enum class AssumptionMethod { ClosedForm, NumericProbe };
std::string_view to_string(AssumptionMethod m);

struct ProbeRange {
  double lo = 1e-3;
  double hi = 1e6;
  int samples = 10000;
};

/// Result of testing one of the motility assumptions on a family.
struct AssumptionReport {
  AssumptionId id{};
  bool holds = false;
  /// Named constants: gamma_inf, gamma_sup, gamma_lower, gamma_upper, k, l,
  /// chi, liminf, tau ... depending on the assumption.
  std::map<std::string, double> witnesses;
  AssumptionMethod method = AssumptionMethod::ClosedForm;
  /// True when witnesses are only verified on the finite probe range.
  bool range_limited = false;
  std::string note;
};

struct AssumptionQuery {
  AssumptionId id = AssumptionId::A1;
  double tau = 1.0;     // used by A1
  double chi = 0.0;     // used by GrowthCond; <= 0 means "family's own rate"
  ProbeRange probe{};
  bool force_numeric = false;
};

AssumptionReport check_assumption(const MotilityFamily& family, const AssumptionQuery& query);

/// Log-spaced probe points over [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int samples);

/// Algebraic envelope C1 s^-k <= gamma(s) <= C2 s^-l on [lo, hi]:
/// C1 = min s^k gamma, C2 = max s^l gamma over the probe points.
struct EnvelopeReport {
  double k = 0.0;
  double l = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  bool holds = false;  // c1 > 0 and c2 finite
  bool range_limited = true;
};

EnvelopeReport probe_envelope(const MotilityFamily& family, double k, double l, const ProbeRange& range);

}  // namespace kslab
