#include "kslab/motility.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct KindName {
  MotilityKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {MotilityKind::Exponential, "exponential"},
    {MotilityKind::StretchedExponential, "stretched_exponential"},
    {MotilityKind::Algebraic, "algebraic"},
    {MotilityKind::AlgebraicLog, "algebraic_log"},
    {MotilityKind::BoundedOscillatory, "bounded_oscillatory"},
    {MotilityKind::PeakedNonMonotonic, "peaked"},
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool finite_all(const MotilityParams& p) {
  for (double x : {p.chi, p.alpha, p.k, p.k1, p.k2, p.a, p.b, p.omega, p.c, p.m, p.s0, p.sigma})
    if (!std::isfinite(x)) return false;
  return true;
}

void check_arg(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    std::ostringstream os;
    os << "motility argument must be positive and finite, got " << s;
    throw DomainError(os.str());
  }
}

}  // namespace

std::string_view to_string(MotilityKind kind) {
  for (const auto& kn : kKindNames)
    if (kn.kind == kind) return kn.name;
  return "unknown";
}

MotilityKind parse_motility_kind(std::string_view name) {
  for (const auto& kn : kKindNames)
    if (kn.name == name) return kn.kind;
  throw ConfigError("unknown motility kind '" + std::string(name) + "'");
}

MotilityFamily::MotilityFamily(MotilityKind kind, MotilityParams p) : kind_(kind), params_(p) {
  require(finite_all(p), "motility parameters must be finite");
  switch (kind) {
    case MotilityKind::Exponential:
      require(p.chi > 0.0, "gamma.chi must be positive");
      break;
    case MotilityKind::StretchedExponential:
      require(p.alpha > 0.0 && p.alpha < 1.0, "gamma.alpha must lie in (0,1)");
      break;
    case MotilityKind::Algebraic:
      require(p.k >= 0.0, "gamma.k must be non-negative");
      break;
    case MotilityKind::AlgebraicLog:
      require(p.k1 > 0.0, "gamma.k1 must be positive");
      require(p.k2 > 0.0, "gamma.k2 must be positive");
      break;
    case MotilityKind::BoundedOscillatory:
      require(p.b >= 0.0, "gamma.b must be non-negative");
      require(p.a > p.b, "gamma.a must exceed gamma.b");
      require(p.omega > 0.0, "gamma.omega must be positive");
      break;
    case MotilityKind::PeakedNonMonotonic:
      require(p.c >= 0.0, "gamma.c must be non-negative");
      require(p.m > 0.0, "gamma.m must be positive");
      require(p.s0 > 0.0, "gamma.s0 must be positive");
      require(p.sigma > 0.0, "gamma.sigma must be positive");
      break;
  }
}

MotilityFamily MotilityFamily::exponential(double chi) {
  MotilityParams p;
  p.chi = chi;
  return {MotilityKind::Exponential, p};
}

MotilityFamily MotilityFamily::stretched_exponential(double alpha) {
  MotilityParams p;
  p.alpha = alpha;
  return {MotilityKind::StretchedExponential, p};
}

MotilityFamily MotilityFamily::algebraic(double k) {
  MotilityParams p;
  p.k = k;
  return {MotilityKind::Algebraic, p};
}

MotilityFamily MotilityFamily::algebraic_log(double k1, double k2) {
  MotilityParams p;
  p.k1 = k1;
  p.k2 = k2;
  return {MotilityKind::AlgebraicLog, p};
}

MotilityFamily MotilityFamily::bounded_oscillatory(double a, double b, double omega) {
  MotilityParams p;
  p.a = a;
  p.b = b;
  p.omega = omega;
  return {MotilityKind::BoundedOscillatory, p};
}

MotilityFamily MotilityFamily::peaked(double c, double m, double s0, double sigma) {
  MotilityParams p;
  p.c = c;
  p.m = m;
  p.s0 = s0;
  p.sigma = sigma;
  return {MotilityKind::PeakedNonMonotonic, p};
}

double MotilityFamily::operator()(double s) const {
  check_arg(s);
  const auto& p = params_;
  switch (kind_) {
    case MotilityKind::Exponential:
      return std::exp(-p.chi * s);
    case MotilityKind::StretchedExponential:
      return std::exp(-std::pow(s, p.alpha));
    case MotilityKind::Algebraic:
      return std::pow(s, -p.k);
    case MotilityKind::AlgebraicLog:
      return std::pow(s, -p.k1) * std::pow(std::log1p(s), -p.k2);
    case MotilityKind::BoundedOscillatory:
      return p.a + p.b * std::sin(p.omega * s);
    case MotilityKind::PeakedNonMonotonic: {
      const double q = (s - p.s0) / p.sigma;
      return p.c + p.m / (1.0 + q * q);
    }
  }
  return 0.0;
}

double MotilityFamily::derivative(double s) const {
  check_arg(s);
  const auto& p = params_;
  switch (kind_) {
    case MotilityKind::Exponential:
      return -p.chi * std::exp(-p.chi * s);
    case MotilityKind::StretchedExponential: {
      const double sa = std::pow(s, p.alpha);
      return -p.alpha * sa / s * std::exp(-sa);
    }
    case MotilityKind::Algebraic:
      return -p.k * std::pow(s, -p.k - 1.0);
    case MotilityKind::AlgebraicLog: {
      const double lg = std::log1p(s);
      const double g = std::pow(s, -p.k1) * std::pow(lg, -p.k2);
      return g * (-p.k1 / s - p.k2 / ((1.0 + s) * lg));
    }
    case MotilityKind::BoundedOscillatory:
      return p.b * p.omega * std::cos(p.omega * s);
    case MotilityKind::PeakedNonMonotonic: {
      const double q = (s - p.s0) / p.sigma;
      const double d = 1.0 + q * q;
      return -2.0 * p.m * q / (p.sigma * d * d);
    }
  }
  return 0.0;
}

double MotilityFamily::log_value(double s) const {
  check_arg(s);
  const auto& p = params_;
  switch (kind_) {
    case MotilityKind::Exponential:
      return -p.chi * s;
    case MotilityKind::StretchedExponential:
      return -std::pow(s, p.alpha);
    case MotilityKind::Algebraic:
      return -p.k * std::log(s);
    case MotilityKind::AlgebraicLog:
      return -p.k1 * std::log(s) - p.k2 * std::log(std::log1p(s));
    case MotilityKind::BoundedOscillatory:
    case MotilityKind::PeakedNonMonotonic:
      return std::log((*this)(s));
  }
  return 0.0;
}

double MotilityFamily::length_scale() const noexcept {
  switch (kind_) {
    case MotilityKind::BoundedOscillatory:
      return params_.b > 0.0 ? 1.0 / params_.omega : kInf;
    case MotilityKind::PeakedNonMonotonic:
      return params_.sigma;
    default:
      return kInf;
  }
}

const std::vector<std::string>& MotilityFamily::parameter_names(MotilityKind kind) {
  static const std::vector<std::string> exp_names{"chi"};
  static const std::vector<std::string> sexp_names{"alpha"};
  static const std::vector<std::string> alg_names{"k"};
  static const std::vector<std::string> alglog_names{"k1", "k2"};
  static const std::vector<std::string> osc_names{"a", "b", "omega"};
  static const std::vector<std::string> peak_names{"c", "m", "s0", "sigma"};
  switch (kind) {
    case MotilityKind::Exponential:
      return exp_names;
    case MotilityKind::StretchedExponential:
      return sexp_names;
    case MotilityKind::Algebraic:
      return alg_names;
    case MotilityKind::AlgebraicLog:
      return alglog_names;
    case MotilityKind::BoundedOscillatory:
      return osc_names;
    case MotilityKind::PeakedNonMonotonic:
      return peak_names;
  }
  return exp_names;
}

double MotilityFamily::parameter(std::string_view name) const {
  const auto& p = params_;
  if (name == "chi") return p.chi;
  if (name == "alpha") return p.alpha;
  if (name == "k") return p.k;
  if (name == "k1") return p.k1;
  if (name == "k2") return p.k2;
  if (name == "a") return p.a;
  if (name == "b") return p.b;
  if (name == "omega") return p.omega;
  if (name == "c") return p.c;
  if (name == "m") return p.m;
  if (name == "s0") return p.s0;
  if (name == "sigma") return p.sigma;
  throw ConfigError("unknown motility parameter '" + std::string(name) + "'");
}

std::string MotilityFamily::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(";
  const auto& names = parameter_names(kind_);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) os << ", ";
    os << names[i] << "=" << parameter(names[i]);
  }
  os << ")";
  return os.str();
}

std::string_view to_string(AssumptionId id) {
  switch (id) {
    case AssumptionId::A1:
      return "A1";
    case AssumptionId::A2:
      return "A2";
    case AssumptionId::A4:
      return "A4";
    case AssumptionId::GrowthCond:
      return "GrowthCond";
  }
  return "unknown";
}

AssumptionId parse_assumption_id(std::string_view name) {
  if (name == "A1") return AssumptionId::A1;
  if (name == "A2") return AssumptionId::A2;
  if (name == "A4") return AssumptionId::A4;
  if (name == "GrowthCond") return AssumptionId::GrowthCond;
  throw ConfigError("unknown assumption id '" + std::string(name) + "'");
}

std::string_view to_string(AssumptionMethod m) {
  return m == AssumptionMethod::ClosedForm ? "closed-form" : "numeric-probe";
}

std::vector<double> log_spaced(double lo, double hi, int samples) {
  if (!(lo > 0.0) || !(hi > lo) || samples < 2) throw ConfigError("invalid probe range");
  std::vector<double> out(static_cast<std::size_t>(samples));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < samples; ++i) out[i] = std::exp(a + (b - a) * i / (samples - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

namespace {

// d/ds log gamma(s), evaluated without forming gamma.
double log_derivative(const MotilityFamily& g, double s) {
  const auto& p = g.params();
  switch (g.kind()) {
    case MotilityKind::Exponential:
      return -p.chi;
    case MotilityKind::StretchedExponential:
      return -p.alpha * std::pow(s, p.alpha - 1.0);
    case MotilityKind::Algebraic:
      return -p.k / s;
    case MotilityKind::AlgebraicLog:
      return -p.k1 / s - p.k2 / ((1.0 + s) * std::log1p(s));
    default:
      return g.derivative(s) / g(s);
  }
}

AssumptionReport closed_form(const MotilityFamily& g, const AssumptionQuery& q, bool& available) {
  available = true;
  AssumptionReport r;
  r.id = q.id;
  r.method = AssumptionMethod::ClosedForm;
  const auto& p = g.params();
  const MotilityKind kind = g.kind();

  switch (q.id) {
    case AssumptionId::A1: {
      double g_inf = 0.0, g_sup = kInf;
      switch (kind) {
        case MotilityKind::Exponential:
        case MotilityKind::StretchedExponential:
          g_sup = 1.0;
          break;
        case MotilityKind::Algebraic:
          g_inf = p.k > 0.0 ? 0.0 : 1.0;
          g_sup = p.k > 0.0 ? kInf : 1.0;
          break;
        case MotilityKind::AlgebraicLog:
          break;
        case MotilityKind::BoundedOscillatory:
          g_inf = p.a + p.b;
          g_sup = p.a + p.b;
          break;
        case MotilityKind::PeakedNonMonotonic:
          g_inf = p.c;
          g_sup = p.c + p.m;
          break;
      }
      r.witnesses["gamma_inf"] = g_inf;
      r.witnesses["gamma_sup"] = g_sup;
      r.witnesses["tau"] = q.tau;
      r.witnesses["tau_gamma_inf"] = q.tau * g_inf;
      r.holds = q.tau * g_inf < 1.0;
      if (g_sup * q.tau >= 1.0 && r.holds)
        r.note = "sup gamma exceeds 1/tau on a finite region while limsup stays below 1/tau";
      break;
    }
    case AssumptionId::A2: {
      double lower = 0.0, upper = kInf;
      switch (kind) {
        case MotilityKind::Exponential:
        case MotilityKind::StretchedExponential:
          upper = 1.0;
          break;
        case MotilityKind::Algebraic:
          if (p.k == 0.0) lower = upper = 1.0;
          break;
        case MotilityKind::AlgebraicLog:
          break;
        case MotilityKind::BoundedOscillatory:
          lower = p.a - p.b;
          upper = p.a + p.b;
          break;
        case MotilityKind::PeakedNonMonotonic:
          lower = p.c;
          upper = p.c + p.m;
          break;
      }
      r.witnesses["gamma_lower"] = lower;
      r.witnesses["gamma_upper"] = upper;
      r.holds = lower > 0.0 && std::isfinite(upper);
      break;
    }
    case AssumptionId::A4: {
      switch (kind) {
        case MotilityKind::Exponential:
        case MotilityKind::StretchedExponential:
          r.holds = false;
          r.note = "decays faster than every power: liminf s^k gamma = 0 for all k";
          break;
        case MotilityKind::Algebraic:
          r.holds = true;
          r.witnesses["k"] = p.k;
          r.witnesses["l"] = p.k;
          break;
        case MotilityKind::AlgebraicLog:
          available = false;
          break;
        case MotilityKind::BoundedOscillatory:
          r.holds = true;
          r.witnesses["k"] = 0.0;
          r.witnesses["l"] = 0.0;
          break;
        case MotilityKind::PeakedNonMonotonic:
          r.holds = true;
          r.witnesses["k"] = p.c > 0.0 ? 0.0 : 2.0;
          r.witnesses["l"] = p.c > 0.0 ? 0.0 : 2.0;
          break;
      }
      break;
    }
    case AssumptionId::GrowthCond: {
      const double rate = kind == MotilityKind::Exponential ? p.chi : 0.0;
      const double chi = q.chi > 0.0 ? q.chi : (kind == MotilityKind::Exponential ? p.chi : 1.0);
      r.witnesses["chi"] = chi;
      r.witnesses["chi_critical"] = rate;
      double liminf = kInf;
      if (kind == MotilityKind::Exponential) {
        if (chi > rate)
          liminf = kInf;
        else if (chi == rate)
          liminf = 1.0;
        else
          liminf = 0.0;
      }
      r.witnesses["liminf"] = liminf;
      r.holds = liminf > 0.0;
      break;
    }
  }
  return r;
}

AssumptionReport numeric_probe(const MotilityFamily& g, const AssumptionQuery& q) {
  AssumptionReport r;
  r.id = q.id;
  r.method = AssumptionMethod::NumericProbe;
  r.range_limited = true;
  const auto pts = log_spaced(q.probe.lo, q.probe.hi, q.probe.samples);
  const double decade_lo = q.probe.hi / 10.0;
  r.witnesses["probe_lo"] = q.probe.lo;
  r.witnesses["probe_hi"] = q.probe.hi;

  switch (q.id) {
    case AssumptionId::A1: {
      double tail_max = 0.0, sup = 0.0;
      for (double s : pts) {
        const double v = g(s);
        sup = std::max(sup, v);
        if (s >= decade_lo) tail_max = std::max(tail_max, v);
      }
      r.witnesses["gamma_inf"] = tail_max;
      r.witnesses["gamma_sup"] = sup;
      r.witnesses["tau"] = q.tau;
      r.witnesses["tau_gamma_inf"] = q.tau * tail_max;
      r.holds = q.tau * tail_max < 1.0;
      break;
    }
    case AssumptionId::A2: {
      double lo = kInf, hi = 0.0;
      for (double s : pts) {
        const double v = g(s);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      r.witnesses["gamma_lower"] = lo;
      r.witnesses["gamma_upper"] = hi;
      r.holds = lo > DBL_MIN && std::isfinite(hi);
      break;
    }
    case AssumptionId::A4: {
      double kmax = -kInf, lmin = kInf;
      for (double s : pts) {
        if (s < decade_lo) continue;
        const double e = -s * log_derivative(g, s);
        kmax = std::max(kmax, e);
        lmin = std::min(lmin, e);
      }
      r.witnesses["k"] = kmax;
      r.witnesses["l"] = lmin;
      r.holds = std::isfinite(kmax) && lmin >= 0.0;
      r.note = "local log-log exponents over the top decade of the probe range";
      break;
    }
    case AssumptionId::GrowthCond: {
      const double chi = q.chi > 0.0 ? q.chi : 1.0;
      double fmin = kInf, f_start = kNaN, f_end = 0.0;
      for (double s : pts) {
        if (s < decade_lo) continue;
        const double f = chi * s + g.log_value(s);
        if (std::isnan(f_start)) f_start = f;
        fmin = std::min(fmin, f);
        f_end = f;
      }
      r.witnesses["chi"] = chi;
      r.witnesses["log_liminf"] = fmin;
      r.witnesses["liminf"] = std::exp(fmin);
      // chi s + log gamma must not lose ground across the top decade
      r.holds = f_end >= f_start - 1e-9 * (1.0 + std::abs(f_start));
      break;
    }
  }
  return r;
}

}  // namespace

AssumptionReport check_assumption(const MotilityFamily& family, const AssumptionQuery& query) {
  if (!(query.tau > 0.0)) throw ConfigError("tau must be positive");
  if (!query.force_numeric) {
    bool available = false;
    auto r = closed_form(family, query, available);
    if (available) return r;
  }
  return numeric_probe(family, query);
}

EnvelopeReport probe_envelope(const MotilityFamily& family, double k, double l, const ProbeRange& range) {
  EnvelopeReport r;
  r.k = k;
  r.l = l;
  double c1 = kInf, c2 = 0.0;
  for (double s : log_spaced(range.lo, range.hi, range.samples)) {
    const double lg = family.log_value(s);
    c1 = std::min(c1, std::exp(k * std::log(s) + lg));
    c2 = std::max(c2, std::exp(l * std::log(s) + lg));
  }
  r.c1 = c1;
  r.c2 = c2;
  r.holds = c1 > 0.0 && std::isfinite(c2);
  return r;
}

}  // namespace kslab
