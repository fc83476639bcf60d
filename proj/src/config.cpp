#include "kslab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// line 0 marks a command-line override, negative lines a key that is absent
std::string where(int line) {
  if (line > 0) return "line " + std::to_string(line) + ": ";
  return line == 0 ? "override: " : "";
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool to_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(out);
}

template <class Int>
bool to_int(std::string_view s, Int& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto c = s.find(',', pos);
    out.push_back(trim(s.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos)));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

double& param_ref(MotilityParams& p, std::string_view name) {
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
  return p.sigma;
}

const std::set<std::string>& gamma_param_keys() {
  static const std::set<std::string> keys{"chi", "alpha", "k", "k1", "k2", "a", "b", "omega", "c", "m", "s0", "sigma"};
  return keys;
}

std::vector<std::string> init_keys_for(InitialKind kind) {
  switch (kind) {
    case InitialKind::Constant: return {"value"};
    case InitialKind::Gaussian: return {"mass", "width", "center"};
    case InitialKind::Cosine: return {"mean", "amplitude", "mode"};
    case InitialKind::Noise: return {"mean", "amplitude", "seed"};
  }
  return {};
}

// Typed access to the assignment table; records every problem instead of
// stopping at the first.
class Reader {
 public:
  Reader(const std::vector<Assignment>& entries, std::string_view ignore) {
    for (const auto& a : entries) {
      if (!ignore.empty() && a.key.rfind(std::string(ignore) + ".", 0) == 0) continue;
      table_[a.key] = a;
    }
  }

  bool has(const std::string& key) const { return table_.count(key) > 0; }
  int line_of(const std::string& key) const { return has(key) ? table_.at(key).line : -1; }

  const Assignment* take(const std::string& key) {
    auto it = table_.find(key);
    if (it == table_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  void error(int line, const std::string& msg) { errors_.emplace_back(line, where(line) + msg); }
  void error(const std::string& msg) { errors_.emplace_back(1 << 30, msg); }

  void number(const std::string& key, double& out) {
    if (const auto* a = take(key))
      if (!to_double(a->value, out)) error(a->line, key + ": expected a number, got '" + a->value + "'");
  }
  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const auto* a = take(key))
      if (!to_int(a->value, out)) error(a->line, key + ": expected an integer, got '" + a->value + "'");
  }
  void boolean(const std::string& key, bool& out) {
    if (const auto* a = take(key)) {
      const auto v = trim(a->value);
      if (v == "true" || v == "1" || v == "yes")
        out = true;
      else if (v == "false" || v == "0" || v == "no")
        out = false;
      else
        error(a->line, key + ": expected true or false, got '" + a->value + "'");
    }
  }
  void text(const std::string& key, std::string& out) {
    if (const auto* a = take(key)) out = std::string(trim(a->value));
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (const auto* a = take(key)) {
      std::vector<double> vals;
      for (auto part : split_list(a->value)) {
        double x;
        if (!to_double(part, x)) {
          error(a->line, key + ": expected a comma separated list of numbers");
          return;
        }
        vals.push_back(x);
      }
      out = vals;
    }
  }
  void integers(const std::string& key, std::vector<int>& out) {
    if (const auto* a = take(key)) {
      std::vector<int> vals;
      for (auto part : split_list(a->value)) {
        int x;
        if (!to_int(part, x)) {
          error(a->line, key + ": expected a comma separated list of integers");
          return;
        }
        vals.push_back(x);
      }
      out = vals;
    }
  }

  // Runs f, turning a ConfigError into a reported problem at `line`.
  void guard(int line, const std::function<void()>& f) {
    try {
      f();
    } catch (const ConfigError& e) {
      error(line, e.what());
    }
  }

  void finish() {
    for (const auto& [key, a] : table_)
      if (!used_.count(key)) unused_.push_back(&a);
  }
  const std::vector<const Assignment*>& unused() const { return unused_; }

  [[noreturn]] void raise() const {
    auto sorted = errors_;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    std::string msg;
    for (const auto& e : sorted) msg += (msg.empty() ? "" : "\n") + e.second;
    throw ConfigError(msg);
  }
  bool failed() const { return !errors_.empty(); }

 private:
  std::map<std::string, Assignment> table_;
  std::set<std::string> used_;
  std::vector<const Assignment*> unused_;
  std::vector<std::pair<int, std::string>> errors_;
};

void read_init(Reader& rd, const std::string& sec, InitialSpec& spec, std::uint64_t default_seed) {
  spec.seed = default_seed;
  if (const auto* a = rd.take(sec + ".kind")) rd.guard(a->line, [&] { spec.kind = parse_initial_kind(trim(a->value)); });
  const auto keys = init_keys_for(spec.kind);
  static const std::vector<std::string> all{"value", "mass", "width", "center", "mean", "amplitude", "mode", "seed"};
  for (const auto& k : all) {
    const std::string key = sec + "." + k;
    if (!rd.has(key)) continue;
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      const int line = rd.line_of(key);
      rd.take(key);
      rd.error(line, key + " does not apply to " + sec + ".kind = " + std::string(to_string(spec.kind)));
      continue;
    }
    if (k == "value") rd.number(key, spec.value);
    if (k == "mass") rd.number(key, spec.mass);
    if (k == "width") rd.number(key, spec.width);
    if (k == "center") rd.numbers(key, spec.center);
    if (k == "mean") rd.number(key, spec.mean);
    if (k == "amplitude") rd.number(key, spec.amplitude);
    if (k == "mode") rd.integer(key, spec.mode);
    if (k == "seed") rd.integer(key, spec.seed);
  }
}

}  // namespace

Grid GridSpec::build() const {
  return Grid(dim, lengths, counts);
}

std::vector<Assignment> parse_assignments(std::string_view text) {
  std::vector<Assignment> out;
  std::vector<std::string> errors;
  std::map<std::string, int> seen;
  int line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where(line) + "expected 'section.key = value'");
      continue;
    }
    const auto key = trim(raw.substr(0, eq));
    const auto value = trim(raw.substr(eq + 1));
    const auto dot = key.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == key.size()) {
      errors.push_back(where(line) + "key '" + std::string(key) + "' must have the form section.key");
      continue;
    }
    if (value.empty()) {
      errors.push_back(where(line) + "missing value for '" + std::string(key) + "'");
      continue;
    }
    if (auto it = seen.find(std::string(key)); it != seen.end()) {
      errors.push_back(where(line) + "duplicate key '" + std::string(key) + "' (first on line " +
                       std::to_string(it->second) + ")");
      continue;
    }
    seen[std::string(key)] = line;
    out.push_back(Assignment{std::string(key), std::string(value), line});
  }
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw ConfigError(msg);
  }
  return out;
}

Assignment parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(text) + "' must be section.key=value");
  auto parsed = parse_assignments(std::string(text.substr(0, eq)) + " = " + std::string(text.substr(eq + 1)));
  if (parsed.size() != 1) throw ConfigError("override '" + std::string(text) + "' must be section.key=value");
  parsed[0].line = 0;
  return parsed[0];
}

void apply_overrides(std::vector<Assignment>& base, const std::vector<Assignment>& overrides) {
  for (const auto& o : overrides) {
    auto it = std::find_if(base.begin(), base.end(), [&](const Assignment& a) { return a.key == o.key; });
    if (it != base.end())
      it->value = o.value, it->line = o.line;
    else
      base.push_back(o);
  }
}

RunConfig build_config(const std::vector<Assignment>& entries, std::string_view ignore_section) {
  Reader rd(entries, ignore_section);
  RunConfig c;

  // grid
  rd.integer("grid.dim", c.grid.dim);
  if (c.grid.dim < 1 || c.grid.dim > 3) {
    rd.error(rd.line_of("grid.dim"), "grid.dim must be 1, 2 or 3");
    c.grid.dim = 2;
  }
  c.grid.lengths.assign(c.grid.dim, 1.0);
  c.grid.counts.assign(c.grid.dim, 32);
  rd.numbers("grid.lengths", c.grid.lengths);
  rd.integers("grid.counts", c.grid.counts);
  if (c.grid.lengths.size() == 1) c.grid.lengths.assign(c.grid.dim, c.grid.lengths[0]);
  if (c.grid.counts.size() == 1) c.grid.counts.assign(c.grid.dim, c.grid.counts[0]);
  rd.guard(rd.line_of("grid.counts"), [&] { (void)c.grid.build(); });

  // sim
  rd.number("sim.tau", c.sim.tau);
  rd.number("sim.dt_init", c.sim.dt_init);
  rd.number("sim.dt_min", c.sim.dt_min);
  rd.number("sim.dt_max", c.sim.dt_max);
  rd.number("sim.t_end", c.sim.t_end);
  rd.number("sim.u_max", c.sim.u_max);
  rd.number("sim.tol", c.sim.tol);
  if (const auto* a = rd.take("sim.solver")) rd.guard(a->line, [&] { c.sim.solver = parse_solver_kind(trim(a->value)); });
  rd.boolean("sim.adaptive", c.sim.adaptive);
  rd.integer("sim.cadence", c.sim.cadence);
  rd.number("sim.record_interval", c.sim.record_interval);
  rd.integer("sim.seed", c.seed);

  // gamma
  if (const auto* a = rd.take("gamma.kind")) {
    const int line = a->line;
    rd.guard(line, [&] { c.gamma_kind = parse_motility_kind(trim(a->value)); });
    {
      const auto& names = MotilityFamily::parameter_names(c.gamma_kind);
      for (const auto& p : gamma_param_keys()) {
        const std::string key = "gamma." + p;
        const bool relevant = std::find(names.begin(), names.end(), p) != names.end();
        if (relevant && !rd.has(key)) {
          rd.error(line, "gamma.kind = " + std::string(to_string(c.gamma_kind)) + " requires " + key);
        } else if (!relevant && rd.has(key)) {
          const int l2 = rd.line_of(key);
          rd.take(key);
          rd.error(l2, key + " does not apply to gamma.kind = " + std::string(to_string(c.gamma_kind)));
        } else if (relevant) {
          rd.number(key, param_ref(c.gamma_params, p));
        }
      }
      rd.guard(line, [&] { (void)c.motility(); });
    }
  } else {
    rd.error("gamma.kind is required");
  }

  read_init(rd, "init_u", c.init_u, c.seed);
  read_init(rd, "init_v", c.init_v, c.seed);

  // output
  rd.text("output.dir", c.output.dir);
  rd.boolean("output.snapshots", c.output.snapshots);
  rd.boolean("output.keep_fields", c.output.keep_fields);
  rd.boolean("output.variant_residual", c.output.variant_residual);
  rd.number("output.burn_in", c.output.burn_in);
  rd.integer("output.ladder_levels", c.output.ladder_levels);
  rd.number("output.bounded_variation", c.output.thresholds.bounded_variation);
  rd.number("output.bounded_slope", c.output.thresholds.bounded_slope);
  rd.number("output.growing_slope", c.output.thresholds.growing_slope);
  rd.number("output.monotone_fraction", c.output.thresholds.monotone_fraction);
  rd.integer("output.min_records", c.output.thresholds.min_records);
  if (c.output.ladder_levels < 1 || c.output.ladder_levels > 8)
    rd.error(rd.line_of("output.ladder_levels"), "output.ladder_levels must be in 1..8");
  if (c.output.burn_in < 0.0) rd.error(rd.line_of("output.burn_in"), "output.burn_in must be non-negative");

  rd.finish();
  for (const auto* a : rd.unused()) rd.error(a->line, "unknown key '" + a->key + "'");

  // cross-field constraints need a well-formed grid and initial data
  if (!rd.failed()) {
    rd.guard(rd.line_of("sim.tau"), [&] {
      const Grid g = c.grid.build();
      Field u0(g), v0(g);
      try {
        u0 = make_initial_u(g, c.init_u);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("init_u: ") + e.what());
      }
      try {
        v0 = make_initial_v(g, c.init_v);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("init_v: ") + e.what());
      }
      double uinf = 0.0;
      for (double x : u0.values()) uinf = std::max(uinf, x);
      c.sim.validate(uinf);
    });
  }
  if (rd.failed()) rd.raise();
  return c;
}

RunConfig parse_config(std::string_view text, const std::vector<Assignment>& overrides) {
  auto entries = parse_assignments(text);
  apply_overrides(entries, overrides);
  return build_config(entries);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

RunConfig load_config(const std::string& path, const std::vector<Assignment>& overrides) {
  return parse_config(read_text_file(path), overrides);
}

std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  auto list = [](const auto& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) s += ", ";
      if constexpr (std::is_same_v<std::decay_t<decltype(xs[0])>, double>)
        s += fmt(xs[i]);
      else
        s += std::to_string(xs[i]);
    }
    return s;
  };
  auto b = [](bool x) { return x ? "true" : "false"; };
  os << "grid.dim = " << c.grid.dim << '\n';
  os << "grid.lengths = " << list(c.grid.lengths) << '\n';
  os << "grid.counts = " << list(c.grid.counts) << '\n';
  os << "sim.tau = " << fmt(c.sim.tau) << '\n';
  os << "sim.dt_init = " << fmt(c.sim.dt_init) << '\n';
  os << "sim.dt_min = " << fmt(c.sim.dt_min) << '\n';
  os << "sim.dt_max = " << fmt(c.sim.dt_max) << '\n';
  os << "sim.t_end = " << fmt(c.sim.t_end) << '\n';
  os << "sim.u_max = " << fmt(c.sim.u_max) << '\n';
  os << "sim.tol = " << fmt(c.sim.tol) << '\n';
  os << "sim.solver = " << to_string(c.sim.solver) << '\n';
  os << "sim.adaptive = " << b(c.sim.adaptive) << '\n';
  os << "sim.cadence = " << c.sim.cadence << '\n';
  os << "sim.record_interval = " << fmt(c.sim.record_interval) << '\n';
  os << "sim.seed = " << c.seed << '\n';
  os << "gamma.kind = " << to_string(c.gamma_kind) << '\n';
  for (const auto& p : MotilityFamily::parameter_names(c.gamma_kind)) {
    MotilityParams copy = c.gamma_params;
    os << "gamma." << p << " = " << fmt(param_ref(copy, p)) << '\n';
  }
  for (const auto* sec : {"init_u", "init_v"}) {
    const InitialSpec& s = std::string_view(sec) == "init_u" ? c.init_u : c.init_v;
    os << sec << ".kind = " << to_string(s.kind) << '\n';
    for (const auto& k : init_keys_for(s.kind)) {
      if (k == "center" && s.center.empty()) continue;  // domain center
      os << sec << '.' << k << " = ";
      if (k == "value") os << fmt(s.value);
      if (k == "mass") os << fmt(s.mass);
      if (k == "width") os << fmt(s.width);
      if (k == "mean") os << fmt(s.mean);
      if (k == "amplitude") os << fmt(s.amplitude);
      if (k == "mode") os << s.mode;
      if (k == "seed") os << s.seed;
      if (k == "center") os << list(s.center);
      os << '\n';
    }
  }
  if (!c.output.dir.empty()) os << "output.dir = " << c.output.dir << '\n';
  os << "output.snapshots = " << b(c.output.snapshots) << '\n';
  os << "output.keep_fields = " << b(c.output.keep_fields) << '\n';
  os << "output.variant_residual = " << b(c.output.variant_residual) << '\n';
  os << "output.burn_in = " << fmt(c.output.burn_in) << '\n';
  os << "output.ladder_levels = " << c.output.ladder_levels << '\n';
  os << "output.bounded_variation = " << fmt(c.output.thresholds.bounded_variation) << '\n';
  os << "output.bounded_slope = " << fmt(c.output.thresholds.bounded_slope) << '\n';
  os << "output.growing_slope = " << fmt(c.output.thresholds.growing_slope) << '\n';
  os << "output.monotone_fraction = " << fmt(c.output.thresholds.monotone_fraction) << '\n';
  os << "output.min_records = " << c.output.thresholds.min_records << '\n';
  return os.str();
}

std::string config_hash(const RunConfig& c) {
  RunConfig copy = c;
  copy.output.dir.clear();  // where results go does not change what is computed
  const std::string text = serialize(copy);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::size_t SweepConfig::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return axes.empty() ? 0 : n;
}

std::vector<std::string> SweepConfig::point_values(std::size_t i) const {
  std::vector<std::string> vals(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    const std::size_t m = axes[a].values.size();
    vals[a] = axes[a].values[i % m];
    i /= m;
  }
  return vals;
}

std::vector<Assignment> SweepConfig::point(std::size_t i) const {
  std::vector<Assignment> entries = base;
  const auto vals = point_values(i);
  std::vector<Assignment> ov;
  for (std::size_t a = 0; a < axes.size(); ++a) ov.push_back(Assignment{axes[a].key, vals[a], 0});
  apply_overrides(entries, ov);
  return entries;
}

SweepConfig parse_sweep_config(std::string_view text, const std::vector<Assignment>& overrides) {
  auto entries = parse_assignments(text);
  apply_overrides(entries, overrides);
  SweepConfig sc;
  std::vector<std::string> errors;
  for (const auto& a : entries) {
    if (a.key.rfind("sweep.", 0) != 0) {
      sc.base.push_back(a);
      continue;
    }
    const std::string sub = a.key.substr(6);
    if (sub == "width") {
      if (!to_int(a.value, sc.width) || sc.width < 1) errors.push_back(where(a.line) + "sweep.width must be a positive integer");
    } else if (sub == "results") {
      sc.results = a.value;
    } else if (sub == "cap") {
      if (!to_int(a.value, sc.cap) || sc.cap < 1) errors.push_back(where(a.line) + "sweep.cap must be a positive integer");
    } else if (sub.rfind("axis.", 0) == 0) {
      SweepAxis ax;
      ax.key = sub.substr(5);
      for (auto v : split_list(a.value))
        if (!v.empty()) ax.values.emplace_back(v);
      if (ax.key.find('.') == std::string::npos) errors.push_back(where(a.line) + "sweep axis '" + ax.key + "' must name section.key");
      else if (ax.values.empty()) errors.push_back(where(a.line) + "sweep axis '" + ax.key + "' has no values");
      else sc.axes.push_back(std::move(ax));
    } else {
      errors.push_back(where(a.line) + "unknown key '" + a.key + "'");
    }
  }
  if (sc.axes.empty()) errors.push_back("a sweep needs at least one sweep.axis.<section>.<key> line");
  if (errors.empty() && sc.size() > sc.cap)
    errors.push_back("sweep has " + std::to_string(sc.size()) + " points, above the cap " + std::to_string(sc.cap));
  if (errors.empty()) {
    // every point must be a valid run; checking the first catches template errors early
    try {
      (void)build_config(sc.point(0));
    } catch (const ConfigError& e) {
      errors.push_back(std::string("sweep point 0: ") + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw ConfigError(msg);
  }
  return sc;
}

}  // namespace kslab
