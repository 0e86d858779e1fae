#include "core/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace arrec::harness {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::ConfigError, "field '" + path + "' " + message);
}

void expect_object(const Json& node, const std::string& path) {
  if (!node.is_object()) fail(path, "must be an object");
}

void reject_unknown(const Json& node, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& item : node.items()) {
    if (!allowed.count(item.key())) fail(join(path, item.key()), "is not a recognised setting");
  }
}

const Json& required(const Json& node, const std::string& key, const std::string& path) {
  if (!node.contains(key)) fail(join(path, key), "is missing");
  return node.at(key);
}

double number(const Json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "must be a number");
  return node.get<double>();
}

double number_field(const Json& node, const std::string& key, const std::string& path) {
  return number(required(node, key, path), join(path, key));
}

double number_or(const Json& node, const std::string& key, const std::string& path, double fallback) {
  return node.contains(key) ? number(node.at(key), join(path, key)) : fallback;
}

std::uint64_t count_or(const Json& node, const std::string& key, const std::string& path, std::uint64_t fallback) {
  if (!node.contains(key)) return fallback;
  const Json& v = node.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    fail(join(path, key), "must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> number_list(const Json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) fail(path, "must be a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(number(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <typename Fn>
auto wrap(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(path, std::string("is invalid: ") + e.what());
  }
}

proc::OffspringFamily parse_offspring(const Json& node, const std::string& path) {
  if (!node.is_string()) fail(path, "must be a string");
  const std::string s = node.get<std::string>();
  if (s == "poisson") return proc::OffspringFamily::Poisson;
  if (s == "bernoulli") return proc::OffspringFamily::Bernoulli;
  if (s == "geometric") return proc::OffspringFamily::Geometric;
  fail(path, "must be one of poisson, bernoulli, geometric");
}

ProcessKind parse_kind(const Json& node, const std::string& path) {
  if (!node.is_string()) fail(path, "must be a string");
  const std::string s = node.get<std::string>();
  if (s == "ar") return ProcessKind::Ar;
  if (s == "max_ar") return ProcessKind::MaxAr;
  if (s == "branching") return ProcessKind::Branching;
  if (s == "exchange") return ProcessKind::Exchange;
  if (s == "frog") return ProcessKind::Frog;
  if (s == "cookie_walk") return ProcessKind::CookieWalk;
  fail(path, "must be one of ar, max_ar, branching, exchange, frog, cookie_walk");
}

}  // namespace

dist::InnovationLaw parse_law(const Json& node, const std::string& path) {
  expect_object(node, path);
  const Json& kind_node = required(node, "kind", path);
  if (!kind_node.is_string()) fail(join(path, "kind"), "must be a string");
  const std::string kind = kind_node.get<std::string>();
  return wrap(path, [&]() -> dist::InnovationLaw {
    if (kind == "log_pareto") {
      reject_unknown(node, path, {"kind", "beta", "p"});
      return dist::InnovationLaw::log_pareto(number_field(node, "beta", path), number_field(node, "p", path));
    }
    if (kind == "pareto_tail") {
      reject_unknown(node, path, {"kind", "a"});
      return dist::InnovationLaw::pareto_tail(number_field(node, "a", path));
    }
    if (kind == "geometric") {
      reject_unknown(node, path, {"kind", "q"});
      return dist::InnovationLaw::geometric(number_field(node, "q", path));
    }
    if (kind == "poisson") {
      reject_unknown(node, path, {"kind", "mean"});
      return dist::InnovationLaw::poisson(number_field(node, "mean", path));
    }
    if (kind == "discrete_table") {
      reject_unknown(node, path, {"kind", "values", "probs"});
      return dist::InnovationLaw::discrete_table(number_list(required(node, "values", path), join(path, "values")),
                                                 number_list(required(node, "probs", path), join(path, "probs")));
    }
    if (kind == "deterministic") {
      reject_unknown(node, path, {"kind", "value"});
      return dist::InnovationLaw::deterministic(number_field(node, "value", path));
    }
    if (kind == "scaled_vector") {
      reject_unknown(node, path, {"kind", "component", "dim"});
      const dist::InnovationLaw component = parse_law(required(node, "component", path), join(path, "component"));
      const std::uint64_t dim = count_or(node, "dim", path, 0);
      if (dim == 0) fail(join(path, "dim"), "must be a positive integer");
      return dist::InnovationLaw::scaled_vector(component, dim);
    }
    if (kind == "floor") {
      reject_unknown(node, path, {"kind", "inner"});
      return dist::InnovationLaw::floor_of(parse_law(required(node, "inner", path), join(path, "inner")));
    }
    fail(join(path, "kind"),
         "must be one of log_pareto, pareto_tail, geometric, poisson, discrete_table, deterministic, "
         "scaled_vector, floor");
  });
}

env::MatrixEnsemble parse_ensemble(const Json& node, const std::string& path) {
  expect_object(node, path);
  reject_unknown(node, path, {"dim", "atoms"});
  const std::uint64_t dim = count_or(node, "dim", path, 0);
  if (dim == 0) fail(join(path, "dim"), "must be a positive integer");
  const Json& atoms_node = required(node, "atoms", path);
  if (!atoms_node.is_array() || atoms_node.empty()) fail(join(path, "atoms"), "must be a nonempty array");
  std::vector<env::Atom> atoms;
  for (std::size_t k = 0; k < atoms_node.size(); ++k) {
    const std::string apath = join(path, "atoms") + "[" + std::to_string(k) + "]";
    const Json& atom = atoms_node[k];
    expect_object(atom, apath);
    reject_unknown(atom, apath, {"matrix", "p"});
    const Json& m = required(atom, "matrix", apath);
    const std::string mpath = join(apath, "matrix");
    if (!m.is_array() || m.size() != dim) fail(mpath, "must have " + std::to_string(dim) + " rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < dim; ++i) {
      const std::string rpath = mpath + "[" + std::to_string(i) + "]";
      std::vector<double> row = number_list(m[i], rpath);
      if (row.size() != dim) fail(rpath, "must have " + std::to_string(dim) + " entries");
      rows.push_back(std::move(row));
    }
    atoms.push_back({Matrix::from_rows(rows), number_or(atom, "p", apath, 1.0)});
  }
  return wrap(path, [&] { return env::MatrixEnsemble(dim, std::move(atoms)); });
}

Scenario parse_scenario(const Json& config) {
  if (!config.is_object()) fail("(root)", "must be a JSON object");
  reject_unknown(config, "", {"name", "process", "ensemble", "innovation", "classifier", "probe", "simulate"});

  Scenario sc;
  sc.raw = config;
  if (config.contains("name")) {
    if (!config.at("name").is_string()) fail("name", "must be a string");
    sc.name = config.at("name").get<std::string>();
  }

  const Json& process = required(config, "process", "");
  expect_object(process, "process");
  ProcessSpec& ps = sc.process;
  ps.kind = parse_kind(required(process, "kind", "process"), "process.kind");

  switch (ps.kind) {
    case ProcessKind::Ar:
    case ProcessKind::MaxAr:
      reject_unknown(process, "process", {"kind"});
      break;
    case ProcessKind::Branching:
      reject_unknown(process, "process", {"kind", "offspring"});
      if (process.contains("offspring")) ps.offspring = parse_offspring(process.at("offspring"), "process.offspring");
      break;
    case ProcessKind::Exchange:
      reject_unknown(process, "process", {"kind", "t"});
      ps.t_law = parse_law(required(process, "t", "process"), "process.t");
      break;
    case ProcessKind::Frog:
      reject_unknown(process, "process", {"kind", "p", "r", "site_cap", "wake_cap"});
      ps.frog_p = number_field(process, "p", "process");
      ps.frog_r = number_field(process, "r", "process");
      if (!(ps.frog_p > 0.0 && ps.frog_p <= 1.0)) fail("process.p", "must lie in (0, 1]");
      if (!(ps.frog_r > 0.0 && ps.frog_r < 1.0)) fail("process.r", "must lie in (0, 1)");
      ps.site_cap = count_or(process, "site_cap", "process", ps.site_cap);
      ps.wake_cap = count_or(process, "wake_cap", "process", ps.wake_cap);
      break;
    case ProcessKind::CookieWalk:
      reject_unknown(process, "process", {"kind", "omega"});
      ps.omega_law = parse_law(required(process, "omega", "process"), "process.omega");
      break;
  }

  const bool needs_ensemble =
      ps.kind == ProcessKind::Ar || ps.kind == ProcessKind::MaxAr || ps.kind == ProcessKind::Branching;
  if (needs_ensemble) {
    ps.ensemble = parse_ensemble(required(config, "ensemble", ""), "ensemble");
  } else if (config.contains("ensemble")) {
    fail("ensemble", std::string("is not used by process kind ") + to_string(ps.kind));
  }
  ps.innovation = parse_law(required(config, "innovation", ""), "innovation");
  if (needs_ensemble) {
    const std::size_t d = ps.ensemble->dim();
    wrap("innovation", [&] { return ps.innovation->lifted(d); });
  }

  if (config.contains("classifier")) {
    const Json& c = config.at("classifier");
    expect_object(c, "classifier");
    reject_unknown(c, "classifier", {"y_grid", "n_max", "tau", "lyapunov"});
    if (c.contains("y_grid")) sc.classifier.y_grid = number_list(c.at("y_grid"), "classifier.y_grid");
    sc.classifier.series.n_max = count_or(c, "n_max", "classifier", sc.classifier.series.n_max);
    if (sc.classifier.series.n_max < 1000) fail("classifier.n_max", "must be at least 1000");
    sc.classifier.series.tau = number_or(c, "tau", "classifier", sc.classifier.series.tau);
    if (!(sc.classifier.series.tau > 0.0 && sc.classifier.series.tau < 1.0)) fail("classifier.tau", "must lie in (0, 1)");
    if (c.contains("lyapunov")) {
      const Json& l = c.at("lyapunov");
      expect_object(l, "classifier.lyapunov");
      reject_unknown(l, "classifier.lyapunov", {"steps", "replicas", "seed", "burn_in_fraction"});
      env::LyapunovOptions& lo = sc.classifier.lyapunov;
      lo.steps = count_or(l, "steps", "classifier.lyapunov", lo.steps);
      lo.replicas = count_or(l, "replicas", "classifier.lyapunov", lo.replicas);
      lo.seed = count_or(l, "seed", "classifier.lyapunov", lo.seed);
      lo.burn_in_fraction = number_or(l, "burn_in_fraction", "classifier.lyapunov", lo.burn_in_fraction);
      if (lo.steps == 0) fail("classifier.lyapunov.steps", "must be positive");
      if (lo.replicas < 2) fail("classifier.lyapunov.replicas", "must be at least 2");
      if (!(lo.burn_in_fraction >= 0.0 && lo.burn_in_fraction < 1.0)) {
        fail("classifier.lyapunov.burn_in_fraction", "must lie in [0, 1)");
      }
    }
  }
  for (double y : sc.classifier.y_grid) {
    if (!(y >= 0.0)) fail("classifier.y_grid", "entries must be nonnegative");
  }

  if (config.contains("probe")) {
    const Json& p = config.at("probe");
    expect_object(p, "probe");
    reject_unknown(p, "probe", {"b_grid", "horizon", "replicas", "seed", "workers", "budget"});
    if (p.contains("b_grid")) {
      sc.probe.b_grid = number_list(p.at("b_grid"), "probe.b_grid");
      if (!std::is_sorted(sc.probe.b_grid.begin(), sc.probe.b_grid.end())) fail("probe.b_grid", "must be sorted ascending");
      for (double b : sc.probe.b_grid) {
        if (!(b > 0.0)) fail("probe.b_grid", "entries must be positive");
      }
    }
    sc.probe.horizon = count_or(p, "horizon", "probe", sc.probe.horizon);
    if (sc.probe.horizon < 100) fail("probe.horizon", "must be at least 100");
    sc.probe.replicas = count_or(p, "replicas", "probe", sc.probe.replicas);
    if (sc.probe.replicas == 0) fail("probe.replicas", "must be positive");
    sc.probe.seed = count_or(p, "seed", "probe", sc.probe.seed);
    sc.probe.workers = static_cast<unsigned>(count_or(p, "workers", "probe", sc.probe.workers));
    sc.probe.budget = count_or(p, "budget", "probe", sc.probe.budget);
  }

  if (config.contains("simulate")) {
    const Json& s = config.at("simulate");
    expect_object(s, "simulate");
    reject_unknown(s, "simulate", {"steps"});
    sc.simulate_steps = count_or(s, "steps", "simulate", sc.simulate_steps);
  }
  return sc;
}

Scenario parse_scenario_text(const std::string& text) {
  Json config;
  try {
    config = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("configuration is not valid JSON: ") + e.what());
  }
  return parse_scenario(config);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read configuration file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

}  // namespace arrec::harness
