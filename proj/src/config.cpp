#include "amix/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace amix {

namespace {

const std::vector<std::string> kMethodNames = {"ei",  "lcb",    "ucb",   "arsd",  "ei_c",  "ecl",
                                               "rcc", "arsd_c", "lcb_c", "ei_mc", "ei_sc", "hybrid"};

// Shortest text that parses back to the same double.
std::string num(double v) { return fmt::format("{}", v); }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.emplace_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw ConfigError(key, "'" + key + "' expects a number, got '" + std::string(v) + "'");
  return out;
}

template <class T>
T to_unsigned(const std::string& key, std::string_view v) {
  unsigned long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || out > std::numeric_limits<T>::max())
    throw ConfigError(key, "'" + key + "' expects a non-negative integer, got '" + std::string(v) + "'");
  return static_cast<T>(out);
}

int to_int(const std::string& key, std::string_view v) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "'" + key + "' expects an integer, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key, "'" + key + "' expects true or false, got '" + std::string(v) + "'");
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s;
}

void set_method_param(StudyConfig& c, const std::string& key, std::string_view rest, std::string_view value) {
  const auto dot = rest.find('.');
  if (dot == std::string_view::npos) throw ConfigError(key, "unknown key '" + key + "'");
  const std::string name(rest.substr(0, dot));
  const std::string_view field = rest.substr(dot + 1);
  if (std::find(kMethodNames.begin(), kMethodNames.end(), name) == kMethodNames.end())
    throw ConfigError(key, "unknown method '" + name + "' in key '" + key + "'");
  auto& p = c.method_params[name];
  const bool hybrid = name == "hybrid";
  if (!hybrid && field == "rho") p.rho = to_double(key, value);
  else if (!hybrid && field == "alpha_conf") p.alpha_conf = to_double(key, value);
  else if (!hybrid && field == "alpha_eps") p.alpha_eps = to_double(key, value);
  else if (!hybrid && field == "delta") p.delta = to_double(key, value);
  else if (!hybrid && field == "n_levels") p.n_levels = to_int(key, value);
  else if (!hybrid && field == "levels") {
    std::vector<double> lv;
    for (const auto& s : split_list(value)) lv.push_back(to_double(key, s));
    p.levels = std::move(lv);
  } else if (hybrid && field == "c") p.c = to_double(key, value);
  else if (hybrid && field == "alpha_rank") {
    if (value != "adaptive") to_double(key, value);
    p.alpha_rank = std::string(value);
  } else {
    throw ConfigError(key, "unknown key '" + key + "'");
  }
}

}  // namespace

std::vector<std::string> known_methods() { return kMethodNames; }

std::optional<StudyKind> parse_study_kind(std::string_view s) {
  for (auto k : {StudyKind::Optimize, StudyKind::Contour, StudyKind::Predict})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

StudyConfig parse_config(std::string_view text) {
  StudyConfig c;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no), "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key '" + key + "'");

    if (key == "study") {
      c.kind = parse_study_kind(value);
      if (!c.kind) throw ConfigError(key, "'study' must be optimize, contour or predict");
    } else if (key == "problem") {
      c.problem = std::string(value);
    } else if (key == "methods") {
      c.methods = split_list(value);
      for (const auto& m : c.methods)
        if (std::find(kMethodNames.begin(), kMethodNames.end(), m) == kMethodNames.end())
          throw ConfigError(key, "unknown method '" + m + "' in 'methods'");
    } else if (key == "oneshot") {
      c.oneshot = to_bool(key, value);
    } else if (key == "n0") {
      c.n0 = to_unsigned<std::size_t>(key, value);
    } else if (key == "budgets") {
      c.budgets.clear();
      for (const auto& s : split_list(value)) c.budgets.push_back(to_unsigned<std::size_t>(key, s));
    } else if (key == "replications") {
      c.replications = to_unsigned<std::size_t>(key, value);
    } else if (key == "seed") {
      c.seed = to_unsigned<std::uint64_t>(key, value);
    } else if (key == "jobs") {
      c.jobs = to_unsigned<std::size_t>(key, value);
    } else if (key == "out") {
      c.out = std::string(value);
    } else if (key == "candidates_per_combo") {
      c.candidates_per_combo = to_unsigned<std::size_t>(key, value);
    } else if (key == "probe_per_combo") {
      c.probe_per_combo = to_unsigned<std::size_t>(key, value);
    } else if (key == "contour.a") {
      c.a = to_double(key, value);
    } else if (key == "contour.epsilon") {
      c.epsilon = to_double(key, value);
    } else if (key == "fit.restarts") {
      c.fit_restarts = to_int(key, value);
    } else if (key == "fit.screen_factor") {
      c.fit_screen_factor = to_int(key, value);
    } else if (key == "fit.max_iters") {
      c.fit_max_iters = to_int(key, value);
    } else if (key.starts_with("method.")) {
      set_method_param(c, key, std::string_view(key).substr(7), value);
    } else {
      throw ConfigError(key, "unknown key '" + key + "'");
    }
  }
  return c;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const StudyConfig& c) {
  std::ostringstream o;
  if (c.kind) o << "study = " << to_string(*c.kind) << '\n';
  o << "problem = " << c.problem << '\n';
  o << "methods = ";
  for (std::size_t i = 0; i < c.methods.size(); ++i) o << (i ? ", " : "") << c.methods[i];
  o << '\n';
  o << "oneshot = " << (c.oneshot ? "true" : "false") << '\n';
  if (c.n0) o << "n0 = " << *c.n0 << '\n';
  o << "budgets = " << join_sizes(c.budgets) << '\n';
  o << "replications = " << c.replications << '\n';
  o << "seed = " << c.seed << '\n';
  o << "jobs = " << c.jobs << '\n';
  if (!c.out.empty()) o << "out = " << c.out << '\n';
  o << "candidates_per_combo = " << c.candidates_per_combo << '\n';
  o << "probe_per_combo = " << c.probe_per_combo << '\n';
  if (c.a) o << "contour.a = " << num(*c.a) << '\n';
  if (c.epsilon) o << "contour.epsilon = " << num(*c.epsilon) << '\n';
  o << "fit.restarts = " << c.fit_restarts << '\n';
  o << "fit.screen_factor = " << c.fit_screen_factor << '\n';
  o << "fit.max_iters = " << c.fit_max_iters << '\n';
  for (const auto& [name, p] : c.method_params) {
    const std::string k = "method." + name + ".";
    if (p.rho) o << k << "rho = " << num(*p.rho) << '\n';
    if (p.alpha_conf) o << k << "alpha_conf = " << num(*p.alpha_conf) << '\n';
    if (p.alpha_eps) o << k << "alpha_eps = " << num(*p.alpha_eps) << '\n';
    if (p.delta) o << k << "delta = " << num(*p.delta) << '\n';
    if (p.n_levels) o << k << "n_levels = " << *p.n_levels << '\n';
    if (p.levels) o << k << "levels = " << join_doubles(*p.levels) << '\n';
    if (p.c) o << k << "c = " << num(*p.c) << '\n';
    if (p.alpha_rank) o << k << "alpha_rank = " << *p.alpha_rank << '\n';
  }
  return o.str();
}

Study to_study(const StudyConfig& c, StudyKind kind) {
  if (c.kind && *c.kind != kind)
    throw ConfigError("study", "config is a " + std::string(to_string(*c.kind)) + " study, not " +
                                   std::string(to_string(kind)));
  if (c.problem.empty()) throw ConfigError("problem", "'problem' is required");
  Study s;
  try {
    s.problem = make_problem(c.problem);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem", e.what());
  }
  const auto& prob = s.problem;
  s.kind = kind;
  s.include_oneshot = c.oneshot;
  s.replications = c.replications;
  s.base_seed = c.seed;
  s.jobs = c.jobs;
  s.n_per_combo = c.candidates_per_combo;
  s.probe_per_combo = c.probe_per_combo;
  s.fit.restarts = c.fit_restarts;
  s.fit.screen_factor = c.fit_screen_factor;
  s.fit.max_iters = c.fit_max_iters;
  switch (kind) {
    case StudyKind::Optimize:
      s.n0 = c.n0.value_or(prob.optim_n0);
      s.budgets = c.budgets.empty() ? prob.optim_budgets : c.budgets;
      break;
    case StudyKind::Contour:
      s.n0 = c.n0.value_or(prob.contour_n0);
      s.budgets = c.budgets.empty() ? prob.contour_budgets : c.budgets;
      break;
    case StudyKind::Predict:
      s.n0 = c.n0.value_or(prob.predict_n0);
      s.budgets = c.budgets.empty() ? prob.predict_budgets : c.budgets;
      break;
  }
  s.epsilon = c.epsilon.value_or(prob.epsilon);
  if (kind == StudyKind::Contour) {
    if (!c.a) throw ConfigError("contour.a", "'contour.a' is required for contour studies");
    s.a = *c.a;
  }
  if (c.replications < 1) throw ConfigError("replications", "'replications' must be >= 1");
  if (c.jobs < 1) throw ConfigError("jobs", "'jobs' must be >= 1");
  if (c.methods.empty() && !c.oneshot) throw ConfigError("methods", "no methods selected");
  if (c.fit_restarts < 1) throw ConfigError("fit.restarts", "'fit.restarts' must be >= 1");
  if (c.fit_screen_factor < 1) throw ConfigError("fit.screen_factor", "'fit.screen_factor' must be >= 1");
  if (c.fit_max_iters < 1) throw ConfigError("fit.max_iters", "'fit.max_iters' must be >= 1");
  if (s.n0 < 2) throw ConfigError("n0", "'n0' must be >= 2");
  for (auto b : s.budgets)
    if (b < s.n0) throw ConfigError("budgets", "every budget must be >= n0");
  if (c.candidates_per_combo < 1) throw ConfigError("candidates_per_combo", "'candidates_per_combo' must be >= 1");
  if (c.probe_per_combo < 1) throw ConfigError("probe_per_combo", "'probe_per_combo' must be >= 1");
  if (!(s.epsilon > 0.0)) throw ConfigError("contour.epsilon", "'contour.epsilon' must be > 0");

  for (const auto& [name, _] : c.method_params)
    if (std::find(c.methods.begin(), c.methods.end(), name) == c.methods.end())
      throw ConfigError("method." + name, "parameters given for method '" + name + "' which is not in 'methods'");

  std::set<std::string> dup;
  for (const auto& name : c.methods) {
    if (!dup.insert(name).second) throw ConfigError("methods", "method '" + name + "' listed twice");
    const auto it = c.method_params.find(name);
    const MethodParams p = it == c.method_params.end() ? MethodParams{} : it->second;
    if (name == "hybrid") {
      HybridOptions h;
      if (p.c) h.c = *p.c;
      if (p.alpha_rank) {
        if (*p.alpha_rank == "adaptive")
          h.alpha_rank.reset();
        else
          h.alpha_rank = std::stod(*p.alpha_rank);
      }
      if (h.c < 0.0) throw ConfigError("method.hybrid.c", "'method.hybrid.c' must be >= 0");
      if (h.alpha_rank && (*h.alpha_rank < 0.0 || *h.alpha_rank > 1.0))
        throw ConfigError("method.hybrid.alpha_rank", "'method.hybrid.alpha_rank' must lie in [0,1]");
      s.methods.push_back(Method::make_hybrid(h));
      continue;
    }
    AcquisitionSpec spec;
    spec.kind = *parse_criterion(name);
    if (needs_contour_level(spec.kind)) {
      if (!c.a) throw ConfigError("contour.a", "method '" + name + "' needs 'contour.a'");
      spec.a = *c.a;
    }
    spec.delta = prob.delta;
    if (p.rho) spec.rho = *p.rho;
    if (p.alpha_conf) spec.alpha_conf = *p.alpha_conf;
    if (p.alpha_eps) spec.alpha_eps = *p.alpha_eps;
    if (p.delta) spec.delta = *p.delta;
    if (p.n_levels) spec.n_levels = *p.n_levels;
    if (p.levels) spec.levels = *p.levels;
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("method." + name, "method '" + name + "': " + e.what());
    }
    s.methods.push_back(Method::criterion(name, spec));
  }
  return s;
}

}  // namespace amix
