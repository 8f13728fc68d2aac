#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "amix/benchmarks.hpp"

namespace amix {

/// Invalid configuration; `key` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Per-method overrides under `method.<name>.*`.
struct MethodParams {
  std::optional<double> rho;
  std::optional<double> alpha_conf;
  std::optional<double> alpha_eps;
  std::optional<double> delta;
  std::optional<int> n_levels;
  std::optional<std::vector<double>> levels;
  std::optional<double> c;           // hybrid
  std::optional<std::string> alpha_rank;  // hybrid: number or "adaptive"

  bool operator==(const MethodParams&) const = default;
};

/// A study as written in a config file. Unset optionals fall back to the
/// problem's recommended settings when resolved.
struct StudyConfig {
  std::optional<StudyKind> kind;
  std::string problem;
  std::vector<std::string> methods;
  bool oneshot = true;
  std::optional<std::size_t> n0;
  std::vector<std::size_t> budgets;
  std::size_t replications = 1;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string out;
  std::size_t candidates_per_combo = 100;
  std::size_t probe_per_combo = 200;
  std::optional<double> a;
  std::optional<double> epsilon;
  int fit_restarts = 5;
  int fit_screen_factor = 20;
  int fit_max_iters = 100;
  std::map<std::string, MethodParams> method_params;

  bool operator==(const StudyConfig&) const = default;
};

/// Method names accepted in `methods`.
std::vector<std::string> known_methods();

std::optional<StudyKind> parse_study_kind(std::string_view s);

/// Parse `key = value` lines; `#` starts a comment. Unknown or duplicate
/// keys and malformed values raise ConfigError.
StudyConfig parse_config(std::string_view text);
StudyConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const StudyConfig& config);

/// Resolve defaults against the problem and build a runnable study.
Study to_study(const StudyConfig& config, StudyKind kind);

}  // namespace amix
