#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "amix/benchmarks.hpp"
#include "amix/config.hpp"

namespace amix {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitConfig = 2 };

/// Entry point shared by the executable and the tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Run a study and write its artifacts under `dir`. Returns the number of failed cells.
std::size_t run_study(const StudyConfig& config, StudyKind kind, const std::string& dir, std::ostream& log);

/// Render every summary.csv under `dir` as aligned tables, one per study.
/// Throws std::runtime_error naming a corrupt file; returns false when none exist.
bool render_report(const std::string& dir, std::ostream& out);

}  // namespace amix
