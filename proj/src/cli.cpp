#include "amix/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "amix/csv.hpp"

namespace amix {

namespace fs = std::filesystem;

namespace {

void write_error(std::ostream& err, std::string_view kind, const std::string& message, const std::string& key = {}) {
  nlohmann::json j{{"status", "error"}, {"kind", kind}, {"message", message}};
  if (!key.empty()) j["key"] = key;
  err << j.dump() << '\n';
}

std::string optional_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("NA");
}

struct StoredTrace {
  std::string method;
  std::size_t replication;
  Trace trace;
};

void write_summary(const std::string& path, const Study& study, const ReplicationReport& rep) {
  CsvWriter w(path, "amix.summary/1",
              {"study", "problem", "method", "N", "count", "na", "failed", "metric_mean", "metric_sd", "metric_median",
               "rel_efficiency"});
  for (const auto& s : rep.summary) {
    w << std::string(to_string(study.kind)) << study.problem.name << s.method << s.budget << s.count << s.na << s.failed
      << optional_cell(s.mean) << optional_cell(s.sd) << optional_cell(s.median) << optional_cell(s.rel_efficiency);
    w.end_row();
  }
}

void write_timing(const std::string& path, const ReplicationReport& rep) {
  CsvWriter w(path, "amix.timing/1",
              {"method", "N", "total_time_mean", "fit_time_mean", "select_time_mean", "time_per_point"});
  for (const auto& s : rep.summary) {
    w << s.method << s.budget << s.fit_time_mean + s.select_time_mean << s.fit_time_mean << s.select_time_mean
      << s.time_per_point;
    w.end_row();
  }
}

void write_cells(const std::string& path, const Study& study, const ReplicationReport& rep) {
  const char* metric = study.kind == StudyKind::Optimize ? "best_min"
                       : study.kind == StudyKind::Contour ? "mc0"
                                                          : "log_rmse";
  CsvWriter w(path, "amix.cells/1", {"method", "N", "replication", "seed", metric, "error"});
  for (const auto& c : rep.cells) {
    w << c.method << c.budget << c.replication << std::to_string(c.seed) << optional_cell(c.metric) << c.error;
    w.end_row();
  }
}

void write_plot(const std::string& path, const ReplicationReport& rep) {
  std::vector<std::string> methods;
  std::set<std::size_t> budgets;
  for (const auto& s : rep.summary) {
    if (std::find(methods.begin(), methods.end(), s.method) == methods.end()) methods.push_back(s.method);
    budgets.insert(s.budget);
  }
  std::vector<std::string> header{"N"};
  header.insert(header.end(), methods.begin(), methods.end());
  CsvWriter w(path, "amix.plot/1", header);
  for (auto n : budgets) {
    w << n;
    for (const auto& m : methods) {
      std::optional<double> v;
      for (const auto& s : rep.summary)
        if (s.method == m && s.budget == n) v = s.mean;
      w << optional_cell(v);
    }
    w.end_row();
  }
}

void write_boxplot(const std::string& path, const ReplicationReport& rep) {
  CsvWriter w(path, "amix.boxplot/1", {"method", "N", "replication", "log_rmse"});
  for (const auto& c : rep.cells) {
    w << c.method << c.budget << c.replication << optional_cell(c.metric);
    w.end_row();
  }
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

std::string fixed(const std::string& cell, int digits) {
  if (cell == "NA" || cell.empty()) return "NA";
  return fmt::format("{:.{}f}", std::stod(cell), digits);
}

void render_table(const CsvTable& t, const std::string& label, std::ostream& out) {
  const auto c_study = t.column("study"), c_problem = t.column("problem"), c_method = t.column("method"),
             c_n = t.column("N"), c_mean = t.column("metric_mean"), c_re = t.column("rel_efficiency");
  std::vector<std::string> methods;
  std::vector<std::size_t> budgets;
  std::map<std::pair<std::string, std::size_t>, std::string> cell;
  for (const auto& row : t.rows) {
    const auto& m = row[c_method];
    const auto n = static_cast<std::size_t>(std::stoull(row[c_n]));
    if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
    if (std::find(budgets.begin(), budgets.end(), n) == budgets.end()) budgets.push_back(n);
    std::string v = fixed(row[c_mean], 4);
    if (row[c_study] == "contour" && m != std::string(kOneShot) && row[c_re] != "NA")
      v += fmt::format(" ({:.2f})", std::stod(row[c_re]));
    cell[{m, n}] = v;
  }
  std::sort(budgets.begin(), budgets.end());
  const std::string study = t.rows.empty() ? "" : t.rows[0][c_study];
  const std::string problem = t.rows.empty() ? "" : t.rows[0][c_problem];

  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head{"N"};
  head.insert(head.end(), methods.begin(), methods.end());
  grid.push_back(head);
  for (auto n : budgets) {
    std::vector<std::string> row{std::to_string(n)};
    for (const auto& m : methods) {
      const auto it = cell.find({m, n});
      row.push_back(it == cell.end() ? "-" : it->second);
    }
    grid.push_back(std::move(row));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& r : grid)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());

  out << study << " / " << problem << " [" << label << "]\n";
  for (const auto& r : grid) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "  " : "") << pad(r[i], width[i], true);
    out << '\n';
  }
}

}  // namespace

std::size_t run_study(const StudyConfig& config, StudyKind kind, const std::string& dir, std::ostream& log) {
  const Study study = to_study(config, kind);
  fs::create_directories(fs::path(dir) / "traces");

  std::vector<StoredTrace> traces;
  const auto report = replicate(study, [&](const std::string& m, std::size_t r, const Trace& t) {
    traces.push_back({m, r, t});
  });

  StudyConfig resolved = config;
  resolved.kind = kind;
  {
    std::ofstream cfg(fs::path(dir) / "study.cfg");
    cfg << serialize_config(resolved);
  }
  std::sort(traces.begin(), traces.end(), [](const auto& a, const auto& b) {
    return std::tie(a.method, a.replication) < std::tie(b.method, b.replication);
  });
  for (const auto& t : traces)
    write_trace_csv((fs::path(dir) / "traces" / fmt::format("{}_r{:03}.csv", t.method, t.replication)).string(),
                    t.trace);
  write_summary((fs::path(dir) / "summary.csv").string(), study, report);
  write_timing((fs::path(dir) / "timing.csv").string(), report);
  write_cells((fs::path(dir) / "cells.csv").string(), study, report);
  if (kind == StudyKind::Optimize) write_plot((fs::path(dir) / "plot.csv").string(), report);
  if (kind == StudyKind::Predict) write_boxplot((fs::path(dir) / "boxplot.csv").string(), report);

  std::size_t failed = 0;
  for (const auto& c : report.cells)
    if (!c.error.empty()) ++failed;
  log << fmt::format("{} study on {}: {} runs, {} failed cells, results in {}\n", to_string(kind), study.problem.name,
                     (study.methods.size() + (study.include_oneshot ? 1 : 0)) * study.replications, failed, dir);
  return failed;
}

bool render_report(const std::string& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw std::runtime_error("result directory '" + dir + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "summary.csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) return false;
  bool first = true;
  for (const auto& f : files) {
    const auto table = read_csv(f.string());
    if (table.schema != "amix.summary/1")
      throw std::runtime_error("'" + f.string() + "' is not a summary file (schema '" + table.schema + "')");
    std::string label = fs::relative(f.parent_path(), dir).generic_string();
    if (label.empty() || label == ".") label = fs::path(dir).filename().generic_string();
    if (!first) out << '\n';
    first = false;
    try {
      render_table(table, label, out);
    } catch (const std::exception& e) {
      throw std::runtime_error("'" + f.string() + "': " + e.what());
    }
  }
  return true;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive designs for computer experiments with mixed inputs", "amix"};
  app.require_subcommand(1);

  struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> jobs;
  };
  RunArgs ra;
  std::string report_dir;
  std::map<CLI::App*, StudyKind> kinds;
  for (auto [name, kind, help] : {std::tuple{"optimize", StudyKind::Optimize, "Minimization study"},
                                  std::tuple{"contour", StudyKind::Contour, "Contour estimation study"},
                                  std::tuple{"predict", StudyKind::Predict, "Global prediction study"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", ra.config, "Study config file")->required();
    sub->add_option("--seed", ra.seed, "Override the base seed");
    sub->add_option("--out,-o", ra.out, "Override the output directory");
    sub->add_option("--jobs,-j", ra.jobs, "Concurrent replication runs");
    kinds[sub] = kind;
  }
  auto* report = app.add_subcommand("report", "Render result tables");
  report->add_option("dir", report_dir, "Result directory")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    write_error(err, "usage", e.what());
    return kExitConfig;
  }

  if (report->parsed()) {
    try {
      if (!render_report(report_dir, out)) {
        err << "no results\n";
        return kExitRuntime;
      }
      return kExitOk;
    } catch (const std::exception& e) {
      write_error(err, "runtime", e.what());
      return kExitRuntime;
    }
  }

  for (const auto& [sub, kind] : kinds) {
    if (!sub->parsed()) continue;
    try {
      StudyConfig cfg = load_config(ra.config);
      if (ra.seed) cfg.seed = *ra.seed;
      if (ra.jobs) cfg.jobs = *ra.jobs;
      if (ra.out) cfg.out = *ra.out;
      std::string dir = cfg.out;
      if (dir.empty()) {
        const char* env = std::getenv("AMIX_OUT");
        dir = (fs::path(env && *env ? env : "results") / fs::path(ra.config).stem()).string();
      }
      const auto failed = run_study(cfg, kind, dir, out);
      if (failed) {
        write_error(err, "runtime", fmt::format("{} cells failed; see {}", failed, (fs::path(dir) / "cells.csv").string()));
        return kExitRuntime;
      }
      return kExitOk;
    } catch (const ConfigError& e) {
      write_error(err, "config", e.what(), e.key());
      return kExitConfig;
    } catch (const std::exception& e) {
      write_error(err, "runtime", e.what());
      return kExitRuntime;
    }
  }
  return kExitConfig;
}

}  // namespace amix
