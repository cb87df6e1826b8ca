#include "tutorweb/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "tutorweb/anova_report.hpp"
#include "tutorweb/content_document.hpp"
#include "tutorweb/error.hpp"
#include "tutorweb/seed.hpp"
#include "tutorweb/service.hpp"
#include "tutorweb/trial_sim.hpp"

namespace tutorweb::cli {

namespace {

std::atomic<bool> g_stop_requested{false};

void on_signal(int) { g_stop_requested = true; }

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

struct SimulateOptions {
  SimParams params;
  int reps = 1;
  double alpha = 0.05;
  std::string out;
};

struct AnalyzeOptions {
  std::string in;
  std::string out;
  double alpha = 0.05;
};

struct DataDirOptions {
  std::string data_dir;
  std::string file;
  std::string lecture;
  double k = 8.0;
  std::uint64_t seed = 0;
  int port = 8080;
  std::string host = "0.0.0.0";
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::StorageFailure, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorCode::StorageFailure, "short write to " + path);
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
  if (opt.reps < 1) throw Error(ErrorCode::InvalidParams, "--reps must be >= 1");
  const auto first = run_trial(opt.params, opt.alpha);
  if (!opt.out.empty()) {
    write_text(opt.out, write_trial_records(first.data));
    const nlohmann::json manifest = {{"seed", opt.params.seed}, {"params", opt.params.to_json()},
                                     {"records", first.data.size()}};
    write_text(opt.out + ".manifest.json", manifest.dump(2) + "\n");
    out << "wrote " << first.data.size() << " records to " << opt.out << "\n";
  }
  if (opt.reps == 1) {
    if (opt.out.empty()) out << write_trial_records(first.data);
    return 0;
  }
  std::map<std::string, int> rejections;
  std::map<std::string, int> removals;
  for (int r = 0; r < opt.reps; ++r) {
    SimParams p = opt.params;
    p.seed = r == 0 ? opt.params.seed : mix_seed(opt.params.seed, static_cast<std::uint64_t>(r));
    const auto result = r == 0 ? first : run_trial(p, opt.alpha);
    for (const auto& row : result.table.rows) {
      if (row.p && *row.p < opt.alpha) ++rejections[row.term];
    }
    for (const auto& step : result.elimination.trace) ++removals[step.term];
  }
  out << "replications: " << opt.reps << "  alpha: " << opt.alpha << "\n";
  out << "term                 reject-rate  removed-rate\n";
  for (const auto& term : ModelSpec::crossover().terms) {
    const auto label = term.label();
    char line[128];
    std::snprintf(line, sizeof line, "%-20s %11.4f  %12.4f\n", label.c_str(),
                  static_cast<double>(rejections[label]) / opt.reps,
                  static_cast<double>(removals[label]) / opt.reps);
    out << line;
  }
  return 0;
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out) {
  const auto records = read_trial_records(read_file(opt.in));
  const auto frame = to_frame(records);
  const auto spec = ModelSpec::crossover();
  const auto elimination = backward_eliminate(frame, spec, opt.alpha);

  out << "Sequential ANOVA (" << records.size() << " records)\n"
      << format_anova_table(elimination.initial) << "\n"
      << "Backward elimination (alpha = " << opt.alpha << ")\n"
      << format_elimination(elimination) << "\n"
      << format_anova_table(elimination.reduced);

  nlohmann::json record = {{"records", records.size()},
                           {"alpha", opt.alpha},
                           {"table", to_json(elimination.initial)},
                           {"elimination", to_json(elimination)}};
  // Treatment contrast in the main-effects model, before any removal of treatment.
  try {
    const auto ci = treatment_confint(frame, spec.without("treatment:math"));
    char line[160];
    std::snprintf(line, sizeof line, "\ntreatment (tutorweb - traditional): %.4f, 95%% CI (%.4f, %.4f)\n",
                  ci.estimate, ci.lo, ci.hi);
    out << line;
    record["treatment_ci"] = to_json(ci);
  } catch (const Error& e) {
    out << "\ntreatment contrast not estimable: " << e.what() << "\n";
    record["treatment_ci"] = nullptr;
  }
  if (!opt.out.empty()) write_text(opt.out, record.dump(2) + "\n");
  return 0;
}

int cmd_import(const DataDirOptions& opt, std::ostream& out) {
  const auto doc = ContentDocument::load(opt.file);
  if (const auto violations = doc.tree.validate(); !violations.empty()) {
    throw Error(ErrorCode::ParseError, "invalid tree: " + violations.front());
  }
  std::filesystem::create_directories(opt.data_dir);
  const auto log = QuizService::log_path(opt.data_dir);
  if (std::filesystem::exists(log)) {
    replay_log(parse_log(read_file(log)), doc.items, AllocationPolicy{});
  }
  doc.save(QuizService::content_path(opt.data_dir));
  out << "imported " << doc.tree.size() << " nodes and " << doc.items.size() << " items into "
      << opt.data_dir << "\n";
  return 0;
}

int cmd_export(const DataDirOptions& opt, std::ostream& out) {
  const auto doc = ContentDocument::load(QuizService::content_path(opt.data_dir));
  const std::string text = doc.to_json().dump(2) + "\n";
  if (opt.file.empty()) {
    out << text;
  } else {
    write_text(opt.file, text);
  }
  return 0;
}

int cmd_stats(const DataDirOptions& opt, std::ostream& out) {
  AllocationPolicy policy;
  policy.k = opt.k;
  const auto doc = ContentDocument::load(QuizService::content_path(opt.data_dir));
  if (!doc.tree.is_lecture(opt.lecture)) throw Error(ErrorCode::UnknownLecture, opt.lecture);
  const auto log = QuizService::log_path(opt.data_dir);
  AllocationEngine engine(doc.items, policy);
  if (std::filesystem::exists(log)) {
    engine.restore(replay_log(parse_log(read_file(log)), doc.items, policy));
  }
  const auto ranked = engine.rank_items(opt.lecture);
  char line[200];
  std::snprintf(line, sizeof line, "%5s  %-24s %9s %8s %8s %10s\n", "rank", "question", "allocated", "answered",
                "correct", "difficulty");
  out << line;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto s = engine.state().stats.get(ranked[r]);
    std::snprintf(line, sizeof line, "%5zu  %-24s %9llu %8llu %8llu %10.4f\n", r + 1, ranked[r].c_str(),
                  static_cast<unsigned long long>(s.times_allocated),
                  static_cast<unsigned long long>(s.times_answered),
                  static_cast<unsigned long long>(s.times_correct), engine.difficulty_of(ranked[r]).value);
    out << line;
  }
  return 0;
}

int cmd_serve(const DataDirOptions& opt, std::ostream& out) {
  ServiceConfig config;
  config.data_dir = opt.data_dir;
  config.policy.k = opt.k;
  config.seed = opt.seed;
  QuizService service(config);
  HttpFrontend http(service);
  g_stop_requested = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread watcher([&http] {
    while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    http.stop();
  });
  out << "serving " << opt.data_dir << " on " << opt.host << ":" << opt.port << std::endl;
  const bool ok = http.listen(opt.host, opt.port);
  g_stop_requested = true;
  watcher.join();
  if (!ok) throw Error(ErrorCode::StorageFailure, "could not listen on port " + std::to_string(opt.port));
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tutorweb: adaptive quiz engine and crossover trial analysis", "tutorweb"};
  app.require_subcommand(1);

  const std::string default_dir = env_or("TUTORWEB_DATA_DIR", ".");
  const int default_port = std::atoi(env_or("TUTORWEB_PORT", "8080").c_str());

  DataDirOptions serve_opt;
  serve_opt.data_dir = default_dir;
  serve_opt.port = default_port;
  auto* serve = app.add_subcommand("serve", "run the quiz HTTP service");
  serve->add_option("--port", serve_opt.port, "listen port (env TUTORWEB_PORT)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", serve_opt.host, "listen address");
  serve->add_option("--data-dir", serve_opt.data_dir, "content, roster and log directory (env TUTORWEB_DATA_DIR)");
  serve->add_option("--k", serve_opt.k, "allocation PMF concentration")->check(CLI::PositiveNumber);
  serve->add_option("--seed", serve_opt.seed, "allocation seed");

  SimulateOptions sim_opt;
  auto* simulate = app.add_subcommand("simulate", "simulate a crossover trial dataset");
  simulate->add_option("--students", sim_opt.params.n_students, "number of students")->check(CLI::Range(2, 1000000));
  simulate->add_option("--periods", sim_opt.params.n_periods, "crossover periods (fixed at 4)")->check(CLI::Range(4, 4));
  simulate->add_option("--seed", sim_opt.params.seed, "random seed");
  simulate->add_option("--reps", sim_opt.reps, "replications for calibration summaries")->check(CLI::PositiveNumber);
  simulate->add_option("--alpha", sim_opt.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--treatment-effect", sim_opt.params.treatment_effect, "tutor-web effect (score points)");
  simulate->add_option("--math-effect", sim_opt.params.math_effect, "strong-background effect");
  simulate->add_option("--student-sd", sim_opt.params.student_sd, "student offset sd")->check(CLI::NonNegativeNumber);
  simulate->add_option("--noise-sd", sim_opt.params.noise_sd, "residual sd")->check(CLI::NonNegativeNumber);
  simulate->add_option("--baseline", sim_opt.params.baseline, "baseline score");
  simulate->add_option("--out", sim_opt.out, "trial data file to write");

  AnalyzeOptions an_opt;
  auto* analyze = app.add_subcommand("analyze", "fit the crossover ANOVA to a trial data file");
  analyze->add_option("--in", an_opt.in, "trial data file")->required();
  analyze->add_option("--out", an_opt.out, "machine-readable result file");
  analyze->add_option("--alpha", an_opt.alpha, "elimination threshold")->check(CLI::Range(0.0, 1.0));

  DataDirOptions import_opt;
  import_opt.data_dir = default_dir;
  auto* import = app.add_subcommand("import", "import a content file into a data directory");
  import->add_option("--in", import_opt.file, "content file")->required();
  import->add_option("--data-dir", import_opt.data_dir, "data directory");

  DataDirOptions export_opt;
  export_opt.data_dir = default_dir;
  auto* export_cmd = app.add_subcommand("export", "export the content of a data directory");
  export_cmd->add_option("--data-dir", export_opt.data_dir, "data directory");
  export_cmd->add_option("--out", export_opt.file, "output file (stdout if omitted)");

  DataDirOptions stats_opt;
  stats_opt.data_dir = default_dir;
  auto* stats = app.add_subcommand("stats", "per-question difficulty and rank for a lecture");
  stats->add_option("--data-dir", stats_opt.data_dir, "data directory");
  stats->add_option("--lecture", stats_opt.lecture, "lecture id")->required();
  stats->add_option("--k", stats_opt.k, "allocation PMF concentration")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*serve) return cmd_serve(serve_opt, out);
    if (*simulate) return cmd_simulate(sim_opt, out);
    if (*analyze) return cmd_analyze(an_opt, out);
    if (*import) return cmd_import(import_opt, out);
    if (*export_cmd) return cmd_export(export_opt, out);
    if (*stats) return cmd_stats(stats_opt, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace tutorweb::cli
