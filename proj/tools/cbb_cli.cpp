// cbb: run contextual batched bandit experiments and summarize their reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cbb/config.hpp"
#include "cbb/harness.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string output;
  std::size_t workers = 0;
  std::optional<std::uint64_t> seed;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "YAML experiment file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--output", o.output, "Output CSV path (overrides experiment.output)");
  cmd->add_option("--workers", o.workers, "Parallel replica workers");
  cmd->add_option("--seed", o.seed, "Master seed override");
}

cbb::ExperimentConfig resolve(const Overrides& o) {
  cbb::ExperimentConfig cfg = cbb::load_config(o.config);
  if (!o.output.empty()) cfg.output = o.output;
  if (o.workers > 0) cfg.workers = o.workers;
  if (o.seed) cfg.master_seed = *o.seed;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::filesystem::path sibling(const std::filesystem::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + suffix);
}

int cmd_run(const Overrides& o) {
  const auto cfg = resolve(o);
  const auto report = cbb::run_experiment(cfg);
  const std::filesystem::path out_path(cfg.output);
  {
    auto out = open_out(out_path);
    cbb::write_metrics_csv(report, out);
  }
  {
    auto out = open_out(sibling(out_path, "_timing.csv"));
    cbb::emit_timing(report, out);
  }
  {
    auto out = open_out(sibling(out_path, ".meta.json"));
    out << cbb::metadata_json(cfg);
  }
  std::cout << cbb::format_summary(cbb::compare_report(report));
  std::cerr << "wrote " << out_path.string() << '\n';
  return 0;
}

int cmd_compare(const std::string& report_path) {
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot open '" + report_path + "'");
  const auto report = cbb::read_metrics_csv(in);
  std::cout << cbb::format_summary(cbb::compare_report(report));
  return 0;
}

int cmd_timing(const Overrides& o) {
  const auto cfg = resolve(o);
  const auto report = cbb::run_experiment(cfg);
  if (o.output.empty()) {
    cbb::emit_timing(report, std::cout);
  } else {
    auto out = open_out(o.output);
    cbb::emit_timing(report, out);
  }
  for (const auto& name : report.policies) {
    std::vector<double> update, gram;
    for (const auto& r : report.records) {
      if (r.policy != name) continue;
      update.push_back(r.update_ms_median);
      gram.push_back(r.gram_ms_median);
    }
    std::cerr << name << ": median update " << cbb::format_number(cbb::median_of(update))
              << " ms, median gram " << cbb::format_number(cbb::median_of(gram)) << " ms\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual batched bandits with reward imputation"};
  app.set_version_flag("--version", cbb::version_string());
  app.require_subcommand(1);

  Overrides run_flags;
  auto* run = app.add_subcommand("run", "Run an experiment and write CSV + metadata");
  add_run_flags(run, run_flags);

  std::string report_path;
  auto* compare = app.add_subcommand("compare", "Print the final average-reward table of a report");
  compare->add_option("--report", report_path, "Metrics CSV written by 'run'")
      ->required()
      ->check(CLI::ExistingFile);

  Overrides timing_flags;
  auto* timing = app.add_subcommand("timing", "Run an experiment and emit per-episode update times");
  add_run_flags(timing, timing_flags);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_flags);
    if (*compare) return cmd_compare(report_path);
    if (*timing) return cmd_timing(timing_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
