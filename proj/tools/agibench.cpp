#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "agibench/artifact.hpp"
#include "agibench/config.hpp"
#include "agibench/experiment.hpp"
#include "agibench/ingest.hpp"

using namespace agibench;

namespace {

std::string summary_json(const CohortSummary& s) {
  nlohmann::ordered_json j;
  j["resolution_hours"] = s.resolution_hours;
  j["participants"] = s.participants;
  j["participants_with_agitation"] = s.participants_with_agitation;
  j["total_days"] = s.total_days;
  j["observed_days"] = s.observed_days;
  j["daily_missing"] = {{"activity", s.activity_missing},
                        {"physiology", s.physiology_missing},
                        {"sleep", s.sleep_missing}};
  j["daily_missing_observed_days"] = {{"activity", s.activity_missing_observed},
                                      {"physiology", s.physiology_missing_observed},
                                      {"sleep", s.sleep_missing_observed}};
  j["window_missing"] = {{"activity", s.activity_missing_windows}, {"physiology", s.physiology_missing_windows}};
  j["agitation_events"] = s.agitation_events;
  j["agitation_windows"] = s.agitation_windows;
  j["day_quarter_counts"] = s.quarter_counts;
  j["day_quarter_fractions"] = s.quarter_fractions;
  auto per = nlohmann::ordered_json::array();
  for (const auto& p : s.per_participant) {
    per.push_back({{"id", p.id},
                   {"span_days", p.span_days},
                   {"observed_days", p.observed_days},
                   {"activity_missing_days", p.activity_missing_days},
                   {"physiology_missing_days", p.physiology_missing_days},
                   {"sleep_missing_days", p.sleep_missing_days},
                   {"agitation_events", p.agitation_events}});
  }
  j["participants_detail"] = std::move(per);
  return j.dump(2) + "\n";
}

void report_rejected(const CohortStore& cohort) {
  if (cohort.rejected.empty()) return;
  std::cerr << "warning: " << cohort.rejected.size() << " input rows rejected";
  const auto& r = cohort.rejected.front();
  std::cerr << " (first: " << r.file << ":" << r.line << ": " << r.reason << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agibench: agitation prediction benchmark over in-home sensor data"};
  app.require_subcommand(1);

  std::string config_path, model_path, out_dir;
  std::size_t top_m = 24;
  int resolution = 0;
  SyntheticSpec synth;

  auto* validate = app.add_subcommand("validate", "check a run config and exit 0 if valid");
  validate->add_option("config", config_path, "config file")->required();

  auto* run = app.add_subcommand("run", "run the configured experiment and write reports");
  run->add_option("config", config_path, "config file")->required();

  auto* explain = app.add_subcommand("explain", "attribute a fitted tabular model's predictions");
  explain->add_option("config", config_path, "config file")->required();
  explain->add_option("--model", model_path, "model artifact written by `run`")->required();
  explain->add_option("--top-m", top_m, "rows in the summary CSV")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("synth", "write a synthetic cohort as CSV files");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--participants", synth.participants)->check(CLI::PositiveNumber);
  gen->add_option("--days", synth.days)->check(CLI::PositiveNumber);
  gen->add_option("--seed", synth.seed);
  gen->add_option("--agitation-rate", synth.agitation_rate)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--precursor-strength", synth.precursor_strength)->check(CLI::NonNegativeNumber);

  auto* summ = app.add_subcommand("summarize", "print cohort statistics as JSON");
  summ->add_option("config", config_path, "config file")->required();
  summ->add_option("--resolution", resolution, "window resolution, defaults to the config's");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      const RunConfig c = load_run_config(config_path);
      std::cout << "valid: " << config_path << " (config hash " << hex64(c.hash()) << ")\n";
      return 0;
    }
    if (*run) {
      const RunConfig c = load_run_config(config_path);
      const CohortStore cohort = load_config_cohort(c);
      report_rejected(cohort);
      const ExperimentResult res = run_experiment(c, cohort, c.workers);
      const auto files = write_experiment(res, c.output_dir);
      std::cout << summary_table(res);
      std::cout << "wrote " << files.size() << " files to " << c.output_dir << "\n";
      return 0;
    }
    if (*explain) {
      const RunConfig c = load_run_config(config_path);
      const ModelArtifact artifact = read_artifact(model_path);
      const CohortStore cohort = load_config_cohort(c);
      report_rejected(cohort);
      const ExplainResult r = run_explain(c, cohort, artifact, top_m, c.workers);
      const std::string dir = (std::filesystem::path(c.output_dir) / "explain").string();
      write_explain(r, c, dir);
      for (std::size_t k = 0; k < r.top_m; ++k) {
        const auto& f = r.ranking[k];
        std::printf("%3zu  %-32s %.6f  %+.3f\n", f.rank, f.name.c_str(), f.mean_abs, f.direction);
      }
      std::cout << "wrote attribution report to " << dir << "\n";
      return 0;
    }
    if (*gen) {
      if (synth.participants < 1 || synth.days < 1) {
        fail(ErrorKind::config, "invalid-spec", "participants and days must be positive");
      }
      const SyntheticCohort sc = generate_synthetic(synth);
      write_cohort_csv(sc.cohort, out_dir);
      write_manifest(sc.manifest, (std::filesystem::path(out_dir) / "manifest.json").string());
      std::cout << "wrote " << sc.cohort.participants.size() << " participants, " << sc.cohort.activity_count()
                << " activity events, " << sc.manifest.episodes.size() << " agitation episodes to " << out_dir
                << "\n";
      return 0;
    }
    if (*summ) {
      const RunConfig c = load_run_config(config_path);
      const CohortStore cohort = load_config_cohort(c);
      report_rejected(cohort);
      const int res = resolution > 0 ? resolution : c.resolution_hours;
      if (res != 6 && res != 12 && res != 24) {
        fail(ErrorKind::config, "bad-resolution", "resolution must be one of 6, 12, 24");
      }
      std::cout << summary_json(summarize(cohort, res));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
