#include <iostream>

#include "CLI11.hpp"
#include "csnet/pipeline.hpp"
#include "json.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string workdir_override;
  long long seed_override = -1;
  int workers_override = -1;
};

csnet::PipelineConfig resolve_config(const CommonOpts& opts) {
  auto cfg = csnet::PipelineConfig::from_file(opts.config_path);
  if (!opts.workdir_override.empty()) cfg.paths.workdir = opts.workdir_override;
  if (opts.seed_override >= 0)
    cfg.seed = static_cast<std::uint64_t>(opts.seed_override);
  if (opts.workers_override > 0) cfg.workers = opts.workers_override;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_path, "pipeline config (JSON)")
      ->required();
  cmd->add_option("--workdir", opts.workdir_override,
                  "override paths.workdir from the config");
  cmd->add_option("--seed", opts.seed_override, "override the master seed");
  cmd->add_option("--workers", opts.workers_override,
                  "worker threads (default: all cores)");
}

void report_stage_result(const std::string& stage, bool ran) {
  std::cout << stage << (ran ? ": done" : ": skipped (cached)") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"content sharing network toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string embed_mode = "n2v";
  std::string protocol = "holdout";

  auto* ingest = app.add_subcommand("ingest", "load and normalize the corpus");
  add_common(ingest, opts);
  auto* build_csn = app.add_subcommand(
      "build-csn", "find shared article pairs and build the source graph");
  add_common(build_csn, opts);
  auto* hcnf = app.add_subcommand(
      "hcnf", "community detection and per-source network features");
  add_common(hcnf, opts);
  auto* embed = app.add_subcommand("embed", "train source embeddings");
  add_common(embed, opts);
  embed->add_option("--mode", embed_mode, "n2v or nt2v")
      ->check(CLI::IsMember({"n2v", "nt2v"}));
  auto* features =
      app.add_subcommand("features", "per-article text feature matrices");
  add_common(features, opts);
  auto* train =
      app.add_subcommand("train", "train classifiers on the full pool");
  add_common(train, opts);
  auto* evaluate = app.add_subcommand("evaluate", "run an evaluation protocol");
  add_common(evaluate, opts);
  evaluate->add_option("--protocol", protocol,
                       "holdout, loso, conditional or error-dist");
  auto* temporal = app.add_subcommand(
      "temporal", "first-month training with rolling evaluation slices");
  add_common(temporal, opts);
  auto* report =
      app.add_subcommand("report", "aggregate stage summaries into one file");
  add_common(report, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = resolve_config(opts);
    csnet::Pipeline pipeline(cfg);
    if (ingest->parsed())
      report_stage_result("ingest", pipeline.ingest());
    else if (build_csn->parsed())
      report_stage_result("build-csn", pipeline.build_csn_stage());
    else if (hcnf->parsed())
      report_stage_result("hcnf", pipeline.hcnf_stage());
    else if (embed->parsed())
      report_stage_result("embed-" + embed_mode,
                          pipeline.embed_stage(embed_mode == "nt2v"
                                                   ? csnet::EmbedMode::NT2V
                                                   : csnet::EmbedMode::N2V));
    else if (features->parsed())
      report_stage_result("features", pipeline.features_stage());
    else if (train->parsed())
      report_stage_result("train", pipeline.train_stage());
    else if (evaluate->parsed())
      report_stage_result("evaluate-" + protocol,
                          pipeline.evaluate_stage(protocol));
    else if (temporal->parsed())
      report_stage_result("temporal", pipeline.temporal_stage());
    else if (report->parsed())
      report_stage_result("report", pipeline.report_stage());
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    err["command"] = argc > 1 ? argv[1] : "";
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
