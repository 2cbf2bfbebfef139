// dualgda: ANOVA-ranked morphometric features, per-hemisphere Gaussian
// discriminant classifiers with OR fusion, incremental F1-driven feature
// selection, tenfold cross-validation and a held-out test split.
//
// Subcommands: synth, ingest, rank, select, run, grid. Every output lands in
// the --out directory under a stable file name; every run is deterministic
// in --seed. Errors are reported as one-line JSON on stdout with exit codes
// 0 (success), 2 (usage/IO), 3 (data validation), 4 (numerical).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dualgda/csv.hpp"
#include "dualgda/pipeline.hpp"
#include "dualgda/synth.hpp"

namespace {

using dualgda::Json;

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";
  std::string config_path;
  std::string schema_mode = "strict";
};

dualgda::SchemaMode schema_mode_of(const GlobalOptions& g) {
  if (g.schema_mode == "strict") return dualgda::SchemaMode::Strict175;
  if (g.schema_mode == "infer") return dualgda::SchemaMode::Infer;
  dualgda::raise(dualgda::Errc::Usage,
                 "unknown schema mode '" + g.schema_mode + "' (expected strict or infer)");
}

Json load_config_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    dualgda::raise(dualgda::Errc::IoError, "cannot open config file '" + path + "'");
  }
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    dualgda::raise(dualgda::Errc::Usage, std::string("config is not valid JSON: ") + e.what());
  }
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    dualgda::raise(dualgda::Errc::IoError, "cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out) {
    dualgda::raise(dualgda::Errc::IoError, "failed writing '" + path.string() + "'");
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::filesystem::path ensure_out_dir(const GlobalOptions& g) {
  std::filesystem::path dir(g.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    dualgda::raise(dualgda::Errc::IoError,
                   "cannot create output directory '" + dir.string() + "': " + ec.message());
  }
  return dir;
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(const GlobalOptions& g) {
  dualgda::CohortSpec spec;
  if (!g.config_path.empty()) {
    spec = dualgda::cohort_spec_from_json(load_config_json(g.config_path));
  }
  if (g.seed_set) spec.seed = g.seed;
  const dualgda::FeatureTable table = dualgda::generate(spec);
  const auto dir = ensure_out_dir(g);
  dualgda::write_csv(table, (dir / "cohort.csv").string());
  write_json_file(dir / "cohort_spec.json", dualgda::cohort_spec_to_json(spec));
  const auto counts = table.count_by_diagnosis();
  std::cout << Json{{"written", (dir / "cohort.csv").string()},
                    {"subjects", table.size()},
                    {"by_class", {{"CN", counts[0]}, {"MCI", counts[1]}, {"AD", counts[2]}}},
                    {"generator", dualgda::Rng::kGeneratorId},
                    {"seed", spec.seed}}
                   .dump()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// ingest

int cmd_ingest(const GlobalOptions& g, const std::string& input) {
  const dualgda::FeatureTable raw = dualgda::load_csv(input, schema_mode_of(g));
  const dualgda::CleanResult cleaned =
      dualgda::clean(raw, dualgda::CleanPolicy::DropZeroSubjects);
  const auto dir = ensure_out_dir(g);
  dualgda::write_csv(cleaned.table, (dir / "cleaned.csv").string());
  write_text_file(dir / "removals.jsonl",
                  dualgda::removals_to_jsonl(cleaned.table.provenance().removals));
  const auto counts = cleaned.table.count_by_diagnosis();
  std::cout << Json{{"written", (dir / "cleaned.csv").string()},
                    {"kept", cleaned.table.size()},
                    {"removed", cleaned.removed.size()},
                    {"by_class", {{"CN", counts[0]}, {"MCI", counts[1]}, {"AD", counts[2]}}}}
                   .dump()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// rank

int cmd_rank(const GlobalOptions& g, const std::string& input, const std::string& hemisphere,
             const std::string& grouping, double los) {
  const dualgda::FeatureTable raw = dualgda::load_csv(input, schema_mode_of(g));
  const dualgda::CleanResult cleaned =
      dualgda::clean(raw, dualgda::CleanPolicy::DropZeroSubjects);
  const dualgda::Hemisphere h = dualgda::parse_hemisphere(hemisphere);
  const dualgda::Grouping grp = grouping == "all"
                                    ? dualgda::Grouping::all_three()
                                    : dualgda::Grouping::pairwise(dualgda::parse_comparison(grouping));
  const dualgda::RankedFeatureList ranked =
      dualgda::rank_features(cleaned.table, h, grp, los);
  const auto dir = ensure_out_dir(g);
  write_json_file(dir / "rank.json", dualgda::ranked_list_to_json(ranked, cleaned.table.schema()));
  std::cout << Json{{"written", (dir / "rank.json").string()},
                    {"features", ranked.scores.size()},
                    {"significant", ranked.significant_count()},
                    {"los", los}}
                   .dump()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run / select / grid share config assembly

struct PipelineFlags {
  std::string input;
  std::string comparison = "cn-mci";
  std::string ranking = "local";
  std::string classifier = "local";
  double los = -1.0;
  int folds = -1;
  double holdout_fraction = -1.0;
  std::string strategy;
  std::int64_t patience = -1;
  std::string covariance;
  double shrinkage = -1.0;
  std::string priors;
  bool unbiased = false;
  bool comparison_set = false;
  bool ranking_set = false;
  bool classifier_set = false;
  bool unbiased_set = false;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f, bool with_cell_axes) {
  cmd->add_option("--input,-i", f.input, "cohort CSV file")->required();
  if (with_cell_axes) {
    cmd->add_option("--comparison", f.comparison, "cn-mci, cn-ad or mci-ad")
        ->check(CLI::IsMember({"cn-mci", "cn-ad", "mci-ad"}))
        ->each([&f](const std::string&) { f.comparison_set = true; });
    cmd->add_option("--ranking", f.ranking, "feature ranking mode: local or global")
        ->check(CLI::IsMember({"local", "global"}))
        ->each([&f](const std::string&) { f.ranking_set = true; });
    cmd->add_option("--classifier", f.classifier, "classifier mode: local or global")
        ->check(CLI::IsMember({"local", "global"}))
        ->each([&f](const std::string&) { f.classifier_set = true; });
  }
  cmd->add_option("--los", f.los, "level of significance (default 0.01)");
  cmd->add_option("--folds", f.folds, "cross-validation folds (default 10)");
  cmd->add_option("--holdout-fraction", f.holdout_fraction,
                  "held-out test fraction (default 0.2)");
  cmd->add_option("--strategy", f.strategy,
                  "selection strategy: greedy_keep_if_improves or prefix_argmax")
      ->check(CLI::IsMember({"greedy_keep_if_improves", "prefix_argmax"}));
  cmd->add_option("--patience", f.patience,
                  "stop after this many consecutive non-improving phases (default: never)");
  cmd->add_option("--covariance", f.covariance, "covariance mode: per_class or shared")
      ->check(CLI::IsMember({"per_class", "shared"}));
  cmd->add_option("--shrinkage", f.shrinkage, "covariance shrinkage lambda (default 1e-4)");
  cmd->add_option("--priors", f.priors, "class priors: empirical or uniform")
      ->check(CLI::IsMember({"empirical", "uniform"}));
  cmd->add_flag("--unbiased", f.unbiased, "use n-1 covariance denominators")
      ->each([&f](const std::string&) { f.unbiased_set = true; });
}

/// Config file first, then flags on top (flags win), per the documented
/// precedence.
dualgda::RunConfig assemble_config(const GlobalOptions& g, const PipelineFlags& f) {
  dualgda::RunConfig c;
  if (!g.config_path.empty()) c = dualgda::run_config_from_json(load_config_json(g.config_path));
  if (!f.input.empty()) c.input = f.input;
  if (f.comparison_set) c.comparison = dualgda::parse_comparison(f.comparison);
  if (f.ranking_set) c.ranking = dualgda::parse_ranking_mode(f.ranking);
  if (f.classifier_set) c.classifier = dualgda::parse_classifier_mode(f.classifier);
  if (f.los >= 0.0) c.los = f.los;
  if (f.folds > 0) c.folds = f.folds;
  if (f.holdout_fraction > 0.0) c.holdout_fraction = f.holdout_fraction;
  if (!f.strategy.empty()) c.strategy = dualgda::parse_selection_strategy(f.strategy);
  if (f.patience >= 0) c.patience = static_cast<std::size_t>(f.patience);
  if (!f.covariance.empty()) c.gda.covariance_mode = dualgda::parse_covariance_mode(f.covariance);
  if (f.shrinkage >= 0.0) c.gda.shrinkage = f.shrinkage;
  if (!f.priors.empty()) c.gda.prior_mode = dualgda::parse_prior_mode(f.priors);
  if (f.unbiased_set) c.gda.unbiased = f.unbiased;
  if (g.seed_set) c.seed = g.seed;
  c.out_dir = g.out_dir;
  if (c.input.empty()) {
    dualgda::raise(dualgda::Errc::Usage, "no input file given (use --input or the config file)");
  }
  return c;
}

dualgda::PreparedData load_and_prepare(const GlobalOptions& g, const dualgda::RunConfig& config) {
  const dualgda::FeatureTable raw = dualgda::load_csv(config.input, schema_mode_of(g));
  return dualgda::prepare(raw, config);
}

int cmd_run(const GlobalOptions& g, const PipelineFlags& f, bool trajectory_only) {
  const dualgda::RunConfig config = assemble_config(g, f);
  const dualgda::PreparedData data = load_and_prepare(g, config);
  const dualgda::CellResult cell = dualgda::run_cell(data, config);
  const auto dir = ensure_out_dir(g);

  write_json_file(dir / "trajectory.json",
                  dualgda::selection_outcome_to_json(cell.selection, cell.schema));
  if (!trajectory_only) {
    write_json_file(dir / "report.json",
                    dualgda::report_to_json(cell, "trajectory.json", data.removed.size()));
    write_json_file(dir / "model.json", dualgda::dual_model_to_json(cell.model));
    write_text_file(dir / "removals.jsonl",
                    dualgda::removals_to_jsonl(data.full.provenance().removals));
  }

  std::cout << Json{{"comparison", dualgda::comparison_name(config.comparison)},
                    {"ranking", dualgda::ranking_mode_name(config.ranking)},
                    {"classifier", dualgda::classifier_mode_name(config.classifier)},
                    {"cv_f1", cell.cv.metrics.f1},
                    {"holdout_f1", cell.holdout.metrics.f1},
                    {"subset_sizes",
                     {{"left", cell.selection.left_subset.size()},
                      {"right", cell.selection.right_subset.size()}}},
                    {"out", dir.string()}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_grid(const GlobalOptions& g, const PipelineFlags& f) {
  const dualgda::RunConfig base = assemble_config(g, f);
  const dualgda::PreparedData data = load_and_prepare(g, base);
  const std::vector<dualgda::GridCell> cells = dualgda::run_grid(data, base);
  const auto dir = ensure_out_dir(g);
  write_json_file(dir / "grid.json", dualgda::grid_to_json(cells, base));
  const std::string table = dualgda::grid_to_text(cells);
  write_text_file(dir / "grid.txt", table);
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ANOVA-ranked dual-hemisphere Gaussian discriminant pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed (default 0)")
      ->each([&g](const std::string&) { g.seed_set = true; });
  app.add_option("--out,-o", g.out_dir, "output directory (default .)");
  app.add_option("--config,-c", g.config_path, "JSON config file; flags override it");
  app.add_option("--schema", g.schema_mode, "CSV schema mode: strict (7x25) or infer")
      ->check(CLI::IsMember({"strict", "infer"}));

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic cohort CSV");

  std::string ingest_input;
  CLI::App* ingest = app.add_subcommand("ingest", "validate and clean a cohort CSV");
  ingest->add_option("--input,-i", ingest_input, "cohort CSV file")->required();

  std::string rank_input, rank_hemisphere = "left", rank_grouping = "all";
  double rank_los = 0.01;
  CLI::App* rank = app.add_subcommand("rank", "ANOVA-rank the features of one hemisphere");
  rank->add_option("--input,-i", rank_input, "cohort CSV file")->required();
  rank->add_option("--hemisphere", rank_hemisphere, "left or right")
      ->check(CLI::IsMember({"left", "right"}));
  rank->add_option("--grouping", rank_grouping, "cn-mci, cn-ad, mci-ad or all")
      ->check(CLI::IsMember({"cn-mci", "cn-ad", "mci-ad", "all"}));
  rank->add_option("--los", rank_los, "level of significance (default 0.01)");

  PipelineFlags select_flags;
  CLI::App* select = app.add_subcommand(
      "select", "rank and select feature subsets, writing the trajectory");
  add_pipeline_flags(select, select_flags, true);

  PipelineFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "full pipeline for one experiment cell");
  add_pipeline_flags(run, run_flags, true);

  PipelineFlags grid_flags;
  CLI::App* grid = app.add_subcommand(
      "grid", "all 12 cells: 3 comparisons x 2 rankings x 2 classifiers");
  add_pipeline_flags(grid, grid_flags, false);

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(g);
    if (ingest->parsed()) return cmd_ingest(g, ingest_input);
    if (rank->parsed()) return cmd_rank(g, rank_input, rank_hemisphere, rank_grouping, rank_los);
    if (select->parsed()) return cmd_run(g, select_flags, /*trajectory_only=*/true);
    if (run->parsed()) return cmd_run(g, run_flags, /*trajectory_only=*/false);
    if (grid->parsed()) return cmd_grid(g, grid_flags);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << Json{{"error", "usage"}, {"type", "cli_parse"}, {"message", e.what()}}.dump()
              << "\n";
    return 2;
  } catch (const dualgda::Error& e) {
    const dualgda::ErrorClass cls = dualgda::errc_class(e.code());
    std::cout << Json{{"error", dualgda::error_class_name(cls)},
                      {"type", dualgda::errc_name(e.code())},
                      {"message", e.what()}}
                     .dump()
              << "\n";
    return dualgda::error_class_exit_code(cls);
  } catch (const std::exception& e) {
    std::cout << Json{{"error", "numeric"}, {"type", "internal"}, {"message", e.what()}}.dump()
              << "\n";
    return 4;
  }
}
