#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dualgda/anova.hpp"
#include "dualgda/cv.hpp"
#include "dualgda/dual.hpp"
#include "dualgda/errors.hpp"
#include "dualgda/gda.hpp"
#include "dualgda/selection.hpp"
#include "dualgda/serialize.hpp"
#include "dualgda/table.hpp"

namespace dualgda {

/// local = pairwise ANOVA per comparison; global = all-three-group ANOVA
/// shared by every comparison.
enum class RankingMode { Local, Global };

/// local = per-hemisphere incremental selection, fused afterwards;
/// global = combined selection over the union of both hemispheres' features.
enum class ClassifierMode { Local, Global };

inline const char* ranking_mode_name(RankingMode m) {
  return m == RankingMode::Local ? "local" : "global";
}

inline RankingMode parse_ranking_mode(const std::string& s) {
  if (s == "local") return RankingMode::Local;
  if (s == "global") return RankingMode::Global;
  raise(Errc::Usage, "unknown ranking mode '" + s + "' (expected local or global)");
}

inline const char* classifier_mode_name(ClassifierMode m) {
  return m == ClassifierMode::Local ? "local" : "global";
}

inline ClassifierMode parse_classifier_mode(const std::string& s) {
  if (s == "local") return ClassifierMode::Local;
  if (s == "global") return ClassifierMode::Global;
  raise(Errc::Usage, "unknown classifier mode '" + s + "' (expected local or global)");
}

struct RunConfig {
  std::string input;
  Comparison comparison = Comparison::CnVsMci;
  RankingMode ranking = RankingMode::Local;
  ClassifierMode classifier = ClassifierMode::Local;
  double los = 0.01;
  int folds = 10;
  double holdout_fraction = 0.2;
  SelectionStrategy strategy = SelectionStrategy::GreedyKeepIfImproves;
  std::size_t patience = std::numeric_limits<std::size_t>::max();
  GdaConfig gda;
  CleanPolicy clean_policy = CleanPolicy::DropZeroSubjects;
  double zero_tolerance = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";

  SelectionConfig selection_config() const {
    SelectionConfig c;
    c.strategy = strategy;
    c.patience = patience;
    c.folds = folds;
    c.seed = seed;
    c.gda = gda;
    return c;
  }
};

inline Json run_config_to_json(const RunConfig& c) {
  Json j{{"input", c.input},
         {"comparison", comparison_name(c.comparison)},
         {"ranking", ranking_mode_name(c.ranking)},
         {"classifier", classifier_mode_name(c.classifier)},
         {"los", c.los},
         {"folds", c.folds},
         {"holdout_fraction", c.holdout_fraction},
         {"strategy", selection_strategy_name(c.strategy)},
         {"gda", gda_config_to_json(c.gda)},
         {"clean_policy", c.clean_policy == CleanPolicy::DropZeroSubjects ? "drop_zero_subjects"
                                                                          : "keep_all"},
         {"zero_tolerance", c.zero_tolerance},
         {"seed", c.seed}};
  // Unlimited patience serializes as null rather than a 2^64 magic number.
  if (c.patience == std::numeric_limits<std::size_t>::max()) {
    j["patience"] = nullptr;
  } else {
    j["patience"] = c.patience;
  }
  return j;
}

inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  if (j.contains("input")) c.input = j.at("input").get<std::string>();
  if (j.contains("comparison")) c.comparison = parse_comparison(j.at("comparison").get<std::string>());
  if (j.contains("ranking")) c.ranking = parse_ranking_mode(j.at("ranking").get<std::string>());
  if (j.contains("classifier")) {
    c.classifier = parse_classifier_mode(j.at("classifier").get<std::string>());
  }
  if (j.contains("los")) c.los = j.at("los").get<double>();
  if (j.contains("folds")) c.folds = j.at("folds").get<int>();
  if (j.contains("holdout_fraction")) c.holdout_fraction = j.at("holdout_fraction").get<double>();
  if (j.contains("strategy")) {
    c.strategy = parse_selection_strategy(j.at("strategy").get<std::string>());
  }
  if (j.contains("patience") && !j.at("patience").is_null()) {
    c.patience = j.at("patience").get<std::size_t>();
  }
  if (j.contains("gda")) c.gda = gda_config_from_json(j.at("gda"));
  if (j.contains("clean_policy")) {
    const auto s = j.at("clean_policy").get<std::string>();
    if (s == "drop_zero_subjects") {
      c.clean_policy = CleanPolicy::DropZeroSubjects;
    } else if (s == "keep_all") {
      c.clean_policy = CleanPolicy::KeepAll;
    } else {
      raise(Errc::Usage, "unknown clean policy '" + s + "'");
    }
  }
  if (j.contains("zero_tolerance")) c.zero_tolerance = j.at("zero_tolerance").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

/// Cleaned data with the one holdout split shared by every pipeline cell.
/// Ranking and selection only ever see `train`; `holdout` is first touched
/// by evaluate_holdout.
struct PreparedData {
  FeatureTable full;
  FeatureTable train;
  FeatureTable holdout;
  std::vector<std::string> removed;
};

inline PreparedData prepare(const FeatureTable& raw, const RunConfig& config) {
  CleanResult cleaned = clean(raw, config.clean_policy, config.zero_tolerance);
  HoldoutSplit split = split_holdout(cleaned.table, config.holdout_fraction, config.seed);
  return PreparedData{std::move(cleaned.table), std::move(split.train), std::move(split.test),
                      std::move(cleaned.removed)};
}

/// Selection outcome of one cell: the combined trajectory (global mode) or
/// one trajectory per hemisphere (local mode; a hemisphere with no
/// significant features is skipped and contributes an empty subset).
struct SelectionOutcome {
  ClassifierMode mode = ClassifierMode::Local;
  std::optional<SelectionTrajectory> combined;
  std::optional<SelectionTrajectory> left;
  std::optional<SelectionTrajectory> right;
  std::vector<std::size_t> left_subset;
  std::vector<std::size_t> right_subset;
};

inline Json selection_outcome_to_json(const SelectionOutcome& s, const Schema& schema) {
  return Json{{"mode", classifier_mode_name(s.mode)},
              {"combined", s.combined ? trajectory_to_json(*s.combined, schema) : Json(nullptr)},
              {"left", s.left ? trajectory_to_json(*s.left, schema) : Json(nullptr)},
              {"right", s.right ? trajectory_to_json(*s.right, schema) : Json(nullptr)}};
}

struct CellResult {
  RunConfig config;
  Schema schema;
  RankedFeatureList ranked_left;
  RankedFeatureList ranked_right;
  SelectionOutcome selection;
  DualSpaceModel model;
  CvResult cv;
  HoldoutResult holdout;
  std::size_t train_subjects = 0;
  std::size_t holdout_subjects = 0;
};

namespace detail {

/// Local-mode helper: select on one hemisphere, treating "nothing
/// significant" as an empty subset rather than a hard error (the other
/// hemisphere may still carry the model).
inline std::optional<SelectionTrajectory> try_select_local(const FeatureTable& train, Hemisphere h,
                                                           const RankedFeatureList& ranked,
                                                           const SelectionConfig& config) {
  if (ranked.significant().empty()) return std::nullopt;
  return select_local(train, h, ranked, config);
}

/// The selection scorer and the public CV path must agree bit-for-bit; a
/// mismatch means the two fitting paths diverged, which is a bug, not data.
inline void check_cv_matches_trajectory(double cv_f1, double trajectory_f1) {
  if (cv_f1 != trajectory_f1) {
    throw std::logic_error("pipeline: cross-validated F1 (" + std::to_string(cv_f1) +
                           ") does not reproduce the selection trajectory's best F1 (" +
                           std::to_string(trajectory_f1) + ")");
  }
}

}  // namespace detail

/// One experiment cell: rank on the training split, select feature subsets,
/// fit the dual model, cross-validate it, and score the held-out subjects.
inline CellResult run_cell(const PreparedData& data, const RunConfig& config) {
  CellResult cell;
  cell.config = config;
  cell.schema = data.train.schema();

  // Ranking sees only the training split. Pairwise grouping ignores the
  // third class; all-three grouping requires it.
  const Grouping grouping = config.ranking == RankingMode::Local
                                ? Grouping::pairwise(config.comparison)
                                : Grouping::all_three();
  cell.ranked_left = rank_features(data.train, Hemisphere::Left, grouping, config.los);
  cell.ranked_right = rank_features(data.train, Hemisphere::Right, grouping, config.los);

  const FeatureTable train2 = subset_pair(data.train, config.comparison);
  const SelectionConfig scfg = config.selection_config();

  SelectionOutcome& sel = cell.selection;
  sel.mode = config.classifier;
  if (config.classifier == ClassifierMode::Global) {
    sel.combined = select_global(train2, cell.ranked_left, cell.ranked_right, scfg);
    sel.left_subset = sel.combined->left_subset;
    sel.right_subset = sel.combined->right_subset;
  } else {
    sel.left = detail::try_select_local(train2, Hemisphere::Left, cell.ranked_left, scfg);
    sel.right = detail::try_select_local(train2, Hemisphere::Right, cell.ranked_right, scfg);
    if (!sel.left && !sel.right) {
      raise(Errc::NoSignificantFeatures,
            "no significant features on either hemisphere at los=" + std::to_string(config.los));
    }
    if (sel.left) sel.left_subset = sel.left->left_subset;
    if (sel.right) sel.right_subset = sel.right->right_subset;
  }

  cell.model = fit_dual(train2, sel.left_subset, sel.right_subset, config.gda);

  const FoldAssignment folds = make_folds(train2, config.folds, config.seed);
  cell.cv = cross_validate(train2, DualRecipe{sel.left_subset, sel.right_subset, config.gda}, folds);
  if (config.classifier == ClassifierMode::Global) {
    detail::check_cv_matches_trajectory(cell.cv.metrics.f1, sel.combined->best_cv_f1);
  } else {
    // Per-hemisphere reproduction: a one-sided dual model decides exactly
    // like the underlying GDA, so each trajectory's best F1 must come back
    // through the public CV path.
    if (sel.left && !sel.left_subset.empty()) {
      const CvResult left_cv =
          cross_validate(train2, DualRecipe{sel.left_subset, {}, config.gda}, folds);
      detail::check_cv_matches_trajectory(left_cv.metrics.f1, sel.left->best_cv_f1);
    }
    if (sel.right && !sel.right_subset.empty()) {
      const CvResult right_cv =
          cross_validate(train2, DualRecipe{{}, sel.right_subset, config.gda}, folds);
      detail::check_cv_matches_trajectory(right_cv.metrics.f1, sel.right->best_cv_f1);
    }
  }

  const FeatureTable holdout2 = subset_pair(data.holdout, config.comparison);
  cell.holdout = evaluate_holdout(cell.model, holdout2);
  cell.train_subjects = train2.size();
  cell.holdout_subjects = holdout2.size();
  return cell;
}

inline Json report_to_json(const CellResult& cell, const std::string& trajectory_ref,
                           std::size_t removed_subjects) {
  const auto names = [&cell](Hemisphere h, const std::vector<std::size_t>& subset) {
    Json out = Json::array();
    for (std::size_t i : subset) out.push_back(cell.schema.column_name(h, i));
    return out;
  };
  return Json{{"comparison", comparison_name(cell.config.comparison)},
              {"ranking_mode", ranking_mode_name(cell.config.ranking)},
              {"classifier_mode", classifier_mode_name(cell.config.classifier)},
              {"seed", cell.config.seed},
              {"cv", cv_result_to_json(cell.cv)},
              {"holdout", holdout_result_to_json(cell.holdout)},
              {"subsets",
               {{"left", cell.selection.left_subset},
                {"right", cell.selection.right_subset},
                {"left_features", names(Hemisphere::Left, cell.selection.left_subset)},
                {"right_features", names(Hemisphere::Right, cell.selection.right_subset)}}},
              {"trajectory_ref", trajectory_ref},
              {"config", run_config_to_json(cell.config)},
              {"data",
               {{"train_subjects", cell.train_subjects},
                {"holdout_subjects", cell.holdout_subjects},
                {"removed_subjects", removed_subjects}}}};
}

// ---------------------------------------------------------------------------
// the experiment grid (3 comparisons x 2 rankings x 2 classifiers)

struct GridCell {
  Comparison comparison = Comparison::CnVsMci;
  RankingMode ranking = RankingMode::Local;
  ClassifierMode classifier = ClassifierMode::Local;
  bool ok = false;
  std::string error_kind;
  std::string error_message;
  std::optional<CellResult> result;
};

/// Runs every cell; a failed cell is recorded and the rest keep going.
/// Cells run sequentially in a fixed order (candidate scoring inside each
/// cell is already parallel), so output order never depends on scheduling.
inline std::vector<GridCell> run_grid(const PreparedData& data, const RunConfig& base) {
  std::vector<GridCell> cells;
  for (Comparison cmp : kAllComparisons) {
    for (RankingMode rk : {RankingMode::Local, RankingMode::Global}) {
      for (ClassifierMode cl : {ClassifierMode::Local, ClassifierMode::Global}) {
        GridCell cell;
        cell.comparison = cmp;
        cell.ranking = rk;
        cell.classifier = cl;
        RunConfig config = base;
        config.comparison = cmp;
        config.ranking = rk;
        config.classifier = cl;
        try {
          cell.result = run_cell(data, config);
          cell.ok = true;
        } catch (const Error& e) {
          cell.error_kind = error_class_name(errc_class(e.code()));
          cell.error_message = e.what();
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

inline Json grid_to_json(const std::vector<GridCell>& cells, const RunConfig& base) {
  Json out{{"seed", base.seed}, {"config", run_config_to_json(base)}, {"cells", Json::array()}};
  for (const auto& cell : cells) {
    Json c{{"comparison", comparison_name(cell.comparison)},
           {"ranking", ranking_mode_name(cell.ranking)},
           {"classifier", classifier_mode_name(cell.classifier)},
           {"ok", cell.ok}};
    if (cell.ok) {
      c["cv"] = metrics_to_json(cell.result->cv.metrics);
      c["holdout"] = metrics_to_json(cell.result->holdout.metrics);
      c["subset_sizes"] = Json{{"left", cell.result->selection.left_subset.size()},
                               {"right", cell.result->selection.right_subset.size()}};
      c["error"] = nullptr;
    } else {
      c["cv"] = nullptr;
      c["holdout"] = nullptr;
      c["subset_sizes"] = nullptr;
      c["error"] = Json{{"kind", cell.error_kind}, {"message", cell.error_message}};
    }
    out["cells"].push_back(std::move(c));
  }
  return out;
}

/// Fixed-width text table of the grid, one row per cell: the four CV
/// metrics plus the per-hemisphere subset sizes.
inline std::string grid_to_text(const std::vector<GridCell>& cells) {
  std::string out =
      "comparison  ranking  classifier      f1     acc     sen     spe   left  right\n";
  char line[160];
  for (const auto& cell : cells) {
    if (cell.ok) {
      const Metrics& m = cell.result->cv.metrics;
      std::snprintf(line, sizeof line, "%-10s  %-7s  %-10s  %6.4f  %6.4f  %6.4f  %6.4f  %5zu  %5zu\n",
                    comparison_name(cell.comparison), ranking_mode_name(cell.ranking),
                    classifier_mode_name(cell.classifier), m.f1, m.accuracy, m.sensitivity,
                    m.specificity, cell.result->selection.left_subset.size(),
                    cell.result->selection.right_subset.size());
    } else {
      std::snprintf(line, sizeof line, "%-10s  %-7s  %-10s  failed: %s\n",
                    comparison_name(cell.comparison), ranking_mode_name(cell.ranking),
                    classifier_mode_name(cell.classifier), cell.error_kind.c_str());
    }
    out += line;
  }
  return out;
}

}  // namespace dualgda
