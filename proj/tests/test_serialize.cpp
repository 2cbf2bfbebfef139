// JSON serialization round-trips. The load-bearing property is that a model
// written to disk and read back classifies bit-identically: nlohmann dumps
// doubles in shortest-round-trip form, so every coefficient must survive the
// text cycle exactly.

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualgda/anova.hpp"
#include "dualgda/dual.hpp"
#include "dualgda/gda.hpp"
#include "dualgda/pipeline.hpp"
#include "dualgda/selection.hpp"
#include "dualgda/serialize.hpp"
#include "dualgda/synth.hpp"
#include "dualgda/table.hpp"
#include "gtest_util.hpp"
#include "test_util.hpp"

namespace {

using dualgda::Json;

Json reparse(const Json& j) { return Json::parse(j.dump()); }

/// CN/AD table (MCI count zero) with a mean shift on the leading features of
/// both hemispheres.
dualgda::FeatureTable binary_table(std::uint64_t seed, std::size_t n_regions, std::size_t n_cn,
                                   std::size_t n_ad, double shift, std::size_t shifted) {
  const dualgda::Schema schema = testutil::small_schema(2, n_regions);
  return testutil::gaussian_table(seed, schema, {n_cn, 0, n_ad}, shift, shifted);
}

TEST(ConfusionJson, RoundTripAndKeys) {
  dualgda::ConfusionMatrix cm{9, 5, 5, 1};
  const Json j = dualgda::confusion_to_json(cm);
  EXPECT_EQ(j.at("tp").get<std::size_t>(), 9u);
  EXPECT_EQ(j.at("fp").get<std::size_t>(), 5u);
  EXPECT_EQ(j.at("tn").get<std::size_t>(), 5u);
  EXPECT_EQ(j.at("fn").get<std::size_t>(), 1u);
  const dualgda::ConfusionMatrix back = dualgda::confusion_from_json(reparse(j));
  EXPECT_EQ(back.tp, cm.tp);
  EXPECT_EQ(back.fp, cm.fp);
  EXPECT_EQ(back.tn, cm.tn);
  EXPECT_EQ(back.fn, cm.fn);
}

TEST(MetricsJson, ShapeAndUndefinedList) {
  const dualgda::ConfusionMatrix cm{9, 5, 5, 1};
  const Json j = dualgda::metrics_to_json(dualgda::metrics_from_confusion(cm));
  EXPECT_DOUBLE_EQ(j.at("f1").get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(j.at("acc").get<double>(), 0.7);
  EXPECT_DOUBLE_EQ(j.at("sen").get<double>(), 0.9);
  EXPECT_DOUBLE_EQ(j.at("spe").get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(j.at("precision").get<double>(), 9.0 / 14.0);
  EXPECT_TRUE(j.at("undefined").is_array());
  EXPECT_TRUE(j.at("undefined").empty());

  // All-negative truth with no positive calls: sensitivity, precision, and
  // f1 are 0/0 and must be flagged.
  const Json degenerate = dualgda::metrics_to_json(
      dualgda::metrics_from_confusion(dualgda::ConfusionMatrix{0, 0, 8, 0}));
  const auto undefined = degenerate.at("undefined").get<std::vector<std::string>>();
  EXPECT_EQ(undefined, (std::vector<std::string>{"f1", "sensitivity", "precision"}));
  EXPECT_DOUBLE_EQ(degenerate.at("f1").get<double>(), 0.0);
}

TEST(GdaConfigJson, RoundTripBothModes) {
  dualgda::GdaConfig c;
  c.covariance_mode = dualgda::CovarianceMode::Shared;
  c.shrinkage = 0.125;
  c.prior_mode = dualgda::PriorMode::Uniform;
  c.unbiased = true;
  const dualgda::GdaConfig back = dualgda::gda_config_from_json(reparse(dualgda::gda_config_to_json(c)));
  EXPECT_EQ(back.covariance_mode, dualgda::CovarianceMode::Shared);
  EXPECT_EQ(back.shrinkage, 0.125);
  EXPECT_EQ(back.prior_mode, dualgda::PriorMode::Uniform);
  EXPECT_TRUE(back.unbiased);

  const Json j = dualgda::gda_config_to_json(dualgda::GdaConfig{});
  EXPECT_EQ(j.at("covariance_mode").get<std::string>(), "per_class");
  EXPECT_EQ(j.at("prior_mode").get<std::string>(), "empirical");
  EXPECT_FALSE(j.at("unbiased").get<bool>());
}

TEST(GdaConfigJson, EmptyObjectYieldsDefaults) {
  const dualgda::GdaConfig c = dualgda::gda_config_from_json(Json::object());
  EXPECT_EQ(c.covariance_mode, dualgda::CovarianceMode::PerClass);
  EXPECT_DOUBLE_EQ(c.shrinkage, 1e-4);
  EXPECT_EQ(c.prior_mode, dualgda::PriorMode::Empirical);
  EXPECT_FALSE(c.unbiased);
}

TEST(GdaConfigJson, UnknownNamesAreUsageErrors) {
  EXPECT_ERRC(dualgda::parse_covariance_mode("diagonal"), dualgda::Errc::Usage);
  EXPECT_ERRC(dualgda::parse_prior_mode("jeffreys"), dualgda::Errc::Usage);
  EXPECT_ERRC(dualgda::parse_hemisphere("center"), dualgda::Errc::Usage);
  EXPECT_ERRC(dualgda::parse_selection_strategy("exhaustive"), dualgda::Errc::Usage);
  EXPECT_ERRC(dualgda::parse_measure("girth"), dualgda::Errc::Usage);
}

TEST(GdaModelJson, RoundTripClassifiesBitIdentically) {
  const dualgda::FeatureTable table = binary_table(4242, 4, 30, 26, 1.2, 3);
  for (const auto mode : {dualgda::CovarianceMode::PerClass, dualgda::CovarianceMode::Shared}) {
    dualgda::GdaConfig config;
    config.covariance_mode = mode;
    config.prior_mode = dualgda::PriorMode::Empirical;
    const dualgda::GdaModel model =
        dualgda::fit(table, dualgda::Hemisphere::Right, {0, 2, 5, 6}, config);
    const dualgda::GdaModel back = dualgda::gda_model_from_json(reparse(dualgda::gda_model_to_json(model)));

    EXPECT_EQ(back.hemisphere(), dualgda::Hemisphere::Right);
    EXPECT_EQ(back.feature_subset(), model.feature_subset());
    EXPECT_EQ(back.classes().negative, model.classes().negative);
    EXPECT_EQ(back.classes().positive, model.classes().positive);
    for (const auto& s : table.subjects()) {
      const auto a = model.classify(s);
      const auto b = back.classify(s);
      EXPECT_EQ(a.log_odds, b.log_odds) << "subject " << s.subject_id;
      EXPECT_EQ(a.positive, b.positive);
      EXPECT_EQ(a.label, b.label);
    }
  }
}

TEST(GdaModelJson, SharedModeCarriesOneCovariancePerClassTwo) {
  const dualgda::FeatureTable table = binary_table(7, 3, 20, 20, 0.5, 2);
  dualgda::GdaConfig config;
  config.covariance_mode = dualgda::CovarianceMode::Shared;
  Json j = dualgda::gda_model_to_json(dualgda::fit(table, dualgda::Hemisphere::Left, {1, 4}, config));
  ASSERT_EQ(j.at("covariances").size(), 1u);
  EXPECT_EQ(j.at("covariances")[0].at("dim").get<std::size_t>(), 2u);
  EXPECT_EQ(j.at("covariances")[0].at("values").size(), 4u);

  config.covariance_mode = dualgda::CovarianceMode::PerClass;
  j = dualgda::gda_model_to_json(dualgda::fit(table, dualgda::Hemisphere::Left, {1, 4}, config));
  ASSERT_EQ(j.at("covariances").size(), 2u);
  EXPECT_EQ(j.at("means").size(), 2u);
  EXPECT_EQ(j.at("log_priors").size(), 2u);
}

TEST(DualModelJson, RoundTripPreservesFusedDecisions) {
  const dualgda::FeatureTable table = binary_table(99, 5, 40, 35, 0.9, 4);
  const dualgda::DualSpaceModel model = dualgda::fit_dual(table, {0, 3}, {1, 2, 7});
  const Json j = dualgda::dual_model_to_json(model);
  EXPECT_EQ(j.at("fusion").get<std::string>(), "or");
  ASSERT_FALSE(j.at("left").is_null());
  ASSERT_FALSE(j.at("right").is_null());

  const dualgda::DualSpaceModel back = dualgda::dual_model_from_json(reparse(j));
  EXPECT_EQ(back.train_ids(), model.train_ids());
  for (const auto& s : table.subjects()) {
    const auto a = model.classify_detail(s);
    const auto b = back.classify_detail(s);
    EXPECT_EQ(a.fused.log_odds, b.fused.log_odds);
    EXPECT_EQ(a.fused.positive, b.fused.positive);
    ASSERT_TRUE(b.left && b.right);
    EXPECT_EQ(a.left->log_odds, b.left->log_odds);
    EXPECT_EQ(a.right->log_odds, b.right->log_odds);
  }
}

TEST(DualModelJson, OneSidedModelKeepsTheMissingSideNull) {
  const dualgda::FeatureTable table = binary_table(31, 3, 25, 25, 1.0, 2);
  const dualgda::DualSpaceModel model = dualgda::fit_dual(table, {}, {0, 1});
  const Json j = dualgda::dual_model_to_json(model);
  EXPECT_TRUE(j.at("left").is_null());
  ASSERT_FALSE(j.at("right").is_null());

  const dualgda::DualSpaceModel back = dualgda::dual_model_from_json(reparse(j));
  EXPECT_FALSE(back.left().has_value());
  ASSERT_TRUE(back.right().has_value());
  for (const auto& s : table.subjects()) {
    EXPECT_EQ(model.classify(s).log_odds, back.classify(s).log_odds);
  }
}

TEST(DualModelJson, UnknownFusionTagIsRejected) {
  const dualgda::FeatureTable table = binary_table(5, 3, 12, 12, 0.7, 1);
  Json j = dualgda::dual_model_to_json(dualgda::fit_dual(table, {0}, {1}));
  j["fusion"] = "and";
  EXPECT_ERRC(dualgda::dual_model_from_json(j), dualgda::Errc::SchemaMismatch);
}

// ---------------------------------------------------------------------------
// ranking payload

TEST(RankedListJson, MirrorsTheRankingAndNullsInfiniteF) {
  // 2 measures x 3 regions; left feature 2 carries a strong shift and left
  // feature 4 is an exact class constant (zero within-group variance).
  const dualgda::Schema schema = testutil::small_schema(2, 3);
  dualgda::FeatureTable table = testutil::gaussian_table(11, schema, {10, 10, 10}, 0.0, 0);
  std::vector<dualgda::SubjectRecord> subjects(table.subjects().begin(), table.subjects().end());
  for (auto& s : subjects) {
    const double c = static_cast<double>(static_cast<int>(s.diagnosis));
    s.left[2] += 4.0 * c;
    s.left[4] = 1.0 + c;  // placeholder: separated classes, no within spread
  }
  table = dualgda::FeatureTable(schema, std::move(subjects));

  const dualgda::RankedFeatureList ranked =
      dualgda::rank_features(table, dualgda::Hemisphere::Left, dualgda::Grouping::all_three(), 0.01);
  const Json j = reparse(dualgda::ranked_list_to_json(ranked, schema));

  EXPECT_EQ(j.at("hemisphere").get<std::string>(), "left");
  EXPECT_EQ(j.at("grouping").get<std::string>(), ranked.grouping.name());
  EXPECT_DOUBLE_EQ(j.at("los").get<double>(), 0.01);
  ASSERT_EQ(j.at("scores").size(), ranked.scores.size());

  for (std::size_t i = 0; i < ranked.scores.size(); ++i) {
    const Json& row = j.at("scores")[i];
    const auto& s = ranked.scores[i];
    EXPECT_EQ(row.at("index").get<std::size_t>(), s.descriptor.index);
    EXPECT_EQ(row.at("feature").get<std::string>(),
              schema.column_name(dualgda::Hemisphere::Left, s.descriptor.index));
    EXPECT_EQ(row.at("significant").get<bool>(), s.p_value < 0.01);
    EXPECT_EQ(row.at("zero_within_variance").get<bool>(), s.zero_within_variance);
    if (std::isinf(s.f_stat)) {
      // Infinity has no JSON literal; the text form must degrade to null
      // while the flag preserves the meaning.
      EXPECT_TRUE(row.at("f").is_null());
      EXPECT_TRUE(row.at("zero_within_variance").get<bool>());
      EXPECT_DOUBLE_EQ(row.at("p").get<double>(), 0.0);
    } else {
      EXPECT_EQ(row.at("f").get<double>(), s.f_stat);
      EXPECT_EQ(row.at("p").get<double>(), s.p_value);
    }
  }
  // The planted zero-variance feature must actually exercise the null path.
  EXPECT_TRUE(j.at("scores")[0].at("f").is_null());
  EXPECT_EQ(j.at("scores")[0].at("index").get<std::size_t>(), 4u);
}

// ---------------------------------------------------------------------------
// selection trajectory payload

TEST(TrajectoryJson, MirrorsTheTrajectory) {
  const dualgda::Schema schema = testutil::small_schema(2, 3);
  const dualgda::FeatureTable table = testutil::gaussian_table(21, schema, {25, 0, 25}, 3.0, 2);
  const dualgda::RankedFeatureList ranked = dualgda::rank_features(
      table, dualgda::Hemisphere::Left, dualgda::Grouping::pairwise(dualgda::Comparison::CnVsAd), 0.05);
  ASSERT_FALSE(ranked.significant().empty());

  dualgda::SelectionConfig config;
  config.folds = 5;
  config.seed = 3;
  const dualgda::SelectionTrajectory t =
      dualgda::select_local(table, dualgda::Hemisphere::Left, ranked, config);
  const Json j = reparse(dualgda::trajectory_to_json(t, schema));

  EXPECT_EQ(j.at("strategy").get<std::string>(), "greedy_keep_if_improves");
  EXPECT_EQ(j.at("best_cv_f1").get<double>(), t.best_cv_f1);
  ASSERT_EQ(j.at("phases").size(), t.phases.size());
  for (std::size_t i = 0; i < t.phases.size(); ++i) {
    const Json& row = j.at("phases")[i];
    const auto& p = t.phases[i];
    EXPECT_EQ(row.at("hemisphere").get<std::string>(), "left");
    EXPECT_EQ(row.at("index").get<std::size_t>(), p.feature);
    EXPECT_EQ(row.at("feature").get<std::string>(),
              schema.column_name(dualgda::Hemisphere::Left, p.feature));
    EXPECT_EQ(row.at("rank").get<std::size_t>(), p.rank);
    EXPECT_EQ(row.at("accepted").get<bool>(), p.accepted);
    EXPECT_EQ(row.at("scored").get<bool>(), p.scored);
    EXPECT_EQ(row.at("cv_f1").get<double>(), p.cv_f1);
    EXPECT_EQ(row.at("metrics").at("f1").get<double>(), p.cv_metrics.f1);
  }
  EXPECT_EQ(j.at("left_subset").get<std::vector<std::size_t>>(), t.left_subset);
  EXPECT_TRUE(j.at("right_subset").empty());
  ASSERT_EQ(j.at("left_features").size(), t.left_subset.size());
  for (std::size_t i = 0; i < t.left_subset.size(); ++i) {
    EXPECT_EQ(j.at("left_features")[i].get<std::string>(),
              schema.column_name(dualgda::Hemisphere::Left, t.left_subset[i]));
  }
}

// ---------------------------------------------------------------------------
// cohort specs

TEST(CohortSpecJson, RoundTripKeepsEveryField) {
  dualgda::CohortSpec spec;
  spec.n_per_class = {19, 23, 17};
  spec.schema = testutil::small_schema(3, 4);
  spec.signal_features.push_back(dualgda::SignalFeature{
      dualgda::Hemisphere::Right, "r02", dualgda::Measure::TravelDepth, {0.0, 0.5, 1.5}});
  spec.base[static_cast<std::size_t>(dualgda::Measure::TravelDepth)] = {8.25, 1.75};
  spec.correlation_rho = 0.35;
  spec.zero_noise_subjects = 4;
  spec.enforce_progression = false;
  spec.seed = 987654321;

  const dualgda::CohortSpec back = dualgda::cohort_spec_from_json(reparse(dualgda::cohort_spec_to_json(spec)));
  EXPECT_EQ(back.n_per_class, spec.n_per_class);
  EXPECT_EQ(back.schema.measures(), spec.schema.measures());
  EXPECT_EQ(back.schema.regions(), spec.schema.regions());
  ASSERT_EQ(back.signal_features.size(), 1u);
  EXPECT_EQ(back.signal_features[0].hemisphere, dualgda::Hemisphere::Right);
  EXPECT_EQ(back.signal_features[0].region, "r02");
  EXPECT_EQ(back.signal_features[0].measure, dualgda::Measure::TravelDepth);
  EXPECT_EQ(back.signal_features[0].effect_sigmas, (std::array<double, 3>{0.0, 0.5, 1.5}));
  EXPECT_EQ(back.base[static_cast<std::size_t>(dualgda::Measure::TravelDepth)].mean, 8.25);
  EXPECT_EQ(back.base[static_cast<std::size_t>(dualgda::Measure::TravelDepth)].sigma, 1.75);
  EXPECT_EQ(back.correlation_rho, 0.35);
  EXPECT_EQ(back.zero_noise_subjects, 4u);
  EXPECT_FALSE(back.enforce_progression);
  EXPECT_EQ(back.seed, 987654321u);

  // Round-tripped specs must generate the identical cohort.
  const dualgda::FeatureTable a = dualgda::generate(spec);
  const dualgda::FeatureTable b = dualgda::generate(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.subjects()[i].subject_id, b.subjects()[i].subject_id);
    EXPECT_EQ(a.subjects()[i].left, b.subjects()[i].left);
    EXPECT_EQ(a.subjects()[i].right, b.subjects()[i].right);
  }
}

TEST(CohortSpecJson, EmptyObjectYieldsTheStandardCohort) {
  const dualgda::CohortSpec spec = dualgda::cohort_spec_from_json(Json::object());
  EXPECT_EQ(spec.n_per_class, (std::array<std::size_t, 3>{190, 305, 133}));
  EXPECT_EQ(spec.schema.measures().size(), 7u);
  EXPECT_EQ(spec.schema.regions().size(), 25u);
  EXPECT_EQ(spec.schema.features_per_hemisphere(), 175u);
  EXPECT_TRUE(spec.signal_features.empty());
  EXPECT_EQ(spec.correlation_rho, 0.0);
  EXPECT_EQ(spec.zero_noise_subjects, 0u);
  EXPECT_TRUE(spec.enforce_progression);
  EXPECT_EQ(spec.seed, 0u);
}

TEST(CohortSpecJson, RegionsAloneImplyAllMeasures) {
  Json j;
  j["regions"] = Json::array({"alpha", "beta"});
  const dualgda::CohortSpec spec = dualgda::cohort_spec_from_json(j);
  EXPECT_EQ(spec.schema.measures().size(), 7u);
  EXPECT_EQ(spec.schema.regions(), (std::vector<std::string>{"alpha", "beta"}));
  EXPECT_EQ(spec.schema.features_per_hemisphere(), 14u);
}

// ---------------------------------------------------------------------------
// run configuration

TEST(RunConfigJson, RoundTripIncludingUnlimitedPatience) {
  dualgda::RunConfig c;
  c.input = "cohort.csv";
  c.comparison = dualgda::Comparison::MciVsAd;
  c.ranking = dualgda::RankingMode::Global;
  c.classifier = dualgda::ClassifierMode::Global;
  c.los = 0.005;
  c.folds = 7;
  c.holdout_fraction = 0.25;
  c.strategy = dualgda::SelectionStrategy::PrefixArgmax;
  c.gda.covariance_mode = dualgda::CovarianceMode::Shared;
  c.clean_policy = dualgda::CleanPolicy::KeepAll;
  c.zero_tolerance = 1e-9;
  c.seed = 77;

  Json j = dualgda::run_config_to_json(c);
  EXPECT_TRUE(j.at("patience").is_null());
  dualgda::RunConfig back = dualgda::run_config_from_json(reparse(j));
  EXPECT_EQ(back.input, "cohort.csv");
  EXPECT_EQ(back.comparison, dualgda::Comparison::MciVsAd);
  EXPECT_EQ(back.ranking, dualgda::RankingMode::Global);
  EXPECT_EQ(back.classifier, dualgda::ClassifierMode::Global);
  EXPECT_EQ(back.los, 0.005);
  EXPECT_EQ(back.folds, 7);
  EXPECT_EQ(back.holdout_fraction, 0.25);
  EXPECT_EQ(back.strategy, dualgda::SelectionStrategy::PrefixArgmax);
  EXPECT_EQ(back.patience, std::numeric_limits<std::size_t>::max());
  EXPECT_EQ(back.gda.covariance_mode, dualgda::CovarianceMode::Shared);
  EXPECT_EQ(back.clean_policy, dualgda::CleanPolicy::KeepAll);
  EXPECT_EQ(back.zero_tolerance, 1e-9);
  EXPECT_EQ(back.seed, 77u);

  c.patience = 3;
  j = dualgda::run_config_to_json(c);
  EXPECT_EQ(j.at("patience").get<std::size_t>(), 3u);
  back = dualgda::run_config_from_json(reparse(j));
  EXPECT_EQ(back.patience, 3u);
}

TEST(RunConfigJson, UnknownEnumNamesAreUsageErrors) {
  EXPECT_ERRC(dualgda::run_config_from_json(Json{{"ranking", "hybrid"}}), dualgda::Errc::Usage);
  EXPECT_ERRC(dualgda::run_config_from_json(Json{{"classifier", "stacked"}}), dualgda::Errc::Usage);
  EXPECT_ERRC(dualgda::run_config_from_json(Json{{"clean_policy", "impute"}}), dualgda::Errc::Usage);
  EXPECT_ERRC(dualgda::run_config_from_json(Json{{"comparison", "cn-vs-cn"}}), dualgda::Errc::Usage);
}

// ---------------------------------------------------------------------------
// removal log

TEST(RemovalsJsonl, OneParseableLinePerRemoval) {
  std::vector<dualgda::RemovalRecord> removals;
  removals.push_back({"sub-0007", dualgda::Diagnosis::MCI, "zero_value", {"L.r00.surface_area"}});
  removals.push_back(
      {"sub-0019", dualgda::Diagnosis::AD, "zero_value", {"R.r01.thickness", "L.r01.thickness"}});
  const std::string text = dualgda::removals_to_jsonl(removals);

  std::istringstream in(text);
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    const Json row = Json::parse(line);
    EXPECT_TRUE(row.contains("subject_id"));
    EXPECT_EQ(row.at("reason").get<std::string>(), "zero_value");
    EXPECT_TRUE(row.at("features").is_array());
    ++count;
  }
  EXPECT_EQ(count, 2u);
  const Json first = Json::parse(text.substr(0, text.find('\n')));
  EXPECT_EQ(first.at("subject_id").get<std::string>(), "sub-0007");
  EXPECT_EQ(first.at("features").get<std::vector<std::string>>(),
            (std::vector<std::string>{"L.r00.surface_area"}));
}

TEST(SerializedText, IsByteStableForIdenticalInputs) {
  const dualgda::FeatureTable table = binary_table(123, 4, 18, 18, 0.8, 2);
  const std::string a = dualgda::dual_model_to_json(dualgda::fit_dual(table, {0, 5}, {2})).dump(2);
  const std::string b = dualgda::dual_model_to_json(dualgda::fit_dual(table, {0, 5}, {2})).dump(2);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.empty());
}

}  // namespace
