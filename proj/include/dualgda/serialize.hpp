#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dualgda/anova.hpp"
#include "dualgda/cv.hpp"
#include "dualgda/dual.hpp"
#include "dualgda/errors.hpp"
#include "dualgda/gda.hpp"
#include "dualgda/metrics.hpp"
#include "dualgda/schema.hpp"
#include "dualgda/selection.hpp"
#include "dualgda/synth.hpp"
#include "dualgda/table.hpp"

namespace dualgda {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// enums

inline const char* covariance_mode_name(CovarianceMode m) {
  return m == CovarianceMode::Shared ? "shared" : "per_class";
}

inline CovarianceMode parse_covariance_mode(const std::string& s) {
  if (s == "shared") return CovarianceMode::Shared;
  if (s == "per_class") return CovarianceMode::PerClass;
  raise(Errc::Usage, "unknown covariance mode '" + s + "' (expected shared or per_class)");
}

inline const char* prior_mode_name(PriorMode m) {
  return m == PriorMode::Uniform ? "uniform" : "empirical";
}

inline PriorMode parse_prior_mode(const std::string& s) {
  if (s == "uniform") return PriorMode::Uniform;
  if (s == "empirical") return PriorMode::Empirical;
  raise(Errc::Usage, "unknown prior mode '" + s + "' (expected empirical or uniform)");
}

inline Hemisphere parse_hemisphere(const std::string& s) {
  if (s == "left" || s == "L") return Hemisphere::Left;
  if (s == "right" || s == "R") return Hemisphere::Right;
  raise(Errc::Usage, "unknown hemisphere '" + s + "' (expected left or right)");
}

inline SelectionStrategy parse_selection_strategy(const std::string& s) {
  if (s == "greedy_keep_if_improves") return SelectionStrategy::GreedyKeepIfImproves;
  if (s == "prefix_argmax") return SelectionStrategy::PrefixArgmax;
  raise(Errc::Usage, "unknown selection strategy '" + s +
                         "' (expected greedy_keep_if_improves or prefix_argmax)");
}

inline Measure parse_measure(const std::string& s) {
  Measure m;
  if (!try_parse_measure(s, m)) {
    raise(Errc::Usage, "unknown measure '" + s + "'");
  }
  return m;
}

// ---------------------------------------------------------------------------
// metrics

inline Json confusion_to_json(const ConfusionMatrix& cm) {
  return Json{{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
}

inline ConfusionMatrix confusion_from_json(const Json& j) {
  ConfusionMatrix cm;
  cm.tp = j.at("tp").get<std::uint64_t>();
  cm.fp = j.at("fp").get<std::uint64_t>();
  cm.tn = j.at("tn").get<std::uint64_t>();
  cm.fn = j.at("fn").get<std::uint64_t>();
  return cm;
}

inline Json metrics_to_json(const Metrics& m) {
  return Json{{"f1", m.f1},
              {"acc", m.accuracy},
              {"sen", m.sensitivity},
              {"spe", m.specificity},
              {"precision", m.precision},
              {"undefined", m.undefined_names()}};
}

inline Json cv_result_to_json(const CvResult& cv) {
  Json per_fold = Json::array();
  for (const auto& fold : cv.per_fold) {
    Json f = metrics_to_json(fold.metrics);
    f["confusion"] = confusion_to_json(fold.confusion);
    per_fold.push_back(std::move(f));
  }
  Json j = metrics_to_json(cv.metrics);
  j["confusion"] = confusion_to_json(cv.pooled);
  j["per_fold"] = std::move(per_fold);
  j["macro"] = Json{{"f1", cv.macro.f1},
                    {"acc", cv.macro.accuracy},
                    {"sen", cv.macro.sensitivity},
                    {"spe", cv.macro.specificity},
                    {"precision", cv.macro.precision}};
  return j;
}

inline Json holdout_result_to_json(const HoldoutResult& h) {
  Json j = metrics_to_json(h.metrics);
  j["confusion"] = confusion_to_json(h.confusion);
  return j;
}

// ---------------------------------------------------------------------------
// GDA and dual-space models

inline Json gda_config_to_json(const GdaConfig& c) {
  return Json{{"covariance_mode", covariance_mode_name(c.covariance_mode)},
              {"shrinkage", c.shrinkage},
              {"prior_mode", prior_mode_name(c.prior_mode)},
              {"unbiased", c.unbiased}};
}

inline GdaConfig gda_config_from_json(const Json& j) {
  GdaConfig c;
  if (j.contains("covariance_mode")) {
    c.covariance_mode = parse_covariance_mode(j.at("covariance_mode").get<std::string>());
  }
  if (j.contains("shrinkage")) c.shrinkage = j.at("shrinkage").get<double>();
  if (j.contains("prior_mode")) c.prior_mode = parse_prior_mode(j.at("prior_mode").get<std::string>());
  if (j.contains("unbiased")) c.unbiased = j.at("unbiased").get<bool>();
  return c;
}

namespace detail {

inline Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

inline Json matrix_to_json(const Eigen::MatrixXd& m) {
  // Row-major flat list plus the dimension; square matrices only.
  Json values = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  return Json{{"dim", m.rows()}, {"values", std::move(values)}};
}

inline Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto dim = j.at("dim").get<Eigen::Index>();
  const Json& values = j.at("values");
  if (static_cast<Eigen::Index>(values.size()) != dim * dim) {
    raise(Errc::SchemaMismatch, "matrix payload has wrong element count");
  }
  Eigen::MatrixXd m(dim, dim);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = values[k++].get<double>();
  }
  return m;
}

}  // namespace detail

inline Json gda_model_to_json(const GdaModel& m) {
  Json covariances = Json::array();
  covariances.push_back(detail::matrix_to_json(m.covariance(false)));
  if (m.config().covariance_mode == CovarianceMode::PerClass) {
    covariances.push_back(detail::matrix_to_json(m.covariance(true)));
  }
  return Json{{"hemisphere", hemisphere_name(m.hemisphere())},
              {"subset", m.feature_subset()},
              {"classes",
               {{"negative", diagnosis_name(m.classes().negative)},
                {"positive", diagnosis_name(m.classes().positive)}}},
              {"means",
               Json::array({detail::vector_to_json(m.mean(false)), detail::vector_to_json(m.mean(true))})},
              {"covariances", std::move(covariances)},
              {"log_priors", Json::array({m.log_prior(false), m.log_prior(true)})},
              {"config", gda_config_to_json(m.config())}};
}

inline GdaModel gda_model_from_json(const Json& j) {
  const GdaConfig config = gda_config_from_json(j.at("config"));
  const ClassPair classes{parse_diagnosis(j.at("classes").at("negative").get<std::string>()),
                          parse_diagnosis(j.at("classes").at("positive").get<std::string>())};
  std::vector<Eigen::VectorXd> means;
  for (const auto& v : j.at("means")) means.push_back(detail::vector_from_json(v));
  std::vector<Eigen::MatrixXd> covs;
  for (const auto& c : j.at("covariances")) covs.push_back(detail::matrix_from_json(c));
  std::array<double, 2> log_priors{j.at("log_priors")[0].get<double>(),
                                   j.at("log_priors")[1].get<double>()};
  return GdaModel::from_parts(parse_hemisphere(j.at("hemisphere").get<std::string>()),
                              j.at("subset").get<std::vector<std::size_t>>(), classes,
                              std::move(means), std::move(covs), log_priors, config);
}

inline Json dual_model_to_json(const DualSpaceModel& m) {
  return Json{{"fusion", "or"},
              {"left", m.left() ? gda_model_to_json(*m.left()) : Json(nullptr)},
              {"right", m.right() ? gda_model_to_json(*m.right()) : Json(nullptr)},
              {"train_ids", m.train_ids()}};
}

inline DualSpaceModel dual_model_from_json(const Json& j) {
  if (j.at("fusion").get<std::string>() != "or") {
    raise(Errc::SchemaMismatch, "unknown fusion tag in model payload");
  }
  std::optional<GdaModel> left, right;
  if (!j.at("left").is_null()) left = gda_model_from_json(j.at("left"));
  if (!j.at("right").is_null()) right = gda_model_from_json(j.at("right"));
  return DualSpaceModel(std::move(left), std::move(right),
                        j.at("train_ids").get<std::vector<std::string>>());
}

// ---------------------------------------------------------------------------
// ranking and selection

/// Rank payload. An infinite F statistic (perfect separation) serializes as
/// null; the zero_within_variance flag preserves the information.
inline Json ranked_list_to_json(const RankedFeatureList& ranked, const Schema& schema) {
  Json scores = Json::array();
  for (const auto& s : ranked.scores) {
    scores.push_back(Json{{"feature", schema.column_name(ranked.hemisphere, s.descriptor.index)},
                          {"index", s.descriptor.index},
                          {"f", s.f_stat},
                          {"p", s.p_value},
                          {"significant", s.p_value < ranked.los},
                          {"zero_within_variance", s.zero_within_variance}});
  }
  return Json{{"grouping", ranked.grouping.name()},
              {"hemisphere", hemisphere_name(ranked.hemisphere)},
              {"los", ranked.los},
              {"scores", std::move(scores)}};
}

inline Json trajectory_to_json(const SelectionTrajectory& t, const Schema& schema) {
  Json phases = Json::array();
  for (const auto& p : t.phases) {
    phases.push_back(Json{{"hemisphere", hemisphere_name(p.hemisphere)},
                          {"feature", schema.column_name(p.hemisphere, p.feature)},
                          {"index", p.feature},
                          {"rank", p.rank},
                          {"accepted", p.accepted},
                          {"scored", p.scored},
                          {"cv_f1", p.cv_f1},
                          {"metrics", metrics_to_json(p.cv_metrics)}});
  }
  const auto names = [&schema](Hemisphere h, const std::vector<std::size_t>& subset) {
    Json out = Json::array();
    for (std::size_t i : subset) out.push_back(schema.column_name(h, i));
    return out;
  };
  return Json{{"strategy", selection_strategy_name(t.strategy)},
              {"phases", std::move(phases)},
              {"left_subset", t.left_subset},
              {"right_subset", t.right_subset},
              {"left_features", names(Hemisphere::Left, t.left_subset)},
              {"right_features", names(Hemisphere::Right, t.right_subset)},
              {"best_cv_f1", t.best_cv_f1},
              {"best_metrics", metrics_to_json(t.best_metrics)}};
}

// ---------------------------------------------------------------------------
// synthetic cohort specs

inline Json cohort_spec_to_json(const CohortSpec& spec) {
  Json signals = Json::array();
  for (const auto& sf : spec.signal_features) {
    signals.push_back(Json{{"hemisphere", hemisphere_name(sf.hemisphere)},
                           {"region", sf.region},
                           {"measure", measure_name(sf.measure)},
                           {"effects", sf.effect_sigmas}});
  }
  Json base;
  for (Measure m : kAllMeasures) {
    const auto& d = spec.base[static_cast<std::size_t>(m)];
    base[measure_name(m)] = Json{{"mean", d.mean}, {"sigma", d.sigma}};
  }
  Json measures = Json::array();
  for (Measure m : spec.schema.measures()) measures.push_back(measure_name(m));
  return Json{{"n_per_class",
               {{"CN", spec.n_per_class[0]}, {"MCI", spec.n_per_class[1]}, {"AD", spec.n_per_class[2]}}},
              {"measures", std::move(measures)},
              {"regions", spec.schema.regions()},
              {"signal_features", std::move(signals)},
              {"base", std::move(base)},
              {"correlation_rho", spec.correlation_rho},
              {"zero_noise_subjects", spec.zero_noise_subjects},
              {"enforce_progression", spec.enforce_progression},
              {"seed", spec.seed}};
}

/// Every field is optional; absent fields keep the defaults (the standard
/// 7x25 schema, the default class counts, no signal, no corruption).
inline CohortSpec cohort_spec_from_json(const Json& j) {
  CohortSpec spec;
  if (j.contains("n_per_class")) {
    const Json& n = j.at("n_per_class");
    if (n.contains("CN")) spec.n_per_class[0] = n.at("CN").get<std::size_t>();
    if (n.contains("MCI")) spec.n_per_class[1] = n.at("MCI").get<std::size_t>();
    if (n.contains("AD")) spec.n_per_class[2] = n.at("AD").get<std::size_t>();
  }
  if (j.contains("measures") || j.contains("regions")) {
    std::vector<Measure> measures;
    if (j.contains("measures")) {
      for (const auto& m : j.at("measures")) measures.push_back(parse_measure(m.get<std::string>()));
    } else {
      measures.assign(kAllMeasures.begin(), kAllMeasures.end());
    }
    std::vector<std::string> regions = j.contains("regions")
                                           ? j.at("regions").get<std::vector<std::string>>()
                                           : default_regions();
    spec.schema = Schema(std::move(measures), std::move(regions));
  }
  if (j.contains("signal_features")) {
    for (const auto& s : j.at("signal_features")) {
      SignalFeature sf;
      sf.hemisphere = parse_hemisphere(s.at("hemisphere").get<std::string>());
      sf.region = s.at("region").get<std::string>();
      sf.measure = parse_measure(s.at("measure").get<std::string>());
      sf.effect_sigmas = s.at("effects").get<std::array<double, 3>>();
      spec.signal_features.push_back(std::move(sf));
    }
  }
  if (j.contains("base")) {
    for (const auto& [name, dist] : j.at("base").items()) {
      const Measure m = parse_measure(name);
      if (dist.contains("mean")) spec.base[static_cast<std::size_t>(m)].mean = dist.at("mean").get<double>();
      if (dist.contains("sigma")) {
        spec.base[static_cast<std::size_t>(m)].sigma = dist.at("sigma").get<double>();
      }
    }
  }
  if (j.contains("correlation_rho")) spec.correlation_rho = j.at("correlation_rho").get<double>();
  if (j.contains("zero_noise_subjects")) {
    spec.zero_noise_subjects = j.at("zero_noise_subjects").get<std::size_t>();
  }
  if (j.contains("enforce_progression")) {
    spec.enforce_progression = j.at("enforce_progression").get<bool>();
  }
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

// ---------------------------------------------------------------------------
// cleaning log (JSON lines, one removal per line)

inline std::string removals_to_jsonl(const std::vector<RemovalRecord>& removals) {
  std::string out;
  for (const auto& r : removals) {
    out += Json{{"subject_id", r.subject_id}, {"reason", r.reason}, {"features", r.features}}.dump();
    out += '\n';
  }
  return out;
}

}  // namespace dualgda
