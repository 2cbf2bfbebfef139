#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dualgda/errors.hpp"
#include "dualgda/fdist.hpp"
#include "dualgda/parallel.hpp"
#include "dualgda/table.hpp"

namespace dualgda {

struct AnovaResult {
  double f_stat = 0.0;
  int df_between = 0;
  int df_within = 0;
  /// True when SSW = 0 with SSB > 0 (perfect separation): f_stat is +inf and
  /// the feature is treated as maximally significant (p = 0) instead of an
  /// error.
  bool zero_within_variance = false;
};

/// Classical one-way ANOVA: F = (SSB/df_b) / (SSW/df_w). Requires at least
/// two groups with at least two samples each. Constant data (SSB = SSW = 0)
/// yields F = 0.
inline AnovaResult f_oneway(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) {
    raise(Errc::DegenerateInput, "f_oneway needs at least 2 groups");
  }
  std::size_t total_n = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) {
      raise(Errc::DegenerateInput, "f_oneway needs at least 2 samples per group");
    }
    total_n += g.size();
  }

  std::vector<double> means(groups.size());
  double grand_sum = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    double s = 0.0;
    for (double v : groups[i]) s += v;
    means[i] = s / static_cast<double>(groups[i].size());
    grand_sum += s;
  }
  const double grand_mean = grand_sum / static_cast<double>(total_n);

  double ssb = 0.0;
  double ssw = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double dm = means[i] - grand_mean;
    ssb += static_cast<double>(groups[i].size()) * dm * dm;
    for (double v : groups[i]) {
      const double dv = v - means[i];
      ssw += dv * dv;
    }
  }

  AnovaResult res;
  res.df_between = static_cast<int>(groups.size()) - 1;
  res.df_within = static_cast<int>(total_n - groups.size());
  if (ssb == 0.0) {
    res.f_stat = 0.0;
  } else if (ssw == 0.0) {
    res.f_stat = std::numeric_limits<double>::infinity();
    res.zero_within_variance = true;
  } else {
    res.f_stat = (ssb / res.df_between) / (ssw / res.df_within);
  }
  return res;
}

inline AnovaResult f_oneway(const std::vector<std::vector<double>>& groups) {
  return f_oneway(std::span<const std::vector<double>>(groups));
}

enum class GroupingKind { Pairwise, AllThree };

/// Which diagnosis groups enter the ANOVA: a two-group comparison or all
/// three groups at once.
struct Grouping {
  GroupingKind kind;
  Comparison comparison = Comparison::CnVsMci;  // meaningful only for Pairwise

  static Grouping pairwise(Comparison c) { return Grouping{GroupingKind::Pairwise, c}; }
  static Grouping all_three() { return Grouping{GroupingKind::AllThree}; }

  std::vector<Diagnosis> groups() const {
    if (kind == GroupingKind::AllThree) {
      return {Diagnosis::CN, Diagnosis::MCI, Diagnosis::AD};
    }
    return {negative_class(comparison), positive_class(comparison)};
  }

  std::string name() const {
    return kind == GroupingKind::AllThree ? "all" : comparison_name(comparison);
  }
};

struct FeatureScore {
  FeatureDescriptor descriptor;
  double f_stat = 0.0;
  double p_value = 1.0;
  int df_between = 0;
  int df_within = 0;
  bool zero_within_variance = false;
};

/// Scores for every feature of one hemisphere, sorted by
/// (p ascending, F descending, feature index ascending) so the order is a
/// deterministic total order.
struct RankedFeatureList {
  Grouping grouping;
  Hemisphere hemisphere;
  double los = 0.01;
  std::vector<FeatureScore> scores;

  std::size_t significant_count() const {
    std::size_t n = 0;
    while (n < scores.size() && scores[n].p_value < los) ++n;
    return n;
  }

  std::span<const FeatureScore> significant() const {
    return std::span<const FeatureScore>(scores.data(), significant_count());
  }
};

/// One-way ANOVA on every feature of the hemisphere, ranked by p-value.
/// Scoring is feature-parallel; the output never depends on scheduling.
inline RankedFeatureList rank_features(const FeatureTable& table, Hemisphere hemisphere,
                                       const Grouping& grouping, double los = 0.01) {
  const auto wanted = grouping.groups();
  const auto counts = table.count_by_diagnosis();
  for (Diagnosis d : wanted) {
    if (counts[static_cast<std::size_t>(d)] == 0) {
      raise(Errc::EmptyClass, std::string("grouping needs ") + diagnosis_name(d) +
                                  " subjects but the table has none");
    }
  }

  const std::size_t dim = table.schema().features_per_hemisphere();
  RankedFeatureList out{grouping, hemisphere, los, std::vector<FeatureScore>(dim)};
  parallel_for(dim, [&](std::size_t feature) {
    std::vector<std::vector<double>> groups(wanted.size());
    for (std::size_t g = 0; g < wanted.size(); ++g) {
      for (const auto& s : table.subjects()) {
        if (s.diagnosis == wanted[g]) groups[g].push_back(s.hemi(hemisphere)[feature]);
      }
    }
    const AnovaResult a = f_oneway(groups);
    FeatureScore& score = out.scores[feature];
    score.descriptor = table.schema().descriptor(hemisphere, feature);
    score.f_stat = a.f_stat;
    score.df_between = a.df_between;
    score.df_within = a.df_within;
    score.zero_within_variance = a.zero_within_variance;
    score.p_value = a.zero_within_variance ? 0.0 : f_sf(a.f_stat, a.df_between, a.df_within);
  });

  std::sort(out.scores.begin(), out.scores.end(), [](const FeatureScore& a, const FeatureScore& b) {
    if (a.p_value != b.p_value) return a.p_value < b.p_value;
    if (a.f_stat != b.f_stat) return a.f_stat > b.f_stat;
    return a.descriptor.index < b.descriptor.index;
  });
  return out;
}

}  // namespace dualgda
