#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dualgda/anova.hpp"
#include "dualgda/cv.hpp"
#include "dualgda/dual.hpp"
#include "dualgda/errors.hpp"
#include "dualgda/gda.hpp"
#include "dualgda/metrics.hpp"
#include "dualgda/parallel.hpp"
#include "dualgda/table.hpp"

namespace dualgda {

/// greedy_keep_if_improves scans the ranked list once, keeping a feature iff
/// it strictly improves CV F1; prefix_argmax scores every ranked prefix and
/// returns the best one (ties go to the smaller prefix).
enum class SelectionStrategy { GreedyKeepIfImproves, PrefixArgmax };

inline const char* selection_strategy_name(SelectionStrategy s) {
  return s == SelectionStrategy::GreedyKeepIfImproves ? "greedy_keep_if_improves" : "prefix_argmax";
}

struct SelectionConfig {
  SelectionStrategy strategy = SelectionStrategy::GreedyKeepIfImproves;
  /// Stop after this many consecutive non-improving phases; default: never.
  std::size_t patience = std::numeric_limits<std::size_t>::max();
  int folds = 10;
  std::uint64_t seed = 0;
  GdaConfig gda;
};

struct SelectionPhase {
  Hemisphere hemisphere = Hemisphere::Left;
  std::size_t feature = 0;  // index within the hemisphere's feature vector
  /// ANOVA rank of the feature in its hemisphere's list (0 = best).
  std::size_t rank = 0;
  bool accepted = false;
  /// False when the candidate model could not be fit (class too small or
  /// singular covariance); such phases count as non-improving.
  bool scored = true;
  double cv_f1 = 0.0;
  Metrics cv_metrics;
};

struct SelectionTrajectory {
  SelectionStrategy strategy = SelectionStrategy::GreedyKeepIfImproves;
  std::vector<SelectionPhase> phases;
  /// Final per-hemisphere subsets in acceptance order. select_local fills
  /// only its hemisphere's side.
  std::vector<std::size_t> left_subset;
  std::vector<std::size_t> right_subset;
  /// CV performance of the final subsets; equals the best accepted phase.
  double best_cv_f1 = 0.0;
  Metrics best_metrics;

  const std::vector<std::size_t>& subset(Hemisphere h) const {
    return h == Hemisphere::Left ? left_subset : right_subset;
  }
};

struct CvOutcome {
  ConfusionMatrix pooled;
  Metrics metrics;
};

/// Cross-validation scorer for candidate feature subsets. Per-fold training
/// moments over the full feature set are accumulated once, up front, in
/// subject order; scoring a subset extracts the submatrices and fits from
/// them. Because extraction is exact (same scalar sums), the per-fold models
/// are bit-identical to cross_validate fitting fold tables directly, so a
/// trajectory's F1 can be reproduced by the public CV path.
class CvScorer {
 public:
  CvScorer(const FeatureTable& train, const FoldAssignment& folds, const GdaConfig& gda)
      : table_(&train), gda_(gda), k_(folds.k), classes_(class_pair_of(train)) {
    const std::size_t dim = train.schema().features_per_hemisphere();
    full_indices_.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) full_indices_[i] = i;

    fold_members_.resize(static_cast<std::size_t>(k_));
    std::vector<int> fold_of(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      fold_of[i] = folds.fold(train.subjects()[i].subject_id);
      fold_members_[static_cast<std::size_t>(fold_of[i])].push_back(i);
    }
    for (int f = 0; f < k_; ++f) {
      bool has_neg = false, has_pos = false;
      for (std::size_t i : fold_members_[static_cast<std::size_t>(f)]) {
        const Diagnosis d = train.subjects()[i].diagnosis;
        has_neg |= d == classes_.negative;
        has_pos |= d == classes_.positive;
      }
      if (!has_neg || !has_pos) {
        raise(Errc::FoldMissingClass,
              "fold " + std::to_string(f) + " is missing a class; use fewer folds");
      }
    }

    // stats_[fold][class 0=neg/1=pos][hemisphere]; accumulation visits
    // subjects in table order, exactly like fitting on the fold's training
    // table, so extracted moments match a direct fit bit-for-bit.
    stats_.reserve(static_cast<std::size_t>(k_));
    for (int f = 0; f < k_; ++f) {
      FoldStats fs;
      for (auto& per_class : fs.by_class) {
        for (auto& cs : per_class) cs = ClassStats(dim);
      }
      for (std::size_t i = 0; i < train.size(); ++i) {
        if (fold_of[i] == f) continue;
        const SubjectRecord& s = train.subjects()[i];
        const std::size_t c = s.diagnosis == classes_.positive ? 1 : 0;
        fs.by_class[c][0].add(s.hemi(Hemisphere::Left), full_indices_);
        fs.by_class[c][1].add(s.hemi(Hemisphere::Right), full_indices_);
      }
      stats_.push_back(std::move(fs));
    }
  }

  ClassPair classes() const { return classes_; }
  int folds() const { return k_; }

  /// Tenfold-CV the dual model with the given subsets (either may be empty,
  /// not both) and pool the confusion counts. Returns nothing when any
  /// fold's model cannot be fit; callers treat that as a non-improvement.
  std::optional<CvOutcome> score(const std::vector<std::size_t>& left,
                                 const std::vector<std::size_t>& right) const {
    if (left.empty() && right.empty()) {
      raise(Errc::BothSubsetsEmpty, "cannot score a model with no features");
    }
    CvOutcome out;
    for (int f = 0; f < k_; ++f) {
      std::optional<GdaModel> lm, rm;
      try {
        if (!left.empty()) lm = fit_side(f, Hemisphere::Left, left);
        if (!right.empty()) rm = fit_side(f, Hemisphere::Right, right);
      } catch (const Error& e) {
        if (e.code() == Errc::ClassTooSmall || e.code() == Errc::SingularCovariance) {
          return std::nullopt;
        }
        throw;
      }
      for (std::size_t i : fold_members_[static_cast<std::size_t>(f)]) {
        const SubjectRecord& s = table_->subjects()[i];
        const bool actual = s.diagnosis == classes_.positive;
        const bool predicted =
            (lm && lm->classify(s).positive) || (rm && rm->classify(s).positive);
        out.pooled.add(actual, predicted);
      }
    }
    if (out.pooled.total() != table_->size()) {
      throw std::logic_error("CvScorer: pooled confusion does not cover the table");
    }
    out.metrics = metrics_from_confusion(out.pooled);
    return out;
  }

 private:
  struct FoldStats {
    // [class: 0 negative, 1 positive][hemisphere: 0 left, 1 right]
    std::array<std::array<ClassStats, 2>, 2> by_class;
  };

  GdaModel fit_side(int fold, Hemisphere h, const std::vector<std::size_t>& subset) const {
    const std::size_t hi = h == Hemisphere::Left ? 0 : 1;
    const FoldStats& fs = stats_[static_cast<std::size_t>(fold)];
    return fit_from_stats(h, subset, classes_, fs.by_class[0][hi].extract(subset),
                          fs.by_class[1][hi].extract(subset), gda_);
  }

  const FeatureTable* table_;
  GdaConfig gda_;
  int k_;
  ClassPair classes_;
  std::vector<std::size_t> full_indices_;
  std::vector<std::vector<std::size_t>> fold_members_;
  std::vector<FoldStats> stats_;
};

namespace detail {

inline void check_greedy_monotone(const SelectionTrajectory& t) {
  double last = -std::numeric_limits<double>::infinity();
  for (const auto& p : t.phases) {
    if (!p.accepted) continue;
    if (!(p.cv_f1 > last)) {
      throw std::logic_error("selection: accepted-phase F1 values are not strictly increasing");
    }
    last = p.cv_f1;
  }
}

struct Candidate {
  Hemisphere hemisphere;
  std::size_t feature;
  std::size_t rank;  // position in its hemisphere's ranked significant list
};

/// Phase winner: highest F1, then better ANOVA rank, then Left over Right,
/// then lower feature index. Unscored candidates never win.
inline bool candidate_beats(const Candidate& a, double fa, bool scored_a, const Candidate& b,
                            double fb, bool scored_b) {
  if (scored_a != scored_b) return scored_a;
  if (!scored_a) return false;
  if (fa != fb) return fa > fb;
  if (a.rank != b.rank) return a.rank < b.rank;
  if (a.hemisphere != b.hemisphere) return a.hemisphere == Hemisphere::Left;
  return a.feature < b.feature;
}

inline SelectionTrajectory select_one_hemisphere(const CvScorer& scorer, Hemisphere hemisphere,
                                                 std::span<const FeatureScore> significant,
                                                 const SelectionConfig& config) {
  SelectionTrajectory t;
  t.strategy = config.strategy;
  auto& subset = hemisphere == Hemisphere::Left ? t.left_subset : t.right_subset;
  static const std::vector<std::size_t> kEmpty;

  double best = -std::numeric_limits<double>::infinity();
  std::size_t since_improvement = 0;

  if (config.strategy == SelectionStrategy::GreedyKeepIfImproves) {
    for (std::size_t k = 0; k < significant.size(); ++k) {
      if (since_improvement >= config.patience) break;
      SelectionPhase phase;
      phase.hemisphere = hemisphere;
      phase.feature = significant[k].descriptor.index;
      phase.rank = k;
      subset.push_back(phase.feature);
      const auto outcome = hemisphere == Hemisphere::Left ? scorer.score(subset, kEmpty)
                                                          : scorer.score(kEmpty, subset);
      if (outcome) {
        phase.cv_f1 = outcome->metrics.f1;
        phase.cv_metrics = outcome->metrics;
      } else {
        phase.scored = false;
      }
      if (outcome && outcome->metrics.f1 > best) {
        phase.accepted = true;
        best = outcome->metrics.f1;
        t.best_cv_f1 = best;
        t.best_metrics = outcome->metrics;
        since_improvement = 0;
      } else {
        subset.pop_back();
        ++since_improvement;
      }
      t.phases.push_back(phase);
    }
  } else {
    // prefix_argmax: score every ranked prefix, keep the best (ties to the
    // smaller prefix), then mark the winning prefix's phases accepted.
    std::vector<std::size_t> prefix;
    std::size_t best_len = 0;
    for (std::size_t k = 0; k < significant.size(); ++k) {
      if (since_improvement >= config.patience) break;
      SelectionPhase phase;
      phase.hemisphere = hemisphere;
      phase.feature = significant[k].descriptor.index;
      phase.rank = k;
      prefix.push_back(phase.feature);
      const auto outcome = hemisphere == Hemisphere::Left ? scorer.score(prefix, kEmpty)
                                                          : scorer.score(kEmpty, prefix);
      if (outcome) {
        phase.cv_f1 = outcome->metrics.f1;
        phase.cv_metrics = outcome->metrics;
      } else {
        phase.scored = false;
      }
      if (outcome && outcome->metrics.f1 > best) {
        best = outcome->metrics.f1;
        best_len = prefix.size();
        t.best_cv_f1 = best;
        t.best_metrics = outcome->metrics;
        since_improvement = 0;
      } else {
        ++since_improvement;
      }
      t.phases.push_back(phase);
    }
    subset.assign(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(best_len));
    for (std::size_t k = 0; k < t.phases.size(); ++k) t.phases[k].accepted = k < best_len;
  }
  return t;
}

}  // namespace detail

/// Incremental error analysis over one hemisphere: introduce significant
/// features in ANOVA-rank order, CV-score each phase, and keep the subset
/// per the configured strategy.
inline SelectionTrajectory select_local(const FeatureTable& train, Hemisphere hemisphere,
                                        const RankedFeatureList& ranked,
                                        const SelectionConfig& config) {
  const auto significant = ranked.significant();
  if (significant.empty()) {
    raise(Errc::NoSignificantFeatures,
          "no feature is significant at los=" + std::to_string(ranked.los));
  }
  const FoldAssignment folds = make_folds(train, config.folds, config.seed);
  const CvScorer scorer(train, folds, config.gda);
  SelectionTrajectory t = detail::select_one_hemisphere(scorer, hemisphere, significant, config);
  if (config.strategy == SelectionStrategy::GreedyKeepIfImproves) {
    detail::check_greedy_monotone(t);
  }
  return t;
}

/// Combined incremental error analysis across both hemispheres: at each
/// phase every remaining significant feature (either side) is tentatively
/// added to its hemisphere's subset, the fused dual-space model is
/// CV-scored, and the best strictly-improving candidate is accepted. The
/// trajectory records one phase per winner; the last phase of a terminated
/// search is the non-improving winner.
inline SelectionTrajectory select_global(const FeatureTable& train,
                                         const RankedFeatureList& ranked_left,
                                         const RankedFeatureList& ranked_right,
                                         const SelectionConfig& config) {
  const auto sig_left = ranked_left.significant();
  const auto sig_right = ranked_right.significant();
  if (sig_left.empty() && sig_right.empty()) {
    raise(Errc::NoSignificantFeatures,
          "no feature on either hemisphere is significant at los=" +
              std::to_string(ranked_left.los));
  }

  std::vector<detail::Candidate> pool;
  pool.reserve(sig_left.size() + sig_right.size());
  for (std::size_t k = 0; k < sig_left.size(); ++k) {
    pool.push_back({Hemisphere::Left, sig_left[k].descriptor.index, k});
  }
  for (std::size_t k = 0; k < sig_right.size(); ++k) {
    pool.push_back({Hemisphere::Right, sig_right[k].descriptor.index, k});
  }

  const FoldAssignment folds = make_folds(train, config.folds, config.seed);
  const CvScorer scorer(train, folds, config.gda);

  SelectionTrajectory t;
  t.strategy = SelectionStrategy::GreedyKeepIfImproves;
  double best = -std::numeric_limits<double>::infinity();

  while (!pool.empty()) {
    // Candidate evaluations are independent; the winner is reduced in pool
    // order afterwards, so scheduling cannot affect the result.
    std::vector<std::optional<CvOutcome>> outcomes(pool.size());
    parallel_for(pool.size(), default_thread_count(), [&](std::size_t c) {
      const detail::Candidate& cand = pool[c];
      std::vector<std::size_t> left = t.left_subset;
      std::vector<std::size_t> right = t.right_subset;
      (cand.hemisphere == Hemisphere::Left ? left : right).push_back(cand.feature);
      outcomes[c] = scorer.score(left, right);
    });

    std::size_t win = pool.size();
    for (std::size_t c = 0; c < pool.size(); ++c) {
      if (win == pool.size()) {
        if (outcomes[c]) win = c;
        continue;
      }
      if (detail::candidate_beats(pool[c], outcomes[c] ? outcomes[c]->metrics.f1 : 0.0,
                                  outcomes[c].has_value(), pool[win],
                                  outcomes[win] ? outcomes[win]->metrics.f1 : 0.0,
                                  outcomes[win].has_value())) {
        win = c;
      }
    }
    if (win == pool.size()) break;  // nothing fit; nothing can be said

    const detail::Candidate winner = pool[win];
    const CvOutcome& outcome = *outcomes[win];
    SelectionPhase phase;
    phase.hemisphere = winner.hemisphere;
    phase.feature = winner.feature;
    phase.rank = winner.rank;
    phase.cv_f1 = outcome.metrics.f1;
    phase.cv_metrics = outcome.metrics;
    phase.accepted = outcome.metrics.f1 > best;
    t.phases.push_back(phase);
    if (!phase.accepted) break;

    best = outcome.metrics.f1;
    t.best_cv_f1 = best;
    t.best_metrics = outcome.metrics;
    (winner.hemisphere == Hemisphere::Left ? t.left_subset : t.right_subset)
        .push_back(winner.feature);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(win));
  }

  detail::check_greedy_monotone(t);
  return t;
}

}  // namespace dualgda
