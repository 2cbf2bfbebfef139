#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dualgda/dual.hpp"
#include "dualgda/errors.hpp"
#include "dualgda/metrics.hpp"
#include "dualgda/rng.hpp"
#include "dualgda/table.hpp"

namespace dualgda {

/// Stratified fold assignment: per class, subjects are shuffled with the
/// seed and dealt round-robin into k folds, so per-class fold sizes differ
/// by at most 1. Classes are processed in CN, MCI, AD order over one stream.
struct FoldAssignment {
  int k = 10;
  std::uint64_t seed = 0;
  std::unordered_map<std::string, int> fold_of;

  int fold(const std::string& subject_id) const {
    const auto it = fold_of.find(subject_id);
    if (it == fold_of.end()) {
      raise(Errc::FoldMissingClass, "subject '" + subject_id + "' has no fold assignment");
    }
    return it->second;
  }
};

inline FoldAssignment make_folds(const FeatureTable& table, int k, std::uint64_t seed) {
  if (k < 2) {
    raise(Errc::InvalidSpec, "cross-validation needs k >= 2 folds");
  }
  FoldAssignment folds;
  folds.k = k;
  folds.seed = seed;
  Rng rng(seed);
  for (Diagnosis d : kAllDiagnoses) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (table.subjects()[i].diagnosis == d) members.push_back(i);
    }
    if (members.empty()) continue;
    rng.shuffle(members);
    for (std::size_t j = 0; j < members.size(); ++j) {
      folds.fold_of.emplace(table.subjects()[members[j]].subject_id,
                            static_cast<int>(j % static_cast<std::size_t>(k)));
    }
  }
  return folds;
}

struct FoldOutcome {
  ConfusionMatrix confusion;
  Metrics metrics;
};

struct CvResult {
  ConfusionMatrix pooled;
  Metrics metrics;        // micro: from confusion counts pooled across folds
  Metrics macro;          // mean of per-fold metric values (0/0 convention applies per fold)
  std::vector<FoldOutcome> per_fold;
};

namespace detail {

inline ClassPair binary_classes_checked(const FeatureTable& table) { return class_pair_of(table); }

/// Recounts a prediction log into a confusion matrix; used to cross-check
/// the incrementally accumulated counts on every run.
inline ConfusionMatrix recount(const std::vector<std::pair<bool, bool>>& outcomes) {
  ConfusionMatrix cm;
  for (const auto& [actual, predicted] : outcomes) cm.add(actual, predicted);
  return cm;
}

inline Metrics mean_metrics(const std::vector<FoldOutcome>& folds) {
  Metrics m;
  if (folds.empty()) return m;
  for (const auto& f : folds) {
    m.f1 += f.metrics.f1;
    m.accuracy += f.metrics.accuracy;
    m.sensitivity += f.metrics.sensitivity;
    m.specificity += f.metrics.specificity;
    m.precision += f.metrics.precision;
  }
  const double n = static_cast<double>(folds.size());
  m.f1 /= n;
  m.accuracy /= n;
  m.sensitivity /= n;
  m.specificity /= n;
  m.precision /= n;
  return m;
}

}  // namespace detail

/// Stratified k-fold cross-validation of a model recipe. For each fold the
/// recipe is fit on the other k-1 folds (subjects keep table order) and
/// predicts the held fold; confusion counts are pooled across folds (micro
/// averaging). Recipe: fit(table) -> model with classify(record) -> Decision.
template <typename Recipe>
CvResult cross_validate(const FeatureTable& table, const Recipe& recipe,
                        const FoldAssignment& folds) {
  const ClassPair classes = detail::binary_classes_checked(table);

  std::vector<std::vector<std::size_t>> fold_members(static_cast<std::size_t>(folds.k));
  for (std::size_t i = 0; i < table.size(); ++i) {
    fold_members[static_cast<std::size_t>(folds.fold(table.subjects()[i].subject_id))].push_back(i);
  }
  for (int f = 0; f < folds.k; ++f) {
    bool has_neg = false, has_pos = false;
    for (std::size_t i : fold_members[static_cast<std::size_t>(f)]) {
      const Diagnosis d = table.subjects()[i].diagnosis;
      has_neg |= d == classes.negative;
      has_pos |= d == classes.positive;
    }
    if (!has_neg || !has_pos) {
      raise(Errc::FoldMissingClass,
            "fold " + std::to_string(f) + " is missing a class; use fewer folds");
    }
  }

  CvResult result;
  std::vector<std::pair<bool, bool>> all_outcomes;
  all_outcomes.reserve(table.size());
  for (int f = 0; f < folds.k; ++f) {
    std::vector<SubjectRecord> train_subjects;
    train_subjects.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (folds.fold(table.subjects()[i].subject_id) != f) {
        train_subjects.push_back(table.subjects()[i]);
      }
    }
    const FeatureTable train = table.with_subjects(std::move(train_subjects));
    const auto model = recipe.fit(train);

    FoldOutcome outcome;
    for (std::size_t i : fold_members[static_cast<std::size_t>(f)]) {
      const SubjectRecord& s = table.subjects()[i];
      const bool actual = s.diagnosis == classes.positive;
      const bool predicted = model.classify(s).positive;
      outcome.confusion.add(actual, predicted);
      all_outcomes.emplace_back(actual, predicted);
    }
    outcome.metrics = metrics_from_confusion(outcome.confusion);
    result.pooled += outcome.confusion;
    result.per_fold.push_back(std::move(outcome));
  }

  if (result.pooled != detail::recount(all_outcomes) || result.pooled.total() != table.size()) {
    throw std::logic_error("cross_validate: confusion recount mismatch");
  }
  result.metrics = metrics_from_confusion(result.pooled);
  result.macro = detail::mean_metrics(result.per_fold);
  return result;
}

struct HoldoutResult {
  ConfusionMatrix confusion;
  Metrics metrics;
};

/// Single-pass evaluation on held-out subjects. Rejects any subject-id
/// overlap with the model's training set.
inline HoldoutResult evaluate_holdout(const DualSpaceModel& model, const FeatureTable& test) {
  if (test.size() == 0) {
    raise(Errc::DegenerateInput, "held-out test set is empty");
  }
  std::unordered_set<std::string> train_ids(model.train_ids().begin(), model.train_ids().end());
  for (const auto& s : test.subjects()) {
    if (train_ids.count(s.subject_id)) {
      raise(Errc::TrainTestOverlap,
            "subject '" + s.subject_id + "' appears in both training and test sets");
    }
  }
  const ClassPair classes = model.classes();
  HoldoutResult result;
  std::vector<std::pair<bool, bool>> outcomes;
  outcomes.reserve(test.size());
  for (const auto& s : test.subjects()) {
    const bool actual = s.diagnosis == classes.positive;
    const DualDecision d = model.classify_detail(s);
    // OR-fusion containment, checked per subject: anyone a hemisphere calls
    // positive must be fused-positive, and fused-positive needs a witness.
    const bool any_side = (d.left && d.left->positive) || (d.right && d.right->positive);
    if (d.fused.positive != any_side) {
      throw std::logic_error("evaluate_holdout: fused label violates the OR rule");
    }
    const bool predicted = d.fused.positive;
    result.confusion.add(actual, predicted);
    outcomes.emplace_back(actual, predicted);
  }
  if (result.confusion != detail::recount(outcomes)) {
    throw std::logic_error("evaluate_holdout: confusion recount mismatch");
  }
  result.metrics = metrics_from_confusion(result.confusion);
  return result;
}

/// The standard recipe: dual-space GDA with fixed per-hemisphere subsets.
struct DualRecipe {
  std::vector<std::size_t> left_subset;
  std::vector<std::size_t> right_subset;
  GdaConfig gda;

  DualSpaceModel fit(const FeatureTable& train) const {
    return fit_dual(train, left_subset, right_subset, gda);
  }
};

}  // namespace dualgda
