#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dualgda/errors.hpp"
#include "dualgda/gda.hpp"
#include "dualgda/table.hpp"

namespace dualgda {

/// Per-hemisphere decisions plus the OR-fused result.
struct DualDecision {
  Decision fused;
  std::optional<Decision> left;
  std::optional<Decision> right;
};

/// One GDA per hemisphere over its own feature subset, fused by the OR rule:
/// a subject is positive iff either decision space says positive. The fused
/// score is the max of the per-space log odds, the unique scalar consistent
/// with the OR label at threshold 0.
class DualSpaceModel {
 public:
  DualSpaceModel() = default;

  DualSpaceModel(std::optional<GdaModel> left, std::optional<GdaModel> right,
                 std::vector<std::string> train_ids)
      : left_(std::move(left)), right_(std::move(right)), train_ids_(std::move(train_ids)) {
    if (!left_ && !right_) {
      raise(Errc::BothSubsetsEmpty, "dual-space model needs at least one hemisphere");
    }
    if (left_ && right_) {
      const ClassPair l = left_->classes();
      const ClassPair r = right_->classes();
      if (l.negative != r.negative || l.positive != r.positive) {
        raise(Errc::DimensionMismatch, "hemisphere models disagree on the class pair");
      }
    }
  }

  const std::optional<GdaModel>& left() const { return left_; }
  const std::optional<GdaModel>& right() const { return right_; }
  const std::vector<std::string>& train_ids() const { return train_ids_; }

  ClassPair classes() const { return left_ ? left_->classes() : right_->classes(); }

  DualDecision classify_detail(const SubjectRecord& subject) const {
    DualDecision d;
    if (left_) d.left = left_->classify(subject);
    if (right_) d.right = right_->classify(subject);
    const ClassPair pair = classes();
    d.fused.positive = (d.left && d.left->positive) || (d.right && d.right->positive);
    double log_odds = -std::numeric_limits<double>::infinity();
    if (d.left) log_odds = std::max(log_odds, d.left->log_odds);
    if (d.right) log_odds = std::max(log_odds, d.right->log_odds);
    d.fused.log_odds = log_odds;
    d.fused.label = d.fused.positive ? pair.positive : pair.negative;
    return d;
  }

  Decision classify(const SubjectRecord& subject) const { return classify_detail(subject).fused; }

 private:
  std::optional<GdaModel> left_;
  std::optional<GdaModel> right_;
  std::vector<std::string> train_ids_;
};

/// Fits each present hemisphere model independently on the same training
/// subjects. An empty subset omits that hemisphere's decision space.
inline DualSpaceModel fit_dual(const FeatureTable& train, std::vector<std::size_t> left_subset,
                               std::vector<std::size_t> right_subset, const GdaConfig& config = {}) {
  if (left_subset.empty() && right_subset.empty()) {
    raise(Errc::BothSubsetsEmpty, "both feature subsets are empty");
  }
  std::optional<GdaModel> left, right;
  if (!left_subset.empty()) {
    left = fit(train, Hemisphere::Left, std::move(left_subset), config);
  }
  if (!right_subset.empty()) {
    right = fit(train, Hemisphere::Right, std::move(right_subset), config);
  }
  std::vector<std::string> ids;
  ids.reserve(train.size());
  for (const auto& s : train.subjects()) ids.push_back(s.subject_id);
  return DualSpaceModel(std::move(left), std::move(right), std::move(ids));
}

inline Decision classify_dual(const DualSpaceModel& model, const SubjectRecord& subject) {
  return model.classify(subject);
}

}  // namespace dualgda
