#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dualgda/errors.hpp"
#include "dualgda/rng.hpp"
#include "dualgda/schema.hpp"

namespace dualgda {

struct SubjectRecord {
  std::string subject_id;
  Diagnosis diagnosis;
  std::vector<double> left;
  std::vector<double> right;

  const std::vector<double>& hemi(Hemisphere h) const {
    return h == Hemisphere::Left ? left : right;
  }
};

/// Why a subject was dropped during cleaning, with the offending columns.
struct RemovalRecord {
  std::string subject_id;
  Diagnosis diagnosis;
  std::string reason;
  std::vector<std::string> features;
};

struct Provenance {
  std::string source;
  std::vector<RemovalRecord> removals;
};

/// Immutable subjects-by-features container. Operations never mutate their
/// input; they return new tables, so tables can be shared read-only across
/// worker threads.
class FeatureTable {
 public:
  FeatureTable() : schema_(Schema::standard()) {}

  FeatureTable(Schema schema, std::vector<SubjectRecord> subjects, Provenance provenance = {})
      : schema_(std::move(schema)),
        subjects_(std::move(subjects)),
        provenance_(std::move(provenance)) {
    validate();
  }

  const Schema& schema() const { return schema_; }
  const std::vector<SubjectRecord>& subjects() const { return subjects_; }
  const Provenance& provenance() const { return provenance_; }
  std::size_t size() const { return subjects_.size(); }

  std::array<std::size_t, 3> count_by_diagnosis() const {
    std::array<std::size_t, 3> counts{0, 0, 0};
    for (const auto& s : subjects_) counts[static_cast<std::size_t>(s.diagnosis)]++;
    return counts;
  }

  bool has_diagnosis(Diagnosis d) const {
    return count_by_diagnosis()[static_cast<std::size_t>(d)] > 0;
  }

  /// New table with the given subjects (kept in their current order).
  FeatureTable with_subjects(std::vector<SubjectRecord> subjects) const {
    return FeatureTable(schema_, std::move(subjects), provenance_);
  }

 private:
  void validate() const {
    const std::size_t d = schema_.features_per_hemisphere();
    std::unordered_set<std::string> ids;
    ids.reserve(subjects_.size());
    for (const auto& s : subjects_) {
      if (s.left.size() != d || s.right.size() != d) {
        raise(Errc::SchemaMismatch, "subject '" + s.subject_id + "' has " +
                                        std::to_string(s.left.size()) + "/" +
                                        std::to_string(s.right.size()) +
                                        " features, schema expects " + std::to_string(d));
      }
      if (!ids.insert(s.subject_id).second) {
        raise(Errc::DuplicateSubjectId, "duplicate subject_id '" + s.subject_id + "'");
      }
    }
  }

  Schema schema_;
  std::vector<SubjectRecord> subjects_;
  Provenance provenance_;
};

enum class CleanPolicy { DropZeroSubjects, KeepAll };

struct CleanResult {
  FeatureTable table;
  std::vector<std::string> removed;
};

/// Drops every subject with an abnormal measurement (|value| <= tolerance,
/// default exactly 0.0) in either hemisphere. Removals are logged in the
/// returned table's provenance with the offending column names.
inline CleanResult clean(const FeatureTable& table, CleanPolicy policy,
                         double zero_tolerance = 0.0) {
  if (policy == CleanPolicy::KeepAll) {
    return CleanResult{table, {}};
  }
  const auto before = table.count_by_diagnosis();
  std::vector<SubjectRecord> kept;
  kept.reserve(table.size());
  Provenance prov = table.provenance();
  std::vector<std::string> removed;
  for (const auto& s : table.subjects()) {
    std::vector<std::string> offending;
    for (Hemisphere h : {Hemisphere::Left, Hemisphere::Right}) {
      const auto& values = s.hemi(h);
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::fabs(values[i]) <= zero_tolerance) {
          offending.push_back(table.schema().column_name(h, i));
        }
      }
    }
    if (offending.empty()) {
      kept.push_back(s);
    } else {
      removed.push_back(s.subject_id);
      prov.removals.push_back(RemovalRecord{s.subject_id, s.diagnosis, "zero_value",
                                            std::move(offending)});
    }
  }
  if (kept.empty()) {
    raise(Errc::AllSubjectsRemoved, "cleaning removed every subject");
  }
  FeatureTable cleaned(table.schema(), std::move(kept), std::move(prov));
  const auto after = cleaned.count_by_diagnosis();
  for (Diagnosis d : kAllDiagnoses) {
    const auto i = static_cast<std::size_t>(d);
    if (before[i] > 0 && after[i] == 0) {
      raise(Errc::AllSubjectsRemoved,
            std::string("cleaning removed every ") + diagnosis_name(d) + " subject");
    }
  }
  return CleanResult{std::move(cleaned), std::move(removed)};
}

struct HoldoutSplit {
  FeatureTable train;
  FeatureTable test;
};

/// Stratified holdout split. Per class, round-half-up(test_fraction * n) and
/// at least 1 subject (but never the whole class) go to test. Subjects keep
/// their table order within each part; the assignment is deterministic in
/// the seed (classes are processed CN, MCI, AD over one shuffle stream).
inline HoldoutSplit split_holdout(const FeatureTable& table, double test_fraction,
                                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    raise(Errc::InvalidSpec, "test_fraction must be in (0, 1)");
  }
  const auto counts = table.count_by_diagnosis();
  for (Diagnosis d : kAllDiagnoses) {
    const auto n = counts[static_cast<std::size_t>(d)];
    if (n == 1) {
      raise(Errc::ClassTooSmall, std::string(diagnosis_name(d)) +
                                     " has a single subject; need at least 2 to split");
    }
  }
  Rng rng(seed);
  std::vector<bool> to_test(table.size(), false);
  for (Diagnosis d : kAllDiagnoses) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (table.subjects()[i].diagnosis == d) members.push_back(i);
    }
    if (members.empty()) continue;
    rng.shuffle(members);
    std::size_t k = static_cast<std::size_t>(std::floor(test_fraction * members.size() + 0.5));
    k = std::max<std::size_t>(k, 1);
    k = std::min(k, members.size() - 1);
    for (std::size_t j = 0; j < k; ++j) to_test[members[j]] = true;
  }
  std::vector<SubjectRecord> train, test;
  for (std::size_t i = 0; i < table.size(); ++i) {
    (to_test[i] ? test : train).push_back(table.subjects()[i]);
  }
  return HoldoutSplit{table.with_subjects(std::move(train)), table.with_subjects(std::move(test))};
}

/// Keeps only the two classes named by the comparison.
inline FeatureTable subset_pair(const FeatureTable& table, Comparison comparison) {
  const Diagnosis neg = negative_class(comparison);
  const Diagnosis pos = positive_class(comparison);
  std::vector<SubjectRecord> kept;
  for (const auto& s : table.subjects()) {
    if (s.diagnosis == neg || s.diagnosis == pos) kept.push_back(s);
  }
  for (Diagnosis d : {neg, pos}) {
    if (std::none_of(kept.begin(), kept.end(),
                     [d](const SubjectRecord& s) { return s.diagnosis == d; })) {
      raise(Errc::EmptyClass, std::string("no ") + diagnosis_name(d) + " subjects for comparison " +
                                  comparison_name(comparison));
    }
  }
  return table.with_subjects(std::move(kept));
}

}  // namespace dualgda
