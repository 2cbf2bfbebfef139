#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualgda/errors.hpp"

namespace dualgda {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }

  void add(bool actual_positive, bool predicted_positive) {
    if (actual_positive) {
      predicted_positive ? ++tp : ++fn;
    } else {
      predicted_positive ? ++fp : ++tn;
    }
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }

  bool operator==(const ConfusionMatrix&) const = default;
};

/// Classification statistics. Undefined 0/0 ratios are reported as 0.0 with
/// the corresponding flag set, never silently.
struct Metrics {
  double f1 = 0.0;
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double precision = 0.0;
  bool f1_undefined = false;
  bool sensitivity_undefined = false;
  bool specificity_undefined = false;
  bool precision_undefined = false;

  std::vector<std::string> undefined_names() const {
    std::vector<std::string> out;
    if (f1_undefined) out.push_back("f1");
    if (sensitivity_undefined) out.push_back("sensitivity");
    if (specificity_undefined) out.push_back("specificity");
    if (precision_undefined) out.push_back("precision");
    return out;
  }
};

/// sensitivity = tp/(tp+fn), specificity = tn/(tn+fp), precision = tp/(tp+fp),
/// accuracy = (tp+tn)/total, f1 = 2tp/(2tp+fp+fn) (the harmonic mean of
/// precision and sensitivity, in the form that is exact for integer counts).
inline Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
  if (cm.total() == 0) {
    raise(Errc::DegenerateInput, "metrics need a non-empty confusion matrix");
  }
  Metrics m;
  const auto ratio = [](std::uint64_t num, std::uint64_t den, double& out, bool& undefined) {
    if (den == 0) {
      out = 0.0;
      undefined = true;
    } else {
      out = static_cast<double>(num) / static_cast<double>(den);
    }
  };
  ratio(cm.tp, cm.tp + cm.fn, m.sensitivity, m.sensitivity_undefined);
  ratio(cm.tn, cm.tn + cm.fp, m.specificity, m.specificity_undefined);
  ratio(cm.tp, cm.tp + cm.fp, m.precision, m.precision_undefined);
  ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, m.f1, m.f1_undefined);
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  return m;
}

}  // namespace dualgda
