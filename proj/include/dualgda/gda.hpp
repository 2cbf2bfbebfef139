#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dualgda/errors.hpp"
#include "dualgda/table.hpp"

namespace dualgda {

enum class CovarianceMode { Shared, PerClass };
enum class PriorMode { Empirical, Uniform };

struct GdaConfig {
  CovarianceMode covariance_mode = CovarianceMode::PerClass;
  /// Shrinkage towards (trace/d) * I: cov' = (1 - lambda) * cov + lambda * (trace/d) * I.
  double shrinkage = 1e-4;
  PriorMode prior_mode = PriorMode::Empirical;
  /// Divide covariances by n - 1 (pooled: n - 2) instead of the ML n.
  bool unbiased = false;
};

/// The (negative, positive) class pair of a binary task, severity-ordered.
struct ClassPair {
  Diagnosis negative;
  Diagnosis positive;
};

/// Derives the class pair from a two-group table: negative = less severe.
inline ClassPair class_pair_of(const FeatureTable& table) {
  const auto counts = table.count_by_diagnosis();
  std::vector<Diagnosis> present;
  for (Diagnosis d : kAllDiagnoses) {
    if (counts[static_cast<std::size_t>(d)] > 0) present.push_back(d);
  }
  if (present.size() != 2) {
    raise(Errc::EmptyClass, "binary task needs exactly two diagnosis groups, table has " +
                                std::to_string(present.size()));
  }
  return ClassPair{present[0], present[1]};
}

/// First and second moment accumulators for one class over a feature subset.
/// Accumulation is plain scalar addition in subject order, so accumulating
/// the full feature set and extracting a submatrix gives bit-identical
/// numbers to accumulating the subset directly.
struct ClassStats {
  std::size_t n = 0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd scatter;  // sum of x * x^T, full symmetric

  explicit ClassStats(std::size_t dim = 0)
      : sum(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
        scatter(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                      static_cast<Eigen::Index>(dim))) {}

  void add(std::span<const double> values, std::span<const std::size_t> indices) {
    const auto dim = static_cast<std::size_t>(sum.size());
    ++n;
    for (std::size_t i = 0; i < dim; ++i) {
      const double xi = values[indices[i]];
      sum[static_cast<Eigen::Index>(i)] += xi;
      for (std::size_t j = i; j < dim; ++j) {
        scatter(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
            xi * values[indices[j]];
      }
    }
  }

  ClassStats extract(std::span<const std::size_t> subset) const {
    ClassStats out(subset.size());
    out.n = n;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      out.sum[static_cast<Eigen::Index>(i)] = sum[static_cast<Eigen::Index>(subset[i])];
      for (std::size_t j = i; j < subset.size(); ++j) {
        // add() fills the upper triangle only; subsets keep acceptance order,
        // so map through (min, max). x[a]*x[b] commutes bitwise.
        const auto a = static_cast<Eigen::Index>(std::min(subset[i], subset[j]));
        const auto b = static_cast<Eigen::Index>(std::max(subset[i], subset[j]));
        out.scatter(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = scatter(a, b);
      }
    }
    return out;
  }

  Eigen::VectorXd mean() const { return sum / static_cast<double>(n); }

  /// ML covariance (divide by n), or the n-1 estimator when unbiased. Only
  /// the upper triangle of scatter is read; the result is full symmetric.
  Eigen::MatrixXd covariance(bool unbiased) const {
    const Eigen::Index d = sum.size();
    const Eigen::VectorXd mu = mean();
    const double denom = unbiased ? static_cast<double>(n) - 1.0 : static_cast<double>(n);
    Eigen::MatrixXd cov(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        const double s = unbiased ? (scatter(i, j) - static_cast<double>(n) * mu[i] * mu[j]) / denom
                                  : scatter(i, j) / denom - mu[i] * mu[j];
        cov(i, j) = s;
        cov(j, i) = s;
      }
    }
    return cov;
  }
};

inline void accumulate_class_stats(const FeatureTable& table, Hemisphere hemisphere,
                                   std::span<const std::size_t> indices, Diagnosis cls,
                                   ClassStats& stats) {
  for (const auto& s : table.subjects()) {
    if (s.diagnosis == cls) stats.add(s.hemi(hemisphere), indices);
  }
}

struct Decision {
  bool positive = false;
  Diagnosis label = Diagnosis::CN;
  /// Positive-class log posterior minus negative-class log posterior.
  /// label is positive iff log_odds > 0 (exact ties go negative).
  double log_odds = 0.0;
};

/// Binary Gaussian discriminant over a feature subset of one hemisphere.
/// Immutable after fit; classify is pure and safe to call concurrently.
class GdaModel {
 public:
  GdaModel() = default;

  Hemisphere hemisphere() const { return hemisphere_; }
  const std::vector<std::size_t>& feature_subset() const { return subset_; }
  ClassPair classes() const { return classes_; }
  const GdaConfig& config() const { return config_; }
  std::size_t dim() const { return subset_.size(); }

  const Eigen::VectorXd& mean(bool positive) const { return mean_[positive ? 1 : 0]; }
  const Eigen::MatrixXd& covariance(bool positive) const {
    return config_.covariance_mode == CovarianceMode::Shared ? cov_[0] : cov_[positive ? 1 : 0];
  }
  double log_prior(bool positive) const { return log_prior_[positive ? 1 : 0]; }

  /// Exact multivariate normal log density of x under the class Gaussian:
  /// -0.5 * (d log 2pi + log det cov + (x - mu)' cov^-1 (x - mu)), via the
  /// cached Cholesky factor.
  double log_density(bool positive, const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != subset_.size()) {
      raise(Errc::DimensionMismatch, "log_density: x has dim " + std::to_string(x.size()) +
                                         ", model has " + std::to_string(subset_.size()));
    }
    const int c = positive ? 1 : 0;
    const int ci = config_.covariance_mode == CovarianceMode::Shared ? 0 : c;
    Eigen::VectorXd v = x - mean_[c];
    chol_[ci].matrixL().solveInPlace(v);
    const double quad = v.squaredNorm();
    constexpr double log_two_pi = 1.8378770664093454835606594728112353;
    return -0.5 * (static_cast<double>(subset_.size()) * log_two_pi + log_det_[ci] + quad);
  }

  Decision classify(const Eigen::VectorXd& x) const {
    const double log_odds = (log_density(true, x) + log_prior_[1]) -
                            (log_density(false, x) + log_prior_[0]);
    Decision d;
    d.log_odds = log_odds;
    d.positive = log_odds > 0.0;
    d.label = d.positive ? classes_.positive : classes_.negative;
    return d;
  }

  /// Collects the model's feature subset from a subject's hemisphere vector.
  Eigen::VectorXd gather(const SubjectRecord& subject) const {
    const auto& values = subject.hemi(hemisphere_);
    Eigen::VectorXd x(static_cast<Eigen::Index>(subset_.size()));
    for (std::size_t i = 0; i < subset_.size(); ++i) {
      if (subset_[i] >= values.size()) {
        raise(Errc::DimensionMismatch, "subject '" + subject.subject_id +
                                           "' is shorter than the model's feature subset");
      }
      x[static_cast<Eigen::Index>(i)] = values[subset_[i]];
    }
    return x;
  }

  Decision classify(const SubjectRecord& subject) const { return classify(gather(subject)); }

  static GdaModel from_parts(Hemisphere hemisphere, std::vector<std::size_t> subset,
                             ClassPair classes, std::vector<Eigen::VectorXd> means,
                             std::vector<Eigen::MatrixXd> covariances,
                             std::array<double, 2> log_priors, GdaConfig config) {
    GdaModel m;
    m.hemisphere_ = hemisphere;
    m.subset_ = std::move(subset);
    m.classes_ = classes;
    m.mean_[0] = std::move(means[0]);
    m.mean_[1] = std::move(means[1]);
    m.config_ = config;
    m.log_prior_ = log_priors;
    const std::size_t ncov = config.covariance_mode == CovarianceMode::Shared ? 1 : 2;
    for (std::size_t i = 0; i < ncov; ++i) {
      m.cov_[i] = std::move(covariances[i]);
      m.factorize(i);
    }
    return m;
  }

 private:
  void factorize(std::size_t i) {
    chol_[i].compute(cov_[i]);
    bool ok = chol_[i].info() == Eigen::Success;
    if (ok) {
      // Eigen's LLT can report success with a zero pivot on some inputs;
      // the model needs strictly positive pivots.
      const auto& L = chol_[i].matrixLLT();
      for (Eigen::Index k = 0; k < L.rows(); ++k) {
        if (!(L(k, k) > 0.0) || !std::isfinite(L(k, k))) ok = false;
      }
    }
    if (!ok) {
      raise(Errc::SingularCovariance,
            "covariance is not positive definite (shrinkage " +
                std::to_string(config_.shrinkage) + ", dim " + std::to_string(subset_.size()) +
                ")");
    }
    double log_det = 0.0;
    const auto& L = chol_[i].matrixLLT();
    for (Eigen::Index k = 0; k < L.rows(); ++k) log_det += std::log(L(k, k));
    log_det_[i] = 2.0 * log_det;
  }

  Hemisphere hemisphere_ = Hemisphere::Left;
  std::vector<std::size_t> subset_;
  ClassPair classes_{Diagnosis::CN, Diagnosis::MCI};
  GdaConfig config_;
  Eigen::VectorXd mean_[2];
  Eigen::MatrixXd cov_[2];  // [0] only in Shared mode
  Eigen::LLT<Eigen::MatrixXd> chol_[2];
  double log_det_[2] = {0.0, 0.0};
  std::array<double, 2> log_prior_ = {0.0, 0.0};
};

namespace detail {

inline void shrink_in_place(Eigen::MatrixXd& cov, double lambda) {
  const Eigen::Index d = cov.rows();
  const double target = cov.trace() / static_cast<double>(d);
  cov *= (1.0 - lambda);
  for (Eigen::Index i = 0; i < d; ++i) cov(i, i) += lambda * target;
}

inline void check_subset(const std::vector<std::size_t>& subset, std::size_t dim) {
  if (subset.empty()) {
    raise(Errc::SubsetOutOfRange, "feature subset is empty");
  }
  std::unordered_set<std::size_t> seen;
  for (std::size_t idx : subset) {
    if (idx >= dim) {
      raise(Errc::SubsetOutOfRange, "feature index " + std::to_string(idx) +
                                        " out of range (hemisphere has " + std::to_string(dim) +
                                        " features)");
    }
    if (!seen.insert(idx).second) {
      raise(Errc::SubsetOutOfRange, "feature index " + std::to_string(idx) + " repeated in subset");
    }
  }
}

}  // namespace detail

/// Builds the model from per-class moment accumulators. fit() and the
/// selection scorer both end up here, so the two paths agree bit-for-bit.
inline GdaModel fit_from_stats(Hemisphere hemisphere, std::vector<std::size_t> subset,
                               ClassPair classes, const ClassStats& neg, const ClassStats& pos,
                               const GdaConfig& config) {
  const std::size_t d = subset.size();
  const ClassStats* stats[2] = {&neg, &pos};
  for (const ClassStats* s : stats) {
    const std::size_t min_n = config.covariance_mode == CovarianceMode::PerClass ? d + 1 : 2;
    if (s->n < min_n) {
      raise(Errc::ClassTooSmall, "class has " + std::to_string(s->n) + " subjects, needs >= " +
                                     std::to_string(min_n) + " for a " + std::to_string(d) +
                                     "-feature model");
    }
  }

  std::vector<Eigen::VectorXd> means = {neg.mean(), pos.mean()};
  std::vector<Eigen::MatrixXd> covs;
  if (config.covariance_mode == CovarianceMode::Shared) {
    // Pool ML covariances weighted by class counts.
    const double n0 = static_cast<double>(neg.n);
    const double n1 = static_cast<double>(pos.n);
    Eigen::MatrixXd pooled = neg.covariance(false) * n0 + pos.covariance(false) * n1;
    pooled /= config.unbiased ? (n0 + n1 - 2.0) : (n0 + n1);
    detail::shrink_in_place(pooled, config.shrinkage);
    covs.push_back(std::move(pooled));
  } else {
    for (const ClassStats* s : stats) {
      Eigen::MatrixXd cov = s->covariance(config.unbiased);
      detail::shrink_in_place(cov, config.shrinkage);
      covs.push_back(std::move(cov));
    }
  }

  std::array<double, 2> log_priors;
  if (config.prior_mode == PriorMode::Uniform) {
    log_priors = {std::log(0.5), std::log(0.5)};
  } else {
    const double total = static_cast<double>(neg.n + pos.n);
    log_priors = {std::log(static_cast<double>(neg.n) / total),
                  std::log(static_cast<double>(pos.n) / total)};
  }
  return GdaModel::from_parts(hemisphere, std::move(subset), classes, std::move(means),
                              std::move(covs), log_priors, config);
}

/// Fits class-conditional Gaussians over the subset. Means are class sample
/// means; covariances are ML estimates (n denominator) shrunk towards
/// (trace/d) * I; priors are class proportions unless uniform is requested.
inline GdaModel fit(const FeatureTable& table, Hemisphere hemisphere,
                    std::vector<std::size_t> subset, const GdaConfig& config = {}) {
  detail::check_subset(subset, table.schema().features_per_hemisphere());
  const ClassPair classes = class_pair_of(table);
  ClassStats neg(subset.size()), pos(subset.size());
  accumulate_class_stats(table, hemisphere, subset, classes.negative, neg);
  accumulate_class_stats(table, hemisphere, subset, classes.positive, pos);
  return fit_from_stats(hemisphere, std::move(subset), classes, neg, pos, config);
}

}  // namespace dualgda
