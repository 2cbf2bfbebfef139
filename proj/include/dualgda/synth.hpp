#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dualgda/errors.hpp"
#include "dualgda/rng.hpp"
#include "dualgda/schema.hpp"
#include "dualgda/table.hpp"

namespace dualgda {

struct MeasureDistribution {
  double mean = 0.0;
  double sigma = 1.0;
};

/// Plausible positive ranges per measure, placed well away from zero so a
/// zero value is genuinely abnormal (the cleaning rule depends on that).
inline std::array<MeasureDistribution, kMeasureCount> default_base_distributions() {
  std::array<MeasureDistribution, kMeasureCount> base;
  base[static_cast<std::size_t>(Measure::SurfaceArea)] = {650.0, 90.0};
  base[static_cast<std::size_t>(Measure::TravelDepth)] = {7.5, 0.9};
  base[static_cast<std::size_t>(Measure::GeodesicDepth)] = {9.0, 1.1};
  base[static_cast<std::size_t>(Measure::MeanCurvature)] = {0.13, 0.016};
  base[static_cast<std::size_t>(Measure::Convexity)] = {4.8, 0.7};
  base[static_cast<std::size_t>(Measure::Thickness)] = {2.5, 0.3};
  base[static_cast<std::size_t>(Measure::Volume)] = {1900.0, 260.0};
  return base;
}

/// One feature with class-dependent mean shifts, in units of the measure's
/// base sigma. Offsets must be ordered CN <= MCI <= AD (disease-progression
/// realism) unless enforce_progression is switched off.
struct SignalFeature {
  Hemisphere hemisphere = Hemisphere::Left;
  std::string region;
  Measure measure = Measure::Thickness;
  std::array<double, 3> effect_sigmas{0.0, 0.0, 0.0};  // CN, MCI, AD
};

struct CohortSpec {
  std::array<std::size_t, 3> n_per_class{190, 305, 133};  // CN, MCI, AD
  Schema schema = Schema::standard();
  std::vector<SignalFeature> signal_features;
  std::array<MeasureDistribution, kMeasureCount> base = default_base_distributions();
  /// Equal pairwise correlation between the measures of one region block.
  double correlation_rho = 0.0;
  /// This many distinct subjects get exactly one feature zeroed out.
  std::size_t zero_noise_subjects = 0;
  bool enforce_progression = true;
  std::uint64_t seed = 0;

  std::size_t total_subjects() const { return n_per_class[0] + n_per_class[1] + n_per_class[2]; }
};

namespace detail {

inline void validate_spec(const CohortSpec& spec) {
  if (spec.total_subjects() == 0) {
    raise(Errc::InvalidSpec, "cohort has no subjects");
  }
  if (spec.zero_noise_subjects > spec.total_subjects()) {
    raise(Errc::InvalidSpec, "zero_noise_subjects exceeds the cohort size");
  }
  if (!(spec.correlation_rho >= 0.0 && spec.correlation_rho <= 0.95)) {
    raise(Errc::InvalidSpec, "correlation_rho must be in [0, 0.95]");
  }
  for (Measure m : spec.schema.measures()) {
    const auto& d = spec.base[static_cast<std::size_t>(m)];
    if (!(d.sigma > 0.0) || !std::isfinite(d.sigma) || !std::isfinite(d.mean)) {
      raise(Errc::InvalidSpec, std::string("base distribution for ") + measure_name(m) +
                                   " needs a finite mean and a positive sigma");
    }
  }
  std::set<std::pair<int, std::size_t>> seen;
  for (const auto& sf : spec.signal_features) {
    std::size_t index = 0;
    try {
      index = spec.schema.index_of(sf.measure, sf.region);
    } catch (const Error&) {
      raise(Errc::InvalidSpec, std::string("signal feature not in schema: ") + sf.region + "." +
                                   measure_name(sf.measure));
    }
    if (!seen.insert({static_cast<int>(sf.hemisphere), index}).second) {
      raise(Errc::InvalidSpec, std::string("signal feature listed twice: ") +
                                   hemisphere_prefix(sf.hemisphere) + "." + sf.region + "." +
                                   measure_name(sf.measure));
    }
    for (double e : sf.effect_sigmas) {
      if (!std::isfinite(e)) {
        raise(Errc::InvalidSpec, "signal effect sizes must be finite");
      }
    }
    if (spec.enforce_progression &&
        !(sf.effect_sigmas[0] <= sf.effect_sigmas[1] && sf.effect_sigmas[1] <= sf.effect_sigmas[2])) {
      raise(Errc::InvalidSpec, std::string("effect sizes for ") + sf.region + "." +
                                   measure_name(sf.measure) +
                                   " are not ordered CN <= MCI <= AD");
    }
  }
}

inline std::string subject_id_for(std::size_t ordinal) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "sub-%04zu", ordinal + 1);
  return buf;
}

}  // namespace detail

/// Draws the cohort. The random stream is consumed in a documented order so
/// fixtures are reproducible: subjects in CN, MCI, AD blocks; per subject the
/// left then the right hemisphere; per hemisphere regions in schema order;
/// per region one standard normal per measure (measure order). Region blocks
/// are correlated through the Cholesky factor of the equicorrelated matrix.
/// After generation, zero corruption shuffles the subject indices once and
/// zeroes one uniformly drawn feature (hemisphere draw, then index draw) in
/// each of the first zero_noise_subjects subjects.
inline FeatureTable generate(const CohortSpec& spec) {
  detail::validate_spec(spec);
  const Schema& schema = spec.schema;
  const std::size_t n_measures = schema.measures().size();
  const std::size_t n_regions = schema.regions().size();
  const std::size_t dim = schema.features_per_hemisphere();

  // Per-feature sigma and per-(class, hemisphere) mean vectors.
  std::vector<double> sigma(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    sigma[i] = spec.base[static_cast<std::size_t>(schema.measures()[i / n_regions])].sigma;
  }
  std::array<std::array<std::vector<double>, 2>, 3> mean;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t h = 0; h < 2; ++h) {
      mean[c][h].resize(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        mean[c][h][i] =
            spec.base[static_cast<std::size_t>(schema.measures()[i / n_regions])].mean;
      }
    }
  }
  for (const auto& sf : spec.signal_features) {
    const std::size_t index = schema.index_of(sf.measure, sf.region);
    const double s = spec.base[static_cast<std::size_t>(sf.measure)].sigma;
    for (std::size_t c = 0; c < 3; ++c) {
      mean[c][static_cast<std::size_t>(sf.hemisphere)][index] += sf.effect_sigmas[c] * s;
    }
  }

  // Cholesky factor of the region block's equicorrelated correlation matrix.
  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_measures),
                                                   static_cast<Eigen::Index>(n_measures),
                                                   spec.correlation_rho);
  corr.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success) {
    raise(Errc::InvalidSpec, "region block correlation matrix is not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();

  Rng rng(spec.seed);
  std::vector<SubjectRecord> subjects;
  subjects.reserve(spec.total_subjects());
  std::vector<double> z(n_measures);
  std::size_t ordinal = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < spec.n_per_class[c]; ++k, ++ordinal) {
      SubjectRecord s;
      s.subject_id = detail::subject_id_for(ordinal);
      s.diagnosis = static_cast<Diagnosis>(c);
      for (std::size_t h = 0; h < 2; ++h) {
        std::vector<double>& values = h == 0 ? s.left : s.right;
        values.resize(dim);
        for (std::size_t r = 0; r < n_regions; ++r) {
          for (std::size_t m = 0; m < n_measures; ++m) z[m] = rng.normal();
          for (std::size_t m = 0; m < n_measures; ++m) {
            double v = 0.0;
            for (std::size_t t = 0; t <= m; ++t) {
              v += L(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t)) * z[t];
            }
            const std::size_t index = m * n_regions + r;
            values[index] = mean[c][h][index] + sigma[index] * v;
          }
        }
      }
      subjects.push_back(std::move(s));
    }
  }

  if (spec.zero_noise_subjects > 0) {
    std::vector<std::size_t> order(subjects.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t k = 0; k < spec.zero_noise_subjects; ++k) {
      SubjectRecord& victim = subjects[order[k]];
      const std::size_t h = rng.bounded(2);
      const std::size_t index = rng.bounded(dim);
      (h == 0 ? victim.left : victim.right)[index] = 0.0;
    }
  }

  Provenance prov;
  prov.source = "synthetic:" + std::string(Rng::kGeneratorId) + ":seed=" + std::to_string(spec.seed);
  return FeatureTable(schema, std::move(subjects), std::move(prov));
}

}  // namespace dualgda
