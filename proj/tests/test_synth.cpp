#include "dualgda/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dualgda/anova.hpp"
#include "dualgda/table.hpp"
#include "gtest_util.hpp"
#include "test_util.hpp"

using dualgda::clean;
using dualgda::CleanPolicy;
using dualgda::CohortSpec;
using dualgda::Diagnosis;
using dualgda::Errc;
using dualgda::FeatureTable;
using dualgda::generate;
using dualgda::Grouping;
using dualgda::Hemisphere;
using dualgda::Measure;
using dualgda::Schema;
using dualgda::SignalFeature;

namespace {

Schema tiny_schema() {
  return Schema({Measure::SurfaceArea, Measure::Thickness}, {"front", "back"});
}

CohortSpec tiny_spec(std::uint64_t seed) {
  CohortSpec spec;
  spec.schema = tiny_schema();
  spec.n_per_class = {40, 50, 30};
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST(Synth, DeterministicForAFixedSeed) {
  const auto spec = tiny_spec(77);
  const auto a = generate(spec);
  const auto b = generate(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.subjects()[i].subject_id, b.subjects()[i].subject_id);
    EXPECT_EQ(a.subjects()[i].left, b.subjects()[i].left);    // bitwise
    EXPECT_EQ(a.subjects()[i].right, b.subjects()[i].right);  // bitwise
  }
  EXPECT_NE(a.provenance().source.find("seed=77"), std::string::npos);
  EXPECT_NE(a.provenance().source.find("mt19937_64"), std::string::npos);

  auto other = spec;
  other.seed = 78;
  const auto c = generate(other);
  bool any_differ = false;
  for (std::size_t i = 0; i < a.size() && !any_differ; ++i) {
    any_differ = a.subjects()[i].left != c.subjects()[i].left;
  }
  EXPECT_TRUE(any_differ);
}

TEST(Synth, ClassBlocksAndSubjectIds) {
  const auto table = generate(tiny_spec(5));
  const auto counts = table.count_by_diagnosis();
  EXPECT_EQ(counts[0], 40u);
  EXPECT_EQ(counts[1], 50u);
  EXPECT_EQ(counts[2], 30u);
  EXPECT_EQ(table.subjects().front().subject_id, "sub-0001");
  EXPECT_EQ(table.subjects().back().subject_id, "sub-0120");
  // class blocks come in CN, MCI, AD order
  EXPECT_EQ(table.subjects()[0].diagnosis, Diagnosis::CN);
  EXPECT_EQ(table.subjects()[39].diagnosis, Diagnosis::CN);
  EXPECT_EQ(table.subjects()[40].diagnosis, Diagnosis::MCI);
  EXPECT_EQ(table.subjects()[89].diagnosis, Diagnosis::MCI);
  EXPECT_EQ(table.subjects()[90].diagnosis, Diagnosis::AD);
}

TEST(Synth, SampleMomentsMatchTheSpec) {
  auto spec = tiny_spec(123);
  spec.n_per_class = {400, 400, 400};
  SignalFeature sf;
  sf.hemisphere = Hemisphere::Left;
  sf.region = "front";
  sf.measure = Measure::Thickness;
  sf.effect_sigmas = {0.0, 1.0, 2.0};
  spec.signal_features = {sf};
  const auto table = generate(spec);
  const auto& schema = table.schema();
  const std::size_t planted = schema.index_of(Measure::Thickness, "front");

  const auto base = dualgda::default_base_distributions();
  const double thick_mean = base[static_cast<std::size_t>(Measure::Thickness)].mean;
  const double thick_sigma = base[static_cast<std::size_t>(Measure::Thickness)].sigma;

  // per-class sample means of the planted feature sit near mean + effect*sigma
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : table.subjects()) {
      if (static_cast<int>(s.diagnosis) != c) continue;
      sum += s.left[planted];
      ++n;
    }
    const double sample_mean = sum / static_cast<double>(n);
    const double expected = thick_mean + static_cast<double>(c) * thick_sigma;
    const double tolerance = 5.0 * thick_sigma / std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(sample_mean, expected, tolerance) << "class " << c;
  }

  // an untouched feature matches the base distribution in mean and spread
  const std::size_t plain = schema.index_of(Measure::SurfaceArea, "back");
  double sum = 0.0, sq = 0.0;
  for (const auto& s : table.subjects()) {
    sum += s.right[plain];
    sq += s.right[plain] * s.right[plain];
  }
  const double n = static_cast<double>(table.size());
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  const auto& area = base[static_cast<std::size_t>(Measure::SurfaceArea)];
  EXPECT_NEAR(mean, area.mean, 5.0 * area.sigma / std::sqrt(n));
  EXPECT_NEAR(sd, area.sigma, 5.0 * area.sigma / std::sqrt(2.0 * n));
}

TEST(Synth, RegionBlockCorrelation) {
  auto spec = tiny_spec(321);
  spec.n_per_class = {500, 0, 500};
  spec.correlation_rho = 0.8;
  const auto table = generate(spec);
  const auto& schema = table.schema();

  const auto corr_of = [&](std::size_t fa, std::size_t fb) {
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (const auto& s : table.subjects()) {
      const double a = s.left[fa], b = s.left[fb];
      sa += a;
      sb += b;
      saa += a * a;
      sbb += b * b;
      sab += a * b;
    }
    const double n = static_cast<double>(table.size());
    const double cov = sab / n - (sa / n) * (sb / n);
    const double va = saa / n - (sa / n) * (sa / n);
    const double vb = sbb / n - (sb / n) * (sb / n);
    return cov / std::sqrt(va * vb);
  };

  // same region, different measures: correlated at rho
  EXPECT_NEAR(corr_of(schema.index_of(Measure::SurfaceArea, "front"),
                      schema.index_of(Measure::Thickness, "front")),
              0.8, 0.1);
  // different regions: independent
  EXPECT_NEAR(corr_of(schema.index_of(Measure::SurfaceArea, "front"),
                      schema.index_of(Measure::SurfaceArea, "back")),
              0.0, 0.1);
}

TEST(Synth, ZeroCorruptionHitsExactlyKDistinctSubjects) {
  auto spec = tiny_spec(9);
  spec.zero_noise_subjects = 7;
  const auto table = generate(spec);
  std::size_t victims = 0, zero_cells = 0;
  for (const auto& s : table.subjects()) {
    std::size_t zeros = 0;
    for (double v : s.left) zeros += v == 0.0;
    for (double v : s.right) zeros += v == 0.0;
    victims += zeros > 0;
    zero_cells += zeros;
  }
  EXPECT_EQ(victims, 7u);
  EXPECT_EQ(zero_cells, 7u);  // exactly one zeroed feature per victim
}

TEST(Synth, CleaningRestoresTheUncorruptedCohort) {
  // default cohort size: 190 + 305 + 133 = 628, 9 corrupted -> 619 kept
  CohortSpec spec;
  spec.zero_noise_subjects = 9;
  spec.seed = 2024;
  const auto table = generate(spec);
  EXPECT_EQ(table.size(), 628u);
  const auto cleaned = clean(table, CleanPolicy::DropZeroSubjects);
  EXPECT_EQ(cleaned.table.size(), 619u);
  EXPECT_EQ(cleaned.removed.size(), 9u);
  EXPECT_EQ(cleaned.table.provenance().removals.size(), 9u);
  for (const auto& r : cleaned.table.provenance().removals) {
    EXPECT_EQ(r.features.size(), 1u) << r.subject_id;
  }
}

TEST(Synth, PlantedStrongFeatureDominatesTheRanking) {
  auto spec = tiny_spec(31);
  spec.n_per_class = {70, 70, 60};
  SignalFeature sf;
  sf.hemisphere = Hemisphere::Right;
  sf.region = "back";
  sf.measure = Measure::SurfaceArea;
  sf.effect_sigmas = {0.0, 1.5, 3.0};
  spec.signal_features = {sf};
  const auto table = generate(spec);
  const auto ranked = dualgda::rank_features(table, Hemisphere::Right, Grouping::all_three());
  EXPECT_EQ(ranked.scores.front().descriptor.index,
            table.schema().index_of(Measure::SurfaceArea, "back"));
  EXPECT_LT(ranked.scores.front().p_value, 1e-12);
}

TEST(Synth, NullCohortFalsePositivesAreCalibrated) {
  // With no signal, significant counts at los = 0.01 across 175 features
  // follow the null: about 175 * 0.01 = 1.75 per seed on average.
  const int seeds = 100;
  double total = 0.0;
  int within_six = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    CohortSpec spec;
    spec.n_per_class = {70, 70, 60};
    spec.seed = 9000 + static_cast<std::uint64_t>(seed);
    const auto table = generate(spec);
    const auto ranked = dualgda::rank_features(table, Hemisphere::Left, Grouping::all_three());
    const auto count = static_cast<double>(ranked.significant_count());
    total += count;
    within_six += count <= 6.0;
  }
  const double mean_count = total / seeds;
  EXPECT_GE(mean_count, 0.75);
  EXPECT_LE(mean_count, 3.0);
  EXPECT_GE(within_six, 95);
}

TEST(Synth, SpecValidation) {
  {
    auto spec = tiny_spec(0);
    spec.n_per_class = {0, 0, 0};
    EXPECT_ERRC(generate(spec), Errc::InvalidSpec);
  }
  {
    auto spec = tiny_spec(0);
    spec.zero_noise_subjects = spec.total_subjects() + 1;
    EXPECT_ERRC(generate(spec), Errc::InvalidSpec);
  }
  {
    auto spec = tiny_spec(0);
    spec.correlation_rho = 0.99;
    EXPECT_ERRC(generate(spec), Errc::InvalidSpec);
    spec.correlation_rho = -0.1;
    EXPECT_ERRC(generate(spec), Errc::InvalidSpec);
  }
  {
    auto spec = tiny_spec(0);
    SignalFeature sf;
    sf.region = "nowhere";
    sf.measure = Measure::Thickness;
    spec.signal_features = {sf};
    EXPECT_ERRC(generate(spec), Errc::InvalidSpec);
  }
  {
    auto spec = tiny_spec(0);
    SignalFeature sf;
    sf.region = "front";
    sf.measure = Measure::Thickness;
    sf.effect_sigmas = {0.0, 0.5, 1.0};
    spec.signal_features = {sf, sf};  // duplicate
    EXPECT_ERRC(generate(spec), Errc::InvalidSpec);
  }
  {
    auto spec = tiny_spec(0);
    SignalFeature sf;
    sf.region = "front";
    sf.measure = Measure::Thickness;
    sf.effect_sigmas = {1.0, 0.5, 2.0};  // MCI below CN
    spec.signal_features = {sf};
    EXPECT_ERRC(generate(spec), Errc::InvalidSpec);
    spec.enforce_progression = false;
    EXPECT_NO_THROW(generate(spec));
  }
  {
    auto spec = tiny_spec(0);
    spec.base[static_cast<std::size_t>(Measure::Thickness)].sigma = 0.0;
    EXPECT_ERRC(generate(spec), Errc::InvalidSpec);
  }
}
