#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dualgda/errors.hpp"

namespace dualgda {

/// Diagnostic groups in disease-severity order. The ordering is used only to
/// pick the positive class of a two-group comparison (the more severe one).
enum class Diagnosis : int { CN = 0, MCI = 1, AD = 2 };

inline constexpr std::array<Diagnosis, 3> kAllDiagnoses = {Diagnosis::CN, Diagnosis::MCI,
                                                           Diagnosis::AD};

inline const char* diagnosis_name(Diagnosis d) {
  switch (d) {
    case Diagnosis::CN: return "CN";
    case Diagnosis::MCI: return "MCI";
    case Diagnosis::AD: return "AD";
  }
  return "?";
}

inline Diagnosis parse_diagnosis(std::string_view s) {
  if (s == "CN") return Diagnosis::CN;
  if (s == "MCI") return Diagnosis::MCI;
  if (s == "AD") return Diagnosis::AD;
  raise(Errc::UnknownDiagnosisLabel, "unknown diagnosis label '" + std::string(s) + "'");
}

enum class Hemisphere : int { Left = 0, Right = 1 };

inline const char* hemisphere_name(Hemisphere h) {
  return h == Hemisphere::Left ? "left" : "right";
}

inline const char* hemisphere_prefix(Hemisphere h) { return h == Hemisphere::Left ? "L" : "R"; }

enum class Comparison : int { CnVsMci = 0, CnVsAd = 1, MciVsAd = 2 };

inline constexpr std::array<Comparison, 3> kAllComparisons = {Comparison::CnVsMci,
                                                              Comparison::CnVsAd,
                                                              Comparison::MciVsAd};

inline const char* comparison_name(Comparison c) {
  switch (c) {
    case Comparison::CnVsMci: return "cn-mci";
    case Comparison::CnVsAd: return "cn-ad";
    case Comparison::MciVsAd: return "mci-ad";
  }
  return "?";
}

inline Comparison parse_comparison(std::string_view s) {
  if (s == "cn-mci") return Comparison::CnVsMci;
  if (s == "cn-ad") return Comparison::CnVsAd;
  if (s == "mci-ad") return Comparison::MciVsAd;
  raise(Errc::Usage, "unknown comparison '" + std::string(s) + "' (expected cn-mci, cn-ad, mci-ad)");
}

/// The less severe group of a comparison is the negative class.
inline Diagnosis negative_class(Comparison c) {
  return c == Comparison::MciVsAd ? Diagnosis::MCI : Diagnosis::CN;
}

/// The more severe group is the positive class (MCI in CN vs MCI, AD otherwise).
inline Diagnosis positive_class(Comparison c) {
  return c == Comparison::CnVsMci ? Diagnosis::MCI : Diagnosis::AD;
}

/// The seven morphometric shape measures, in their fixed ordinal order.
enum class Measure : int {
  SurfaceArea = 0,
  TravelDepth = 1,
  GeodesicDepth = 2,
  MeanCurvature = 3,
  Convexity = 4,
  Thickness = 5,
  Volume = 6,
};

inline constexpr std::size_t kMeasureCount = 7;

inline constexpr std::array<Measure, kMeasureCount> kAllMeasures = {
    Measure::SurfaceArea,  Measure::TravelDepth, Measure::GeodesicDepth, Measure::MeanCurvature,
    Measure::Convexity,    Measure::Thickness,   Measure::Volume};

inline const char* measure_name(Measure m) {
  switch (m) {
    case Measure::SurfaceArea: return "surface_area";
    case Measure::TravelDepth: return "travel_depth";
    case Measure::GeodesicDepth: return "geodesic_depth";
    case Measure::MeanCurvature: return "mean_curvature";
    case Measure::Convexity: return "convexity";
    case Measure::Thickness: return "thickness";
    case Measure::Volume: return "volume";
  }
  return "?";
}

inline bool try_parse_measure(std::string_view s, Measure& out) {
  for (Measure m : kAllMeasures) {
    if (s == measure_name(m)) {
      out = m;
      return true;
    }
  }
  return false;
}

/// One feature column of a hemisphere block. index is the ordinal position
/// within the block: measure_ordinal * region_count + region_ordinal.
struct FeatureDescriptor {
  Hemisphere hemisphere;
  std::string region;
  Measure measure;
  std::size_t index;
};

/// The default 25 cortical region labels (FreeSurfer-style names). Any other
/// set of labels is accepted when ingesting external tables; strict mode only
/// pins the counts (7 measures x 25 regions).
inline const std::vector<std::string>& default_regions() {
  static const std::vector<std::string> regions = {
      "caudalanteriorcingulate",
      "caudalmiddlefrontal",
      "cuneus",
      "entorhinal",
      "fusiform",
      "inferiorparietal",
      "inferiortemporal",
      "insula",
      "isthmuscingulate",
      "lateraloccipital",
      "lateralorbitofrontal",
      "lingual",
      "medialorbitofrontal",
      "middletemporal",
      "parahippocampal",
      "paracentral",
      "postcentral",
      "posteriorcingulate",
      "precentral",
      "precuneus",
      "rostralmiddlefrontal",
      "superiorfrontal",
      "superiorparietal",
      "superiortemporal",
      "supramarginal",
  };
  return regions;
}

/// Per-hemisphere feature layout, identical for both hemispheres. Columns are
/// measure-major: all regions of measure 0, then all regions of measure 1, ...
class Schema {
 public:
  Schema() = default;

  Schema(std::vector<Measure> measures, std::vector<std::string> regions)
      : measures_(std::move(measures)), regions_(std::move(regions)) {
    if (measures_.empty() || regions_.empty()) {
      raise(Errc::SchemaMismatch, "schema needs at least one measure and one region");
    }
  }

  static Schema standard() {
    return Schema({kAllMeasures.begin(), kAllMeasures.end()}, default_regions());
  }

  const std::vector<Measure>& measures() const { return measures_; }
  const std::vector<std::string>& regions() const { return regions_; }

  std::size_t features_per_hemisphere() const { return measures_.size() * regions_.size(); }

  FeatureDescriptor descriptor(Hemisphere h, std::size_t index) const {
    check_index(index);
    const std::size_t r = regions_.size();
    return FeatureDescriptor{h, regions_[index % r], measures_[index / r], index};
  }

  std::size_t index_of(Measure m, std::string_view region) const {
    std::size_t mi = measures_.size();
    for (std::size_t i = 0; i < measures_.size(); ++i) {
      if (measures_[i] == m) mi = i;
    }
    std::size_t ri = regions_.size();
    for (std::size_t i = 0; i < regions_.size(); ++i) {
      if (regions_[i] == region) ri = i;
    }
    if (mi == measures_.size() || ri == regions_.size()) {
      raise(Errc::SubsetOutOfRange, std::string("feature not in schema: ") +
                                        std::string(region) + "." + measure_name(m));
    }
    return mi * regions_.size() + ri;
  }

  /// CSV column name, e.g. "L.entorhinal.thickness".
  std::string column_name(Hemisphere h, std::size_t index) const {
    const FeatureDescriptor d = descriptor(h, index);
    return std::string(hemisphere_prefix(h)) + "." + d.region + "." + measure_name(d.measure);
  }

  bool operator==(const Schema& other) const {
    return measures_ == other.measures_ && regions_ == other.regions_;
  }

 private:
  void check_index(std::size_t index) const {
    if (index >= features_per_hemisphere()) {
      raise(Errc::SubsetOutOfRange, "feature index " + std::to_string(index) +
                                        " out of range (schema has " +
                                        std::to_string(features_per_hemisphere()) +
                                        " features per hemisphere)");
    }
  }

  std::vector<Measure> measures_;
  std::vector<std::string> regions_;
};

}  // namespace dualgda
