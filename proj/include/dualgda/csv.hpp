#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dualgda/errors.hpp"
#include "dualgda/table.hpp"

namespace dualgda {

enum class SchemaMode { Strict175, Infer };

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

struct ParsedColumn {
  Hemisphere hemisphere;
  std::string region;
  Measure measure;
};

inline ParsedColumn parse_column_name(std::string_view name) {
  const std::size_t first = name.find('.');
  const std::size_t last = name.rfind('.');
  if (first == std::string_view::npos || first == last) {
    raise(Errc::SchemaMismatch, "feature column '" + std::string(name) +
                                    "' is not of the form <hemi>.<region>.<measure>");
  }
  const std::string_view hemi = name.substr(0, first);
  const std::string_view region = name.substr(first + 1, last - first - 1);
  const std::string_view measure = name.substr(last + 1);
  ParsedColumn col;
  if (hemi == "L") {
    col.hemisphere = Hemisphere::Left;
  } else if (hemi == "R") {
    col.hemisphere = Hemisphere::Right;
  } else {
    raise(Errc::SchemaMismatch,
          "feature column '" + std::string(name) + "' must start with L. or R.");
  }
  if (region.empty()) {
    raise(Errc::SchemaMismatch, "feature column '" + std::string(name) + "' has an empty region");
  }
  if (!try_parse_measure(measure, col.measure)) {
    raise(Errc::SchemaMismatch, "feature column '" + std::string(name) +
                                    "' has unknown measure '" + std::string(measure) + "'");
  }
  col.region = std::string(region);
  return col;
}

/// Derives the per-hemisphere schema from one hemisphere's column block and
/// verifies the measure-major grid layout (each measure covers the same
/// region sequence, measures in canonical order).
inline Schema schema_from_block(const std::vector<ParsedColumn>& block) {
  if (block.empty()) raise(Errc::SchemaMismatch, "no feature columns");
  std::vector<Measure> measures;
  std::vector<std::string> regions;
  std::size_t pos = 0;
  while (pos < block.size()) {
    const Measure m = block[pos].measure;
    for (Measure seen : measures) {
      if (seen == m) {
        raise(Errc::SchemaMismatch, std::string("measure '") + measure_name(m) +
                                        "' appears in more than one column run");
      }
    }
    if (!measures.empty() && static_cast<int>(m) < static_cast<int>(measures.back())) {
      raise(Errc::SchemaMismatch, "measures are not in canonical order");
    }
    std::vector<std::string> run;
    while (pos < block.size() && block[pos].measure == m) {
      run.push_back(block[pos].region);
      ++pos;
    }
    if (measures.empty()) {
      regions = run;
    } else if (run != regions) {
      raise(Errc::SchemaMismatch, std::string("region sequence under measure '") +
                                      measure_name(m) + "' differs from the first measure block");
    }
    measures.push_back(m);
  }
  return Schema(std::move(measures), std::move(regions));
}

inline double parse_cell(std::string_view text, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    raise(Errc::NonNumericCell, "non-numeric cell at data row " + std::to_string(row) +
                                    ", column " + std::to_string(col) + ": '" + std::string(text) +
                                    "'");
  }
  return value;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace detail

/// Reads the cohort CSV dialect: UTF-8, comma-separated, '.' decimal point,
/// header `subject_id,diagnosis,<L columns>,<R columns>`. All L columns
/// precede all R columns; within a hemisphere, columns are measure-major.
/// Strict175 additionally requires exactly 7 x 25 features per hemisphere.
inline FeatureTable load_csv(const std::string& path, SchemaMode mode = SchemaMode::Strict175) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(Errc::IoError, "cannot open '" + path + "' for reading");
  }
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<std::string_view> lines;
  {
    std::string_view rest(contents);
    while (!rest.empty()) {
      std::size_t nl = rest.find('\n');
      std::string_view line = (nl == std::string_view::npos) ? rest : rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
  }
  if (lines.empty()) {
    raise(Errc::MissingHeader, "'" + path + "' is empty");
  }

  const auto header = detail::split_csv_line(lines[0]);
  if (header.size() < 3 || header[0] != "subject_id" || header[1] != "diagnosis") {
    raise(Errc::MissingHeader,
          "header must start with subject_id,diagnosis followed by feature columns");
  }

  std::vector<detail::ParsedColumn> left_block, right_block;
  bool seen_right = false;
  for (std::size_t c = 2; c < header.size(); ++c) {
    detail::ParsedColumn col = detail::parse_column_name(header[c]);
    if (col.hemisphere == Hemisphere::Left) {
      if (seen_right) {
        raise(Errc::SchemaMismatch, "L column '" + std::string(header[c]) +
                                        "' appears after the R block");
      }
      left_block.push_back(std::move(col));
    } else {
      seen_right = true;
      right_block.push_back(std::move(col));
    }
  }
  if (left_block.size() != right_block.size()) {
    raise(Errc::SchemaMismatch, "hemisphere blocks differ in size: " +
                                    std::to_string(left_block.size()) + " L vs " +
                                    std::to_string(right_block.size()) + " R columns");
  }
  for (std::size_t i = 0; i < left_block.size(); ++i) {
    if (left_block[i].region != right_block[i].region ||
        left_block[i].measure != right_block[i].measure) {
      raise(Errc::SchemaMismatch, "R block does not mirror the L block at feature position " +
                                      std::to_string(i));
    }
  }
  Schema schema = detail::schema_from_block(left_block);
  if (mode == SchemaMode::Strict175 &&
      (schema.measures().size() != kMeasureCount || schema.regions().size() != 25)) {
    raise(Errc::SchemaMismatch, "strict mode expects 7 measures x 25 regions per hemisphere, got " +
                                    std::to_string(schema.measures().size()) + " x " +
                                    std::to_string(schema.regions().size()));
  }
  const std::size_t d = schema.features_per_hemisphere();

  std::vector<SubjectRecord> subjects;
  subjects.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto cells = detail::split_csv_line(lines[r]);
    if (cells.size() != header.size()) {
      raise(Errc::SchemaMismatch, "data row " + std::to_string(r) + " has " +
                                      std::to_string(cells.size()) + " cells, header has " +
                                      std::to_string(header.size()));
    }
    SubjectRecord rec;
    rec.subject_id = std::string(cells[0]);
    if (rec.subject_id.empty()) {
      raise(Errc::SchemaMismatch, "data row " + std::to_string(r) + " has an empty subject_id");
    }
    rec.diagnosis = parse_diagnosis(cells[1]);
    rec.left.reserve(d);
    rec.right.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
      rec.left.push_back(detail::parse_cell(cells[2 + i], r, 2 + i));
    }
    for (std::size_t i = 0; i < d; ++i) {
      rec.right.push_back(detail::parse_cell(cells[2 + d + i], r, 2 + d + i));
    }
    subjects.push_back(std::move(rec));
  }
  return FeatureTable(std::move(schema), std::move(subjects), Provenance{path, {}});
}

/// Writes the exact dialect load_csv reads. Doubles are emitted in shortest
/// round-trip form, so write -> load reproduces values bit-exactly.
inline void write_csv(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(Errc::IoError, "cannot open '" + path + "' for writing");
  }
  const Schema& schema = table.schema();
  const std::size_t d = schema.features_per_hemisphere();
  out << "subject_id,diagnosis";
  for (Hemisphere h : {Hemisphere::Left, Hemisphere::Right}) {
    for (std::size_t i = 0; i < d; ++i) out << ',' << schema.column_name(h, i);
  }
  out << '\n';
  for (const auto& s : table.subjects()) {
    out << s.subject_id << ',' << diagnosis_name(s.diagnosis);
    for (Hemisphere h : {Hemisphere::Left, Hemisphere::Right}) {
      for (double v : s.hemi(h)) out << ',' << detail::format_double(v);
    }
    out << '\n';
  }
  if (!out) {
    raise(Errc::IoError, "failed writing '" + path + "'");
  }
}

}  // namespace dualgda
