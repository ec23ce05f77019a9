#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "riomix/iodata.hpp"
#include "riomix/metrics.hpp"
#include "riomix/mixup.hpp"

namespace riomix {

/// Shortest round-trip decimal form (std::to_chars); parsing is exact,
/// locale-independent, and write-then-read is bit-identical.
std::string format_double(double v);
double parse_double(const std::string& token, const std::string& context);

/// Region CSV schema, in column order:
///   region_id, parent_id,
///   sfirm_001.., semp_001..           (minor classes, 3+ digit suffixes)
///   va_01.., sales_01.., firm_01..    (large classes, 2+ digit suffixes)
///   income, tp, poplf, unemp, pop15,
///   a_01_01..a_12_12 (row-major), y_01..y_12
/// UTF-8, header row required, '.' decimal separator. Two trailing
/// columns `rescale_factor` and `provenance` (written by `generate`)
/// are accepted and ignored on ingest.
std::vector<std::string> region_csv_header(int minor_classes, int large_classes);

std::vector<RegionRecord> read_region_csv(std::istream& in);
std::vector<RegionRecord> read_region_csv_file(const std::string& path);

void write_region_csv(std::ostream& out, const std::vector<RegionRecord>& records);
void write_region_csv_file(const std::string& path,
                           const std::vector<RegionRecord>& records);

/// Region CSV plus provenance columns: `rescale_factor` and a
/// `provenance` column of ';'-separated `source_id:lambda` pairs.
void write_virtual_region_csv(std::ostream& out,
                              const std::vector<VirtualRegion>& regions);
void write_virtual_region_csv_file(const std::string& path,
                                   const std::vector<VirtualRegion>& regions);

/// 13-column coefficient matrix layout: from-industry label, then one
/// value per receiving industry, ordered by the standard classification.
void write_coefficient_csv(std::ostream& out, const Matrix& coefficients);
void write_coefficient_csv_file(const std::string& path, const Matrix& coefficients);
Matrix read_coefficient_csv(std::istream& in);
Matrix read_coefficient_csv_file(const std::string& path);

/// Margins for RAS: industry, intermediate_demand (u), intermediate_input
/// (v), gross_output (Y).
struct MarginTargets {
  Vector row_targets;
  Vector col_targets;
  Vector gross_outputs;
};
MarginTargets read_margins_csv_file(const std::string& path);
void write_margins_csv_file(const std::string& path, const MarginTargets& margins);

/// Per-industry outputs for FLQ: industry, regional, national.
struct OutputPair {
  Vector regional;
  Vector national;
};
OutputPair read_outputs_csv_file(const std::string& path);
void write_outputs_csv_file(const std::string& path, const OutputPair& outputs);

/// Metric report as CSV (metric,value rows) and as an aligned text table.
void write_report_csv(std::ostream& out, const EvaluationReport& report);
std::string format_report_table(const EvaluationReport& report);

}  // namespace riomix
