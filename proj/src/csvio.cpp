#include "riomix/csvio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "riomix/errors.hpp"

namespace riomix {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& context) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw IoError(context + ": non-numeric value '" + token + "'");
  return v;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string index_suffix(int index, int width) {
  std::string s = std::to_string(index);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

int suffix_width(int count, int minimum) {
  const int digits = static_cast<int>(std::to_string(count).size());
  return std::max(digits, minimum);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no newline translation
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

std::vector<std::string> region_csv_header(int minor_classes, int large_classes) {
  std::vector<std::string> h{"region_id", "parent_id"};
  const int mw = suffix_width(minor_classes, 3);
  const int lw = suffix_width(large_classes, 2);
  for (int c = 1; c <= minor_classes; ++c) h.push_back("sfirm_" + index_suffix(c, mw));
  for (int c = 1; c <= minor_classes; ++c) h.push_back("semp_" + index_suffix(c, mw));
  for (int c = 1; c <= large_classes; ++c) h.push_back("va_" + index_suffix(c, lw));
  for (int c = 1; c <= large_classes; ++c) h.push_back("sales_" + index_suffix(c, lw));
  for (int c = 1; c <= large_classes; ++c) h.push_back("firm_" + index_suffix(c, lw));
  h.insert(h.end(), {"income", "tp", "poplf", "unemp", "pop15"});
  for (int i = 1; i <= kSectors; ++i)
    for (int j = 1; j <= kSectors; ++j)
      h.push_back("a_" + index_suffix(i, 2) + "_" + index_suffix(j, 2));
  for (int j = 1; j <= kSectors; ++j) h.push_back("y_" + index_suffix(j, 2));
  return h;
}

namespace {

int count_prefixed(const std::vector<std::string>& header, const std::string& prefix) {
  int n = 0;
  for (const auto& col : header)
    if (col.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

std::vector<RegionRecord> read_region_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("region csv: missing header row");
  const auto header = split_csv_line(line);

  const int minor = count_prefixed(header, "sfirm_");
  const int large = count_prefixed(header, "va_");
  if (minor == 0 || large == 0)
    throw IoError("region csv: header lacks sfirm_/va_ columns");

  auto expected = region_csv_header(minor, large);
  bool with_provenance = false;
  if (header.size() == expected.size() + 2 &&
      header[expected.size()] == "rescale_factor" &&
      header[expected.size() + 1] == "provenance") {
    with_provenance = true;
    expected.push_back("rescale_factor");
    expected.push_back("provenance");
  }
  if (header != expected) {
    std::string detail = "region csv: header does not match the schema";
    for (std::size_t c = 0; c < std::min(header.size(), expected.size()); ++c)
      if (header[c] != expected[c]) {
        detail += " (column " + std::to_string(c + 1) + ": expected '" +
                  expected[c] + "', got '" + header[c] + "')";
        break;
      }
    if (header.size() != expected.size())
      detail += " (expected " + std::to_string(expected.size()) + " columns, got " +
                std::to_string(header.size()) + ")";
    throw IoError(detail);
  }

  std::vector<RegionRecord> records;
  std::vector<std::string> seen_ids;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != expected.size())
      throw IoError("region csv row " + std::to_string(row_no) + ": expected " +
                    std::to_string(expected.size()) + " fields, got " +
                    std::to_string(fields.size()));
    const std::string ctx = "region csv row " + std::to_string(row_no);

    RegionRecord r;
    std::size_t pos = 0;
    r.region_id = fields[pos++];
    r.parent_id = fields[pos++];
    if (r.region_id.empty()) throw IoError(ctx + ": empty region_id");
    for (const auto& id : seen_ids)
      if (id == r.region_id)
        throw IoError(ctx + ": duplicate region_id '" + r.region_id + "'");
    seen_ids.push_back(r.region_id);

    auto take_vector = [&](int count) {
      Vector v(count);
      for (int c = 0; c < count; ++c) v(c) = parse_double(fields[pos++], ctx);
      return v;
    };
    r.sfirm = take_vector(minor);
    r.semp = take_vector(minor);
    r.va = take_vector(large);
    r.sales = take_vector(large);
    r.firm = take_vector(large);
    r.income = parse_double(fields[pos++], ctx);
    r.tp = parse_double(fields[pos++], ctx);
    r.poplf = parse_double(fields[pos++], ctx);
    r.unemp = parse_double(fields[pos++], ctx);
    r.pop15 = parse_double(fields[pos++], ctx);
    r.io = IOTable::zeros(r.region_id);
    for (int i = 0; i < kSectors; ++i)
      for (int j = 0; j < kSectors; ++j)
        r.io.intermediate(i, j) = parse_double(fields[pos++], ctx);
    for (int j = 0; j < kSectors; ++j)
      r.io.gross_output(j) = parse_double(fields[pos++], ctx);
    (void)with_provenance;  // provenance tail, if present, is ignored

    try {
      r.validate();
    } catch (const Error& e) {
      throw IoError(ctx + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RegionRecord> read_region_csv_file(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_region_csv(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

namespace {

void write_region_row(std::ostream& out, const RegionRecord& r) {
  out << r.region_id << ',' << r.parent_id;
  auto put_vector = [&out](const Vector& v) {
    for (Eigen::Index c = 0; c < v.size(); ++c) out << ',' << format_double(v(c));
  };
  put_vector(r.sfirm);
  put_vector(r.semp);
  put_vector(r.va);
  put_vector(r.sales);
  put_vector(r.firm);
  for (double s : {r.income, r.tp, r.poplf, r.unemp, r.pop15})
    out << ',' << format_double(s);
  for (int i = 0; i < kSectors; ++i)
    for (int j = 0; j < kSectors; ++j)
      out << ',' << format_double(r.io.intermediate(i, j));
  for (int j = 0; j < kSectors; ++j)
    out << ',' << format_double(r.io.gross_output(j));
}

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t c = 0; c < header.size(); ++c)
    out << (c ? "," : "") << header[c];
  out << '\n';
}

}  // namespace

void write_region_csv(std::ostream& out, const std::vector<RegionRecord>& records) {
  if (records.empty()) throw DomainError("write_region_csv: nothing to write");
  const int minor = static_cast<int>(records.front().sfirm.size());
  const int large = static_cast<int>(records.front().va.size());
  write_header(out, region_csv_header(minor, large));
  for (const auto& r : records) {
    write_region_row(out, r);
    out << '\n';
  }
}

void write_region_csv_file(const std::string& path,
                           const std::vector<RegionRecord>& records) {
  auto out = open_out(path);
  write_region_csv(out, records);
}

void write_virtual_region_csv(std::ostream& out,
                              const std::vector<VirtualRegion>& regions) {
  if (regions.empty()) throw DomainError("write_virtual_region_csv: nothing to write");
  const int minor = static_cast<int>(regions.front().record.sfirm.size());
  const int large = static_cast<int>(regions.front().record.va.size());
  auto header = region_csv_header(minor, large);
  header.push_back("rescale_factor");
  header.push_back("provenance");
  write_header(out, header);
  for (const auto& vr : regions) {
    write_region_row(out, vr.record);
    out << ',' << format_double(vr.rescale_factor) << ',';
    for (std::size_t k = 0; k < vr.provenance.size(); ++k) {
      if (k) out << ';';
      out << vr.provenance[k].first << ':' << format_double(vr.provenance[k].second);
    }
    out << '\n';
  }
}

void write_virtual_region_csv_file(const std::string& path,
                                   const std::vector<VirtualRegion>& regions) {
  auto out = open_out(path);
  write_virtual_region_csv(out, regions);
}

void write_coefficient_csv(std::ostream& out, const Matrix& coefficients) {
  if (coefficients.rows() != kSectors || coefficients.cols() != kSectors)
    throw DimensionError("coefficient csv: matrix must be 12x12");
  const auto& labels = IndustryClassification::standard().labels;
  out << "from_industry";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (int i = 0; i < kSectors; ++i) {
    out << labels[i];
    for (int j = 0; j < kSectors; ++j) out << ',' << format_double(coefficients(i, j));
    out << '\n';
  }
}

void write_coefficient_csv_file(const std::string& path, const Matrix& coefficients) {
  auto out = open_out(path);
  write_coefficient_csv(out, coefficients);
}

Matrix read_coefficient_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("coefficient csv: missing header");
  const auto& labels = IndustryClassification::standard().labels;
  const auto header = split_csv_line(line);
  if (header.size() != kSectors + 1 || header[0] != "from_industry")
    throw IoError("coefficient csv: bad header");
  for (int j = 0; j < kSectors; ++j)
    if (header[j + 1] != labels[j])
      throw IoError("coefficient csv: unexpected industry '" + header[j + 1] + "'");

  Matrix m(kSectors, kSectors);
  for (int i = 0; i < kSectors; ++i) {
    if (!std::getline(in, line))
      throw IoError("coefficient csv: expected 12 data rows, got " + std::to_string(i));
    const auto fields = split_csv_line(line);
    if (fields.size() != kSectors + 1 || fields[0] != labels[i])
      throw IoError("coefficient csv row " + std::to_string(i + 2) +
                    ": expected industry '" + labels[i] + "'");
    for (int j = 0; j < kSectors; ++j)
      m(i, j) = parse_double(fields[j + 1], "coefficient csv row " + std::to_string(i + 2));
  }
  return m;
}

Matrix read_coefficient_csv_file(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_coefficient_csv(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

MarginTargets read_margins_csv_file(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": missing header");
  if (split_csv_line(line) !=
      std::vector<std::string>{"industry", "intermediate_demand",
                               "intermediate_input", "gross_output"})
    throw IoError(path + ": bad margins header");
  MarginTargets m{Vector::Zero(kSectors), Vector::Zero(kSectors), Vector::Zero(kSectors)};
  const auto& labels = IndustryClassification::standard().labels;
  for (int i = 0; i < kSectors; ++i) {
    if (!std::getline(in, line)) throw IoError(path + ": expected 12 rows");
    const auto f = split_csv_line(line);
    if (f.size() != 4 || f[0] != labels[i])
      throw IoError(path + " row " + std::to_string(i + 2) + ": expected industry '" +
                    labels[i] + "'");
    m.row_targets(i) = parse_double(f[1], path);
    m.col_targets(i) = parse_double(f[2], path);
    m.gross_outputs(i) = parse_double(f[3], path);
  }
  return m;
}

void write_margins_csv_file(const std::string& path, const MarginTargets& margins) {
  auto out = open_out(path);
  out << "industry,intermediate_demand,intermediate_input,gross_output\n";
  const auto& labels = IndustryClassification::standard().labels;
  for (int i = 0; i < kSectors; ++i)
    out << labels[i] << ',' << format_double(margins.row_targets(i)) << ','
        << format_double(margins.col_targets(i)) << ','
        << format_double(margins.gross_outputs(i)) << '\n';
}

OutputPair read_outputs_csv_file(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": missing header");
  if (split_csv_line(line) !=
      std::vector<std::string>{"industry", "regional", "national"})
    throw IoError(path + ": bad outputs header");
  OutputPair p{Vector::Zero(kSectors), Vector::Zero(kSectors)};
  const auto& labels = IndustryClassification::standard().labels;
  for (int i = 0; i < kSectors; ++i) {
    if (!std::getline(in, line)) throw IoError(path + ": expected 12 rows");
    const auto f = split_csv_line(line);
    if (f.size() != 3 || f[0] != labels[i])
      throw IoError(path + " row " + std::to_string(i + 2) + ": expected industry '" +
                    labels[i] + "'");
    p.regional(i) = parse_double(f[1], path);
    p.national(i) = parse_double(f[2], path);
  }
  return p;
}

void write_outputs_csv_file(const std::string& path, const OutputPair& outputs) {
  auto out = open_out(path);
  out << "industry,regional,national\n";
  const auto& labels = IndustryClassification::standard().labels;
  for (int i = 0; i < kSectors; ++i)
    out << labels[i] << ',' << format_double(outputs.regional(i)) << ','
        << format_double(outputs.national(i)) << '\n';
}

void write_report_csv(std::ostream& out, const EvaluationReport& r) {
  out << "metric,value\n"
      << "STPE," << format_double(r.stpe) << '\n'
      << "MAD," << format_double(r.mad) << '\n'
      << "U2," << format_double(r.u2) << '\n'
      << "RMSE," << format_double(r.rmse) << '\n'
      << "MAPE," << format_double(r.mape) << '\n'
      << "n_a," << r.n_a << '\n'
      << "mape_excluded," << r.mape_excluded << '\n';
}

std::string format_report_table(const EvaluationReport& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "metric  value\n"
     << "STPE    " << r.stpe << '\n'
     << "MAD     " << r.mad << '\n'
     << "U2      " << r.u2 << '\n'
     << "RMSE    " << r.rmse << '\n'
     << "MAPE    " << r.mape << '\n'
     << "cells   " << r.n_a << " (" << r.mape_excluded
     << " zero-actual cells excluded from MAPE)\n";
  return os.str();
}

}  // namespace riomix
