#include "riomix/iodata.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "riomix/errors.hpp"

namespace riomix {

namespace {

void require_nonneg(const Matrix& m, const std::string& what,
                    const std::string& region) {
  if ((m.array() < 0.0).any())
    throw DomainError(what + " has negative entries in region '" + region + "'");
}

void require_nonneg(const Vector& v, const std::string& what,
                    const std::string& region) {
  if ((v.array() < 0.0).any())
    throw DomainError(what + " has negative entries in region '" + region + "'");
}

void require_sector_shape(const Matrix& m, const std::string& what,
                          const std::string& region) {
  if (m.rows() != kSectors || m.cols() != kSectors)
    throw DimensionError(what + " must be " + std::to_string(kSectors) + "x" +
                         std::to_string(kSectors) + " in region '" + region + "'");
}

void require_sector_shape(const Vector& v, const std::string& what,
                          const std::string& region) {
  if (v.size() != kSectors)
    throw DimensionError(what + " must have " + std::to_string(kSectors) +
                         " entries in region '" + region + "'");
}

}  // namespace

const IndustryClassification& IndustryClassification::standard() {
  static const IndustryClassification scheme{{
      "Agriculture", "Mining", "Manufacturing", "Construction", "Energy",
      "Trade", "Finance", "Transportation", "Communication", "Public business",
      "Services", "Other industry",
  }};
  return scheme;
}

IndustryClassification IndustryClassification::from_labels(
    const std::vector<std::string>& labels) {
  if (labels.size() != kSectors)
    throw DomainError("industry classification needs exactly " +
                      std::to_string(kSectors) + " sectors, got " +
                      std::to_string(labels.size()));
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size())
    throw DomainError("industry classification has duplicate labels");
  IndustryClassification out;
  std::copy(labels.begin(), labels.end(), out.labels.begin());
  return out;
}

IOTable IOTable::zeros(std::string id) {
  IOTable t;
  t.region_id = std::move(id);
  t.intermediate = Matrix::Zero(kSectors, kSectors);
  t.gross_output = Vector::Zero(kSectors);
  return t;
}

void IOTable::validate() const {
  require_sector_shape(intermediate, "intermediate inputs", region_id);
  require_sector_shape(gross_output, "gross output", region_id);
  require_nonneg(intermediate, "intermediate inputs", region_id);
  require_nonneg(gross_output, "gross output", region_id);
  for (int j = 0; j < kSectors; ++j) {
    if (gross_output(j) == 0.0 && intermediate.col(j).sum() > 0.0)
      throw InconsistentTableError(
          "region '" + region_id + "': industry " + std::to_string(j + 1) +
          " has zero gross output but positive intermediate input");
  }
}

Matrix coefficient_matrix(const IOTable& table) {
  table.validate();
  Matrix coeffs = Matrix::Zero(kSectors, kSectors);
  for (int j = 0; j < kSectors; ++j) {
    const double y = table.gross_output(j);
    if (y == 0.0) continue;  // validated: the column is all zero
    coeffs.col(j) = table.intermediate.col(j) / y;
  }
  return coeffs;
}

void RegionRecord::validate() const {
  require_nonneg(sfirm, "sfirm", region_id);
  require_nonneg(semp, "semp", region_id);
  require_nonneg(va, "va", region_id);
  require_nonneg(sales, "sales", region_id);
  require_nonneg(firm, "firm", region_id);
  for (const auto& [name, value] :
       std::initializer_list<std::pair<const char*, double>>{
           {"income", income}, {"tp", tp}, {"poplf", poplf},
           {"unemp", unemp}, {"pop15", pop15}}) {
    if (value < 0.0 || !std::isfinite(value))
      throw DomainError(std::string(name) + " must be finite and nonnegative in region '" +
                        region_id + "'");
  }
  io.validate();
}

AncestryIndex::AncestryIndex(const std::vector<RegionRecord>& records) {
  for (const auto& r : records) {
    if (!r.parent_id.empty()) parent_[r.region_id] = r.parent_id;
  }
}

bool AncestryIndex::is_ancestor(const std::string& ancestor,
                                const std::string& id) const {
  std::string cur = id;
  // Parent chains in practice are one or two levels; the bound guards
  // against accidental cycles in input data.
  for (int depth = 0; depth < 64; ++depth) {
    auto it = parent_.find(cur);
    if (it == parent_.end()) return false;
    if (it->second == ancestor) return true;
    cur = it->second;
  }
  return false;
}

bool AncestryIndex::related(const std::string& a, const std::string& b) const {
  return is_ancestor(a, b) || is_ancestor(b, a);
}

RegionRecord scale_region(const RegionRecord& region, double lambda) {
  if (!(lambda >= 0.0))
    throw DomainError("scale_region: lambda must be nonnegative, got " +
                      std::to_string(lambda));
  RegionRecord out = region;
  out.sfirm *= lambda;
  out.semp *= lambda;
  out.va *= lambda;
  out.sales *= lambda;
  out.firm *= lambda;
  out.income *= lambda;
  out.tp *= lambda;
  out.poplf *= lambda;
  out.unemp *= lambda;
  out.pop15 *= lambda;
  out.io.intermediate *= lambda;
  out.io.gross_output *= lambda;
  return out;
}

RegionRecord linear_interpolate(const std::vector<RegionRecord>& regions,
                                const std::vector<double>& weights) {
  if (regions.empty())
    throw DomainError("linear_interpolate: empty region list");
  if (regions.size() != weights.size())
    throw DimensionError("linear_interpolate: " + std::to_string(regions.size()) +
                         " regions but " + std::to_string(weights.size()) +
                         " weights");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw DomainError("linear_interpolate: weights must be finite and nonnegative");
  }

  AncestryIndex ancestry(regions);
  for (std::size_t a = 0; a < regions.size(); ++a) {
    for (std::size_t b = a + 1; b < regions.size(); ++b) {
      if (regions[a].region_id == regions[b].region_id)
        throw CompositionConflictError("region '" + regions[a].region_id +
                                       "' appears twice in one composition");
      if (ancestry.related(regions[a].region_id, regions[b].region_id))
        throw CompositionConflictError(
            "regions '" + regions[a].region_id + "' and '" +
            regions[b].region_id +
            "' are in an inclusion relation and cannot be composed");
    }
  }

  const auto& first = regions.front();
  const auto minor_dim = first.sfirm.size();
  const auto large_dim = first.va.size();
  for (const auto& r : regions) {
    if (r.sfirm.size() != minor_dim || r.semp.size() != minor_dim ||
        r.va.size() != large_dim || r.sales.size() != large_dim ||
        r.firm.size() != large_dim)
      throw DimensionError("linear_interpolate: class vectors of region '" +
                           r.region_id + "' do not match '" + first.region_id +
                           "'");
  }

  RegionRecord out;
  out.sfirm = Vector::Zero(minor_dim);
  out.semp = Vector::Zero(minor_dim);
  out.va = Vector::Zero(large_dim);
  out.sales = Vector::Zero(large_dim);
  out.firm = Vector::Zero(large_dim);
  out.io = IOTable::zeros("");

  std::string id = "mix";
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const auto& r = regions[k];
    const double w = weights[k];
    out.sfirm += w * r.sfirm;
    out.semp += w * r.semp;
    out.va += w * r.va;
    out.sales += w * r.sales;
    out.firm += w * r.firm;
    out.income += w * r.income;
    out.tp += w * r.tp;
    out.poplf += w * r.poplf;
    out.unemp += w * r.unemp;
    out.pop15 += w * r.pop15;
    out.io.intermediate += w * r.io.intermediate;
    out.io.gross_output += w * r.io.gross_output;
    id += (k == 0 ? ":" : "+") + r.region_id;
  }
  out.region_id = id;
  out.parent_id.clear();
  out.io.region_id = out.region_id;
  return out;
}

DetailedRegionalFlows DetailedRegionalFlows::zeros(std::string id) {
  DetailedRegionalFlows f;
  f.region_id = std::move(id);
  f.intra = Matrix::Zero(kSectors, kSectors);
  f.imported = Matrix::Zero(kSectors, kSectors);
  f.final_local = Vector::Zero(kSectors);
  f.imported_final = Vector::Zero(kSectors);
  f.exports = Vector::Zero(kSectors);
  f.gross_output = Vector::Zero(kSectors);
  return f;
}

Matrix DetailedRegionalFlows::total_intermediate() const {
  Matrix m = intra + imported;
  for (const auto& [src, flows] : received) m += flows;
  return m;
}

Vector DetailedRegionalFlows::final_demand() const {
  Vector f = final_local + imported_final;
  for (const auto& [src, v] : received_final) f += v;
  return f;
}

Vector DetailedRegionalFlows::shipping_total() const {
  Vector l = Vector::Zero(kSectors);
  for (const auto& [dest, v] : shipped) l += v;
  return l;
}

Vector DetailedRegionalFlows::receiving_total() const {
  Vector n = Vector::Zero(kSectors);
  for (const auto& [src, flows] : received) n += flows.rowwise().sum();
  for (const auto& [src, v] : received_final) n += v;
  return n;
}

Vector DetailedRegionalFlows::import_total() const {
  return imported.rowwise().sum() + imported_final;
}

IOTable DetailedRegionalFlows::to_io_table() const {
  IOTable t;
  t.region_id = region_id;
  t.intermediate = total_intermediate();
  t.gross_output = gross_output;
  t.validate();
  return t;
}

void DetailedRegionalFlows::validate(double tol) const {
  require_sector_shape(intra, "intra flows", region_id);
  require_sector_shape(imported, "imported flows", region_id);
  require_nonneg(intra, "intra flows", region_id);
  require_nonneg(imported, "imported flows", region_id);
  for (const auto& [src, flows] : received) {
    require_sector_shape(flows, "received flows from " + src, region_id);
    require_nonneg(flows, "received flows from " + src, region_id);
    if (src == region_id)
      throw DomainError("region '" + region_id + "' lists itself as a flow source");
  }
  for (const auto& [src, v] : received_final) {
    require_sector_shape(v, "received final demand from " + src, region_id);
    require_nonneg(v, "received final demand from " + src, region_id);
  }
  for (const auto& [dest, v] : shipped) {
    require_sector_shape(v, "shipments to " + dest, region_id);
    require_nonneg(v, "shipments to " + dest, region_id);
    if (dest == region_id)
      throw DomainError("region '" + region_id + "' ships to itself");
  }
  require_nonneg(final_local, "local final demand", region_id);
  require_nonneg(imported_final, "imported final demand", region_id);
  require_nonneg(exports, "exports", region_id);
  require_nonneg(gross_output, "gross output", region_id);

  // Gross output accounting: Y = row sums of m + F + (L - N) + (E - M),
  // which reduces to the locally produced uses.
  const Vector expected = intra.rowwise().sum() + final_local +
                          shipping_total() + exports;
  const double err = (gross_output - expected).cwiseAbs().maxCoeff();
  if (err > tol)
    throw InconsistentTableError(
        "region '" + region_id +
        "': gross output violates the accounting identity by " +
        std::to_string(err));
}

ComposedFlows compose_detailed(const std::vector<DetailedRegionalFlows>& members,
                               double tol) {
  if (members.empty())
    throw DomainError("compose_detailed: empty member list");

  std::unordered_set<std::string> ids;
  for (const auto& m : members) {
    m.validate(tol);
    if (!ids.insert(m.region_id).second)
      throw DomainError("compose_detailed: duplicate member '" + m.region_id + "'");
  }

  // Reconciliation: P's shipments to member Q must equal Q's itemized
  // receipts from P, industry by industry.
  for (const auto& shipper : members) {
    for (const auto& receiver : members) {
      if (shipper.region_id == receiver.region_id) continue;
      Vector receipts = Vector::Zero(kSectors);
      if (auto it = receiver.received.find(shipper.region_id);
          it != receiver.received.end())
        receipts += it->second.rowwise().sum();
      if (auto it = receiver.received_final.find(shipper.region_id);
          it != receiver.received_final.end())
        receipts += it->second;
      Vector shipments = Vector::Zero(kSectors);
      if (auto it = shipper.shipped.find(receiver.region_id);
          it != shipper.shipped.end())
        shipments = it->second;
      const double gap = (receipts - shipments).cwiseAbs().maxCoeff();
      if (gap > tol)
        throw ReconciliationError(
            "ledger mismatch: '" + receiver.region_id + "' records receipts from '" +
            shipper.region_id + "' differing from the shipping ledger by " +
            std::to_string(gap));
    }
  }

  std::string merged_id;
  for (const auto& m : members)
    merged_id += (merged_id.empty() ? "" : "+") + m.region_id;

  DetailedRegionalFlows out = DetailedRegionalFlows::zeros(merged_id);
  for (const auto& m : members) {
    out.intra += m.intra;
    out.imported += m.imported;
    out.final_local += m.final_local;
    out.imported_final += m.imported_final;
    out.exports += m.exports;
    out.gross_output += m.gross_output;
    for (const auto& [src, flows] : m.received) {
      if (ids.count(src)) {
        out.intra += flows;  // between members: becomes intra-region
      } else {
        auto [it, inserted] = out.received.try_emplace(src, flows);
        if (!inserted) it->second += flows;
      }
    }
    for (const auto& [src, v] : m.received_final) {
      if (ids.count(src)) {
        out.final_local += v;
      } else {
        auto [it, inserted] = out.received_final.try_emplace(src, v);
        if (!inserted) it->second += v;
      }
    }
    for (const auto& [dest, v] : m.shipped) {
      if (ids.count(dest)) continue;  // absorbed into intra/final_local
      auto [it, inserted] = out.shipped.try_emplace(dest, v);
      if (!inserted) it->second += v;
    }
  }

  out.validate(tol * static_cast<double>(members.size() + 1));
  return ComposedFlows{out, out.to_io_table()};
}

namespace {

int parse_sector_index(const std::string& tok, int line_no) {
  int idx = 0;
  try {
    idx = std::stoi(tok);
  } catch (const std::exception&) {
    throw IoError("detailed flows line " + std::to_string(line_no) +
                  ": expected industry index, got '" + tok + "'");
  }
  if (idx < 1 || idx > kSectors)
    throw IoError("detailed flows line " + std::to_string(line_no) +
                  ": industry index " + std::to_string(idx) + " out of 1.." +
                  std::to_string(kSectors));
  return idx - 1;
}

double parse_value(const std::string& tok, int line_no) {
  try {
    return std::stod(tok);
  } catch (const std::exception&) {
    throw IoError("detailed flows line " + std::to_string(line_no) +
                  ": expected numeric value, got '" + tok + "'");
  }
}

}  // namespace

std::vector<DetailedRegionalFlows> read_detailed_flows(std::istream& in) {
  std::vector<DetailedRegionalFlows> regions;
  DetailedRegionalFlows cur;
  bool open = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key) || key[0] == '#') continue;
    auto need = [&](std::string& tok) {
      if (!(ss >> tok))
        throw IoError("detailed flows line " + std::to_string(line_no) +
                      ": missing field after '" + key + "'");
    };
    std::string t1, t2, t3, t4;
    if (key == "region") {
      if (open)
        throw IoError("detailed flows line " + std::to_string(line_no) +
                      ": 'region' inside an open block");
      need(t1);
      cur = DetailedRegionalFlows::zeros(t1);
      open = true;
    } else if (!open) {
      throw IoError("detailed flows line " + std::to_string(line_no) +
                    ": '" + key + "' outside a region block");
    } else if (key == "end") {
      regions.push_back(std::move(cur));
      open = false;
    } else if (key == "y") {
      need(t1), need(t2);
      cur.gross_output(parse_sector_index(t1, line_no)) = parse_value(t2, line_no);
    } else if (key == "intra" || key == "imported") {
      need(t1), need(t2), need(t3);
      auto& m = (key == "intra") ? cur.intra : cur.imported;
      m(parse_sector_index(t1, line_no), parse_sector_index(t2, line_no)) =
          parse_value(t3, line_no);
    } else if (key == "received") {
      need(t1), need(t2), need(t3), need(t4);
      auto [it, ins] = cur.received.try_emplace(t1, Matrix::Zero(kSectors, kSectors));
      it->second(parse_sector_index(t2, line_no), parse_sector_index(t3, line_no)) =
          parse_value(t4, line_no);
    } else if (key == "final_local" || key == "imported_final" ||
               key == "exports") {
      need(t1), need(t2);
      auto& v = (key == "final_local") ? cur.final_local
                : (key == "imported_final") ? cur.imported_final
                                            : cur.exports;
      v(parse_sector_index(t1, line_no)) = parse_value(t2, line_no);
    } else if (key == "received_final" || key == "shipped") {
      need(t1), need(t2), need(t3);
      auto& ledger = (key == "received_final") ? cur.received_final : cur.shipped;
      auto [it, ins] = ledger.try_emplace(t1, Vector::Zero(kSectors));
      it->second(parse_sector_index(t2, line_no)) = parse_value(t3, line_no);
    } else {
      throw IoError("detailed flows line " + std::to_string(line_no) +
                    ": unknown key '" + key + "'");
    }
  }
  if (open)
    throw IoError("detailed flows: unterminated region block '" + cur.region_id + "'");
  return regions;
}

void write_detailed_flows(std::ostream& out,
                          const std::vector<DetailedRegionalFlows>& regions) {
  auto put_matrix = [&out](const std::string& key, const std::string& src,
                           const Matrix& m) {
    for (int i = 0; i < kSectors; ++i)
      for (int j = 0; j < kSectors; ++j)
        if (m(i, j) != 0.0) {
          out << key;
          if (!src.empty()) out << ' ' << src;
          out << ' ' << (i + 1) << ' ' << (j + 1) << ' ' << m(i, j) << '\n';
        }
  };
  auto put_vector = [&out](const std::string& key, const std::string& src,
                           const Vector& v) {
    for (int i = 0; i < kSectors; ++i)
      if (v(i) != 0.0) {
        out << key;
        if (!src.empty()) out << ' ' << src;
        out << ' ' << (i + 1) << ' ' << v(i) << '\n';
      }
  };
  out.precision(17);
  for (const auto& r : regions) {
    out << "region " << r.region_id << '\n';
    put_vector("y", "", r.gross_output);
    put_matrix("intra", "", r.intra);
    for (const auto& [src, m] : r.received) put_matrix("received", src, m);
    put_matrix("imported", "", r.imported);
    put_vector("final_local", "", r.final_local);
    for (const auto& [src, v] : r.received_final) put_vector("received_final", src, v);
    put_vector("imported_final", "", r.imported_final);
    for (const auto& [dest, v] : r.shipped) put_vector("shipped", dest, v);
    put_vector("exports", "", r.exports);
    out << "end\n";
  }
}

IOTable aggregate_sectors(std::string region_id, const Matrix& flows,
                          const Vector& outputs,
                          const std::vector<int>& sector_of) {
  if (flows.rows() != flows.cols() || flows.rows() != outputs.size() ||
      static_cast<std::size_t>(flows.rows()) != sector_of.size())
    throw DimensionError("aggregate_sectors: inconsistent source dimensions");
  for (int s : sector_of)
    if (s < 0 || s >= kSectors)
      throw DomainError("aggregate_sectors: target sector " + std::to_string(s) +
                        " out of range");
  IOTable t = IOTable::zeros(std::move(region_id));
  const auto n = flows.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    t.gross_output(sector_of[i]) += outputs(i);
    for (Eigen::Index j = 0; j < n; ++j)
      t.intermediate(sector_of[i], sector_of[j]) += flows(i, j);
  }
  t.validate();
  return t;
}

}  // namespace riomix
