#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace riomix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Number of industry sectors in the aggregated classification.
inline constexpr int kSectors = 12;

/// Fixed 12-sector industry scheme. Position in `labels` is the 1-based
/// order index used for coefficient subscripts: a_{1,2} is the coefficient
/// from labels[0] into labels[1].
struct IndustryClassification {
  std::array<std::string, kSectors> labels;

  static const IndustryClassification& standard();
  static IndustryClassification from_labels(const std::vector<std::string>& labels);
};

/// Competitive-import-type table restricted to intermediate inputs and
/// gross outputs. `intermediate(i, j)` is the input from industry i into
/// industry j; `gross_output(j)` is industry j's total output.
struct IOTable {
  std::string region_id;
  Matrix intermediate;   // kSectors x kSectors, nonnegative
  Vector gross_output;   // kSectors, nonnegative

  static IOTable zeros(std::string id);
  void validate() const;
};

/// Input coefficients a_{i,j} = intermediate(i,j) / gross_output(j).
/// A zero-output column (necessarily all-zero flows) yields zero
/// coefficients; flow into a zero-output industry is an error.
Matrix coefficient_matrix(const IOTable& table);

/// One region's quantitative macro observations. Minor-class vectors
/// (sfirm, semp) share one dimension across a dataset, as do large-class
/// vectors (va, sales, firm). `parent_id` is set when the region is
/// geographically contained in another (a city inside a prefecture).
struct RegionRecord {
  std::string region_id;
  std::string parent_id;  // empty when not nested
  Vector sfirm;           // establishment counts, minor classification
  Vector semp;            // employee counts, minor classification
  Vector va;              // value added, large classification
  Vector sales;           // sales, large classification
  Vector firm;            // establishment counts, large classification
  double income = 0.0;    // taxable income
  double tp = 0.0;        // taxpayers
  double poplf = 0.0;     // labor force population
  double unemp = 0.0;     // unemployed persons
  double pop15 = 0.0;     // population aged 15 and over
  IOTable io;

  void validate() const;
};

/// Ancestor/descendant lookup over a record set's parent pointers.
/// Chains are walked transitively through whatever ids the index knows.
class AncestryIndex {
 public:
  AncestryIndex() = default;
  explicit AncestryIndex(const std::vector<RegionRecord>& records);

  /// True when one id is an ancestor of the other.
  bool related(const std::string& a, const std::string& b) const;

 private:
  bool is_ancestor(const std::string& ancestor, const std::string& id) const;
  std::unordered_map<std::string, std::string> parent_;
};

/// Hypothetical expansion or contraction: every quantitative field times
/// lambda. Identity and nesting metadata are preserved.
RegionRecord scale_region(const RegionRecord& region, double lambda);

/// Composite region sum_k weights[k] * regions[k] over every quantitative
/// field. Fails when two inputs are in an inclusion relation (their
/// transfers cannot be summed). The result gets a fresh synthetic id and
/// no parent.
RegionRecord linear_interpolate(const std::vector<RegionRecord>& regions,
                                const std::vector<double>& weights);

/// Itemized flow ledger behind one region's competitive-import table.
/// The intermediate input m_{i,j} splits into the intra-region part,
/// receipts from other domestic regions (by source), and imports; final
/// demand splits the same way. `shipped` itemizes sales to other domestic
/// regions by destination (intermediate and final use combined).
struct DetailedRegionalFlows {
  std::string region_id;
  Matrix intra;                                   // m_hat
  std::map<std::string, Matrix> received;         // m_dot, by source region
  Matrix imported;                                 // m_tilde
  Vector final_local;                              // locally supplied final demand
  std::map<std::string, Vector> received_final;    // final demand received, by source
  Vector imported_final;                           // imported final demand
  std::map<std::string, Vector> shipped;           // L, by destination region
  Vector exports;
  Vector gross_output;                             // Y

  static DetailedRegionalFlows zeros(std::string id);

  Matrix total_intermediate() const;  // m = m_hat + sum m_dot + m_tilde
  Vector final_demand() const;        // F
  Vector shipping_total() const;      // L
  Vector receiving_total() const;     // N
  Vector import_total() const;        // imports across intermediate + final use

  /// The competitive-import table this ledger induces.
  IOTable to_io_table() const;

  /// Checks nonnegativity and the accounting identity
  /// Y_i = sum_j m_{i,j} + F_i + (L_i - N_i) + (exports_i - imports_i).
  void validate(double tol = 1e-9) const;
};

struct ComposedFlows {
  DetailedRegionalFlows merged;
  IOTable merged_table;
};

/// Merges member regions into one: flows between members become
/// intra-region, receipts/shipments involving only outsiders survive,
/// imports and exports add. Member ledgers must reconcile pairwise
/// (what P ships to Q is what Q records as received from P).
ComposedFlows compose_detailed(const std::vector<DetailedRegionalFlows>& members,
                               double tol = 1e-9);

/// Text fixture format for detailed flows (one file, several regions).
std::vector<DetailedRegionalFlows> read_detailed_flows(std::istream& in);
void write_detailed_flows(std::ostream& out,
                          const std::vector<DetailedRegionalFlows>& regions);

/// Collapses a source-classification flow matrix/output vector onto the
/// 12-sector scheme. `sector_of[s]` maps source sector s to a 0-based
/// target sector.
IOTable aggregate_sectors(std::string region_id, const Matrix& flows,
                          const Vector& outputs,
                          const std::vector<int>& sector_of);

}  // namespace riomix
