#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riomix/iodata.hpp"

namespace riomix {

/// Named tensor collection backing the model bundle format. The binary
/// file is nothing but the tensors' values as little-endian IEEE 754
/// doubles, concatenated in manifest order (matrices row-major); the
/// plain-text manifest carries one line per tensor:
///   tensor <name> <ndim> <dim...> <offset-in-doubles>
class TensorPack {
 public:
  void add_matrix(const std::string& name, const Matrix& m);
  void add_vector(const std::string& name, const Vector& v);
  void add_scalar(const std::string& name, double v);

  bool contains(const std::string& name) const;
  Matrix matrix(const std::string& name) const;
  Vector vector(const std::string& name) const;
  double scalar(const std::string& name) const;

  std::vector<std::string> manifest_lines() const;
  void write_binary(const std::string& path) const;

  /// Rebuilds the pack from manifest lines (non-tensor lines are
  /// skipped) plus the binary payload.
  static TensorPack load(const std::vector<std::string>& manifest_lines,
                         const std::string& binary_path);

 private:
  struct Entry {
    std::string name;
    std::vector<std::int64_t> shape;  // empty = scalar
    std::vector<double> values;
  };
  const Entry& find(const std::string& name) const;
  std::vector<Entry> entries_;
};

/// Whole-file helpers for the plain-text manifests.
std::vector<std::string> read_text_lines(const std::string& path);
void write_text_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace riomix
