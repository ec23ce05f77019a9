#include "riomix/tensorio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "riomix/errors.hpp"

namespace riomix {

namespace {

std::uint64_t to_le_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t swapped = 0;
    for (int b = 0; b < 8; ++b)
      swapped |= ((bits >> (8 * b)) & 0xffULL) << (8 * (7 - b));
    bits = swapped;
  }
  return bits;
}

double from_le_bits(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t swapped = 0;
    for (int b = 0; b < 8; ++b)
      swapped |= ((bits >> (8 * b)) & 0xffULL) << (8 * (7 - b));
    bits = swapped;
  }
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

void TensorPack::add_matrix(const std::string& name, const Matrix& m) {
  Entry e;
  e.name = name;
  e.shape = {m.rows(), m.cols()};
  e.values.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) e.values.push_back(m(r, c));
  entries_.push_back(std::move(e));
}

void TensorPack::add_vector(const std::string& name, const Vector& v) {
  Entry e;
  e.name = name;
  e.shape = {v.size()};
  e.values.assign(v.data(), v.data() + v.size());
  entries_.push_back(std::move(e));
}

void TensorPack::add_scalar(const std::string& name, double v) {
  entries_.push_back(Entry{name, {}, {v}});
}

bool TensorPack::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

const TensorPack::Entry& TensorPack::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw IoError("tensor '" + name + "' not found in pack");
}

Matrix TensorPack::matrix(const std::string& name) const {
  const auto& e = find(name);
  if (e.shape.size() != 2)
    throw IoError("tensor '" + name + "' is not a matrix");
  Matrix m(e.shape[0], e.shape[1]);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = e.values[k++];
  return m;
}

Vector TensorPack::vector(const std::string& name) const {
  const auto& e = find(name);
  if (e.shape.size() != 1)
    throw IoError("tensor '" + name + "' is not a vector");
  return Eigen::Map<const Vector>(e.values.data(), e.values.size());
}

double TensorPack::scalar(const std::string& name) const {
  const auto& e = find(name);
  if (!e.shape.empty())
    throw IoError("tensor '" + name + "' is not a scalar");
  return e.values[0];
}

std::vector<std::string> TensorPack::manifest_lines() const {
  std::vector<std::string> lines;
  std::int64_t offset = 0;
  for (const auto& e : entries_) {
    std::ostringstream os;
    os << "tensor " << e.name << ' ' << e.shape.size();
    for (auto d : e.shape) os << ' ' << d;
    os << ' ' << offset;
    lines.push_back(os.str());
    offset += static_cast<std::int64_t>(e.values.size());
  }
  return lines;
}

void TensorPack::write_binary(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& e : entries_) {
    for (double v : e.values) {
      const std::uint64_t bits = to_le_bits(v);
      out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

TensorPack TensorPack::load(const std::vector<std::string>& manifest_lines,
                            const std::string& binary_path) {
  std::ifstream in(binary_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + binary_path + "' for reading");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (raw.size() % sizeof(double) != 0)
    throw IoError("'" + binary_path + "' is not a multiple of 8 bytes");
  const std::size_t total = raw.size() / sizeof(double);

  TensorPack pack;
  for (const auto& line : manifest_lines) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "tensor") continue;
    Entry e;
    std::size_t ndim = 0;
    std::int64_t offset = 0;
    if (!(ss >> e.name >> ndim))
      throw IoError("malformed tensor line: '" + line + "'");
    std::int64_t count = 1;
    for (std::size_t d = 0; d < ndim; ++d) {
      std::int64_t dim = 0;
      if (!(ss >> dim) || dim < 0)
        throw IoError("malformed tensor shape: '" + line + "'");
      e.shape.push_back(dim);
      count *= dim;
    }
    if (!(ss >> offset) || offset < 0)
      throw IoError("malformed tensor offset: '" + line + "'");
    if (static_cast<std::size_t>(offset + count) > total)
      throw IoError("tensor '" + e.name + "' exceeds '" + binary_path + "'");
    e.values.resize(count);
    for (std::int64_t k = 0; k < count; ++k) {
      std::uint64_t bits;
      std::memcpy(&bits, raw.data() + (offset + k) * sizeof(double), sizeof(bits));
      e.values[k] = from_le_bits(bits);
    }
    pack.entries_.push_back(std::move(e));
  }
  return pack;
}

std::vector<std::string> read_text_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_text_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace riomix
