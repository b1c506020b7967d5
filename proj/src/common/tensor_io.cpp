#include "common/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace speakgen {
namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor I/O assumes a little-endian host");

constexpr char kMagic[4] = {'F', 'T', 'K', 'T'};
constexpr std::uint32_t kMaxRank = 8;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("tensor: unexpected end of data");
  return value;
}

}  // namespace

std::uint64_t Tensor::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Tensor tensor_from_matrix(const Eigen::MatrixXd& m) {
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  t.values.resize(static_cast<std::size_t>(m.size()));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.values[k++] = m(r, c);
  return t;
}

Eigen::MatrixXd matrix_from_tensor(const Tensor& t) {
  if (t.dims.size() != 2) throw ValidationError("tensor: expected rank 2, got rank " +
                                                std::to_string(t.dims.size()));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1]));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.values[k++];
  return m;
}

void write_tensor(std::ostream& out, const Tensor& t, DType dtype) {
  if (t.values.size() != t.element_count())
    throw ValidationError("tensor: payload length does not match dims");
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kTensorFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dtype));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put<std::uint64_t>(out, d);
  if (dtype == DType::kFloat64) {
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  } else {
    for (double v : t.values) put<float>(out, static_cast<float>(v));
  }
  if (!out) throw IoError("tensor: write failed");
}

Tensor read_tensor(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ValidationError("tensor: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kTensorFormatVersion)
    throw ValidationError("tensor: unsupported format version " + std::to_string(version));
  const auto dtype = get<std::uint32_t>(in);
  if (dtype != static_cast<std::uint32_t>(DType::kFloat32) &&
      dtype != static_cast<std::uint32_t>(DType::kFloat64))
    throw ValidationError("tensor: unknown dtype tag " + std::to_string(dtype));
  const auto ndim = get<std::uint32_t>(in);
  if (ndim > kMaxRank) throw ValidationError("tensor: rank " + std::to_string(ndim) + " too large");
  Tensor t;
  t.dims.resize(ndim);
  for (auto& d : t.dims) d = get<std::uint64_t>(in);
  const std::uint64_t count = t.element_count();
  if (count > (std::uint64_t{1} << 34)) throw ValidationError("tensor: implausible element count");
  t.values.resize(static_cast<std::size_t>(count));
  if (dtype == static_cast<std::uint32_t>(DType::kFloat64)) {
    in.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw ValidationError("tensor: payload shorter than dims imply");
  } else {
    for (auto& v : t.values) {
      float f{};
      in.read(reinterpret_cast<char*>(&f), sizeof(float));
      if (!in) throw ValidationError("tensor: payload shorter than dims imply");
      v = f;
    }
  }
  return t;
}

void write_tensor_file(const std::filesystem::path& path, const Tensor& t, DType dtype) {
  std::ostringstream buffer;
  write_tensor(buffer, t, dtype);
  write_file_bytes(path, buffer.str());
}

Tensor read_tensor_file(const std::filesystem::path& path) {
  std::istringstream in(read_file_bytes(path));
  Tensor t = read_tensor(in);
  if (in.peek() != std::char_traits<char>::eof())
    throw ValidationError("tensor: trailing bytes after payload in " + path.string());
  return t;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buffer.str();
}

void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace speakgen
