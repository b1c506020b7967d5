#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace speakgen {

// On-disk tensor container ("FTKT"):
//   magic "FTKT" | u32 version | u32 dtype | u32 ndim | u64 dims[ndim] | payload
// All integers and the payload are little-endian; the payload is row-major.
enum class DType : std::uint32_t { kFloat32 = 1, kFloat64 = 2 };

inline constexpr std::uint32_t kTensorFormatVersion = 1;

struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;  // row-major

  std::uint64_t element_count() const;
};

// Rank-2 helpers for the common frame-by-feature case.
Tensor tensor_from_matrix(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_tensor(const Tensor& t);

void write_tensor(std::ostream& out, const Tensor& t, DType dtype = DType::kFloat64);
Tensor read_tensor(std::istream& in);

void write_tensor_file(const std::filesystem::path& path, const Tensor& t,
                       DType dtype = DType::kFloat64);
Tensor read_tensor_file(const std::filesystem::path& path);

inline void write_matrix_file(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  write_tensor_file(path, tensor_from_matrix(m));
}
inline Eigen::MatrixXd read_matrix_file(const std::filesystem::path& path) {
  return matrix_from_tensor(read_tensor_file(path));
}

// Whole-file helpers shared by the engine's writers.
std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::string& bytes);

}  // namespace speakgen
