#pragma once

#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace speakgen::motion {

// Interchange forms for a 3D rotation. Values travel as flat vectors:
//   kMatrix     9 entries, row-major
//   kAxisAngle  3 entries, axis * angle (radians)
//   kQuaternion 4 entries, (w, x, y, z)
//   kSixD       6 entries, first matrix column then second column
enum class RotationForm { kMatrix, kAxisAngle, kQuaternion, kSixD };

int rotation_form_size(RotationForm form);
RotationForm parse_rotation_form(std::string_view name);

// Converts between any two forms. Throws ValidationError if the input is not a
// valid rotation in `from` (non-orthonormal matrix, non-unit quaternion,
// degenerate 6D columns).
Eigen::VectorXd convert_rotation(const Eigen::VectorXd& value, RotationForm from, RotationForm to);

Eigen::Quaterniond quat_from_axis_angle(const Eigen::Vector3d& axis_angle);
// Result has angle in [0, pi].
Eigen::Vector3d axis_angle_from_quat(const Eigen::Quaterniond& q);

Eigen::Matrix<double, 6, 1> sixd_from_matrix(const Eigen::Matrix3d& r);
// Gram-Schmidt re-orthonormalization of the two stored columns.
Eigen::Matrix3d matrix_from_sixd(const Eigen::Matrix<double, 6, 1>& sixd);

// Projects a nearly orthonormal matrix onto a quaternion; throws unless
// orthonormal within `tolerance` with positive determinant.
Eigen::Quaterniond quat_from_matrix(const Eigen::Matrix3d& r, double tolerance = 1e-5);

// Intrinsic Euler composition: order "ZXY" means Rz * Rx * Ry. Degrees.
Eigen::Quaterniond quat_from_euler_deg(const Eigen::Vector3d& angles, std::string_view order);
// ZYX decomposition (R = Rz * Ry * Rx); returns (z, y, x) in degrees.
Eigen::Vector3d euler_zyx_deg_from_quat(const Eigen::Quaterniond& q);

Eigen::Quaterniond yaw_quat(double yaw);
// Heading of the rotated +Z axis projected onto the ground plane,
// atan2(x, z). Zero when the rotation keeps +Z forward.
double heading_yaw(const Eigen::Quaterniond& q);

double wrap_angle(double radians);

}  // namespace speakgen::motion
