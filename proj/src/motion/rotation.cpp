#include "motion/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "common/error.hpp"

namespace speakgen::motion {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kParallelTolerance = 1e-8;

Eigen::Matrix3d matrix_from_flat(const Eigen::VectorXd& v) {
  Eigen::Matrix3d r;
  r << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
  return r;
}

Eigen::VectorXd flat_from_matrix(const Eigen::Matrix3d& r) {
  Eigen::VectorXd v(9);
  v << r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0), r(2, 1), r(2, 2);
  return v;
}

Eigen::Quaterniond axis_rotation(char axis, double radians) {
  switch (axis) {
    case 'X': return Eigen::Quaterniond(Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitX()));
    case 'Y': return Eigen::Quaterniond(Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitY()));
    case 'Z': return Eigen::Quaterniond(Eigen::AngleAxisd(radians, Eigen::Vector3d::UnitZ()));
    default: throw ValidationError(std::string("unknown rotation axis '") + axis + "'");
  }
}

Eigen::Quaterniond to_quat(const Eigen::VectorXd& value, RotationForm from) {
  switch (from) {
    case RotationForm::kMatrix: return quat_from_matrix(matrix_from_flat(value));
    case RotationForm::kAxisAngle: return quat_from_axis_angle(value.head<3>());
    case RotationForm::kQuaternion: {
      Eigen::Quaterniond q(value(0), value(1), value(2), value(3));
      const double n = q.norm();
      if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-3)
        throw ValidationError("quaternion is not unit-norm (|q| = " + std::to_string(n) + ")");
      q.normalize();
      return q;
    }
    case RotationForm::kSixD: {
      Eigen::Quaterniond q(matrix_from_sixd(value.head<6>()));
      return q.normalized();
    }
  }
  throw ValidationError("unknown rotation form");
}

}  // namespace

int rotation_form_size(RotationForm form) {
  switch (form) {
    case RotationForm::kMatrix: return 9;
    case RotationForm::kAxisAngle: return 3;
    case RotationForm::kQuaternion: return 4;
    case RotationForm::kSixD: return 6;
  }
  return 0;
}

RotationForm parse_rotation_form(std::string_view name) {
  if (name == "matrix") return RotationForm::kMatrix;
  if (name == "axis-angle" || name == "axis_angle") return RotationForm::kAxisAngle;
  if (name == "quaternion") return RotationForm::kQuaternion;
  if (name == "6d" || name == "sixd") return RotationForm::kSixD;
  throw ValidationError("unknown rotation form '" + std::string(name) + "'");
}

Eigen::VectorXd convert_rotation(const Eigen::VectorXd& value, RotationForm from, RotationForm to) {
  if (value.size() != rotation_form_size(from))
    throw ValidationError("rotation value has " + std::to_string(value.size()) +
                          " entries, expected " + std::to_string(rotation_form_size(from)));
  if (!value.allFinite()) throw ValidationError("rotation value is not finite");

  if (from == RotationForm::kSixD && to == RotationForm::kMatrix)
    return flat_from_matrix(matrix_from_sixd(value.head<6>()));
  if (from == RotationForm::kMatrix && to == RotationForm::kSixD) {
    const Eigen::Matrix3d r = matrix_from_flat(value);
    quat_from_matrix(r);  // validates orthonormality
    return sixd_from_matrix(r);
  }

  const Eigen::Quaterniond q = to_quat(value, from);
  switch (to) {
    case RotationForm::kMatrix: return flat_from_matrix(q.toRotationMatrix());
    case RotationForm::kAxisAngle: return axis_angle_from_quat(q);
    case RotationForm::kQuaternion: {
      Eigen::VectorXd v(4);
      v << q.w(), q.x(), q.y(), q.z();
      return v;
    }
    case RotationForm::kSixD: return sixd_from_matrix(q.toRotationMatrix());
  }
  throw ValidationError("unknown rotation form");
}

Eigen::Quaterniond quat_from_axis_angle(const Eigen::Vector3d& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle < 1e-12) {
    // First-order expansion keeps tiny rotations exact to machine precision.
    return Eigen::Quaterniond(1.0, 0.5 * axis_angle.x(), 0.5 * axis_angle.y(), 0.5 * axis_angle.z())
        .normalized();
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis_angle / angle));
}

Eigen::Vector3d axis_angle_from_quat(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Eigen::Vector3d v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v / q.w();
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

Eigen::Matrix<double, 6, 1> sixd_from_matrix(const Eigen::Matrix3d& r) {
  Eigen::Matrix<double, 6, 1> out;
  out << r.col(0), r.col(1);
  return out;
}

Eigen::Matrix3d matrix_from_sixd(const Eigen::Matrix<double, 6, 1>& sixd) {
  const Eigen::Vector3d c1 = sixd.head<3>();
  const Eigen::Vector3d c2 = sixd.tail<3>();
  const double n1 = c1.norm();
  const double n2 = c2.norm();
  if (!(n1 > kParallelTolerance) || !(n2 > kParallelTolerance) ||
      c1.cross(c2).norm() <= kParallelTolerance * n1 * n2)
    throw ValidationError("degenerate 6D rotation: columns are parallel or zero");
  const Eigen::Vector3d a1 = c1 / n1;
  const Eigen::Vector3d b2 = c2 - a1.dot(c2) * a1;
  const Eigen::Vector3d a2 = b2.normalized();
  Eigen::Matrix3d r;
  r.col(0) = a1;
  r.col(1) = a2;
  r.col(2) = a1.cross(a2);
  return r;
}

Eigen::Quaterniond quat_from_matrix(const Eigen::Matrix3d& r, double tolerance) {
  if (!r.allFinite()) throw ValidationError("rotation matrix is not finite");
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tolerance || r.determinant() <= 0.0)
    throw ValidationError("matrix is not a proper rotation (orthonormality error " +
                          std::to_string(ortho) + ")");
  return Eigen::Quaterniond(r).normalized();
}

Eigen::Quaterniond quat_from_euler_deg(const Eigen::Vector3d& angles, std::string_view order) {
  if (order.size() != 3) throw ValidationError("Euler order must name three axes");
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  for (int i = 0; i < 3; ++i) q = q * axis_rotation(order[static_cast<std::size_t>(i)], angles(i) * kDegToRad);
  return q.normalized();
}

Eigen::Vector3d euler_zyx_deg_from_quat(const Eigen::Quaterniond& q) {
  const Eigen::Matrix3d r = q.normalized().toRotationMatrix();
  const double sy = std::clamp(-r(2, 0), -1.0, 1.0);
  const double y = std::asin(sy);
  double z, x;
  if (std::abs(sy) < 1.0 - 1e-12) {
    z = std::atan2(r(1, 0), r(0, 0));
    x = std::atan2(r(2, 1), r(2, 2));
  } else {
    // Gimbal lock: only z - x (or z + x) is determined; put it all in x.
    z = 0.0;
    x = std::atan2(-r(1, 2), r(1, 1));
  }
  return Eigen::Vector3d(z, y, x) / kDegToRad;
}

Eigen::Quaterniond yaw_quat(double yaw) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()));
}

double heading_yaw(const Eigen::Quaterniond& q) {
  const Eigen::Vector3d forward = q * Eigen::Vector3d::UnitZ();
  return std::atan2(forward.x(), forward.z());
}

double wrap_angle(double radians) {
  return std::remainder(radians, 2.0 * std::numbers::pi);
}

}  // namespace speakgen::motion
