#include <cmath>
#include <numbers>

#include "doctest.h"
#include "common/error.hpp"
#include "motion/rotation.hpp"
#include "support.hpp"

using namespace speakgen;
using namespace speakgen::motion;

namespace {

Eigen::VectorXd as_quat_vector(const Eigen::Quaterniond& q) {
  Eigen::VectorXd v(4);
  v << q.w(), q.x(), q.y(), q.z();
  return v;
}

// Matrices compare form-independently (quaternion sign ambiguity).
Eigen::Matrix3d to_matrix(const Eigen::VectorXd& v, RotationForm form) {
  const Eigen::VectorXd m = convert_rotation(v, form, RotationForm::kMatrix);
  Eigen::Matrix3d r;
  r << m(0), m(1), m(2), m(3), m(4), m(5), m(6), m(7), m(8);
  return r;
}

}  // namespace

TEST_CASE("identity matrix converts to the zero axis-angle") {
  Eigen::VectorXd eye(9);
  eye << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  const Eigen::VectorXd aa = convert_rotation(eye, RotationForm::kMatrix, RotationForm::kAxisAngle);
  CHECK(aa.norm() == doctest::Approx(0.0));
}

TEST_CASE("quarter turn about z round-trips through the matrix form") {
  Eigen::VectorXd aa(3);
  aa << 0, 0, std::numbers::pi / 2;
  const Eigen::VectorXd m = convert_rotation(aa, RotationForm::kAxisAngle, RotationForm::kMatrix);
  const Eigen::VectorXd back = convert_rotation(m, RotationForm::kMatrix, RotationForm::kAxisAngle);
  CHECK((back - aa).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("all form pairs round-trip over 1000 seeded rotations") {
  const RotationForm forms[] = {RotationForm::kMatrix, RotationForm::kAxisAngle, RotationForm::kQuaternion,
                                RotationForm::kSixD};
  Rng rng(20240101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Quaterniond q = testing::random_rotation(rng);
    const Eigen::Matrix3d truth = q.toRotationMatrix();
    for (RotationForm from : forms) {
      const Eigen::VectorXd start = convert_rotation(as_quat_vector(q), RotationForm::kQuaternion, from);
      for (RotationForm to : forms) {
        const Eigen::VectorXd there = convert_rotation(start, from, to);
        const Eigen::VectorXd back = convert_rotation(there, to, from);
        worst = std::max(worst, (to_matrix(back, from) - truth).cwiseAbs().maxCoeff());
        worst = std::max(worst, (to_matrix(there, to) - truth).cwiseAbs().maxCoeff());
      }
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("6D to matrix is orthonormal and reproduces the rotation") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix3d r = testing::random_rotation(rng).toRotationMatrix();
    const Eigen::Matrix3d back = matrix_from_sixd(sixd_from_matrix(r));
    REQUIRE((back.transpose() * back - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-6);
    REQUIRE((back - r).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("6D decoding re-orthonormalizes perturbed columns") {
  Eigen::Matrix<double, 6, 1> v;
  v << 2.0, 0.0, 0.0, 0.3, 0.5, 0.0;
  const Eigen::Matrix3d r = matrix_from_sixd(v);
  CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.determinant() == doctest::Approx(1.0));
  CHECK(r.col(0).isApprox(Eigen::Vector3d::UnitX()));
  CHECK(r.col(1).isApprox(Eigen::Vector3d::UnitY()));
}

TEST_CASE("degenerate 6D input is rejected") {
  Eigen::VectorXd v(6);
  v << 1, 0, 0, 2, 0, 0;
  CHECK_THROWS_AS(convert_rotation(v, RotationForm::kSixD, RotationForm::kMatrix), ValidationError);
  v << 0, 0, 0, 0, 1, 0;
  CHECK_THROWS_AS(convert_rotation(v, RotationForm::kSixD, RotationForm::kQuaternion), ValidationError);
}

TEST_CASE("invalid inputs are rejected") {
  Eigen::VectorXd m(9);
  m << 1, 0, 0, 0, 1.1, 0, 0, 0, 1;
  CHECK_THROWS_AS(convert_rotation(m, RotationForm::kMatrix, RotationForm::kQuaternion), ValidationError);
  m << -1, 0, 0, 0, 1, 0, 0, 0, 1;  // reflection
  CHECK_THROWS_AS(convert_rotation(m, RotationForm::kMatrix, RotationForm::kAxisAngle), ValidationError);
  Eigen::VectorXd q(4);
  q << 2, 0, 0, 0;
  CHECK_THROWS_AS(convert_rotation(q, RotationForm::kQuaternion, RotationForm::kMatrix), ValidationError);
  CHECK_THROWS_AS(convert_rotation(Eigen::VectorXd::Zero(5), RotationForm::kAxisAngle, RotationForm::kMatrix),
                  ValidationError);
}

TEST_CASE("Euler composition follows the listed channel order") {
  // Single-axis closed form: q = (cos(a/2), sin(a/2) * axis).
  const double h = std::sqrt(0.5);
  const Eigen::Quaterniond q = quat_from_euler_deg({90, 0, 0}, "ZXY");
  CHECK(q.w() == doctest::Approx(h));
  CHECK(q.z() == doctest::Approx(h));
  CHECK(q.x() == doctest::Approx(0.0));
  CHECK(q.y() == doctest::Approx(0.0));

  // Rz(30) * Rx(20) versus Rx(20) * Rz(30) differ; compare against explicit products.
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(30 * std::numbers::pi / 180, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d rx = Eigen::AngleAxisd(20 * std::numbers::pi / 180, Eigen::Vector3d::UnitX()).toRotationMatrix();
  CHECK((quat_from_euler_deg({30, 20, 0}, "ZXY").toRotationMatrix() - rz * rx).norm() < 1e-12);
  CHECK((quat_from_euler_deg({20, 30, 0}, "XZY").toRotationMatrix() - rx * rz).norm() < 1e-12);
}

TEST_CASE("ZYX Euler extraction inverts composition") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Quaterniond q = testing::random_rotation(rng);
    const Eigen::Vector3d zyx = euler_zyx_deg_from_quat(q);
    const Eigen::Quaterniond back = quat_from_euler_deg(zyx, "ZYX");
    CHECK((back.toRotationMatrix() - q.toRotationMatrix()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("heading of a pure yaw is the yaw") {
  for (double yaw : {-2.5, -1.0, 0.0, 0.4, 3.0}) CHECK(heading_yaw(yaw_quat(yaw)) == doctest::Approx(yaw));
}
