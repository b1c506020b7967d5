#pragma once

#include <array>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "motion/skeleton.hpp"

namespace speakgen::motion {

// Signed axis permutation taking source coordinates into the engine frame
// (right-handed, Y up, +Z forward). Entry i names the source axis feeding
// engine axis i, e.g. {"x", "z", "-y"} for Z-up data.
struct AxisMap {
  std::array<std::string, 3> axes{"x", "y", "z"};

  Eigen::Matrix3d matrix() const;
  bool is_identity() const { return axes[0] == "x" && axes[1] == "y" && axes[2] == "z"; }
};

struct BvhDocument {
  Skeleton skeleton;
  MotionClip clip;
};

// Throws ParseError naming the offending line.
BvhDocument parse_bvh(std::string_view text, const AxisMap& axis_map = {});

// Emits ZYX Euler channels with 6-decimal fixed point. Leaf joints without an
// end site get a zero-length one so that common viewers accept the file.
std::string write_bvh(const Skeleton& skeleton, const MotionClip& clip);

}  // namespace speakgen::motion
