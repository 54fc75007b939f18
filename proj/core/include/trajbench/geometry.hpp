#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <vector>

namespace trajbench {

/// World-frame position or velocity, meters or m/s.
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Sequence of 2D points. Eigen's aligned allocator is unnecessary for Vector2d
/// (16 bytes, no over-alignment requirement beyond the default on x86-64).
using Path = std::vector<Vec2>;

}  // namespace trajbench
