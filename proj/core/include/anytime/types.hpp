#pragma once

#include <Eigen/Core>

namespace anytime {

/// Largest state, input or disturbance dimension a plant may declare.
inline constexpr int kMaxDim = 8;

/// Dense state/input/disturbance vector. Storage is inline (no heap traffic in
/// the simulation loop); the runtime size is bounded by kMaxDim.
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

inline Vector zeros(int dim) { return Vector::Zero(dim); }

}  // namespace anytime
