#pragma once

#include <span>
#include <vector>

namespace ordenc::numeric {

/// Log clamp used by every soft-target cross entropy in the project.
inline constexpr double kLogEpsilon = 1e-12;

/// Softmax with max subtraction. Shifting all scores by a constant that the
/// shifted values represent exactly leaves the output bit-identical.
void softmax(std::span<const double> scores, std::span<double> out);
std::vector<double> softmax(std::span<const double> scores);

/// Index of the first maximum.
std::size_t argmax(std::span<const double> values);

/// -sum_i target_i * log(prediction_i + kLogEpsilon) for one distribution
/// pair. Inputs are not validated here; batch-level checks live in diffcore.
double soft_cross_entropy(std::span<const double> prediction,
                          std::span<const double> target);

}  // namespace ordenc::numeric
