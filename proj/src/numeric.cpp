#include "ordenc/numeric.hpp"

#include <cmath>
#include <stdexcept>

namespace ordenc::numeric {

void softmax(std::span<const double> scores, std::span<double> out) {
  if (scores.empty() || out.size() != scores.size()) {
    throw std::invalid_argument("softmax: size mismatch or empty input");
  }
  double max_score = scores[0];
  for (const double s : scores) max_score = std::max(max_score, s);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - max_score);
    total += out[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] /= total;
  }
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  softmax(scores, out);
  return out;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("argmax: empty input");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double soft_cross_entropy(std::span<const double> prediction,
                          std::span<const double> target) {
  if (prediction.size() != target.size()) {
    throw std::invalid_argument("soft_cross_entropy: length mismatch");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    loss -= target[i] * std::log(prediction[i] + kLogEpsilon);
  }
  return loss;
}

}  // namespace ordenc::numeric
