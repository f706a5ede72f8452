#include "ordenc/learned_codec.hpp"

#include <cmath>
#include <stdexcept>

#include "ordenc/numeric.hpp"

namespace ordenc::learned {

EncodingParams::EncodingParams(std::size_t num_classes, double target_mass)
    : EncodingParams(num_classes,
                     std::vector<double>(logit_count(num_classes), 0.0),
                     target_mass) {}

EncodingParams::EncodingParams(std::size_t num_classes,
                               std::vector<double> off_target_logits,
                               double target_mass)
    : k_(num_classes),
      logits_(std::move(off_target_logits)),
      target_mass_(target_mass) {
  if (k_ < 2) {
    throw std::invalid_argument("EncodingParams: need at least 2 classes");
  }
  if (!(target_mass_ > 0.0 && target_mass_ < 1.0)) {
    throw std::invalid_argument(
        "EncodingParams: target_mass must lie in (0, 1)");
  }
  if (logits_.size() != logit_count(k_)) {
    throw std::invalid_argument("EncodingParams: logits must be K*(K-1)");
  }
  for (const double v : logits_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("EncodingParams: logits must be finite");
    }
  }
}

std::span<const double> EncodingParams::logits_row(std::size_t target) const {
  if (target >= k_) {
    throw std::out_of_range("EncodingParams: target out of range");
  }
  return std::span<const double>(logits_).subspan(target * (k_ - 1), k_ - 1);
}

codec::LabelMatrix materialize(const EncodingParams& params) {
  const std::size_t k = params.num_classes();
  const double s = params.target_mass();
  std::vector<double> entries(k * k, 0.0);
  std::vector<double> mass(k - 1);
  for (std::size_t t = 0; t < k; ++t) {
    numeric::softmax(params.logits_row(t), mass);
    entries[t * k + t] = s;
    for (std::size_t slot = 0; slot < k - 1; ++slot) {
      entries[t * k + EncodingParams::slot_class(t, slot)] =
          (1.0 - s) * mass[slot];
    }
  }
  return codec::LabelMatrix(k, std::move(entries));
}

std::vector<double> asymmetry_report(const codec::LabelMatrix& matrix) {
  const std::size_t k = matrix.num_classes();
  std::vector<double> report(k * k, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      report[t * k + i] = matrix(t, i) - matrix(i, t);
    }
  }
  return report;
}

std::vector<double> asymmetry_report(const EncodingParams& params) {
  return asymmetry_report(materialize(params));
}

void accumulate_logit_grad(const EncodingParams& params, std::size_t target,
                           std::span<const double> dloss_drow,
                           std::span<double> grad_row) {
  const std::size_t k = params.num_classes();
  if (dloss_drow.size() != k || grad_row.size() != k - 1) {
    throw std::invalid_argument("accumulate_logit_grad: size mismatch");
  }
  const auto mass = numeric::softmax(params.logits_row(target));
  const double scale = 1.0 - params.target_mass();
  double weighted = 0.0;
  for (std::size_t slot = 0; slot < k - 1; ++slot) {
    weighted += mass[slot] *
                dloss_drow[EncodingParams::slot_class(target, slot)];
  }
  for (std::size_t slot = 0; slot < k - 1; ++slot) {
    const double c = dloss_drow[EncodingParams::slot_class(target, slot)];
    grad_row[slot] += scale * mass[slot] * (c - weighted);
  }
}

}  // namespace ordenc::learned
