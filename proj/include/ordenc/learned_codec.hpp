#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ordenc/label_codec.hpp"

namespace ordenc::learned {

/// Free parameters of the directly-learned encoding. Row t holds K-1
/// unconstrained logits that distribute the off-target mass 1 - target_mass
/// for ground-truth class t; the target entry itself is pinned to
/// target_mass so the ground-truth signal cannot be optimized away.
///
/// Off-target slots are ordered by ascending class index with the target
/// class skipped: slot i covers class i for i < t and class i + 1 otherwise.
/// Serialization depends on this ordering.
class EncodingParams {
 public:
  /// Zero logits: uniform off-target mass.
  EncodingParams(std::size_t num_classes, double target_mass);
  EncodingParams(std::size_t num_classes, std::vector<double> off_target_logits,
                 double target_mass);

  std::size_t num_classes() const { return k_; }
  double target_mass() const { return target_mass_; }

  std::span<double> logits() { return logits_; }
  std::span<const double> logits() const { return logits_; }
  std::span<const double> logits_row(std::size_t target) const;

  static std::size_t logit_count(std::size_t num_classes) {
    return num_classes * (num_classes - 1);
  }

  /// Class index covered by an off-target slot of row `target`.
  static std::size_t slot_class(std::size_t target, std::size_t slot) {
    return slot < target ? slot : slot + 1;
  }

 private:
  std::size_t k_;
  std::vector<double> logits_;
  double target_mass_;
};

/// Materializes the encoding: entry (t, t) is exactly target_mass and the
/// off-target entries are (1 - target_mass) * softmax(logits row t).
codec::LabelMatrix materialize(const EncodingParams& params);

/// Pairwise asymmetry y(t, i) - y(i, t), row-major K x K. All zeros iff the
/// encoding is symmetric.
std::vector<double> asymmetry_report(const codec::LabelMatrix& matrix);
std::vector<double> asymmetry_report(const EncodingParams& params);

/// Accumulates d(loss)/d(logits row `target`) given the gradient of the loss
/// with respect to the materialized row (length K; the pinned target entry
/// is ignored). Adds into `grad_row` (length K-1).
void accumulate_logit_grad(const EncodingParams& params, std::size_t target,
                           std::span<const double> dloss_drow,
                           std::span<double> grad_row);

}  // namespace ordenc::learned
