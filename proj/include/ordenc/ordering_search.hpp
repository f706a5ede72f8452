#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ordenc/label_codec.hpp"

namespace ordenc::ordering {

/// Canonical representative of a rank assignment under the transforms that
/// leave its encoding unchanged. Circular: all rotations (constant angular
/// offset) plus reflection, anchored so the first class sits at angle 0;
/// the result is the lexicographically smaller of the two anchored forms.
/// Linear: the lexicographically smaller of the values and their reflection
/// about the midpoint of the value range.
std::vector<double> canonical_form(std::span<const double> ranks,
                                   codec::Geometry geometry);

/// True when two assignments have the same geometry and equal canonical
/// forms within `tolerance`.
bool equivalent(const codec::RankAssignment& a, const codec::RankAssignment& b,
                double tolerance = 1e-9);

/// Deduplicated set of candidate orderings over a fixed set of available
/// rank positions, one learnable weight per candidate.
class OrderingCandidateSet {
 public:
  const std::vector<codec::RankAssignment>& candidates() const {
    return candidates_;
  }
  const codec::RankAssignment& candidate(std::size_t j) const {
    return candidates_.at(j);
  }
  std::span<const double> positions() const { return positions_; }
  codec::Geometry geometry() const { return geometry_; }
  std::size_t size() const { return candidates_.size(); }

 private:
  friend OrderingCandidateSet enumerate_orderings(std::size_t,
                                                  std::vector<double>,
                                                  codec::Geometry);
  OrderingCandidateSet(std::vector<codec::RankAssignment> candidates,
                       std::vector<double> positions, codec::Geometry geometry)
      : candidates_(std::move(candidates)),
        positions_(std::move(positions)),
        geometry_(geometry) {}

  std::vector<codec::RankAssignment> candidates_;
  std::vector<double> positions_;
  codec::Geometry geometry_;
};

/// All size-K permutations of the available positions, deduplicated under
/// rotation and reflection (circular) or reflection only (linear). The
/// positions are treated as a set and sorted ascending; each surviving
/// candidate is the lexicographically smallest member of its equivalence
/// class, and the output list is ordered by that representative.
OrderingCandidateSet enumerate_orderings(std::size_t num_classes,
                                         std::vector<double> positions,
                                         codec::Geometry geometry);

/// Unconstrained logits, one per candidate ordering; the softmax of the
/// logits weighs the per-ordering losses.
struct OrderingWeights {
  std::vector<double> logits;

  static OrderingWeights uniform(std::size_t num_candidates);
  std::vector<double> weights() const;  // softmax(logits)
};

/// Cross entropy of `prediction` against row `target_class` of each
/// candidate's encoding under `spec`. `prediction` must be a probability
/// vector of length K.
std::vector<double> per_ordering_losses(std::span<const double> prediction,
                                        std::size_t target_class,
                                        const OrderingCandidateSet& candidates,
                                        const codec::DistanceSpec& spec);

/// Softmax-weighted sum of the per-ordering losses.
double weighted_total_loss(std::span<const double> losses,
                           const OrderingWeights& weights);

/// Gradient of weighted_total_loss with respect to the logits:
/// d/dlogit_j = w_j * (loss_j - total).
std::vector<double> weighted_total_loss_logit_grad(
    std::span<const double> losses, const OrderingWeights& weights);

/// Candidate with the largest weight; ties resolve to the lowest index.
const codec::RankAssignment& dominant_ordering(
    const OrderingWeights& weights, const OrderingCandidateSet& candidates);

}  // namespace ordenc::ordering
