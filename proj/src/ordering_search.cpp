#include "ordenc/ordering_search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "ordenc/numeric.hpp"

namespace ordenc::ordering {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDedupTolerance = 1e-9;

double wrap_angle(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

// -1 / 0 / +1 lexicographic comparison with a per-element tolerance.
int lex_compare(std::span<const double> a, std::span<const double> b,
                double tolerance) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) <= tolerance) continue;
    return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

// Enumerates size-K permutations of {0..M-1} in lexicographic order.
void for_each_permutation(std::size_t m, std::size_t k,
                          const std::function<void(std::span<const std::size_t>)>& visit) {
  std::vector<std::size_t> chosen;
  std::vector<bool> used(m, false);
  chosen.reserve(k);
  const auto recurse = [&](auto&& self) -> void {
    if (chosen.size() == k) {
      visit(chosen);
      return;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (used[i]) continue;
      used[i] = true;
      chosen.push_back(i);
      self(self);
      chosen.pop_back();
      used[i] = false;
    }
  };
  recurse(recurse);
}

}  // namespace

std::vector<double> canonical_form(std::span<const double> ranks,
                                   codec::Geometry geometry) {
  if (ranks.empty()) {
    throw std::invalid_argument("canonical_form: empty rank list");
  }
  std::vector<double> direct(ranks.size());
  std::vector<double> reflected(ranks.size());
  if (geometry == codec::Geometry::circular) {
    // rotate so the first class sits at 0; same for the reflected copy
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      direct[i] = wrap_angle(ranks[i] - ranks[0]);
      reflected[i] = wrap_angle(ranks[0] - ranks[i]);
    }
  } else {
    const auto [lo, hi] = std::minmax_element(ranks.begin(), ranks.end());
    const double pivot = *lo + *hi;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      direct[i] = ranks[i];
      reflected[i] = pivot - ranks[i];
    }
  }
  return lex_compare(direct, reflected, 0.0) <= 0 ? direct : reflected;
}

bool equivalent(const codec::RankAssignment& a, const codec::RankAssignment& b,
                double tolerance) {
  if (a.geometry() != b.geometry() || a.num_classes() != b.num_classes()) {
    return false;
  }
  const auto ca = canonical_form(a.ranks(), a.geometry());
  const auto cb = canonical_form(b.ranks(), b.geometry());
  return lex_compare(ca, cb, tolerance) == 0;
}

OrderingCandidateSet enumerate_orderings(std::size_t num_classes,
                                         std::vector<double> positions,
                                         codec::Geometry geometry) {
  if (num_classes < 2) {
    throw std::invalid_argument("enumerate_orderings: need at least 2 classes");
  }
  if (positions.size() < num_classes) {
    throw std::invalid_argument(
        "enumerate_orderings: infeasible, fewer positions than classes");
  }
  for (const double p : positions) {
    if (!std::isfinite(p)) {
      throw std::invalid_argument(
          "enumerate_orderings: positions must be finite");
    }
    if (geometry == codec::Geometry::circular && (p < 0.0 || p >= kTwoPi)) {
      throw std::invalid_argument(
          "enumerate_orderings: circular positions must lie in [0, 2*pi)");
    }
  }
  std::sort(positions.begin(), positions.end());
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (positions[i] == positions[i - 1]) {
      throw std::invalid_argument(
          "enumerate_orderings: positions must be distinct");
    }
  }

  std::vector<std::vector<double>> canon_seen;
  std::vector<codec::RankAssignment> candidates;
  std::vector<double> tuple(num_classes);
  for_each_permutation(
      positions.size(), num_classes,
      [&](std::span<const std::size_t> indices) {
        for (std::size_t i = 0; i < num_classes; ++i) {
          tuple[i] = positions[indices[i]];
        }
        auto canon = canonical_form(tuple, geometry);
        for (const auto& seen : canon_seen) {
          if (lex_compare(seen, canon, kDedupTolerance) == 0) return;
        }
        canon_seen.push_back(std::move(canon));
        candidates.emplace_back(tuple, geometry);
      });
  return OrderingCandidateSet(std::move(candidates), std::move(positions),
                              geometry);
}

OrderingWeights OrderingWeights::uniform(std::size_t num_candidates) {
  return OrderingWeights{std::vector<double>(num_candidates, 0.0)};
}

std::vector<double> OrderingWeights::weights() const {
  return numeric::softmax(logits);
}

std::vector<double> per_ordering_losses(std::span<const double> prediction,
                                        std::size_t target_class,
                                        const OrderingCandidateSet& candidates,
                                        const codec::DistanceSpec& spec) {
  if (target_class >= prediction.size()) {
    throw std::out_of_range("per_ordering_losses: target class out of range");
  }
  double sum = 0.0;
  for (const double p : prediction) {
    if (!(p >= 0.0)) {
      throw std::domain_error(
          "per_ordering_losses: prediction entries must be non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument(
        "per_ordering_losses: prediction does not sum to 1");
  }
  std::vector<double> losses;
  losses.reserve(candidates.size());
  for (const auto& candidate : candidates.candidates()) {
    if (candidate.num_classes() != prediction.size()) {
      throw std::invalid_argument(
          "per_ordering_losses: prediction length does not match classes");
    }
    const auto encoded = codec::encode_sord(candidate, spec);
    losses.push_back(
        numeric::soft_cross_entropy(prediction, encoded.row(target_class)));
  }
  return losses;
}

double weighted_total_loss(std::span<const double> losses,
                           const OrderingWeights& weights) {
  if (losses.size() != weights.logits.size() || losses.empty()) {
    throw std::invalid_argument("weighted_total_loss: length mismatch");
  }
  const auto w = weights.weights();
  double total = 0.0;
  for (std::size_t j = 0; j < losses.size(); ++j) {
    total += w[j] * losses[j];
  }
  return total;
}

std::vector<double> weighted_total_loss_logit_grad(
    std::span<const double> losses, const OrderingWeights& weights) {
  const double total = weighted_total_loss(losses, weights);
  const auto w = weights.weights();
  std::vector<double> grad(losses.size());
  for (std::size_t j = 0; j < losses.size(); ++j) {
    grad[j] = w[j] * (losses[j] - total);
  }
  return grad;
}

const codec::RankAssignment& dominant_ordering(
    const OrderingWeights& weights, const OrderingCandidateSet& candidates) {
  if (weights.logits.size() != candidates.size() || candidates.size() == 0) {
    throw std::invalid_argument("dominant_ordering: size mismatch");
  }
  const auto w = weights.weights();
  return candidates.candidate(numeric::argmax(w));
}

}  // namespace ordenc::ordering
