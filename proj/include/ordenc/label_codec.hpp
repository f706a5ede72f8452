#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ordenc::codec {

enum class Geometry { linear, circular };

std::string geometry_name(Geometry g);
Geometry parse_geometry(std::string_view name);

/// Distance configuration shared by the fixed encodings: a geometry and the
/// scale factor applied to raw distances before squaring. An infinite scale
/// selects the one-hot branch directly instead of evaluating exp().
struct DistanceSpec {
  Geometry geometry = Geometry::circular;
  double scale = 1.0;

  static DistanceSpec make_linear(double scale);
  static DistanceSpec make_circular(double scale);
};

/// Assignment of one rank position per class. Linear ranks are dimensionless
/// non-negative reals; circular ranks are angles in [0, 2*pi). Ranks must be
/// distinct, otherwise two classes would collapse to the same encoding.
class RankAssignment {
 public:
  RankAssignment(std::vector<double> ranks, Geometry geometry);

  /// Linear: 0, 1, ..., K-1. Circular: 2*pi*i/K.
  static RankAssignment equally_spaced(std::size_t num_classes,
                                       Geometry geometry);

  std::size_t num_classes() const { return ranks_.size(); }
  Geometry geometry() const { return geometry_; }
  std::span<const double> ranks() const { return ranks_; }
  double rank(std::size_t i) const { return ranks_.at(i); }

 private:
  std::vector<double> ranks_;
  Geometry geometry_;
};

/// K x K row-stochastic matrix; row t is the encoded target distribution for
/// ground-truth class t. Construction validates entries in [0, 1] and row
/// sums within 1e-9 of one.
class LabelMatrix {
 public:
  LabelMatrix(std::size_t num_classes, std::vector<double> entries);

  std::size_t num_classes() const { return k_; }
  double operator()(std::size_t target, std::size_t cls) const {
    return entries_[target * k_ + cls];
  }
  std::span<const double> row(std::size_t target) const;
  std::span<const double> entries() const { return entries_; }

  /// Plain-text matrix format: one row per line, space-separated values at
  /// full (round-trip) precision.
  std::string to_text() const;
  static LabelMatrix from_text(const std::string& text);

 private:
  std::size_t k_;
  std::vector<double> entries_;
};

/// Identity encoding: row t has 1 at position t.
LabelMatrix encode_onehot(std::size_t num_classes);

/// Squared scaled distance between two rank positions. Circular ranks take
/// the shorter of the two arcs; ranks must be finite, non-negative, and (for
/// circular geometry) inside [0, 2*pi).
double pairwise_distance(double rank_a, double rank_b,
                         const DistanceSpec& spec);

/// Soft ordinal encoding: row t is the softmax of the negated pairwise
/// distances from class t to every class. The rank geometry must match the
/// spec geometry.
LabelMatrix encode_sord(const RankAssignment& ranks, const DistanceSpec& spec);

}  // namespace ordenc::codec
