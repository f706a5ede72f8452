#include "ordenc/label_codec.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ordenc/numeric.hpp"
#include "ordenc/textio.hpp"

namespace ordenc::codec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRowSumTolerance = 1e-9;

void check_scale(double scale) {
  if (std::isnan(scale) || scale <= 0.0) {
    throw std::invalid_argument(
        "DistanceSpec: scale must be positive or +infinity");
  }
}

}  // namespace

std::string geometry_name(Geometry g) {
  return g == Geometry::linear ? "linear" : "circular";
}

Geometry parse_geometry(std::string_view name) {
  if (name == "linear") return Geometry::linear;
  if (name == "circular") return Geometry::circular;
  throw std::invalid_argument("unknown geometry: '" + std::string(name) + "'");
}

DistanceSpec DistanceSpec::make_linear(double scale) {
  check_scale(scale);
  return DistanceSpec{Geometry::linear, scale};
}

DistanceSpec DistanceSpec::make_circular(double scale) {
  check_scale(scale);
  return DistanceSpec{Geometry::circular, scale};
}

RankAssignment::RankAssignment(std::vector<double> ranks, Geometry geometry)
    : ranks_(std::move(ranks)), geometry_(geometry) {
  if (ranks_.size() < 2) {
    throw std::invalid_argument("RankAssignment: need at least 2 classes");
  }
  for (const double r : ranks_) {
    if (!std::isfinite(r)) {
      throw std::invalid_argument("RankAssignment: ranks must be finite");
    }
    if (geometry_ == Geometry::circular && (r < 0.0 || r >= kTwoPi)) {
      throw std::invalid_argument(
          "RankAssignment: circular ranks must lie in [0, 2*pi)");
    }
  }
  for (std::size_t i = 0; i < ranks_.size(); ++i) {
    for (std::size_t j = i + 1; j < ranks_.size(); ++j) {
      if (ranks_[i] == ranks_[j]) {
        throw std::invalid_argument(
            "RankAssignment: duplicate rank value " + textio::fmt(ranks_[i]));
      }
    }
  }
}

RankAssignment RankAssignment::equally_spaced(std::size_t num_classes,
                                              Geometry geometry) {
  if (num_classes < 2) {
    throw std::invalid_argument("equally_spaced: need at least 2 classes");
  }
  std::vector<double> ranks(num_classes);
  for (std::size_t i = 0; i < num_classes; ++i) {
    ranks[i] = geometry == Geometry::circular
                   ? kTwoPi * static_cast<double>(i) /
                         static_cast<double>(num_classes)
                   : static_cast<double>(i);
  }
  return RankAssignment(std::move(ranks), geometry);
}

LabelMatrix::LabelMatrix(std::size_t num_classes, std::vector<double> entries)
    : k_(num_classes), entries_(std::move(entries)) {
  if (k_ < 2 || entries_.size() != k_ * k_) {
    throw std::invalid_argument("LabelMatrix: bad dimensions");
  }
  for (std::size_t t = 0; t < k_; ++t) {
    double row_sum = 0.0;
    for (std::size_t i = 0; i < k_; ++i) {
      const double y = entries_[t * k_ + i];
      if (!(y >= 0.0 && y <= 1.0)) {
        throw std::invalid_argument("LabelMatrix: entry outside [0, 1]");
      }
      row_sum += y;
    }
    if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
      throw std::invalid_argument("LabelMatrix: row " + std::to_string(t) +
                                  " sums to " + textio::fmt(row_sum));
    }
  }
}

std::span<const double> LabelMatrix::row(std::size_t target) const {
  if (target >= k_) {
    throw std::out_of_range("LabelMatrix: row index out of range");
  }
  return std::span<const double>(entries_).subspan(target * k_, k_);
}

std::string LabelMatrix::to_text() const {
  std::string out;
  for (std::size_t t = 0; t < k_; ++t) {
    out += textio::join(row(t), ' ');
    out.push_back('\n');
  }
  return out;
}

LabelMatrix LabelMatrix::from_text(const std::string& text) {
  std::vector<double> entries;
  std::size_t rows = 0;
  std::size_t cols = 0;
  for (const auto line : textio::split(text, '\n')) {
    const auto tokens = textio::split(textio::trim(line), ' ');
    if (tokens.empty()) continue;
    if (rows == 0) {
      cols = tokens.size();
    } else if (tokens.size() != cols) {
      throw std::invalid_argument("LabelMatrix: ragged row in matrix text");
    }
    for (const auto tok : tokens) {
      entries.push_back(textio::parse_double(tok));
    }
    ++rows;
  }
  if (rows != cols) {
    throw std::invalid_argument("LabelMatrix: matrix text is not square");
  }
  return LabelMatrix(rows, std::move(entries));
}

LabelMatrix encode_onehot(std::size_t num_classes) {
  if (num_classes < 2) {
    throw std::invalid_argument("encode_onehot: need at least 2 classes");
  }
  std::vector<double> entries(num_classes * num_classes, 0.0);
  for (std::size_t t = 0; t < num_classes; ++t) {
    entries[t * num_classes + t] = 1.0;
  }
  return LabelMatrix(num_classes, std::move(entries));
}

double pairwise_distance(double rank_a, double rank_b,
                         const DistanceSpec& spec) {
  for (const double r : {rank_a, rank_b}) {
    if (std::isnan(r) || std::isinf(r) || r < 0.0) {
      throw std::domain_error(
          "pairwise_distance: ranks must be finite and non-negative");
    }
    if (spec.geometry == Geometry::circular && r >= kTwoPi) {
      throw std::domain_error(
          "pairwise_distance: circular ranks must lie in [0, 2*pi)");
    }
  }
  if (rank_a == rank_b) return 0.0;
  double separation = std::abs(rank_b - rank_a);
  if (spec.geometry == Geometry::circular) {
    separation = std::min(separation, kTwoPi - separation);
  }
  if (std::isinf(spec.scale)) {
    return std::numeric_limits<double>::infinity();
  }
  const double scaled = spec.scale * separation;
  return scaled * scaled;
}

LabelMatrix encode_sord(const RankAssignment& ranks, const DistanceSpec& spec) {
  if (ranks.geometry() != spec.geometry) {
    throw std::invalid_argument(
        "encode_sord: rank geometry does not match distance spec");
  }
  const std::size_t k = ranks.num_classes();
  std::vector<double> entries(k * k, 0.0);
  if (std::isinf(spec.scale)) {
    // one-hot limit handled as an exact branch
    for (std::size_t t = 0; t < k; ++t) {
      entries[t * k + t] = 1.0;
    }
    return LabelMatrix(k, std::move(entries));
  }
  std::vector<double> scores(k);
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      scores[i] = -pairwise_distance(ranks.rank(t), ranks.rank(i), spec);
    }
    numeric::softmax(scores, std::span<double>(entries).subspan(t * k, k));
  }
  return LabelMatrix(k, std::move(entries));
}

}  // namespace ordenc::codec
