#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "recluster/ingest.hpp"
#include "recluster/partition_backends.hpp"
#include "recluster/recursive_scheme.hpp"

namespace recluster {

/// Pair-agreement counts of two labelings of the same points.
struct PairCounts {
  std::uint64_t n11 = 0;  // together in both
  std::uint64_t n10 = 0;  // together in the first only
  std::uint64_t n01 = 0;  // together in the second only
  std::uint64_t n00 = 0;  // apart in both

  std::uint64_t total() const noexcept { return n11 + n10 + n01 + n00; }
  bool operator==(const PairCounts&) const = default;
};

/// Rand, adjusted Rand, Fowlkes-Mallows, Jaccard, Arabie-Boorman (1 - R) and Hubert (2R - 1).
struct SimilarityReport {
  double rand = 0.0;
  double adjusted_rand = 0.0;
  double fowlkes_mallows = 0.0;
  double jaccard = 0.0;
  double arabie_boorman = 0.0;
  double hubert = 0.0;
  PairCounts pairs;
  std::vector<std::string> warnings;
};

/// Built from the contingency table; labels may be any integers.
PairCounts pair_counts(std::span<const int> a, std::span<const int> b);
PairCounts pair_counts(const Partition& a, const Partition& b);

SimilarityReport similarity_report(std::span<const int> a, std::span<const int> b);
SimilarityReport similarity_report(const Partition& a, const Partition& b);

struct ElbowPoint {
  int k = 0;
  double inertia = 0.0;
};

/// Best-of-n_runs inertia for each k in [k_min, k_max].
std::vector<ElbowPoint> elbow_curve(const Sample& sample, int k_min, int k_max,
                                    const BackendConfig& backend, int n_runs,
                                    std::uint64_t master_seed);

struct SilhouetteResult {
  double mean = 0.0;
  std::vector<double> scores;  // aligned with sample.values()
};

/// Silhouette with absolute distance. Points in singleton clusters score 0. Throws DataError if
/// fewer than two clusters are non-empty.
SilhouetteResult silhouette(const Sample& sample, const Partition& partition);

}  // namespace recluster
