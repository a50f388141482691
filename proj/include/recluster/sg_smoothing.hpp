#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recluster/ingest.hpp"

namespace recluster {

struct SGParams {
  int w_length = 7;
  int poly = 3;
  int max_iter = 100;
  /// Hills whose prominence is below this fraction of the sequence maximum are ignored when
  /// deciding the cluster count. Zero gives the bare strict-plateau count.
  double min_prominence = 0.05;

  /// Throws ConfigError on any violated constraint.
  void validate() const;
};

/// How the recorded hill-count positions are turned into a cluster count.
enum class DecisionPolicy {
  /// 3 if the 3-hill regime lasts at least as long as the 2-hill regime, else 2.
  Persistence,
  /// pos_2 / pos_3 < n_buckets -> 2, else 3.
  LiteralRatio,
};

std::string to_string(DecisionPolicy p);
DecisionPolicy parse_decision_policy(const std::string& text);

/// First iteration (0-based) at which exactly 1, 2 or 3 hills were seen.
struct SmoothingTrace {
  std::optional<int> pos_1;
  std::optional<int> pos_2;
  std::optional<int> pos_3;
  int iterations_run = 0;
  int final_hills = 0;
  std::size_t clamped_negatives = 0;  // summed over all passes
  std::vector<int> hills_per_iteration;

  bool operator==(const SmoothingTrace&) const = default;
};

struct SmoothedHistogram {
  std::vector<double> edges;
  std::vector<double> values;
  std::size_t clamped_negatives = 0;
};

struct ClusterCountDecision {
  int n_clust = 1;
  SmoothingTrace trace;
  /// Clamped output of every pass, in order. Only filled when requested.
  std::vector<std::vector<double>> passes;
};

/// Least-squares weights that evaluate a degree-`poly` fit at position `at` from samples at
/// `positions`. The degree is capped at positions.size() - 1.
std::vector<double> lsq_eval_weights(std::span<const double> positions, int poly, double at);

/// Central convolution weights c_{-i0..i0}. Throws ConfigError("underdetermined fit") if
/// poly >= w_length, or if w_length is even.
std::vector<double> sg_coefficients(int w_length, int poly);

/// Savitzky-Golay smoothing. Points within i0 of either end are fit on the truncated window
/// that actually exists; the sequence is never padded.
std::vector<double> sg_filter(std::span<const double> values, const SGParams& params);

/// Number of maximal plateaus that are strict local maxima. With min_relative_prominence > 0,
/// plateaus whose topographic prominence is below that fraction of the maximum are skipped;
/// the result is then at least 1 for a non-empty sequence.
int count_hills(std::span<const double> values, double min_relative_prominence = 0.0);

/// Clamps negatives to zero and returns how many were clamped.
std::size_t clamp_negatives(std::vector<double>& values);

SmoothedHistogram smooth_histogram(const Histogram& hist, const SGParams& params);

/// Repeatedly smooths the histogram, tracking when 1, 2 and 3 hills first appear, and stops
/// at one hill or after max_iter passes.
ClusterCountDecision decide_cluster_count(const Histogram& hist, const SGParams& params,
                                          DecisionPolicy policy = DecisionPolicy::Persistence,
                                          bool keep_passes = false);

/// Applies `policy` to an already recorded trace.
int cluster_count_from_trace(const SmoothingTrace& trace, DecisionPolicy policy,
                             std::size_t n_buckets);

}  // namespace recluster
