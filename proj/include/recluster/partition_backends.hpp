#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "recluster/ingest.hpp"
#include "recluster/rng.hpp"

namespace recluster {

enum class Backend { KMeans, Som };

std::string to_string(Backend b);
Backend parse_backend(const std::string& text);

struct KMeansParams {
  int k = 2;
  int max_iter = 300;
  double rel_tol = 1e-4;
  int n_runs = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SOMParams {
  int k = 2;
  double lr0 = 0.5;
  double lr_decay = 0.93;
  double potential_decay = 0.99;
  int epochs = 50;
  /// Multiplier on the data range squared giving the conscience bias strength.
  double conscience_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FitResult {
  std::vector<double> centroids;  // sorted ascending
  double inertia = 0.0;
  int run_index = 0;
  bool converged = false;
  int iterations = 0;
  /// Inertia after each assignment step (k-means) or each epoch (SOM).
  std::vector<double> inertia_history;
  /// SOM only: wins per unit during the first epoch, in initial unit order.
  std::vector<std::size_t> first_epoch_wins;
  std::vector<std::string> warnings;
};

struct KMeansPPInit {
  std::vector<double> centers;  // in draw order
  bool padded = false;          // fewer distinct values than k
};

/// k-means++ seeding: first center uniform over points, then D^2-weighted draws.
KMeansPPInit kmeanspp_init(const Sample& sample, int k, RngStream& rng);

/// Lloyd iterations from a k-means++ start. Nearest-centroid ties go to the larger centroid.
FitResult kmeans_1d(const Sample& sample, const KMeansParams& params, RngStream& rng);

/// Kohonen units with a conscience bias, started from k-means++ positions.
FitResult som_1d(const Sample& sample, const SOMParams& params, RngStream& rng);

/// Sum over points of the squared distance to the nearest centroid. Centroids must be sorted.
double sum_of_squares(std::span<const double> centroids, const Sample& sample);

/// Index of the nearest sorted centroid; ties go to the larger one.
std::size_t nearest_centroid(std::span<const double> centroids, double x);

/// Midpoints of adjacent centroids. Throws NumericError("degenerate centroids") on duplicates.
std::vector<double> centroids_to_borders(std::span<const double> centroids);

struct BackendConfig {
  Backend backend = Backend::KMeans;
  KMeansParams kmeans;
  SOMParams som;
  bool parallel = true;
};

struct BestClustering {
  FitResult best;
  std::vector<double> borders;
  std::vector<double> run_inertias;  // indexed by run
};

/// Runs the backend n_iter times on streams derive_seed(master_seed, run) and keeps the run
/// with the smallest sum of squares (lowest run index on ties).
BestClustering best_fit(const Sample& sample, int n_clust, int n_iter, const BackendConfig& cfg,
                        std::uint64_t master_seed);

std::vector<double> best_clustering(const Sample& sample, int n_clust, int n_iter,
                                    const BackendConfig& cfg, std::uint64_t master_seed);

/// A single backend run with k overridden by n_clust.
FitResult run_backend(const Sample& sample, int n_clust, const BackendConfig& cfg, RngStream& rng);

}  // namespace recluster
