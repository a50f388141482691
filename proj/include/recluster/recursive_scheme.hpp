#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "recluster/ingest.hpp"
#include "recluster/partition_backends.hpp"
#include "recluster/sg_smoothing.hpp"

namespace recluster {

/// What the minimum-element guard measures on a node's histogram.
enum class MinElemMode { Points, Bins };

struct RecursionParams {
  SGParams sg;
  DecisionPolicy decision = DecisionPolicy::Persistence;
  BackendConfig backend;
  int n_iter = 10;
  int min_n_elem = 20;
  MinElemMode min_elem_mode = MinElemMode::Points;
  int max_depth = 6;

  void validate() const;
};

/// One node of a recursive division. A node with no children is a final cluster.
struct ClusterTree {
  std::vector<double> borders;  // split borders of this node, sorted
  std::vector<ClusterTree> children;
  int depth = 0;
  std::size_t n_points = 0;
  double lo = 0.0;  // histogram range of the node
  double hi = 0.0;
  int n_clust = 1;  // cluster count decided at this node
  SmoothingTrace trace;
  std::vector<double> run_inertias;  // best-of-N inertias when the node split
  std::vector<std::string> warnings;

  bool is_leaf() const noexcept { return children.empty(); }
  std::size_t leaf_count() const;

  bool operator==(const ClusterTree&) const = default;
};

struct Partition {
  std::vector<int> labels;
  int n_clusters = 1;
  std::vector<double> borders;
};

ClusterTree recursive_clustering(const Sample& sample, const Histogram& hist,
                                 const RecursionParams& params, std::uint64_t master_seed);

/// All split borders of the tree, sorted.
std::vector<double> tree_to_borders(const ClusterTree& tree);

/// Label = index of the segment containing the value (left-closed, right-open).
Partition assign_labels(const Sample& sample, std::span<const double> borders);

/// Bracket form of the division, e.g. "[3;2]" for a two-way split refined into 3 and 2.
std::string render_brackets(const ClusterTree& tree);

/// A one-level tree for a flat split of `sample` at `borders`.
ClusterTree flat_tree(const Sample& sample, std::span<const double> borders);

}  // namespace recluster
