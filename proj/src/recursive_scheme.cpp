#include "recluster/recursive_scheme.hpp"

#include <algorithm>
#include <sstream>

#include "recluster/error.hpp"

namespace recluster {

void RecursionParams::validate() const {
  sg.validate();
  if (n_iter < 1) throw ConfigError("n_iter must be >= 1");
  if (min_n_elem < 1) throw ConfigError("min_n_elem must be >= 1");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  backend.kmeans.validate();
  backend.som.validate();
}

std::size_t ClusterTree::leaf_count() const {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

namespace {

std::size_t nearest_edge_clamped(std::span<const double> edges, double b) {
  const auto it = std::lower_bound(edges.begin(), edges.end(), b);
  if (it == edges.begin()) return 0;
  if (it == edges.end()) return edges.size() - 1;
  auto idx = static_cast<std::size_t>(it - edges.begin());
  if ((b - edges[idx - 1]) <= (edges[idx] - b)) --idx;
  return idx;
}

std::size_t distinct_count(std::span<const double> sorted) {
  if (sorted.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) n += sorted[i] != sorted[i - 1];
  return n;
}

ClusterTree empty_leaf(const Sample& sample, double at, int depth) {
  ClusterTree leaf;
  leaf.depth = depth;
  leaf.n_points = sample.size();
  leaf.lo = leaf.hi = at;
  leaf.warnings.push_back("sub-range has no histogram bins after snapping; kept as one cluster");
  return leaf;
}

ClusterTree recurse(const Sample& sample, const Histogram& hist, const RecursionParams& params,
                    std::uint64_t seed, int depth) {
  ClusterTree node;
  node.depth = depth;
  node.n_points = sample.size();
  node.lo = hist.lo();
  node.hi = hist.hi();

  const auto decision = decide_cluster_count(hist, params.sg, params.decision);
  node.trace = decision.trace;
  node.n_clust = decision.n_clust;

  const auto guard_size = params.min_elem_mode == MinElemMode::Points
                              ? static_cast<std::size_t>(hist.total())
                              : hist.n_buckets();
  if (node.n_clust == 1 || guard_size < static_cast<std::size_t>(params.min_n_elem) ||
      depth >= params.max_depth) {
    return node;
  }
  if (distinct_count(sample.values()) < static_cast<std::size_t>(node.n_clust)) {
    node.warnings.push_back("fewer distinct values than the decided cluster count; not split");
    return node;
  }

  const auto best = best_fit(sample, node.n_clust, params.n_iter, params.backend, seed);
  node.borders = best.borders;
  node.run_inertias = best.run_inertias;

  const auto edges = hist.edges();
  const auto counts = hist.counts();
  std::vector<std::size_t> cut{0};
  for (double b : node.borders) {
    const auto idx = nearest_edge_clamped(edges, b);
    if (edges[idx] != b) {
      std::ostringstream os;
      os.precision(17);
      os << "border " << b << " snapped to bin edge " << edges[idx];
      node.warnings.push_back(os.str());
    }
    cut.push_back(std::max(idx, cut.back()));
  }
  cut.push_back(hist.n_buckets());

  const auto parts = subdatas(sample, node.borders);
  const std::uint64_t child_master = mix64(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  for (std::size_t i = 0; i + 1 < cut.size(); ++i) {
    const auto start = cut[i];
    const auto stop = cut[i + 1];
    if (stop <= start) {
      node.children.push_back(empty_leaf(parts[i], edges[start], depth + 1));
      continue;
    }
    Histogram sub(std::vector<double>(edges.begin() + start, edges.begin() + stop + 1),
                  std::vector<std::uint64_t>(counts.begin() + start, counts.begin() + stop));
    if (parts[i].empty()) {
      ClusterTree leaf;
      leaf.depth = depth + 1;
      leaf.lo = sub.lo();
      leaf.hi = sub.hi();
      leaf.warnings.push_back("sub-range holds no data points");
      node.children.push_back(std::move(leaf));
      continue;
    }
    node.children.push_back(recurse(parts[i], sub, params, derive_seed(child_master, i), depth + 1));
  }
  return node;
}

void collect_borders(const ClusterTree& t, std::vector<double>& out) {
  out.insert(out.end(), t.borders.begin(), t.borders.end());
  for (const auto& c : t.children) collect_borders(c, out);
}

bool all_leaves(const ClusterTree& t) {
  return std::all_of(t.children.begin(), t.children.end(),
                     [](const ClusterTree& c) { return c.is_leaf(); });
}

std::string inner(const ClusterTree& t) {
  if (all_leaves(t)) return std::to_string(t.children.size());
  std::string s;
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    if (i > 0) s += ';';
    const auto& c = t.children[i];
    if (c.is_leaf()) s += '1';
    else if (all_leaves(c)) s += std::to_string(c.children.size());
    else s += '[' + inner(c) + ']';
  }
  return s;
}

}  // namespace

ClusterTree recursive_clustering(const Sample& sample, const Histogram& hist,
                                 const RecursionParams& params, std::uint64_t master_seed) {
  params.validate();
  if (sample.empty()) throw DataError("cannot cluster an empty sample");
  return recurse(sample, hist, params, master_seed, 0);
}

std::vector<double> tree_to_borders(const ClusterTree& tree) {
  std::vector<double> out;
  collect_borders(tree, out);
  std::sort(out.begin(), out.end());
  return out;
}

Partition assign_labels(const Sample& sample, std::span<const double> borders) {
  if (!std::is_sorted(borders.begin(), borders.end())) throw DataError("borders must be sorted");
  Partition p;
  p.borders.assign(borders.begin(), borders.end());
  p.n_clusters = static_cast<int>(borders.size()) + 1;
  p.labels.reserve(sample.size());
  for (double x : sample.values()) {
    p.labels.push_back(static_cast<int>(std::upper_bound(borders.begin(), borders.end(), x) -
                                        borders.begin()));
  }
  return p;
}

std::string render_brackets(const ClusterTree& tree) {
  if (tree.is_leaf()) return "[1]";
  return '[' + inner(tree) + ']';
}

ClusterTree flat_tree(const Sample& sample, std::span<const double> borders) {
  ClusterTree root;
  root.n_points = sample.size();
  root.lo = sample.empty() ? 0.0 : sample.min();
  root.hi = sample.empty() ? 0.0 : sample.max();
  root.n_clust = static_cast<int>(borders.size()) + 1;
  if (borders.empty()) return root;
  root.borders.assign(borders.begin(), borders.end());
  const auto parts = subdatas(sample, borders);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    ClusterTree leaf;
    leaf.depth = 1;
    leaf.n_points = parts[i].size();
    leaf.lo = i == 0 ? root.lo : borders[i - 1];
    leaf.hi = i + 1 < parts.size() ? borders[i] : root.hi;
    root.children.push_back(std::move(leaf));
  }
  return root;
}

}  // namespace recluster
