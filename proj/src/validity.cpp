#include "recluster/validity.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "recluster/error.hpp"

namespace recluster {

namespace {

constexpr std::uint64_t choose2(std::uint64_t x) noexcept { return x < 2 ? 0 : x * (x - 1) / 2; }

std::vector<std::uint32_t> densify(std::span<const int> labels, std::size_t& n_groups) {
  std::unordered_map<int, std::uint32_t> index;
  std::vector<std::uint32_t> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = index.try_emplace(l, static_cast<std::uint32_t>(index.size()));
    out.push_back(it->second);
  }
  n_groups = index.size();
  return out;
}

}  // namespace

PairCounts pair_counts(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("partitions have different lengths");
  std::size_t ka = 0;
  std::size_t kb = 0;
  const auto da = densify(a, ka);
  const auto db = densify(b, kb);

  std::vector<std::uint64_t> size_a(ka, 0);
  std::vector<std::uint64_t> size_b(kb, 0);
  std::unordered_map<std::uint64_t, std::uint64_t> cells;
  for (std::size_t i = 0; i < da.size(); ++i) {
    ++size_a[da[i]];
    ++size_b[db[i]];
    ++cells[(static_cast<std::uint64_t>(da[i]) << 32) | db[i]];
  }

  std::uint64_t together_both = 0;
  for (const auto& [key, n] : cells) together_both += choose2(n);
  std::uint64_t together_a = 0;
  for (auto n : size_a) together_a += choose2(n);
  std::uint64_t together_b = 0;
  for (auto n : size_b) together_b += choose2(n);

  PairCounts pc;
  pc.n11 = together_both;
  pc.n10 = together_a - together_both;
  pc.n01 = together_b - together_both;
  pc.n00 = choose2(a.size()) - pc.n11 - pc.n10 - pc.n01;
  return pc;
}

PairCounts pair_counts(const Partition& a, const Partition& b) {
  return pair_counts(a.labels, b.labels);
}

SimilarityReport similarity_report(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("partitions have different lengths");
  if (a.size() < 2) throw DataError("similarity needs at least two points");

  SimilarityReport r;
  r.pairs = pair_counts(a, b);
  const auto& p = r.pairs;
  const long double total = static_cast<long double>(p.total());
  const long double n11 = p.n11;
  const long double sum_a = static_cast<long double>(p.n11 + p.n10);
  const long double sum_b = static_cast<long double>(p.n11 + p.n01);

  r.rand = static_cast<double>((n11 + static_cast<long double>(p.n00)) / total);
  r.arabie_boorman = 1.0 - r.rand;
  r.hubert = 2.0 * r.rand - 1.0;

  const long double expected = sum_a * sum_b / total;
  const long double maximum = 0.5L * (sum_a + sum_b);
  r.adjusted_rand = maximum == expected ? 1.0
                                        : static_cast<double>((n11 - expected) / (maximum - expected));

  if (sum_a == 0 || sum_b == 0) {
    r.fowlkes_mallows = 0.0;
    r.warnings.push_back("Fowlkes-Mallows undefined (a partition has only singletons); set to 0");
  } else {
    r.fowlkes_mallows = static_cast<double>(n11 / std::sqrt(sum_a * sum_b));
  }

  const auto jd = p.n11 + p.n10 + p.n01;
  if (jd == 0) {
    r.jaccard = 0.0;
    r.warnings.push_back("Jaccard undefined (no pair is together in either partition); set to 0");
  } else {
    r.jaccard = static_cast<double>(n11 / static_cast<long double>(jd));
  }
  return r;
}

SimilarityReport similarity_report(const Partition& a, const Partition& b) {
  return similarity_report(a.labels, b.labels);
}

std::vector<ElbowPoint> elbow_curve(const Sample& sample, int k_min, int k_max,
                                    const BackendConfig& backend, int n_runs,
                                    std::uint64_t master_seed) {
  if (k_min < 1 || k_max < k_min) throw ConfigError("elbow range must satisfy 1 <= kmin <= kmax");
  if (static_cast<std::size_t>(k_max) > sample.size()) {
    throw ConfigError("elbow kmax exceeds sample size");
  }
  std::vector<ElbowPoint> out;
  for (int k = k_min; k <= k_max; ++k) {
    const auto fit = best_fit(sample, k, n_runs, backend,
                              derive_seed(master_seed, static_cast<std::uint64_t>(k)));
    out.push_back({k, fit.best.inertia});
  }
  return out;
}

SilhouetteResult silhouette(const Sample& sample, const Partition& partition) {
  const auto v = sample.values();
  if (partition.labels.size() != v.size()) throw DataError("partition does not match the sample");

  std::size_t n_groups = 0;
  const auto dense = densify(partition.labels, n_groups);
  if (n_groups < 2) throw DataError("silhouette undefined for one cluster");

  std::vector<std::vector<double>> members(n_groups);
  for (std::size_t i = 0; i < v.size(); ++i) members[dense[i]].push_back(v[i]);
  std::vector<std::vector<double>> prefix(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    std::sort(members[g].begin(), members[g].end());
    prefix[g].assign(members[g].size() + 1, 0.0);
    for (std::size_t i = 0; i < members[g].size(); ++i) {
      prefix[g][i + 1] = prefix[g][i] + members[g][i];
    }
  }

  // Sum of |x - y| over y in group g.
  auto abs_sum = [&](std::size_t g, double x) {
    const auto& m = members[g];
    const auto below = static_cast<std::size_t>(std::lower_bound(m.begin(), m.end(), x) - m.begin());
    const double sum_below = prefix[g][below];
    const double sum_above = prefix[g].back() - sum_below;
    const auto above = m.size() - below;
    return std::max(0.0, (x * static_cast<double>(below) - sum_below) +
                             (sum_above - x * static_cast<double>(above)));
  };

  SilhouetteResult out;
  out.scores.resize(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto own = dense[i];
    const auto own_size = members[own].size();
    double s = 0.0;
    if (own_size > 1) {
      const double a = abs_sum(own, v[i]) / static_cast<double>(own_size - 1);
      double b = HUGE_VAL;
      for (std::size_t g = 0; g < n_groups; ++g) {
        if (g == own) continue;
        b = std::min(b, abs_sum(g, v[i]) / static_cast<double>(members[g].size()));
      }
      const double denom = std::max(a, b);
      s = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    out.scores[i] = s;
    total += s;
  }
  out.mean = total / static_cast<double>(v.size());
  return out;
}

}  // namespace recluster
