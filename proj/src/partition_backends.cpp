#include "recluster/partition_backends.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "recluster/error.hpp"

namespace recluster {

std::string to_string(Backend b) { return b == Backend::KMeans ? "kmeans" : "som"; }

Backend parse_backend(const std::string& text) {
  if (text == "kmeans") return Backend::KMeans;
  if (text == "som") return Backend::Som;
  throw ConfigError("backend must be kmeans or som, got '" + text + "'");
}

void KMeansParams::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(rel_tol > 0)) throw ConfigError("rel_tol must be > 0");
  if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
}

void SOMParams::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(lr0 > 0 && lr0 <= 1)) throw ConfigError("lr0 must lie in (0, 1]");
  if (!(lr_decay > 0 && lr_decay < 1)) throw ConfigError("lr_decay must lie in (0, 1)");
  if (!(potential_decay > 0 && potential_decay <= 1)) {
    throw ConfigError("potential_decay must lie in (0, 1]");
  }
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(conscience_scale >= 0)) throw ConfigError("conscience_scale must be >= 0");
}

std::size_t nearest_centroid(std::span<const double> centroids, double x) {
  const auto it = std::lower_bound(centroids.begin(), centroids.end(), x);
  if (it == centroids.begin()) return 0;
  if (it == centroids.end()) return centroids.size() - 1;
  const auto hi = static_cast<std::size_t>(it - centroids.begin());
  // Same midpoint expression as centroids_to_borders, so border labels and nearest-centroid
  // labels agree to the last bit.
  return x >= 0.5 * (centroids[hi - 1] + centroids[hi]) ? hi : hi - 1;
}

double sum_of_squares(std::span<const double> centroids, const Sample& sample) {
  if (centroids.empty()) throw ConfigError("sum_of_squares needs at least one centroid");
  double total = 0.0;
  for (double x : sample.values()) {
    const double d = x - centroids[nearest_centroid(centroids, x)];
    total += d * d;
  }
  return total;
}

std::vector<double> centroids_to_borders(std::span<const double> centroids) {
  std::vector<double> borders;
  if (centroids.size() < 2) return borders;
  borders.reserve(centroids.size() - 1);
  for (std::size_t i = 1; i < centroids.size(); ++i) {
    if (!(centroids[i] > centroids[i - 1])) {
      throw NumericError("degenerate centroids: adjacent centroids must be distinct and sorted");
    }
    borders.push_back(0.5 * (centroids[i - 1] + centroids[i]));
  }
  return borders;
}

KMeansPPInit kmeanspp_init(const Sample& sample, int k, RngStream& rng) {
  if (k < 1) throw ConfigError("k must be >= 1");
  const auto v = sample.values();
  if (static_cast<std::size_t>(k) > v.size()) throw DataError("k exceeds sample size");

  KMeansPPInit out;
  std::vector<double> distinct(v.begin(), v.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < static_cast<std::size_t>(k)) {
    out.centers = distinct;
    while (out.centers.size() < static_cast<std::size_t>(k)) out.centers.push_back(distinct.back());
    out.padded = true;
    return out;
  }

  out.centers.push_back(v[rng.below(v.size())]);
  std::vector<double> d2(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - out.centers[0];
    d2[i] = d * d;
  }
  while (out.centers.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (double d : d2) total += d;
    const double target = rng.uniform() * total;
    std::size_t pick = v.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      acc += d2[i];
      if (d2[i] > 0.0 && acc > target) {
        pick = i;
        break;
      }
    }
    // Rounding can leave `pick` on a zero-weight point; walk back to the last positive one.
    while (d2[pick] == 0.0 && pick > 0) --pick;
    const double c = v[pick];
    out.centers.push_back(c);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[i] - c;
      d2[i] = std::min(d2[i], d * d);
    }
  }
  return out;
}

namespace {

struct Assignment {
  std::vector<std::size_t> label;
  std::vector<std::size_t> size;
  double inertia = 0.0;
};

Assignment assign(std::span<const double> data, std::span<const double> sorted_centers) {
  Assignment a;
  a.label.resize(data.size());
  a.size.assign(sorted_centers.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto j = nearest_centroid(sorted_centers, data[i]);
    a.label[i] = j;
    a.size[j] += 1;
    const double d = data[i] - sorted_centers[j];
    a.inertia += d * d;
  }
  return a;
}

}  // namespace

FitResult kmeans_1d(const Sample& sample, const KMeansParams& params, RngStream& rng) {
  params.validate();
  const auto data = sample.values();
  auto init = kmeanspp_init(sample, params.k, rng);

  FitResult fit;
  if (init.padded) fit.warnings.push_back("k-means++: fewer distinct values than k, centers padded");
  std::vector<double> centers = std::move(init.centers);
  std::sort(centers.begin(), centers.end());

  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < params.max_iter; ++iter) {
    auto a = assign(data, centers);

    // Reseed empty clusters at the point farthest from its current centroid.
    for (std::size_t guard = 0; guard < centers.size(); ++guard) {
      const auto empty = std::find(a.size.begin(), a.size.end(), 0);
      if (empty == a.size.end()) break;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double d = std::abs(data[i] - centers[a.label[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d <= 0.0) {
        fit.warnings.push_back("k-means: empty cluster could not be reseeded");
        break;
      }
      centers[static_cast<std::size_t>(empty - a.size.begin())] = data[far];
      std::sort(centers.begin(), centers.end());
      a = assign(data, centers);
    }

    fit.inertia_history.push_back(a.inertia);
    fit.iterations = iter + 1;
    if (a.inertia == 0.0 ||
        (std::isfinite(previous) && previous - a.inertia < params.rel_tol * previous)) {
      fit.converged = true;
      break;
    }
    previous = a.inertia;

    std::vector<double> sum(centers.size(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) sum[a.label[i]] += data[i];
    for (std::size_t j = 0; j < centers.size(); ++j) {
      if (a.size[j] > 0) centers[j] = sum[j] / static_cast<double>(a.size[j]);
    }
    std::sort(centers.begin(), centers.end());
  }

  fit.centroids = std::move(centers);
  fit.inertia = sum_of_squares(fit.centroids, sample);
  return fit;
}

FitResult som_1d(const Sample& sample, const SOMParams& params, RngStream& rng) {
  params.validate();
  const auto data = sample.values();
  auto init = kmeanspp_init(sample, params.k, rng);

  FitResult fit;
  if (init.padded) fit.warnings.push_back("k-means++: fewer distinct values than k, centers padded");
  std::vector<double> units = std::move(init.centers);
  const auto k = units.size();
  const double fair = 1.0 / static_cast<double>(k);
  const double range = sample.max() - sample.min();
  const double gamma = params.conscience_scale * range * range;
  std::vector<double> win_fraction(k, fair);

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto sorted_inertia = [&] {
    std::vector<double> s(units);
    std::sort(s.begin(), s.end());
    return sum_of_squares(s, sample);
  };

  double lr = params.lr0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (const auto idx : order) {
      const double x = data[idx];
      std::size_t winner = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double d = x - units[j];
        const double biased = d * d + gamma * (win_fraction[j] - fair);
        if (biased < best) {
          best = biased;
          winner = j;
        }
      }
      for (std::size_t j = 0; j < k; ++j) {
        win_fraction[j] = win_fraction[j] * params.potential_decay +
                          (j == winner ? 1.0 - params.potential_decay : 0.0);
      }
      units[winner] += lr * (x - units[winner]);
      if (epoch == 0) {
        if (fit.first_epoch_wins.empty()) fit.first_epoch_wins.assign(k, 0);
        fit.first_epoch_wins[winner] += 1;
      }
    }
    lr *= params.lr_decay;
    fit.inertia_history.push_back(sorted_inertia());
    fit.iterations = epoch + 1;
  }

  std::sort(units.begin(), units.end());
  fit.centroids = std::move(units);
  fit.inertia = sum_of_squares(fit.centroids, sample);
  fit.converged = true;
  return fit;
}

FitResult run_backend(const Sample& sample, int n_clust, const BackendConfig& cfg,
                      RngStream& rng) {
  if (cfg.backend == Backend::KMeans) {
    auto p = cfg.kmeans;
    p.k = n_clust;
    return kmeans_1d(sample, p, rng);
  }
  auto p = cfg.som;
  p.k = n_clust;
  return som_1d(sample, p, rng);
}

BestClustering best_fit(const Sample& sample, int n_clust, int n_iter, const BackendConfig& cfg,
                        std::uint64_t master_seed) {
  if (n_iter < 1) throw ConfigError("number of runs must be >= 1");
  if (n_clust < 1) throw ConfigError("n_clust must be >= 1");
  if (static_cast<std::size_t>(n_clust) > sample.size()) throw DataError("k exceeds sample size");

  auto one_run = [&](int run) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(run));
    auto fit = run_backend(sample, n_clust, cfg, rng);
    fit.run_index = run;
    return fit;
  };

  std::vector<FitResult> runs;
  runs.reserve(static_cast<std::size_t>(n_iter));
  if (cfg.parallel && n_iter > 1) {
    std::vector<std::future<FitResult>> pending;
    pending.reserve(static_cast<std::size_t>(n_iter));
    for (int run = 0; run < n_iter; ++run) {
      pending.push_back(std::async(std::launch::async, one_run, run));
    }
    for (auto& f : pending) runs.push_back(f.get());
  } else {
    for (int run = 0; run < n_iter; ++run) runs.push_back(one_run(run));
  }

  BestClustering out;
  std::size_t best = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    out.run_inertias.push_back(runs[r].inertia);
    if (runs[r].inertia < runs[best].inertia) best = r;
  }
  out.best = std::move(runs[best]);
  out.borders = centroids_to_borders(out.best.centroids);
  return out;
}

std::vector<double> best_clustering(const Sample& sample, int n_clust, int n_iter,
                                    const BackendConfig& cfg, std::uint64_t master_seed) {
  return best_fit(sample, n_clust, n_iter, cfg, master_seed).borders;
}

}  // namespace recluster
