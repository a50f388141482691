#include "recluster/sg_smoothing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <climits>
#include <cmath>

#include "recluster/error.hpp"

namespace recluster {

void SGParams::validate() const {
  if (w_length < 3 || w_length % 2 == 0) throw ConfigError("w_length must be odd and >= 3");
  if (poly < 0) throw ConfigError("poly must be >= 0");
  if (poly >= w_length) throw ConfigError("underdetermined fit: poly must be < w_length");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(min_prominence >= 0.0 && min_prominence < 1.0)) {
    throw ConfigError("min_prominence must lie in [0, 1)");
  }
}

std::string to_string(DecisionPolicy p) {
  return p == DecisionPolicy::Persistence ? "persistence" : "literal";
}

DecisionPolicy parse_decision_policy(const std::string& text) {
  if (text == "persistence") return DecisionPolicy::Persistence;
  if (text == "literal") return DecisionPolicy::LiteralRatio;
  throw ConfigError("decision policy must be persistence or literal, got '" + text + "'");
}

std::vector<double> lsq_eval_weights(std::span<const double> positions, int poly, double at) {
  const auto m = static_cast<Eigen::Index>(positions.size());
  if (m == 0) throw ConfigError("least-squares fit needs at least one sample");
  const auto cols = static_cast<Eigen::Index>(std::min<std::size_t>(poly, positions.size() - 1)) + 1;

  double scale = 0.0;
  for (double p : positions) scale = std::max(scale, std::abs(p - at));
  if (scale == 0.0) scale = 1.0;

  Eigen::MatrixXd design(m, cols);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double x = (positions[static_cast<std::size_t>(r)] - at) / scale;
    double xp = 1.0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      design(r, c) = xp;
      xp *= x;
    }
  }

  // Fitted value at `at` is beta_0 = e0^T R^-1 Q^T f, so the weights are Q R^-T e0.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(cols, cols);
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(cols);
  e0(0) = 1.0;
  const Eigen::VectorXd y = r.triangularView<Eigen::Upper>().transpose().solve(e0);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, cols);
  const Eigen::VectorXd w = q * y;
  return {w.data(), w.data() + w.size()};
}

std::vector<double> sg_coefficients(int w_length, int poly) {
  if (w_length < 1 || w_length % 2 == 0) throw ConfigError("w_length must be odd");
  if (poly < 0) throw ConfigError("poly must be >= 0");
  if (poly >= w_length) throw ConfigError("underdetermined fit: poly must be < w_length");
  const int half = w_length / 2;
  std::vector<double> pos;
  for (int i = -half; i <= half; ++i) pos.push_back(i);
  auto w = lsq_eval_weights(pos, poly, 0.0);
  for (int i = 0; i < half; ++i) {
    const double avg = 0.5 * (w[i] + w[w_length - 1 - i]);
    w[i] = w[w_length - 1 - i] = avg;
  }
  return w;
}

std::vector<double> sg_filter(std::span<const double> values, const SGParams& params) {
  params.validate();
  const auto n = static_cast<long>(values.size());
  std::vector<double> out(values.size());
  if (n == 0) return out;

  const long half = params.w_length / 2;
  const auto central = n >= params.w_length ? sg_coefficients(params.w_length, params.poly)
                                            : std::vector<double>{};

  for (long k = 0; k < n; ++k) {
    const long lo = std::max(0L, k - half);
    const long hi = std::min(n - 1, k + half);
    if (hi - lo + 1 == params.w_length) {
      double acc = 0.0;
      for (long i = lo; i <= hi; ++i) acc += central[static_cast<std::size_t>(i - lo)] * values[i];
      out[k] = acc;
      continue;
    }
    std::vector<double> pos;
    for (long i = lo; i <= hi; ++i) pos.push_back(static_cast<double>(i));
    const auto w = lsq_eval_weights(pos, params.poly, static_cast<double>(k));
    double acc = 0.0;
    for (long i = lo; i <= hi; ++i) acc += w[static_cast<std::size_t>(i - lo)] * values[i];
    out[k] = acc;
  }
  return out;
}

int count_hills(std::span<const double> values, double min_relative_prominence) {
  const std::size_t n = values.size();
  if (n == 0) return 0;
  const double vmax = *std::max_element(values.begin(), values.end());
  const double threshold = min_relative_prominence * vmax;

  int hills = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[j + 1] == values[i]) ++j;
    const double h = values[i];
    const bool left_ok = i == 0 || values[i - 1] < h;
    const bool right_ok = j == n - 1 || values[j + 1] < h;
    if (left_ok && right_ok) {
      if (min_relative_prominence <= 0.0) {
        ++hills;
      } else {
        // Prominence: height above the higher of the two lowest points reached before
        // climbing above h on each side. A missing side does not constrain the base.
        std::optional<double> left_min;
        std::optional<double> right_min;
        if (i > 0) {
          double m = h;
          for (std::size_t k = i; k-- > 0 && values[k] <= h;) m = std::min(m, values[k]);
          left_min = m;
        }
        if (j + 1 < n) {
          double m = h;
          for (std::size_t k = j + 1; k < n && values[k] <= h; ++k) m = std::min(m, values[k]);
          right_min = m;
        }
        double base = 0.0;
        if (left_min && right_min) base = std::max(*left_min, *right_min);
        else if (left_min) base = *left_min;
        else if (right_min) base = *right_min;
        if (h - base >= threshold && h - base > 0.0) ++hills;
      }
    }
    i = j + 1;
  }
  if (min_relative_prominence > 0.0) hills = std::max(hills, 1);
  return hills;
}

std::size_t clamp_negatives(std::vector<double>& values) {
  std::size_t clamped = 0;
  for (double& v : values) {
    if (v < 0.0) {
      v = 0.0;
      ++clamped;
    }
  }
  return clamped;
}

SmoothedHistogram smooth_histogram(const Histogram& hist, const SGParams& params) {
  params.validate();
  std::vector<double> raw(hist.counts().begin(), hist.counts().end());
  SmoothedHistogram out;
  out.edges.assign(hist.edges().begin(), hist.edges().end());
  out.values = sg_filter(raw, params);
  out.clamped_negatives = clamp_negatives(out.values);
  return out;
}

int cluster_count_from_trace(const SmoothingTrace& trace, DecisionPolicy policy,
                             std::size_t n_buckets) {
  if (policy == DecisionPolicy::LiteralRatio) {
    if (!trace.pos_1) return 1;
    const double p2 = trace.pos_2 ? *trace.pos_2 : static_cast<double>(INT_MAX);
    const double p3 = trace.pos_3 ? *trace.pos_3 : static_cast<double>(INT_MAX);
    const double ratio = p3 == 0.0 ? HUGE_VAL : p2 / p3;
    return ratio < static_cast<double>(n_buckets) ? 2 : 3;
  }

  if (!trace.pos_2 && !trace.pos_3) return 1;
  const int end = trace.iterations_run;
  const int p2 = trace.pos_2.value_or(end);
  const int p1 = trace.pos_1.value_or(end);
  if (trace.pos_3 && (p2 - *trace.pos_3) >= (p1 - p2)) return 3;
  return 2;
}

ClusterCountDecision decide_cluster_count(const Histogram& hist, const SGParams& params,
                                          DecisionPolicy policy, bool keep_passes) {
  params.validate();
  ClusterCountDecision out;
  auto& trace = out.trace;
  std::vector<double> current(hist.counts().begin(), hist.counts().end());

  for (int iter = 0; iter < params.max_iter; ++iter) {
    current = sg_filter(current, params);
    trace.clamped_negatives += clamp_negatives(current);
    const int hills = count_hills(current, params.min_prominence);
    trace.hills_per_iteration.push_back(hills);
    if (hills == 1 && !trace.pos_1) trace.pos_1 = iter;
    if (hills == 2 && !trace.pos_2) trace.pos_2 = iter;
    if (hills == 3 && !trace.pos_3) trace.pos_3 = iter;
    trace.iterations_run = iter + 1;
    trace.final_hills = hills;
    if (keep_passes) out.passes.push_back(current);
    if (hills <= 1) break;
  }

  out.n_clust = cluster_count_from_trace(trace, policy, hist.n_buckets());
  return out;
}

}  // namespace recluster
