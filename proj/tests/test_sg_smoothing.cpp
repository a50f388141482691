#include <doctest.h>

#include <climits>
#include <cmath>

#include "oracles.hpp"
#include "recluster/error.hpp"
#include "recluster/sg_smoothing.hpp"

using namespace recluster;

namespace {

SGParams params(int w, int p) {
  SGParams s;
  s.w_length = w;
  s.poly = p;
  return s;
}

// Counts of a mixture evaluated at bin centres; the range starts off-grid so no two bins
// mirror each other exactly.
Histogram mixture_hist(const std::vector<oracle::Component>& mix, int n_bins, double a, double b) {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  const double w = (b - a) / n_bins;
  for (int i = 0; i <= n_bins; ++i) edges.push_back(a + i * w);
  for (int i = 0; i < n_bins; ++i) {
    counts.push_back(static_cast<std::uint64_t>(
        std::llround(1000.0 * w * oracle::mixture_density(mix, a + (i + 0.5) * w))));
  }
  return Histogram(edges, counts);
}

int opt(const std::optional<int>& p) { return p ? *p : -1; }

void check_trace_matches_oracle(const Histogram& h, const SGParams& sg, const ClusterCountDecision& d) {
  const auto t = oracle::iterate(h.counts(), sg.w_length, sg.poly, sg.max_iter, sg.min_prominence);
  CHECK(d.trace.hills_per_iteration == t.per_iter);
  CHECK(d.trace.iterations_run == t.iterations);
  CHECK(opt(d.trace.pos_1) == t.pos[1]);
  CHECK(opt(d.trace.pos_2) == t.pos[2]);
  CHECK(opt(d.trace.pos_3) == t.pos[3]);
}

}  // namespace

TEST_CASE("sg_coefficients small cases") {
  const auto c3 = sg_coefficients(3, 2);
  REQUIRE(c3.size() == 3);
  CHECK(std::fabs(c3[0]) < 1e-12);
  CHECK(std::fabs(c3[1] - 1.0) < 1e-12);
  CHECK(std::fabs(c3[2]) < 1e-12);

  const auto c5 = sg_coefficients(5, 2);
  const auto ref = oracle::normal_equation_coefficients(5, 2);
  const double exact[] = {-3.0 / 35, 12.0 / 35, 17.0 / 35, 12.0 / 35, -3.0 / 35};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::fabs(c5[i] - static_cast<double>(ref[i])) < 1e-12);
    CHECK(std::fabs(c5[i] - exact[i]) < 1e-12);
  }
}

TEST_CASE("sg_coefficients are symmetric, sum to one and match the oracle") {
  for (int w = 3; w <= 15; w += 2) {
    for (int p = 0; p < w; ++p) {
      CAPTURE(w);
      CAPTURE(p);
      const auto c = sg_coefficients(w, p);
      const auto ref = oracle::sg_coefficients(w, p);
      double sum = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        sum += c[i];
        CHECK(std::fabs(c[i] - c[c.size() - 1 - i]) < 1e-12);
        CHECK(std::fabs(c[i] - static_cast<double>(ref[i])) < 1e-10);
      }
      CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("sg_coefficients rejects invalid designs") {
  CHECK_THROWS_WITH_AS(sg_coefficients(5, 5), doctest::Contains("underdetermined fit"), ConfigError);
  CHECK_THROWS_AS(sg_coefficients(6, 2), ConfigError);
  CHECK_THROWS_AS(sg_filter(std::vector<double>{1, 2, 3}, params(4, 2)), ConfigError);
}

TEST_CASE("sg_filter leaves a constant unchanged") {
  const std::vector<double> v{4, 4, 4, 4, 4};
  for (auto [w, p] : {std::pair{3, 0}, {3, 2}, {5, 2}, {5, 4}, {7, 3}}) {
    for (double y : sg_filter(v, params(w, p))) CHECK(std::fabs(y - 4.0) < 1e-12);
  }
}

TEST_CASE("sg_filter reproduces a cubic including edges") {
  std::vector<double> v;
  for (int x = -10; x <= 10; ++x) v.push_back(double(x) * x * x - 2.0 * x);
  const auto out = sg_filter(v, params(7, 3));
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::fabs(out[i] - v[i]) < 1e-9);
}

TEST_CASE("sg_filter reproduces every polynomial up to its degree") {
  for (int w : {5, 7, 9}) {
    for (int p : {2, 3}) {
      for (int d = 0; d <= p; ++d) {
        std::vector<double> v;
        for (int x = 0; x < 25; ++x) v.push_back(std::pow(0.5 * x - 3.0, d) + 0.25 * x);
        const auto out = sg_filter(v, params(w, p));
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::fabs(out[i] - v[i]) < 1e-9);
      }
    }
  }
}

TEST_CASE("impulse response equals the coefficients") {
  const std::vector<double> v{0, 0, 0, 0, 1, 0, 0, 0, 0};
  const auto out = sg_filter(v, params(5, 2));
  const auto ref = oracle::sg_coefficients(5, 2);
  CHECK(std::fabs(out[4] - 17.0 / 35) < 1e-12);
  CHECK(std::fabs(out[3] - 12.0 / 35) < 1e-12);
  CHECK(std::fabs(out[5] - 12.0 / 35) < 1e-12);
  CHECK(std::fabs(out[2] + 3.0 / 35) < 1e-12);
  CHECK(std::fabs(out[6] + 3.0 / 35) < 1e-12);
  for (int i = 2; i <= 6; ++i) CHECK(std::fabs(out[i] - static_cast<double>(ref[i - 2])) < 1e-12);
}

TEST_CASE("sg_filter matches the per-window oracle on noisy data") {
  const auto draws = oracle::sample_mixture({{1, 0, 5}}, 60, 3);
  for (auto [w, p] : {std::pair{5, 2}, {7, 3}, {9, 2}, {11, 4}}) {
    const auto out = sg_filter(draws.values, params(w, p));
    const auto ref = oracle::sg_filter(draws.values, w, p);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::fabs(out[i] - ref[i]) < 1e-9);
  }
}

TEST_CASE("central-window smoothing never adds energy") {
  // Circular convolution isolates the interior kernel; a gain above one anywhere on the unit
  // circle would show up on some seeded input.
  for (auto [w, p] : {std::pair{5, 2}, {7, 3}, {9, 2}, {9, 4}}) {
    const auto c = sg_coefficients(w, p);
    const int h = w / 2;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto x = oracle::sample_mixture({{1, 0, 1}}, 64, seed).values;
      double ex = 0.0;
      double ey = 0.0;
      for (int i = 0; i < 64; ++i) {
        double y = 0.0;
        for (int k = -h; k <= h; ++k) y += c[static_cast<std::size_t>(k + h)] * x[static_cast<std::size_t>((i + k + 64) % 64)];
        ex += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        ey += y * y;
      }
      CHECK(ey <= ex * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("count_hills on plain sequences") {
  CHECK(count_hills(std::vector<double>{1, 2, 3, 2, 1}) == 1);
  CHECK(count_hills(std::vector<double>{1, 3, 1, 3, 1}) == 2);
  CHECK(count_hills(std::vector<double>{2, 2, 2}) == 1);
  CHECK(count_hills(std::vector<double>{3, 1, 1, 3}) == 2);
  CHECK(count_hills(std::vector<double>{1, 2, 2, 1, 2, 2, 3}) == 2);
  CHECK(count_hills(std::vector<double>{}) == 0);
}

TEST_CASE("prominence floor ignores small bumps") {
  const std::vector<double> v{0, 10, 100, 10, 0, 2, 0};
  CHECK(count_hills(v) == 2);
  CHECK(count_hills(v, 0.05) == 1);
  CHECK(count_hills(v, 0.01) == 2);
}

TEST_CASE("count_hills agrees with the oracle on random sequences") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto v = oracle::sample_mixture({{1, 0, 1}}, 5 + seed % 30, seed).values;
    for (double& x : v) x = std::round(x * 2.0);  // plateaus
    for (double rel : {0.0, 0.05, 0.2}) CHECK(count_hills(v, rel) == oracle::hills(v, rel));
  }
}

TEST_CASE("clamp_negatives") {
  std::vector<double> v{1, -0.5, 0, -2};
  CHECK(clamp_negatives(v) == 2);
  CHECK(v == std::vector<double>{1, 0, 0, 0});
}

TEST_CASE("narrow Gaussian gives one cluster") {
  const auto h = mixture_hist({{1, 0, 1}}, 30, -4.37, 4);
  const SGParams sg;
  const auto d = decide_cluster_count(h, sg);
  CHECK(d.n_clust == 1);
  CHECK(opt(d.trace.pos_1) == 0);
  CHECK_FALSE(d.trace.pos_2);
  CHECK_FALSE(d.trace.pos_3);
  check_trace_matches_oracle(h, sg, d);
}

TEST_CASE("two separated Gaussians give two clusters") {
  const auto h = mixture_hist({{1, 0, 1}, {1, 4, 1}}, 30, -4.37, 8);
  const SGParams sg;
  const auto d = decide_cluster_count(h, sg);
  check_trace_matches_oracle(h, sg, d);
  CHECK(d.n_clust == 2);
  CHECK(opt(d.trace.pos_2) == 0);
  CHECK_FALSE(d.trace.pos_3);
  REQUIRE(d.trace.pos_1);
  for (int i = 0; i < *d.trace.pos_1; ++i) CHECK(d.trace.hills_per_iteration[static_cast<std::size_t>(i)] == 2);
}

TEST_CASE("three Gaussians with a long three-hill regime give three clusters") {
  const auto h = mixture_hist({{1, 0, 1}, {1, 3.5, 1}, {1, 7, 1}}, 30, -4.37, 11);
  const SGParams sg;
  const auto d = decide_cluster_count(h, sg);
  check_trace_matches_oracle(h, sg, d);
  REQUIRE(d.trace.pos_1);
  REQUIRE(d.trace.pos_2);
  REQUIRE(d.trace.pos_3);
  CHECK(*d.trace.pos_2 - *d.trace.pos_3 >= *d.trace.pos_1 - *d.trace.pos_2);
  CHECK(d.n_clust == 3);
}

TEST_CASE("recorded positions are first occurrences") {
  for (double sep : {2.8, 3.0, 3.5, 4.0}) {
    const auto h = mixture_hist({{1, 0, 1}, {0.7, sep, 1}, {1.2, 2 * sep, 0.9}}, 28, -4.37, 2 * sep + 4);
    const auto d = decide_cluster_count(h, SGParams{});
    const auto& per = d.trace.hills_per_iteration;
    CHECK(static_cast<int>(per.size()) == d.trace.iterations_run);
    for (int k = 1; k <= 3; ++k) {
      const auto it = std::find(per.begin(), per.end(), k);
      const int first = it == per.end() ? -1 : static_cast<int>(it - per.begin());
      const auto& pos = k == 1 ? d.trace.pos_1 : k == 2 ? d.trace.pos_2 : d.trace.pos_3;
      CHECK(opt(pos) == first);
      if (pos) CHECK(*pos < d.trace.iterations_run);
    }
  }
}

TEST_CASE("decide_cluster_count is deterministic and stops at max_iter") {
  const auto h = mixture_hist({{1, 0, 1}, {1, 12, 1}}, 40, -4.37, 16);
  SGParams sg;
  sg.max_iter = 5;
  const auto a = decide_cluster_count(h, sg, DecisionPolicy::Persistence, true);
  const auto b = decide_cluster_count(h, sg, DecisionPolicy::Persistence, true);
  CHECK(a.n_clust == b.n_clust);
  CHECK(a.trace == b.trace);
  CHECK(a.passes == b.passes);
  CHECK(a.trace.iterations_run == 5);
  CHECK(a.passes.size() == 5);
  for (const auto& pass : a.passes) {
    for (double v : pass) CHECK(v >= 0.0);
  }
}

TEST_CASE("decision rules on recorded traces") {
  SmoothingTrace t;
  t.iterations_run = 1;
  t.pos_1 = 0;
  CHECK(cluster_count_from_trace(t, DecisionPolicy::Persistence, 30) == 1);
  CHECK(cluster_count_from_trace(t, DecisionPolicy::LiteralRatio, 30) == 2);

  // Long 2-hill regime after a brief 3-hill one.
  t = {};
  t.pos_3 = 0;
  t.pos_2 = 1;
  t.pos_1 = 20;
  t.iterations_run = 21;
  CHECK(cluster_count_from_trace(t, DecisionPolicy::Persistence, 30) == 2);
  CHECK(cluster_count_from_trace(t, DecisionPolicy::LiteralRatio, 30) == 3);  // 1/0 -> inf

  t.pos_3 = 2;
  t.pos_2 = 12;
  t.pos_1 = 15;
  t.iterations_run = 16;
  CHECK(cluster_count_from_trace(t, DecisionPolicy::Persistence, 30) == 3);
  CHECK(cluster_count_from_trace(t, DecisionPolicy::LiteralRatio, 30) == 2);  // 6 < 30

  // Never merged: unseen positions count as the run length.
  t = {};
  t.pos_2 = 0;
  t.iterations_run = 100;
  CHECK(cluster_count_from_trace(t, DecisionPolicy::Persistence, 30) == 2);
  CHECK(cluster_count_from_trace(t, DecisionPolicy::LiteralRatio, 30) == 1);
}

TEST_CASE("decision policy names") {
  CHECK(parse_decision_policy("persistence") == DecisionPolicy::Persistence);
  CHECK(parse_decision_policy("literal") == DecisionPolicy::LiteralRatio);
  CHECK(to_string(DecisionPolicy::LiteralRatio) == "literal");
  CHECK_THROWS_AS(parse_decision_policy("vote"), ConfigError);
}
