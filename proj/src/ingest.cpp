#include "recluster/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "recluster/error.hpp"

namespace recluster {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !token.empty();
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Sample Sample::from_values(std::vector<double> values, std::string source_id,
                           std::size_t n_dropped) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("sample contains a non-finite value");
  }
  std::sort(values.begin(), values.end());
  Sample s;
  s.values_ = std::move(values);
  s.source_id_ = std::move(source_id);
  s.n_dropped_ = n_dropped;
  return s;
}

Histogram::Histogram(std::vector<double> edges, std::vector<std::uint64_t> counts)
    : edges_(std::move(edges)), counts_(std::move(counts)) {
  if (counts_.empty() || edges_.size() != counts_.size() + 1) {
    throw DataError("histogram needs n_buckets >= 1 and n_buckets + 1 edges");
  }
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1])) throw DataError("histogram edges must strictly increase");
  }
}

std::uint64_t Histogram::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

BinSpec BinSpec::parse(const std::string& text) {
  if (text == "fd") return freedman_diaconis();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const auto kind = text.substr(0, colon);
    const auto arg = std::string_view(text).substr(colon + 1);
    double v = 0.0;
    if (!parse_double(arg, v)) throw ConfigError("bad bin spec argument: " + text);
    if (kind == "count") {
      if (v < 2 || v != std::floor(v)) throw ConfigError("bin count must be an integer >= 2");
      return fixed_count(static_cast<std::size_t>(v));
    }
    if (kind == "width") {
      if (!(v > 0) || !std::isfinite(v)) throw ConfigError("bin width must be positive");
      return fixed_width(v);
    }
  }
  throw ConfigError("bin spec must be fd, count:N or width:W, got '" + text + "'");
}

std::string BinSpec::to_string() const {
  switch (mode) {
    case Mode::FixedCount: return "count:" + std::to_string(count);
    case Mode::FixedWidth: return "width:" + format_real(width);
    case Mode::FreedmanDiaconis: break;
  }
  return "fd";
}

Sample parse_series(std::string_view text, const NaPolicy& policy, std::string source_id) {
  std::vector<double> kept;
  std::size_t dropped = 0;
  std::size_t line_no = 0;
  bool first_content_line = true;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    const auto line = trim(raw);
    if (line.empty()) continue;

    double v = 0.0;
    if (!parse_double(line, v)) {
      if (first_content_line) {
        first_content_line = false;
        continue;  // header
      }
      throw DataError("non-numeric row at line " + std::to_string(line_no) + ": '" +
                      std::string(line) + "'");
    }
    first_content_line = false;

    if (!std::isfinite(v)) {
      if (!policy.drop_nonfinite) {
        throw DataError("non-finite value at line " + std::to_string(line_no));
      }
      ++dropped;
      continue;
    }
    if (std::find(policy.sentinels.begin(), policy.sentinels.end(), v) !=
        policy.sentinels.end()) {
      ++dropped;
      continue;
    }
    kept.push_back(v);
  }

  if (kept.empty()) throw DataError("zero retained values in " + source_id);
  return Sample::from_values(std::move(kept), std::move(source_id), dropped);
}

Sample load_series(const std::filesystem::path& path, const NaPolicy& policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read input file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("cannot read input file " + path.string());
  return parse_series(buf.str(), policy, path.string());
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DataError("quantile of empty sequence");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Histogram build_histogram(const Sample& sample, const BinSpec& spec) {
  if (sample.empty()) throw DataError("cannot bin an empty sample");
  const double lo = sample.min();
  const double hi = sample.max();
  const double range = hi - lo;
  if (!(range > 0)) throw DataError("degenerate range: all values equal " + format_real(lo));

  std::vector<double> edges;
  switch (spec.mode) {
    case BinSpec::Mode::FixedCount: {
      if (spec.count < 2) throw ConfigError("bin count must be >= 2");
      edges.resize(spec.count + 1);
      for (std::size_t i = 0; i <= spec.count; ++i) {
        edges[i] = lo + range * static_cast<double>(i) / static_cast<double>(spec.count);
      }
      edges.back() = hi;
      break;
    }
    case BinSpec::Mode::FixedWidth: {
      if (!(spec.width > 0)) throw ConfigError("bin width must be positive");
      const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(range / spec.width)));
      edges.resize(n + 1);
      for (std::size_t i = 0; i <= n; ++i) edges[i] = lo + spec.width * static_cast<double>(i);
      if (edges.back() < hi) edges.back() = hi;
      break;
    }
    case BinSpec::Mode::FreedmanDiaconis: {
      const auto v = sample.values();
      if (v.size() < 4) throw DataError("freedman_diaconis needs at least 4 values");
      const double iqr = quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
      if (!(iqr > 0)) throw DataError("degenerate range: interquartile range is zero");
      const double h = 2.0 * iqr * std::pow(static_cast<double>(v.size()), -1.0 / 3.0);
      const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(range / h)));
      edges.resize(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        edges[i] = lo + range * static_cast<double>(i) / static_cast<double>(n);
      }
      edges.back() = hi;
      break;
    }
  }

  std::vector<std::uint64_t> counts(edges.size() - 1, 0);
  for (double x : sample.values()) {
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    auto bin = static_cast<std::size_t>(std::distance(edges.begin(), it));
    bin = bin == 0 ? 0 : bin - 1;
    counts[std::min(bin, counts.size() - 1)] += 1;
  }
  return Histogram(std::move(edges), std::move(counts));
}

std::vector<std::size_t> snap_to_edges(const Histogram& hist, std::span<const double> borders) {
  const auto e = hist.edges();
  std::vector<std::size_t> out;
  out.reserve(borders.size());
  for (double b : borders) {
    if (!(b > hist.lo() && b < hist.hi())) {
      throw DataError("border " + format_real(b) + " outside histogram range");
    }
    const auto it = std::lower_bound(e.begin(), e.end(), b);
    auto idx = static_cast<std::size_t>(std::distance(e.begin(), it));
    if (idx > 0 && (b - e[idx - 1]) <= (e[idx] - b)) --idx;
    out.push_back(idx);
  }
  return out;
}

std::vector<Histogram> subhists(const Histogram& hist, std::span<const double> borders) {
  if (!std::is_sorted(borders.begin(), borders.end())) throw DataError("borders must be sorted");
  const auto idx = snap_to_edges(hist, borders);

  std::vector<Histogram> out;
  out.reserve(idx.size() + 1);
  std::size_t start = 0;
  const auto e = hist.edges();
  const auto c = hist.counts();
  for (std::size_t i = 0; i <= idx.size(); ++i) {
    const std::size_t stop = i < idx.size() ? idx[i] : hist.n_buckets();
    if (stop <= start) throw DataError("empty sub-range after snapping borders to bin edges");
    out.emplace_back(std::vector<double>(e.begin() + start, e.begin() + stop + 1),
                     std::vector<std::uint64_t>(c.begin() + start, c.begin() + stop));
    start = stop;
  }
  return out;
}

std::vector<Sample> subdatas(const Sample& sample, std::span<const double> borders) {
  if (!std::is_sorted(borders.begin(), borders.end())) throw DataError("borders must be sorted");
  const auto v = sample.values();
  std::vector<Sample> out;
  out.reserve(borders.size() + 1);
  auto begin = v.begin();
  for (std::size_t i = 0; i <= borders.size(); ++i) {
    const auto end = i < borders.size() ? std::lower_bound(begin, v.end(), borders[i]) : v.end();
    out.push_back(Sample::from_values(std::vector<double>(begin, end), sample.source_id()));
    begin = end;
  }
  return out;
}

}  // namespace recluster
