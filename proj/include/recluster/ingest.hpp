#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace recluster {

/// Cleaned 1-D measurement series. Values are finite and sorted ascending.
class Sample {
 public:
  Sample() = default;

  /// Sorts `values`; throws DataError if any value is non-finite.
  static Sample from_values(std::vector<double> values, std::string source_id = {},
                            std::size_t n_dropped = 0);

  std::span<const double> values() const noexcept { return values_; }
  const std::string& source_id() const noexcept { return source_id_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::size_t n_dropped() const noexcept { return n_dropped_; }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

  bool operator==(const Sample&) const = default;

 private:
  std::vector<double> values_;
  std::string source_id_;
  std::size_t n_dropped_ = 0;
};

/// Bin edges and counts over a closed interval. The last bin is closed on both sides.
class Histogram {
 public:
  Histogram() = default;
  /// Throws DataError unless edges.size() == counts.size() + 1 and edges strictly increase.
  Histogram(std::vector<double> edges, std::vector<std::uint64_t> counts);

  std::span<const double> edges() const noexcept { return edges_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::size_t n_buckets() const noexcept { return counts_.size(); }
  std::uint64_t total() const noexcept;
  double lo() const { return edges_.front(); }
  double hi() const { return edges_.back(); }

  bool operator==(const Histogram&) const = default;

 private:
  std::vector<double> edges_;
  std::vector<std::uint64_t> counts_;
};

struct BinSpec {
  enum class Mode { FixedCount, FixedWidth, FreedmanDiaconis };

  Mode mode = Mode::FreedmanDiaconis;
  std::size_t count = 0;  // FixedCount only
  double width = 0.0;     // FixedWidth only

  static BinSpec fixed_count(std::size_t k) { return {Mode::FixedCount, k, 0.0}; }
  static BinSpec fixed_width(double w) { return {Mode::FixedWidth, 0, w}; }
  static BinSpec freedman_diaconis() { return {}; }

  /// Parses "fd", "count:N" or "width:W".
  static BinSpec parse(const std::string& text);
  std::string to_string() const;
};

struct NaPolicy {
  std::vector<double> sentinels;
  bool drop_nonfinite = true;
};

/// Reads one value per line. A non-numeric first line is treated as a header; blank lines are
/// skipped. Values equal to a sentinel, and non-finite values when drop_nonfinite is set, are
/// removed and counted in n_dropped.
Sample load_series(const std::filesystem::path& path, const NaPolicy& policy = {});

/// Same as load_series but reads from an in-memory buffer.
Sample parse_series(std::string_view text, const NaPolicy& policy = {},
                    std::string source_id = "<memory>");

/// Linear-interpolation quantile (the "type 7" estimator) of a sorted sequence.
double quantile_sorted(std::span<const double> sorted, double q);

Histogram build_histogram(const Sample& sample, const BinSpec& spec);

/// Edge index nearest to each border. Throws DataError when a border is outside the open
/// interval (lo, hi).
std::vector<std::size_t> snap_to_edges(const Histogram& hist, std::span<const double> borders);

/// Splits `hist` at the edges nearest to `borders`. Throws DataError("empty sub-range") if a
/// piece would have no bins.
std::vector<Histogram> subhists(const Histogram& hist, std::span<const double> borders);

/// Segment i holds borders[i-1] <= x < borders[i]; the last segment is closed.
std::vector<Sample> subdatas(const Sample& sample, std::span<const double> borders);

}  // namespace recluster
