#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "recluster/ingest.hpp"
#include "recluster/recursive_scheme.hpp"
#include "recluster/sg_smoothing.hpp"
#include "recluster/validity.hpp"

namespace recluster {

enum class Mode { Recursive, Flat };

struct RunConfig {
  std::filesystem::path input;
  NaPolicy na;
  BinSpec bins = BinSpec::freedman_diaconis();
  SGParams sg;
  DecisionPolicy decision = DecisionPolicy::Persistence;
  Backend backend = Backend::KMeans;
  Mode mode = Mode::Recursive;
  int k = 2;  // flat mode only
  int n_runs = 10;
  int min_n_elem = 20;
  MinElemMode min_elem_mode = MinElemMode::Points;
  int max_depth = 6;
  int kmeans_max_iter = 300;
  double kmeans_rel_tol = 1e-4;
  double som_lr0 = 0.5;
  double som_lr_decay = 0.93;
  double som_potential_decay = 0.99;
  int som_epochs = 50;
  double som_conscience_scale = 1.0;
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = "out";
  bool plot_data = false;
  std::optional<std::pair<int, int>> elbow;
  bool silhouette = false;
  std::optional<std::filesystem::path> compare_with;
  bool parallel = true;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
  BackendConfig backend_config() const;
  RecursionParams recursion_params() const;
};

struct NodeTrace {
  std::string path;  // "root", "root.0", "root.0.2", ...
  int depth = 0;
  int n_clust = 1;
  SmoothingTrace trace;
  std::vector<double> run_inertias;
};

struct RunReport {
  RunConfig config;
  Sample sample;
  Histogram histogram;
  ClusterTree tree;
  std::string brackets;
  std::vector<double> borders;
  Partition partition;
  std::vector<NodeTrace> nodes;
  /// Smoothed root histogram after each pass, for plotting.
  std::vector<std::vector<double>> root_passes;
  std::optional<std::vector<ElbowPoint>> elbow;
  std::optional<double> silhouette_mean;
  std::optional<SimilarityReport> similarity;
  std::vector<std::string> warnings;
};

/// ingest -> cluster -> labels -> diagnostics. Errors keep their category and are prefixed with
/// the failing stage.
RunReport run_pipeline(const RunConfig& config);

/// Report as JSON (schema_version 1). With a timestamp, a "generated_at" field is included.
std::string report_json(const RunReport& report, const std::string& timestamp = {});

/// Writes report.json, labels.csv and, with plot_data, hist.csv and borders.csv.
std::vector<std::filesystem::path> emit_report(const RunReport& report,
                                               const std::filesystem::path& dir);

/// Method label for borders.csv, e.g. "kmeans_r[3;2]" or "som[4]".
std::string method_label(const RunReport& report);

struct LabeledValues {
  std::vector<double> values;
  std::vector<int> labels;
};

/// Reads a "value,label" file as written by emit_report. A header row is optional.
LabeledValues read_labels_csv(const std::filesystem::path& path);

SimilarityReport compare_labels(const LabeledValues& a, const LabeledValues& b);
SimilarityReport compare_runs(const std::filesystem::path& labels_a,
                              const std::filesystem::path& labels_b);

/// "R,R',FM,J,AB,H" header line plus one line of values.
std::string format_similarity(const SimilarityReport& r);

}  // namespace recluster
