#include "recluster/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "recluster/error.hpp"
#include "recluster/json_writer.hpp"

namespace recluster {

using nlohmann::ordered_json;

void RunConfig::validate() const {
  if (sg.w_length % 2 == 0) throw ConfigError("w_length must be odd");
  sg.validate();
  if (mode == Mode::Flat && k < 1) throw ConfigError("k must be >= 1 in flat mode");
  if (n_runs < 1) throw ConfigError("runs must be >= 1");
  if (min_n_elem < 1) throw ConfigError("min-elem must be >= 1");
  if (max_depth < 1) throw ConfigError("max-depth must be >= 1");
  if (bins.mode == BinSpec::Mode::FixedCount && bins.count < 2) {
    throw ConfigError("bin count must be >= 2");
  }
  if (bins.mode == BinSpec::Mode::FixedWidth && !(bins.width > 0)) {
    throw ConfigError("bin width must be positive");
  }
  if (elbow && (elbow->first < 1 || elbow->second < elbow->first)) {
    throw ConfigError("elbow range must satisfy 1 <= KMIN <= KMAX");
  }
  backend_config().kmeans.validate();
  backend_config().som.validate();
}

BackendConfig RunConfig::backend_config() const {
  BackendConfig b;
  b.backend = backend;
  b.kmeans.max_iter = kmeans_max_iter;
  b.kmeans.rel_tol = kmeans_rel_tol;
  b.kmeans.n_runs = n_runs;
  b.kmeans.seed = seed;
  b.som.lr0 = som_lr0;
  b.som.lr_decay = som_lr_decay;
  b.som.potential_decay = som_potential_decay;
  b.som.epochs = som_epochs;
  b.som.conscience_scale = som_conscience_scale;
  b.som.seed = seed;
  b.parallel = parallel;
  return b;
}

RecursionParams RunConfig::recursion_params() const {
  RecursionParams p;
  p.sg = sg;
  p.decision = decision;
  p.backend = backend_config();
  p.n_iter = n_runs;
  p.min_n_elem = min_n_elem;
  p.min_elem_mode = min_elem_mode;
  p.max_depth = max_depth;
  return p;
}

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    const std::string msg = std::string(name) + ": " + e.what();
    switch (e.kind()) {
      case ErrorKind::Config: throw ConfigError(msg);
      case ErrorKind::Data: throw DataError(msg);
      case ErrorKind::Numeric: break;
    }
    throw NumericError(msg);
  }
}

void collect_nodes(const ClusterTree& t, const std::string& path, std::vector<NodeTrace>& out,
                   std::vector<std::string>& warnings) {
  if (t.trace.iterations_run > 0) {
    out.push_back({path, t.depth, t.n_clust, t.trace, t.run_inertias});
    if (t.trace.clamped_negatives > 0) {
      warnings.push_back(path + ": " + std::to_string(t.trace.clamped_negatives) +
                         " negative smoothed values clamped to 0");
    }
    if (t.trace.final_hills > 1) {
      warnings.push_back(path + ": smoothing stopped at max_iter with " +
                         std::to_string(t.trace.final_hills) + " hills");
    }
  }
  for (const auto& w : t.warnings) warnings.push_back(path + ": " + w);
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    collect_nodes(t.children[i], path + "." + std::to_string(i), out, warnings);
  }
}

ordered_json optional_int(const std::optional<int>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json tree_json(const ClusterTree& t) {
  ordered_json j;
  j["n_clust"] = t.n_clust;
  j["depth"] = t.depth;
  j["n_points"] = t.n_points;
  j["range"] = ordered_json::array({t.lo, t.hi});
  j["borders"] = t.borders;
  ordered_json children = ordered_json::array();
  for (const auto& c : t.children) children.push_back(tree_json(c));
  j["children"] = std::move(children);
  return j;
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["input"] = c.input.string();
  j["na_sentinels"] = c.na.sentinels;
  j["drop_nonfinite"] = c.na.drop_nonfinite;
  j["bins"] = c.bins.to_string();
  j["mode"] = c.mode == Mode::Recursive ? "recursive" : "flat";
  j["k"] = c.mode == Mode::Flat ? ordered_json(c.k) : ordered_json(nullptr);
  j["backend"] = to_string(c.backend);
  j["w_length"] = c.sg.w_length;
  j["poly"] = c.sg.poly;
  j["smoothing_max_iter"] = c.sg.max_iter;
  j["min_prominence"] = c.sg.min_prominence;
  j["decision"] = to_string(c.decision);
  j["n_runs"] = c.n_runs;
  j["min_n_elem"] = c.min_n_elem;
  j["min_elem_mode"] = c.min_elem_mode == MinElemMode::Points ? "points" : "bins";
  j["max_depth"] = c.max_depth;
  j["kmeans_max_iter"] = c.kmeans_max_iter;
  j["kmeans_rel_tol"] = c.kmeans_rel_tol;
  j["som_lr0"] = c.som_lr0;
  j["som_lr_decay"] = c.som_lr_decay;
  j["som_potential_decay"] = c.som_potential_decay;
  j["som_epochs"] = c.som_epochs;
  j["som_conscience_scale"] = c.som_conscience_scale;
  j["seed"] = c.seed;
  j["plot_data"] = c.plot_data;
  j["elbow"] = c.elbow ? ordered_json::array({c.elbow->first, c.elbow->second})
                       : ordered_json(nullptr);
  j["silhouette"] = c.silhouette;
  j["compare_with"] = c.compare_with ? ordered_json(c.compare_with->string())
                                     : ordered_json(nullptr);
  return j;
}

ordered_json similarity_json(const SimilarityReport& s) {
  ordered_json j;
  j["R"] = s.rand;
  j["R_adj"] = s.adjusted_rand;
  j["FM"] = s.fowlkes_mallows;
  j["J"] = s.jaccard;
  j["AB"] = s.arabie_boorman;
  j["H"] = s.hubert;
  j["pairs"] = {{"n11", s.pairs.n11}, {"n10", s.pairs.n10}, {"n01", s.pairs.n01}, {"n00", s.pairs.n00}};
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace

RunReport run_pipeline(const RunConfig& config) {
  stage("config", [&] { config.validate(); });

  RunReport r;
  r.config = config;
  r.sample = stage("ingest", [&] { return load_series(config.input, config.na); });
  r.histogram = stage("ingest", [&] { return build_histogram(r.sample, config.bins); });
  if (r.sample.n_dropped() > 0) {
    r.warnings.push_back("ingest: " + std::to_string(r.sample.n_dropped()) +
                         " missing or sentinel values dropped");
  }

  const auto backend = config.backend_config();
  if (config.mode == Mode::Recursive) {
    r.tree = stage("cluster", [&] {
      return recursive_clustering(r.sample, r.histogram, config.recursion_params(), config.seed);
    });
  } else {
    r.tree = stage("cluster", [&] {
      const auto best = best_fit(r.sample, config.k, config.n_runs, backend, config.seed);
      auto tree = flat_tree(r.sample, best.borders);
      tree.run_inertias = best.run_inertias;
      tree.warnings = best.best.warnings;
      return tree;
    });
  }

  const auto root = stage("smoothing", [&] {
    return decide_cluster_count(r.histogram, config.sg, config.decision, true);
  });
  r.root_passes = root.passes;

  r.brackets = render_brackets(r.tree);
  r.borders = tree_to_borders(r.tree);
  r.partition = stage("labels", [&] { return assign_labels(r.sample, r.borders); });
  collect_nodes(r.tree, "root", r.nodes, r.warnings);

  if (config.elbow) {
    r.elbow = stage("diagnostics", [&] {
      return elbow_curve(r.sample, config.elbow->first, config.elbow->second, backend,
                         config.n_runs, config.seed);
    });
  }
  if (config.silhouette) {
    if (r.partition.n_clusters < 2) {
      r.warnings.push_back("diagnostics: silhouette undefined for one cluster");
    } else {
      r.silhouette_mean = stage("diagnostics", [&] { return silhouette(r.sample, r.partition).mean; });
    }
  }
  if (config.compare_with) {
    r.similarity = stage("compare", [&] {
      LabeledValues mine{{r.sample.values().begin(), r.sample.values().end()}, r.partition.labels};
      return compare_labels(mine, read_labels_csv(*config.compare_with));
    });
    for (const auto& w : r.similarity->warnings) r.warnings.push_back("compare: " + w);
  }
  return r;
}

std::string report_json(const RunReport& r, const std::string& timestamp) {
  ordered_json j;
  j["schema_version"] = 1;
  if (!timestamp.empty()) j["generated_at"] = timestamp;
  j["config"] = config_json(r.config);
  j["input"] = {{"source", r.sample.source_id()},
                {"n", r.sample.size()},
                {"n_dropped", r.sample.n_dropped()}};

  ordered_json hist;
  hist["rule"] = r.config.bins.to_string();
  hist["n_buckets"] = r.histogram.n_buckets();
  hist["edges"] = std::vector<double>(r.histogram.edges().begin(), r.histogram.edges().end());
  hist["counts"] = std::vector<std::uint64_t>(r.histogram.counts().begin(), r.histogram.counts().end());
  j["histogram"] = std::move(hist);

  j["tree"] = tree_json(r.tree);
  j["brackets"] = r.brackets;
  j["n_clusters"] = r.partition.n_clusters;
  j["borders"] = r.borders;
  j["labels_file"] = "labels.csv";

  ordered_json traces = ordered_json::array();
  ordered_json runs = ordered_json::array();
  for (const auto& n : r.nodes) {
    ordered_json t;
    t["node"] = n.path;
    t["depth"] = n.depth;
    t["n_clust"] = n.n_clust;
    t["pos_1"] = optional_int(n.trace.pos_1);
    t["pos_2"] = optional_int(n.trace.pos_2);
    t["pos_3"] = optional_int(n.trace.pos_3);
    t["iterations_run"] = n.trace.iterations_run;
    t["final_hills"] = n.trace.final_hills;
    t["clamped_negatives"] = n.trace.clamped_negatives;
    traces.push_back(std::move(t));
    if (!n.run_inertias.empty()) runs.push_back({{"node", n.path}, {"inertia", n.run_inertias}});
  }
  if (r.config.mode == Mode::Flat && !r.tree.run_inertias.empty() && runs.empty()) {
    runs.push_back({{"node", "root"}, {"inertia", r.tree.run_inertias}});
  }
  j["smoothing_traces"] = std::move(traces);
  j["backend_runs"] = std::move(runs);

  ordered_json diag;
  if (r.elbow) {
    ordered_json e = ordered_json::array();
    for (const auto& p : *r.elbow) e.push_back({{"k", p.k}, {"inertia", p.inertia}});
    diag["elbow"] = std::move(e);
  } else {
    diag["elbow"] = nullptr;
  }
  diag["silhouette_mean"] = r.silhouette_mean ? ordered_json(*r.silhouette_mean) : ordered_json(nullptr);
  j["diagnostics"] = std::move(diag);
  j["similarity"] = r.similarity ? similarity_json(*r.similarity) : ordered_json(nullptr);
  j["warnings"] = r.warnings;
  return dump_json(j);
}

std::string method_label(const RunReport& r) {
  return to_string(r.config.backend) + (r.config.mode == Mode::Recursive ? "_r" : "") + r.brackets;
}

std::vector<std::filesystem::path> emit_report(const RunReport& r,
                                               const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;

  std::ostringstream ts;
  {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    ts << buf;
  }
  write_file(dir / "report.json", report_json(r, ts.str()));
  written.push_back(dir / "report.json");

  {
    std::string text = "value,label\n";
    const auto v = r.sample.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      text += format_real(v[i]) + ',' + std::to_string(r.partition.labels[i]) + '\n';
    }
    write_file(dir / "labels.csv", text);
    written.push_back(dir / "labels.csv");
  }

  if (r.config.plot_data) {
    std::string text = "bin_left,bin_right,count";
    for (std::size_t p = 0; p < r.root_passes.size(); ++p) text += ",smoothed_iter" + std::to_string(p);
    text += '\n';
    const auto e = r.histogram.edges();
    const auto c = r.histogram.counts();
    for (std::size_t b = 0; b < c.size(); ++b) {
      text += format_real(e[b]) + ',' + format_real(e[b + 1]) + ',' + std::to_string(c[b]);
      for (const auto& pass : r.root_passes) text += ',' + format_real(pass[b]);
      text += '\n';
    }
    write_file(dir / "hist.csv", text);
    written.push_back(dir / "hist.csv");

    std::string borders = "method,border\n";
    const auto label = method_label(r);
    for (double b : r.borders) borders += label + ',' + format_real(b) + '\n';
    write_file(dir / "borders.csv", borders);
    written.push_back(dir / "borders.csv");
  }
  return written;
}

LabeledValues read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read labels file " + path.string());
  LabeledValues out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double value = 0.0;
    int label = 0;
    bool ok = comma != std::string::npos;
    if (ok) {
      const auto* b = line.data();
      auto rv = std::from_chars(b, b + comma, value);
      auto rl = std::from_chars(b + comma + 1, b + line.size(), label);
      ok = rv.ec == std::errc() && rv.ptr == b + comma && rl.ec == std::errc() &&
           rl.ptr == b + line.size();
    }
    if (!ok) {
      if (out.values.empty() && line_no == 1) continue;  // header
      throw DataError(path.string() + ": malformed row " + std::to_string(line_no));
    }
    out.values.push_back(value);
    out.labels.push_back(label);
  }
  return out;
}

SimilarityReport compare_labels(const LabeledValues& a, const LabeledValues& b) {
  if (a.values.size() != b.values.size()) {
    throw DataError("row mismatch: " + std::to_string(a.values.size()) + " vs " +
                    std::to_string(b.values.size()) + " rows");
  }
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (a.values[i] != b.values[i]) {
      throw DataError("row mismatch: value columns differ at row " + std::to_string(i + 1));
    }
  }
  return similarity_report(a.labels, b.labels);
}

SimilarityReport compare_runs(const std::filesystem::path& labels_a,
                              const std::filesystem::path& labels_b) {
  return compare_labels(read_labels_csv(labels_a), read_labels_csv(labels_b));
}

std::string format_similarity(const SimilarityReport& r) {
  return "R,R',FM,J,AB,H\n" + format_real(r.rand) + ',' + format_real(r.adjusted_rand) + ',' +
         format_real(r.fowlkes_mallows) + ',' + format_real(r.jaccard) + ',' +
         format_real(r.arabie_boorman) + ',' + format_real(r.hubert) + '\n';
}

}  // namespace recluster
