// recluster: recursive 1-D clustering of measurement series.
//
//   recluster run --input data.csv --out result/ [options]
//   recluster compare a/labels.csv b/labels.csv

#include <CLI11.hpp>
#include <charconv>
#include <iostream>

#include "recluster/error.hpp"
#include "recluster/json_writer.hpp"
#include "recluster/pipeline.hpp"

namespace {

std::vector<double> parse_sentinels(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto token = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!token.empty()) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw recluster::ConfigError("bad --na value '" + token + "'");
      }
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw recluster::ConfigError("--elbow expects KMIN:KMAX");
  try {
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw recluster::ConfigError("--elbow expects KMIN:KMAX, got '" + text + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive 1-D clustering driven by Savitzky-Golay histogram smoothing"};
  app.require_subcommand(1);

  recluster::RunConfig cfg;
  std::string input;
  std::string mode = "recursive";
  std::string backend = "kmeans";
  std::string bins = "fd";
  std::string decision = "persistence";
  std::string na;
  std::string elbow;
  std::string compare_with;
  std::string out_dir = "out";
  bool min_elem_bins = false;
  bool serial = false;

  auto* run = app.add_subcommand("run", "Cluster one series and write a report");
  run->add_option("--input", input, "One value per line, optional header")->required();
  run->add_option("--mode", mode, "recursive or flat")->check(CLI::IsMember({"recursive", "flat"}));
  run->add_option("--k", cfg.k, "Cluster count in flat mode");
  run->add_option("--backend", backend, "kmeans or som");
  run->add_option("--bins", bins, "fd, count:N or width:W");
  run->add_option("--window", cfg.sg.w_length, "Savitzky-Golay window length (odd)");
  run->add_option("--poly", cfg.sg.poly, "Savitzky-Golay polynomial degree");
  run->add_option("--smooth-iter", cfg.sg.max_iter, "Cap on repeated smoothing passes");
  run->add_option("--min-prominence", cfg.sg.min_prominence,
                  "Relative prominence below which a hill is ignored");
  run->add_option("--decision", decision, "persistence or literal");
  run->add_option("--min-elem", cfg.min_n_elem, "Minimum histogram count to split a range");
  run->add_flag("--min-elem-bins", min_elem_bins, "Apply --min-elem to bin count instead");
  run->add_option("--max-depth", cfg.max_depth, "Recursion depth cap");
  run->add_option("--runs", cfg.n_runs, "Best-of-N backend runs");
  run->add_option("--epochs", cfg.som_epochs, "SOM epochs");
  run->add_option("--seed", cfg.seed, "Master seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--plot-data", cfg.plot_data, "Also write hist.csv and borders.csv");
  run->add_option("--na", na, "Comma-separated sentinel values treated as missing");
  run->add_option("--elbow", elbow, "Elbow curve over KMIN:KMAX");
  run->add_flag("--silhouette", cfg.silhouette, "Mean silhouette of the final partition");
  run->add_option("--compare", compare_with, "labels.csv of another run to compare against");
  run->add_flag("--serial", serial, "Run backend restarts sequentially");

  std::string labels_a;
  std::string labels_b;
  auto* cmp = app.add_subcommand("compare", "Similarity measures between two labels.csv files");
  cmp->add_option("labels_a", labels_a)->required();
  cmp->add_option("labels_b", labels_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(recluster::ErrorKind::Config);
  }

  try {
    if (*cmp) {
      std::cout << recluster::format_similarity(recluster::compare_runs(labels_a, labels_b));
      return 0;
    }

    cfg.input = input;
    cfg.mode = mode == "flat" ? recluster::Mode::Flat : recluster::Mode::Recursive;
    cfg.backend = recluster::parse_backend(backend);
    cfg.bins = recluster::BinSpec::parse(bins);
    cfg.decision = recluster::parse_decision_policy(decision);
    cfg.na.sentinels = parse_sentinels(na);
    cfg.min_elem_mode = min_elem_bins ? recluster::MinElemMode::Bins : recluster::MinElemMode::Points;
    if (!elbow.empty()) cfg.elbow = parse_range(elbow);
    if (!compare_with.empty()) cfg.compare_with = compare_with;
    cfg.out_dir = out_dir;
    cfg.parallel = !serial;

    const auto report = recluster::run_pipeline(cfg);
    recluster::emit_report(report, cfg.out_dir);

    std::cout << recluster::method_label(report) << "  clusters=" << report.partition.n_clusters
              << "  borders=";
    for (std::size_t i = 0; i < report.borders.size(); ++i) {
      std::cout << (i ? "," : "") << recluster::format_real(report.borders[i]);
    }
    std::cout << '\n';
    if (report.similarity) std::cout << recluster::format_similarity(*report.similarity);
    return 0;
  } catch (const recluster::Error& e) {
    std::cerr << "recluster: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "recluster: " << e.what() << '\n';
    return static_cast<int>(recluster::ErrorKind::Numeric);
  }
}
