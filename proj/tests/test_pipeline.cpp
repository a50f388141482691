#include <doctest.h>

#include <json.hpp>

#include "cli_helpers.hpp"
#include "datasets.hpp"
#include "recluster/error.hpp"
#include "recluster/json_writer.hpp"
#include "recluster/pipeline.hpp"

using namespace recluster;
using nlohmann::json;

namespace {

std::filesystem::path bimodal_csv(const std::filesystem::path& dir) {
  const auto path = dir / "bimodal.csv";
  cli::write_values(path, oracle::sample_mixture(datasets::bimodal, 5000, 1).values);
  return path;
}

}  // namespace

TEST_CASE("recursive pipeline on the bimodal set") {
  const auto dir = cli::scratch("pipe_bimodal");
  RunConfig cfg;
  cfg.input = bimodal_csv(dir);
  const auto r = run_pipeline(cfg);
  CHECK(r.brackets == "[2]");
  CHECK(r.borders.size() == 1);
  CHECK(r.partition.n_clusters == 2);
  CHECK(r.nodes.size() == 3);
  CHECK(method_label(r) == "kmeans_r[2]");
}

TEST_CASE("flat pipeline on four points") {
  const auto dir = cli::scratch("pipe_flat");
  RunConfig cfg;
  cfg.input = dir / "four.csv";
  cli::write_values(cfg.input, std::vector<double>{0, 0, 10, 10});
  cfg.mode = Mode::Flat;
  cfg.k = 2;
  const auto r = run_pipeline(cfg);
  CHECK(r.borders == std::vector<double>{5.0});
  CHECK(r.partition.labels == std::vector<int>{0, 0, 1, 1});
  CHECK(r.brackets == "[2]");
}

TEST_CASE("configuration errors name the stage") {
  RunConfig cfg;
  cfg.input = "unused.csv";
  cfg.sg.w_length = 6;
  CHECK_THROWS_WITH_AS(run_pipeline(cfg), doctest::Contains("w_length must be odd"), ConfigError);

  cfg = RunConfig{};
  cfg.input = "/nonexistent/recluster/input.csv";
  try {
    run_pipeline(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("ingest") != std::string::npos);
  }
}

TEST_CASE("report.json echoes the configuration") {
  const auto dir = cli::scratch("pipe_report");
  RunConfig cfg;
  cfg.input = bimodal_csv(dir);
  cfg.seed = 1234567;
  cfg.silhouette = true;
  cfg.elbow = std::pair{1, 4};
  const auto r = run_pipeline(cfg);
  emit_report(r, dir / "out");
  const auto j = json::parse(cli::slurp(dir / "out" / "report.json"));
  CHECK(j["schema_version"] == 1);
  CHECK(j["config"]["seed"] == 1234567);
  CHECK(j["config"]["w_length"] == 7);
  CHECK(j["config"]["bins"] == "fd");
  CHECK(j["brackets"] == "[2]");
  CHECK(j["diagnostics"]["elbow"].size() == 4);
  CHECK(j["diagnostics"]["silhouette_mean"].get<double>() > 0.6);
  CHECK(j["borders"].size() == 1);

  // nlohmann::json sorts keys; check presence here and order on the raw text below.
  for (const char* k : {"schema_version", "generated_at", "config", "input", "histogram", "tree",
                        "brackets", "n_clusters", "borders", "labels_file", "smoothing_traces",
                        "backend_runs", "diagnostics", "similarity", "warnings"}) {
    CHECK(j.contains(k));
  }
  const auto text = cli::slurp(dir / "out" / "report.json");
  CHECK(text.find("\"schema_version\"") < text.find("\"config\""));
  CHECK(text.find("\"config\"") < text.find("\"histogram\""));
  CHECK(text.find("\"brackets\"") < text.find("\"warnings\""));

  CHECK(cli::count_lines(cli::slurp(dir / "out" / "labels.csv")) == r.sample.size() + 1);
}

TEST_CASE("report text is reproducible") {
  const auto dir = cli::scratch("pipe_repro");
  RunConfig cfg;
  cfg.input = bimodal_csv(dir);
  cfg.backend = Backend::Som;
  CHECK(report_json(run_pipeline(cfg)) == report_json(run_pipeline(cfg)));
  cfg.parallel = false;
  const auto serial = report_json(run_pipeline(cfg));
  cfg.parallel = true;
  CHECK(serial.find("\"parallel\"") == std::string::npos);
  CHECK(report_json(run_pipeline(cfg)) == serial);
}

TEST_CASE("format_real keeps 17 significant digits") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(5.0) == "5");
  CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("compare_labels") {
  LabeledValues a{{1, 2, 3}, {0, 0, 1}};
  LabeledValues b{{1, 2, 3}, {0, 1, 1}};
  const auto r = compare_labels(a, b);
  CHECK(r.rand == doctest::Approx(1.0 / 3.0));

  LabeledValues c{{1, 2}, {0, 0}};
  CHECK_THROWS_WITH(compare_labels(a, c), doctest::Contains("row mismatch"));
  LabeledValues d{{1, 2, 4}, {0, 0, 1}};
  CHECK_THROWS_WITH(compare_labels(a, d), doctest::Contains("row mismatch"));
}

TEST_CASE("cli run and compare") {
  const auto dir = cli::scratch("cli_run");
  const auto input = bimodal_csv(dir);
  const auto out = dir / "a";
  auto r = cli::run("run --input \"" + input.string() + "\" --out \"" + out.string() + "\" --seed 9", dir);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("kmeans_r[2]") != std::string::npos);
  CHECK(json::parse(cli::slurp(out / "report.json"))["config"]["seed"] == 9);
  CHECK(cli::count_lines(cli::slurp(out / "labels.csv")) == 5001);

  const auto labels = (out / "labels.csv").string();
  r = cli::run("compare \"" + labels + "\" \"" + labels + "\"", dir);
  CHECK(r.code == 0);
  CHECK(r.out == "R,R',FM,J,AB,H\n1,1,1,1,0,1\n");

  // Relabelled copy: same pairs, same report.
  std::ifstream in(out / "labels.csv");
  std::ofstream perm(dir / "perm.csv");
  std::string line;
  std::getline(in, line);
  perm << line << '\n';
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    perm << line.substr(0, comma) << ',' << (7 - std::stoi(line.substr(comma + 1))) << '\n';
  }
  perm.close();
  r = cli::run("compare \"" + labels + "\" \"" + (dir / "perm.csv").string() + "\"", dir);
  CHECK(r.out == "R,R',FM,J,AB,H\n1,1,1,1,0,1\n");
}

TEST_CASE("cli compare on the small hand partitions") {
  const auto dir = cli::scratch("cli_small");
  std::ofstream(dir / "x.csv") << "value,label\n1,0\n2,0\n3,1\n";
  std::ofstream(dir / "y.csv") << "value,label\n1,0\n2,1\n3,1\n";
  const auto r = cli::run("compare \"" + (dir / "x.csv").string() + "\" \"" + (dir / "y.csv").string() + "\"", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("\n0.33333333333333331,") != std::string::npos);
}

TEST_CASE("cli exit codes") {
  const auto dir = cli::scratch("cli_codes");
  const auto input = bimodal_csv(dir);
  auto r = cli::run("run --input \"" + input.string() + "\" --window 6 --out \"" + (dir / "o").string() + "\"", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("w_length must be odd") != std::string::npos);

  r = cli::run("run --input \"" + input.string() + "\" --backend gmm", dir);
  CHECK(r.code == 2);
  r = cli::run("run", dir);
  CHECK(r.code == 2);

  std::ofstream(dir / "bad.csv") << "1\n2\nxyz\n";
  r = cli::run("run --input \"" + (dir / "bad.csv").string() + "\" --out \"" + (dir / "o").string() + "\"", dir);
  CHECK(r.code == 3);
  CHECK(r.err.find("ingest") != std::string::npos);

  std::ofstream(dir / "few.csv") << "1\n2\n";
  r = cli::run("run --input \"" + (dir / "few.csv").string() + "\" --mode flat --k 3 --out \"" +
                   (dir / "o").string() + "\"", dir);
  CHECK(r.code == 3);
}

TEST_CASE("cli plot data for the five-mode set") {
  const auto dir = cli::scratch("cli_five");
  const auto input = dir / "five.csv";
  cli::write_values(input, oracle::sample_mixture(datasets::five_mode, 20000, 0).values);
  const auto out = dir / "o";
  const auto r = cli::run("run --input \"" + input.string() + "\" --bins count:40 --plot-data --out \"" +
                              out.string() + "\"", dir);
  REQUIRE(r.code == 0);
  const auto borders = cli::slurp(out / "borders.csv");
  CHECK(cli::count_lines(borders) == 5);  // header + 4 borders
  CHECK(borders.find("kmeans_r[3;2],") != std::string::npos);
  std::istringstream in(borders);
  std::string line;
  std::getline(in, line);
  CHECK(line == "method,border");
  double last = -HUGE_VAL;
  while (std::getline(in, line)) {
    const double b = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(b > last);
    last = b;
  }
  const auto hist = cli::slurp(out / "hist.csv");
  CHECK(hist.rfind("bin_left,bin_right,count,smoothed_iter0", 0) == 0);
  CHECK(cli::count_lines(hist) == 41);
}

TEST_CASE("sentinels are dropped before clustering") {
  const auto dir = cli::scratch("cli_na");
  auto values = oracle::sample_mixture(datasets::bimodal, 1000, 4).values;
  values.insert(values.begin() + 10, -9999.0);
  values.insert(values.begin() + 20, -9999.0);
  cli::write_values(dir / "na.csv", values);
  const auto out = dir / "o";
  const auto r = cli::run("run --input \"" + (dir / "na.csv").string() + "\" --na -9999 --out \"" +
                              out.string() + "\"", dir);
  REQUIRE(r.code == 0);
  CHECK(cli::count_lines(cli::slurp(out / "labels.csv")) == 1001);
  const auto j = json::parse(cli::slurp(out / "report.json"));
  CHECK(j["input"]["n_dropped"] == 2);
}
