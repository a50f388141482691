#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace cli {

inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("recluster_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class Range>
inline void write_values(const std::filesystem::path& p, const Range& values,
                         const std::string& header = "value") {
  std::ofstream out(p);
  out.precision(17);
  if (!header.empty()) out << header << '\n';
  for (double v : values) out << v << '\n';
}

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI with `args`, capturing stdout and stderr into files next to `dir`.
inline Result run(const std::string& args, const std::filesystem::path& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + RECLUSTER_CLI + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

inline std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

// report.json without its generated_at line.
inline std::string strip_timestamp(const std::string& json) {
  std::istringstream in(json);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    if (line.find("\"generated_at\"") != std::string::npos) continue;
    out += line + '\n';
  }
  return out;
}

}  // namespace cli
