#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = SYMBERG_CLI_PATH;
const std::string kModels = SYMBERG_MODELS_DIR;

struct RunResult {
  int code = -1;
  std::string output;
};

// Runs the CLI with stdout and stderr merged.
RunResult run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string model(const std::string& name) { return "--model " + kModels + "/" + name; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::map<std::string, std::string>> rows;
  double num(size_t row, const std::string& col) const { return std::stod(rows.at(row).at(col)); }
};

// Parses the first table in `text`, stopping at a blank line.
Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      if (!csv.columns.empty()) break;
      continue;
    }
    if (line[0] == '#') {
      if (csv.columns.empty()) csv.comments.push_back(line);
      continue;
    }
    const std::vector<std::string> cells = split_csv_line(line);
    if (csv.columns.empty()) {
      csv.columns = cells;
      continue;
    }
    REQUIRE(cells.size() == csv.columns.size());
    std::map<std::string, std::string> row;
    for (size_t i = 0; i < cells.size(); ++i) row[csv.columns[i]] = cells[i];
    csv.rows.push_back(row);
  }
  return csv;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("symberg_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("output header carries version, seed and conventions hash") {
  const RunResult r = run("coeffs " + model("fs_line1_flat.json") + " --k 2 --order 1 --seed 7");
  REQUIRE(r.code == 0);
  const Csv csv = parse_csv(r.output);
  REQUIRE(csv.comments.size() >= 4);
  CHECK(csv.comments[0].rfind("# symberg ", 0) == 0);
  CHECK(csv.comments[2] == "# seed 7");
  CHECK(csv.comments[3].rfind("# conventions fnv1a64:", 0) == 0);
  CHECK(csv.comments[3].size() == std::string("# conventions fnv1a64:").size() + 16);
}

TEST_CASE("coeffs on the flat local form gives b0 = 1 at every k") {
  const RunResult r = run("coeffs " + model("fs_line1_flat.json") + " --k-range 2:8 --order 1");
  REQUIRE(r.code == 0);
  const Csv csv = parse_csv(r.output);
  REQUIRE(csv.rows.size() == 14);
  int b0_rows = 0;
  for (size_t i = 0; i < csv.rows.size(); ++i) {
    CHECK(csv.num(i, "agreement") < 1e-10);
    if (csv.rows[i].at("m") == "0") {
      ++b0_rows;
      CHECK(std::abs(csv.num(i, "recursion_norm") - 1.0) < 1e-12);
    }
  }
  CHECK(b0_rows == 7);
}

TEST_CASE("coeffs on a Hermitian-Einstein model is scalar in every row") {
  const RunResult r = run("coeffs " + model("hermitian_einstein.json") + " --k 2,3 --order 3 --points 0:0,0.3:-0.2");
  REQUIRE(r.code == 0);
  const Csv csv = parse_csv(r.output);
  REQUIRE(csv.rows.size() == 16);
  for (size_t i = 0; i < csv.rows.size(); ++i) CHECK(csv.num(i, "scalar_defect") < 1e-8);
}

TEST_CASE("compare table has the contract columns and one row per point for a single k") {
  const RunResult r = run("compare " + model("fs_line1_eps05.json") + " --k 6 --order 1 --points 0,0.2:0.1,0:0.5");
  REQUIRE(r.code == 0);
  const Csv csv = parse_csv(r.output);
  CHECK(csv.columns ==
        std::vector<std::string>{"model", "k", "x_re", "x_im", "residual_op_norm", "b0k_norm", "fitted_exponent"});
  CHECK(csv.rows.size() == 3);
}

TEST_CASE("compare sweep decays at the expected rate and writes plot data") {
  const fs::path dir = scratch("decay");
  const RunResult r = run("compare " + model("fs_line1_eps05.json") +
                          " --k-range 5:30:5 --order 1 --points 0,0.4 --out " + dir.string());
  REQUIRE(r.code == 0);
  const Csv csv = parse_csv(read_file(dir / "compare.csv"));
  REQUIRE(csv.rows.size() == 12);
  for (size_t i = 0; i < csv.rows.size(); ++i) CHECK(csv.num(i, "fitted_exponent") <= -0.8);
  for (int p = 0; p < 2; ++p) {
    const fs::path plot = dir / ("compare_plot_" + std::to_string(p) + ".dat");
    REQUIRE(fs::exists(plot));
    const Csv pd = parse_csv(read_file(plot));
    CHECK(pd.columns == std::vector<std::string>{"k", "log_k", "log_residual"});
    CHECK(pd.rows.size() == 6);
  }
  fs::remove_all(dir);
}

TEST_CASE("untwisted tensor model uses the diagonal Gram path and matches the split sum") {
  const fs::path dir = scratch("split");
  fs::create_directories(dir);
  std::ofstream(dir / "o1o1.json") << R"({"kind": "direct_sum", "summands": [{"d": 1}, {"d": 1}]})";
  const RunResult a = run("compare " + model("hermitian_einstein.json") + " --k 3,5 --order 1 --points 0.2:0.1");
  const RunResult b =
      run("compare --model " + (dir / "o1o1.json").string() + " --k 3,5 --order 1 --points 0.2:0.1");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const Csv ca = parse_csv(a.output), cb = parse_csv(b.output);
  CHECK(std::find(ca.comments.begin(), ca.comments.end(), "# gram_path diagonal") != ca.comments.end());
  REQUIRE(ca.rows.size() == cb.rows.size());
  for (size_t i = 0; i < ca.rows.size(); ++i)
    CHECK(ca.num(i, "residual_op_norm") == doctest::Approx(cb.num(i, "residual_op_norm")).epsilon(1e-10));
  fs::remove_all(dir);
}

TEST_CASE("riemann-roch table") {
  const RunResult r = run("rr " + model("o1_plus_o2.json") + " --k 4,6 --quad-radial 64 --quad-angular 64");
  REQUIRE(r.code == 0);
  const Csv csv = parse_csv(r.output);
  CHECK(csv.columns ==
        std::vector<std::string>{"model", "k", "d_k", "predicted", "error", "error_times_k_over_rk"});
  REQUIRE(csv.rows.size() == 2);
  CHECK(csv.rows[0].at("d_k") == "35");
  CHECK(std::abs(csv.num(0, "error")) < 1e-8);
}

TEST_CASE("identical runs give byte-identical files") {
  for (const std::string fmt : {"csv", "json"}) {
    const fs::path a = scratch("bytes_a"), b = scratch("bytes_b");
    const std::string args = "compare " + model("twisted.json") +
                             " --k 2,3 --points 0.1:0.1 --quad-radial 48 --quad-angular 48 --format " + fmt;
    REQUIRE(run(args + " --out " + a.string()).code == 0);
    REQUIRE(run(args + " --out " + b.string()).code == 0);
    const std::string name = "compare." + fmt;
    CHECK(!read_file(a / name).empty());
    CHECK(read_file(a / name) == read_file(b / name));
    CHECK(read_file(a / "compare_plot_0.dat") == read_file(b / "compare_plot_0.dat"));
    const RunResult r1 = run("bergman " + model("twisted.json") + " --k 2 --points 0.1 --format " + fmt);
    const RunResult r2 = run("bergman " + model("twisted.json") + " --k 2 --points 0.1 --format " + fmt);
    CHECK(r1.output == r2.output);
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("json output mirrors the csv rows") {
  const RunResult c = run("rr " + model("fs_line1.json") + " --k 3 --quad-radial 48 --quad-angular 48");
  const RunResult j = run("rr " + model("fs_line1.json") + " --k 3 --quad-radial 48 --quad-angular 48 --format json");
  REQUIRE(c.code == 0);
  REQUIRE(j.code == 0);
  for (const char* key : {"\"model\"", "\"k\"", "\"d_k\"", "\"predicted\"", "\"error\"", "\"error_times_k_over_rk\"",
                          "\"seed\": 42", "\"conventions\""})
    CHECK(j.output.find(key) != std::string::npos);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"kind": "fs_line", "degree": 1})";
  std::ofstream(dir / "broken.json") << R"({"kind": )";

  RunResult r = run("bergman --model " + (dir / "bad.json").string() + " --k 2");
  CHECK(r.code == 2);
  CHECK(r.output.find("unknown key 'degree'") != std::string::npos);
  r = run("bergman --model " + (dir / "broken.json").string() + " --k 2");
  CHECK(r.code == 2);
  CHECK(r.output.find("invalid JSON") != std::string::npos);
  CHECK(run("bergman --model " + (dir / "missing.json").string() + " --k 2").code == 2);
  CHECK(run("bergman " + model("fs_line1.json")).code == 2);
  CHECK(run("compare " + model("fs_line1.json") + " --k 3 --order 9").code == 2);
  CHECK(run("compare " + model("fs_line1_flat.json") + " --k 3").code == 2);
  CHECK(run("compare " + model("fs_line1.json") + " --k 3 --points 0.1:x").code == 2);
  CHECK(run("frobnicate").code == 2);

  r = run("bergman " + model("fs_line1.json") + " --k 10 --quad-radial 2 --quad-angular 2");
  CHECK(r.code == 3);
  CHECK(r.output.find("domain error") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("selftest command") {
  RunResult r = run("selftest");
  CHECK(r.code == 0);
  CHECK(r.output.find("FAIL") == std::string::npos);
  CHECK(r.output.find(" s\n") != std::string::npos);

  r = run("selftest --filter diastatic --flip-lambdaF");
  CHECK(r.code == 1);
  CHECK(r.output.find("FAIL  diastatic  curvature link") != std::string::npos);

  r = run("selftest --filter sympow");
  CHECK(r.code == 0);
  std::istringstream in(r.output);
  std::string line;
  int checks = 0;
  while (std::getline(in, line))
    if (line.rfind("PASS", 0) == 0) {
      ++checks;
      CHECK(line.find("sympow") != std::string::npos);
    }
  CHECK(checks == 3);

  CHECK(run("selftest --filter nope").code == 2);
}
