#include "test_support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "rprecon/io.hpp"
#include "rprecon/problems.hpp"

using namespace rprecon;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("rprecon_cli_" + name);
  fs::remove_all(p);
  return p;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

cli::RunConfig parsed(std::vector<std::string> args) {
  std::ostringstream out, err;
  auto res = cli::parse_args(args, out, err);
  REQUIRE(res.config.has_value());
  return *res.config;
}

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path &p) {
  std::ifstream f(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

} // namespace

TEST_CASE("defaults and precedence") {
  const auto eig = parsed({"eig"});
  CHECK(eig.n == 500);
  CHECK(eig.r == 5);
  CHECK(eig.metric == "precond");
  CHECK(eig.schedule == "adaptive");
  CHECK(eig.solver.max_iters == 500);
  CHECK(eig.solver.grad_tol == 1e-8);
  CHECK(eig.seeds == std::vector<std::uint64_t>{1});

  const auto lyap = parsed({"lyap"});
  CHECK(lyap.metric == "precond-block");
  CHECK(lyap.schedule == "fixed");

  CHECK(parsed({"eig", "--seeds", "3"}).seeds ==
        std::vector<std::uint64_t>{1, 2, 3});
  CHECK(parsed({"eig", "--seed-list", "4,9"}).seeds ==
        std::vector<std::uint64_t>{4, 9});

  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# settings\nn = 30\nmetric = euclidean\nr = 2\n";
  const auto from_file = parsed({"eig", "--config", cfg.string()});
  CHECK(from_file.n == 30);
  CHECK(from_file.r == 2);
  CHECK(from_file.metric == "euclidean");
  const auto overridden =
      parsed({"eig", "--n", "12", "--config", cfg.string(), "--metric",
              "precond"});
  CHECK(overridden.n == 12);
  CHECK(overridden.r == 2);
  CHECK(overridden.metric == "precond");

  std::ofstream(dir / "bad.cfg") << "n = 30\ncolour = blue\n";
  CHECK(invoke({"eig", "--config", (dir / "bad.cfg").string()}).code ==
        cli::kConfigError);
  fs::remove_all(dir);
}

TEST_CASE("configuration errors exit with 2") {
  const auto bad_metric = invoke({"lyap", "--metric", "precond-full"});
  CHECK(bad_metric.code == cli::kConfigError);
  CHECK(bad_metric.err.find("precond-block") != std::string::npos);
  CHECK(bad_metric.err.find("euclidean") != std::string::npos);
  CHECK(invoke({"eig", "--bogus"}).code == cli::kConfigError);
  CHECK(invoke({}).code == cli::kConfigError);
  CHECK(invoke({"eig", "--r", "0"}).code == cli::kConfigError);
  CHECK(invoke({"eig", "--schedule", "sometimes"}).code == cli::kConfigError);
  CHECK(invoke({"eig", "--config", "/nonexistent/file.cfg"}).code ==
        cli::kConfigError);
  CHECK(invoke({"eig", "--help"}).code == cli::kOk);
}

TEST_CASE("eig on the smallest Manton instance") {
  const fs::path out = scratch("eig_small");
  const auto res = invoke({"eig", "--n", "2", "--r", "1", "--metric",
                           "euclidean", "--seeds", "1", "--out", out.string()});
  CHECK(res.code == cli::kOk);
  const auto cfg = parsed({"eig", "--n", "2", "--r", "1", "--metric",
                           "euclidean", "--out", out.string()});
  const Matrix x = io::read_matrix_market(cli::final_point_path(cfg, 1));
  CHECK(subspace_distance(x, test::unit(2, 0)) <= 1e-8);
  fs::remove_all(out);
}

TEST_CASE("summary matches the stored final iterates") {
  const fs::path out = scratch("eig_summary");
  const std::vector<std::string> args{"eig",     "--n",   "60",  "--r",
                                      "3",       "--seeds", "2", "--out",
                                      out.string(), "--no-timing"};
  const auto res = invoke(args);
  REQUIRE(res.code == cli::kOk);
  const auto cfg = parsed(args);
  const auto rows = read_csv(cli::summary_path(cfg));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"seed", "status", "iters",
                                            "final_grad_norm",
                                            "final_distance"});
  const EigProblem prob = manton_eig(60, 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto seed = static_cast<std::uint64_t>(std::stoull(rows[i][0]));
    CHECK(rows[i][1] == "Converged");
    const Matrix x = io::read_matrix_market(cli::final_point_path(cfg, seed));
    CHECK(subspace_distance(x, *prob.known_solution) ==
          io::parse_double(rows[i][4]));

    const auto trace = io::read_trace_csv(cli::trace_path(cfg, seed));
    REQUIRE(!trace.empty());
    CHECK(trace.back().iter == std::stoi(rows[i][2]));
    CHECK(trace.back().error_measure == io::parse_double(rows[i][4]));
    for (const auto &row : trace)
      CHECK(row.elapsed_ms == 0.0);
  }

  // the sidecar reproduces the run configuration
  const auto again = parsed({"eig", "--config", cli::sidecar_path(cfg).string()});
  CHECK(cli::to_key_values(again) == cli::to_key_values(cfg));
  fs::remove_all(out);
}

TEST_CASE("repeated runs write identical files") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  for (const auto &dir : {a, b}) {
    CHECK(invoke({"lyap", "--n", "40", "--r", "3", "--seeds", "2",
                  "--max-iters", "40", "--no-timing", "--jobs", "2", "--out",
                  dir.string()})
              .code == cli::kOk);
  }
  const auto cfg_a = parsed({"lyap", "--out", a.string()});
  const auto cfg_b = parsed({"lyap", "--out", b.string()});
  for (std::uint64_t seed : {1u, 2u}) {
    CHECK(slurp(cli::trace_path(cfg_a, seed)) ==
          slurp(cli::trace_path(cfg_b, seed)));
    CHECK(slurp(cli::final_point_path(cfg_a, seed)) ==
          slurp(cli::final_point_path(cfg_b, seed)));
  }
  CHECK(slurp(cli::summary_path(cfg_a)) == slurp(cli::summary_path(cfg_b)));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("full-rank Lyapunov run is exact") {
  const fs::path out = scratch("lyap_full");
  const std::vector<std::string> args{"lyap", "--n", "20", "--r", "20",
                                      "--out", out.string()};
  CHECK(invoke(args).code == cli::kOk);
  const auto rows = read_csv(cli::summary_path(parsed(args)));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][4] == "final_residual");
  CHECK(io::parse_double(rows[1][4]) <= 1e-8);
  fs::remove_all(out);
}

TEST_CASE("custom matrices from MatrixMarket files") {
  const fs::path dir = scratch("custom");
  fs::create_directories(dir);
  auto normal = test::source(700);
  const Matrix a = oracle::random_spd(15, normal);
  io::write_matrix_market(dir / "a.mtx", a);
  const auto res = invoke({"eig", "--matrix-a", (dir / "a.mtx").string(),
                           "--r", "2", "--out", (dir / "out").string()});
  CHECK(res.code == cli::kOk);
  const auto cfg = parsed({"eig", "--r", "2", "--out", (dir / "out").string()});
  const auto rows = read_csv(cli::summary_path(cfg));
  REQUIRE(rows.size() == 2);
  CHECK(io::parse_double(rows[1][4]) <= 1e-6);

  CHECK(invoke({"lyap", "--matrix-a", (dir / "a.mtx").string(), "--out",
                (dir / "out").string()})
            .code == cli::kConfigError);
  CHECK(invoke({"eig", "--matrix-a", (dir / "missing.mtx").string(), "--out",
                (dir / "out").string()})
            .code != cli::kOk);
  fs::remove_all(dir);
}

TEST_CASE("bench and selftest") {
  const fs::path out = scratch("bench");
  const auto res = invoke({"bench", "--n", "80", "--r", "2", "--seeds", "2",
                           "--max-iters", "60", "--out", out.string()});
  CHECK(res.code == cli::kOk);
  const auto wide = read_csv(out / "bench_eig_wide.csv");
  REQUIRE(!wide.empty());
  CHECK(wide[0].size() == 5);
  CHECK(wide[0][0] == "iter");
  CHECK(slurp(out / "bench_eig_verdicts.txt").find("seed 2") !=
        std::string::npos);
  fs::remove_all(out);

  const auto st = invoke({"selftest", "--instances", "2"});
  CHECK(st.code == cli::kOk);
  CHECK(st.out.find("all checks passed") != std::string::npos);
}

TEST_CASE("output directory from the environment") {
  const fs::path out = scratch("env");
  ::setenv("RPRECON_OUTPUT_DIR", out.string().c_str(), 1);
  const auto cfg = parsed({"eig"});
  ::unsetenv("RPRECON_OUTPUT_DIR");
  CHECK(cfg.out == out);
  CHECK(parsed({"eig", "--out", "elsewhere"}).out == fs::path("elsewhere"));
}
