#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rprecon/error.hpp"
#include "rprecon/io.hpp"
#include "rprecon/objectives.hpp"
#include "rprecon/problems.hpp"
#include "rprecon/schedule.hpp"
#include "rprecon_oracles/checks.hpp"

namespace rprecon::cli {

namespace {

const std::vector<std::string> kEigMetrics{"euclidean", "precond",
                                           "precond-concave"};
const std::vector<std::string> kLyapMetrics{"euclidean", "precond-block"};
const std::vector<std::string> kSchedules{"fixed", "geometric", "adaptive"};
const std::vector<std::string> kProblems{"eig", "lyap"};

std::string join(const std::vector<std::string> &items) {
  std::string out;
  for (const auto &s : items)
    out += (out.empty() ? "" : ", ") + s;
  return out;
}

bool contains(const std::vector<std::string> &items, const std::string &s) {
  return std::find(items.begin(), items.end(), s) != items.end();
}

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::uint64_t> parse_seed_list(const std::string &text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty())
      continue;
    if (item.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("seed-list entries must be non-negative integers");
    seeds.push_back(std::stoull(item));
  }
  if (seeds.empty())
    throw ConfigError("seed-list is empty");
  return seeds;
}

const std::vector<std::string> &metrics_for(const std::string &problem) {
  return problem == "lyap" ? kLyapMetrics : kEigMetrics;
}

std::string problem_of(const RunConfig &cfg) {
  return cfg.command == "bench" ? cfg.problem : cfg.command;
}

// Fills command-dependent defaults and validates every field.
void finalize(RunConfig &cfg) {
  const std::string problem = problem_of(cfg);
  if (cfg.command == "bench" && !contains(kProblems, cfg.problem))
    throw ConfigError("unknown problem '" + cfg.problem +
                      "'; valid options: " + join(kProblems));
  if (cfg.command != "selftest") {
    const auto &valid = metrics_for(problem);
    if (cfg.metric.empty())
      cfg.metric = problem == "lyap" ? "precond-block" : "precond";
    if (!contains(valid, cfg.metric))
      throw ConfigError("unknown metric '" + cfg.metric +
                        "'; valid options: " + join(valid));
    if (cfg.command == "bench") {
      if (cfg.metric_b.empty())
        cfg.metric_b = "euclidean";
      if (!contains(valid, cfg.metric_b))
        throw ConfigError("unknown metric '" + cfg.metric_b +
                          "'; valid options: " + join(valid));
      if (cfg.target == 0.0)
        cfg.target = problem == "lyap" ? 1e-3 : 1e-4;
      if (!(cfg.target > 0.0))
        throw ConfigError("target must be positive");
    }
    if (cfg.schedule.empty())
      cfg.schedule = problem == "lyap" ? "fixed" : "adaptive";
    if (!contains(kSchedules, cfg.schedule))
      throw ConfigError("unknown schedule '" + cfg.schedule +
                        "'; valid options: " + join(kSchedules));
    if (!(cfg.omega >= 0.0 && cfg.omega < 1.0))
      throw ConfigError("omega must lie in [0, 1)");
    if (cfg.matrix_a.empty()) {
      if (cfg.r < 1 || cfg.r > cfg.n || (problem == "lyap" && cfg.n < 2))
        throw ConfigError("need 1 <= r <= n (and n >= 2 for lyap)");
    } else if (cfg.r < 1) {
      throw ConfigError("r must be positive");
    }
    if (problem == "eig" && cfg.matrix_a.empty() &&
        (!cfg.matrix_b.empty() || !cfg.matrix_c.empty()))
      throw ConfigError("--matrix-b needs --matrix-a");
    if (problem == "lyap" && !cfg.matrix_a.empty() && cfg.matrix_c.empty())
      throw ConfigError("a custom Lyapunov problem needs --matrix-c");
    if (cfg.jobs < 1)
      throw ConfigError("jobs must be at least 1");
  } else if (cfg.instances < 1) {
    throw ConfigError("instances must be at least 1");
  }
  try {
    cfg.solver.validate();
  } catch (const Error &e) {
    throw ConfigError(e.what());
  }
  if (cfg.out.empty()) {
    const char *env = std::getenv("RPRECON_OUTPUT_DIR");
    cfg.out = env && *env ? env : "rprecon_out";
  }
}

// Turns the config file into `--key value` tokens, rejecting unknown keys.
std::vector<std::string> config_tokens(const std::filesystem::path &path,
                                       const CLI::App &sub) {
  io::KeyValues kv;
  try {
    kv = io::read_key_values(path);
  } catch (const Error &e) {
    throw ConfigError(e.what());
  }
  std::vector<std::string> tokens;
  for (const auto &[key, value] : kv) {
    if (key == "config")
      throw ConfigError("config files cannot include other config files");
    const CLI::Option *opt = sub.get_option_no_throw("--" + key);
    if (!opt)
      throw ConfigError("unknown config key '" + key + "' for " +
                        sub.get_name());
    if (opt->get_items_expected_max() == 0) {
      if (value == "true" || value == "1")
        tokens.push_back("--" + key);
      else if (value != "false" && value != "0")
        throw ConfigError("flag '" + key + "' takes true or false");
      continue;
    }
    tokens.push_back("--" + key);
    tokens.push_back(value);
  }
  return tokens;
}

StiefelMetricSpec stiefel_spec(const std::string &metric, double omega) {
  if (metric == "euclidean")
    return StiefelMetricSpec::euclidean();
  if (metric == "precond-concave")
    return StiefelMetricSpec::concave_shifted(omega);
  return StiefelMetricSpec::convex_shifted(omega);
}

OmegaSchedule make_schedule(const RunConfig &cfg, const std::string &metric) {
  if (metric == "euclidean" || cfg.schedule == "fixed")
    return OmegaSchedule::fixed(metric == "euclidean" ? 0.0 : cfg.omega);
  if (cfg.schedule == "geometric")
    return OmegaSchedule::geometric_barrier();
  return OmegaSchedule::adaptive_delta();
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::string status;
  bool stalled = false;
  int iters = 0;
  double grad = 0.0;
  double error = 0.0;
  std::string message;
  std::vector<TraceRow> rows;
  Matrix final_point;
};

SeedOutcome from_result(std::uint64_t seed, SolveTrace trace, Matrix final) {
  SeedOutcome o;
  o.seed = seed;
  o.status = std::string(to_string(trace.status));
  o.stalled = trace.status == SolveStatus::Stalled;
  o.iters = trace.iterations();
  if (!trace.rows.empty()) {
    o.grad = trace.rows.back().grad_norm;
    o.error = trace.rows.back().error_measure;
  }
  o.rows = std::move(trace.rows);
  o.final_point = std::move(final);
  return o;
}

// A solved problem instance able to run one seed with one metric.
class Runner {
public:
  virtual ~Runner() = default;
  virtual SeedOutcome solve(std::uint64_t seed, const std::string &metric) const = 0;
};

class EigRunner : public Runner {
public:
  EigRunner(const RunConfig &cfg) : cfg_(cfg) {
    if (cfg.matrix_a.empty()) {
      prob_ = manton_eig(cfg.n, cfg.r);
    } else {
      prob_.a = io::read_matrix_market(cfg.matrix_a);
      const Index n = prob_.a.rows();
      prob_.b = cfg.matrix_b.empty() ? Matrix(Matrix::Identity(n, n))
                                     : io::read_matrix_market(cfg.matrix_b);
      prob_.r = cfg.r;
      prob_.validate();
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(prob_.a, prob_.b);
      prob_.known_solution = ges.eigenvectors().leftCols(cfg.r);
    }
    prob_.validate();
    manifold_.emplace(prob_.a, prob_.b, prob_.r);
  }

  SeedOutcome solve(std::uint64_t seed, const std::string &metric) const override {
    StiefelObjective objective(*manifold_, stiefel_spec(metric, cfg_.omega),
                               prob_.known_solution);
    SolverConfig sc = cfg_.solver;
    sc.seed = seed;
    auto res = rsd_solve(objective, objective.initial_point(seed),
                         make_schedule(cfg_, metric), sc);
    return from_result(seed, std::move(res.trace), res.final_point.x());
  }

private:
  RunConfig cfg_;
  EigProblem prob_;
  std::optional<GeneralizedStiefel> manifold_;
};

class LyapRunner : public Runner {
public:
  LyapRunner(const RunConfig &cfg) : cfg_(cfg) {
    if (cfg.matrix_a.empty()) {
      prob_ = penzl_lyap(cfg.n, cfg.r);
    } else {
      Matrix a = io::read_matrix_market(cfg.matrix_a);
      const Index n = a.rows();
      Matrix b = cfg.matrix_b.empty() ? Matrix(Matrix::Identity(n, n))
                                      : io::read_matrix_market(cfg.matrix_b);
      Matrix c = io::read_matrix_market(cfg.matrix_c);
      prob_ = make_lyap_problem(std::move(a), std::move(b), std::move(c), cfg.r);
    }
    prob_.validate();
    geometry_.emplace(prob_.a, prob_.b, prob_.c);
  }

  SeedOutcome solve(std::uint64_t seed, const std::string &metric) const override {
    const auto family = metric == "euclidean"
                            ? PsdMetricSpec::Family::Euclidean
                            : PsdMetricSpec::Family::Preconditioned;
    PsdObjective objective(*geometry_, family, &prob_);
    SolverConfig sc = cfg_.solver;
    sc.seed = seed;
    auto res = rsd_solve(objective, objective.initial_point(seed, prob_.r),
                         make_schedule(cfg_, metric), sc);
    return from_result(seed, std::move(res.trace), std::move(res.final_point));
  }

private:
  RunConfig cfg_;
  LyapProblem prob_;
  std::optional<PsdGeometry> geometry_;
};

std::unique_ptr<Runner> make_runner(const RunConfig &cfg) {
  if (problem_of(cfg) == "lyap")
    return std::make_unique<LyapRunner>(cfg);
  return std::make_unique<EigRunner>(cfg);
}

// Runs task(i) for i in [0, count) on up to `jobs` threads.
template <class Task> void parallel_for(int count, int jobs, const Task &task) {
  const int workers = std::max(1, std::min(jobs, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i)
      task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++)
        task(i);
    });
  for (auto &t : pool)
    t.join();
}

SeedOutcome solve_guarded(const Runner &runner, std::uint64_t seed,
                          const std::string &metric) {
  try {
    return runner.solve(seed, metric);
  } catch (const Error &e) {
    SeedOutcome o;
    o.seed = seed;
    o.status = "Error";
    o.stalled = true;
    o.message = e.what();
    return o;
  }
}

void write_sidecar(const RunConfig &cfg) {
  std::ofstream f(sidecar_path(cfg));
  f << "# rprecon " << cfg.command << '\n' << to_key_values(cfg);
}

int run_solver_command(const RunConfig &cfg, std::ostream &out,
                       std::ostream &err) {
  std::unique_ptr<Runner> runner;
  try {
    runner = make_runner(cfg);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  std::filesystem::create_directories(cfg.out);
  write_sidecar(cfg);

  std::vector<SeedOutcome> outcomes(cfg.seeds.size());
  parallel_for(static_cast<int>(cfg.seeds.size()), cfg.jobs, [&](int i) {
    const std::uint64_t seed = cfg.seeds[static_cast<std::size_t>(i)];
    SeedOutcome o = solve_guarded(*runner, seed, cfg.metric);
    if (o.status != "Error") {
      SolveTrace trace;
      trace.rows = o.rows;
      io::write_trace_csv(trace_path(cfg, seed), trace);
      io::write_matrix_market(final_point_path(cfg, seed), o.final_point);
    }
    outcomes[static_cast<std::size_t>(i)] = std::move(o);
  });

  const char *error_col = cfg.command == "lyap" ? "final_residual" : "final_distance";
  std::ofstream summary(summary_path(cfg));
  summary << "seed,status,iters,final_grad_norm," << error_col << '\n';
  bool any_stall = false;
  for (const SeedOutcome &o : outcomes) {
    summary << o.seed << ',' << o.status << ',' << o.iters << ','
            << io::format_double(o.grad) << ',' << io::format_double(o.error)
            << '\n';
    out << "seed " << o.seed << ": " << o.status << " after " << o.iters
        << " iterations, grad " << io::format_double(o.grad) << ", "
        << error_col << ' ' << io::format_double(o.error) << '\n';
    if (!o.message.empty())
      err << "seed " << o.seed << ": " << o.message << '\n';
    any_stall = any_stall || o.stalled;
  }
  return any_stall ? kStalled : kOk;
}

std::string safe(const std::string &s) {
  std::string out = s;
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

std::string prefix(const RunConfig &cfg) {
  return cfg.command + "_" + safe(cfg.metric);
}

} // namespace

std::filesystem::path trace_path(const RunConfig &cfg, std::uint64_t seed) {
  return cfg.out / (prefix(cfg) + "_seed" + std::to_string(seed) + ".csv");
}

std::filesystem::path final_point_path(const RunConfig &cfg,
                                       std::uint64_t seed) {
  return cfg.out /
         (prefix(cfg) + "_seed" + std::to_string(seed) + "_final.mtx");
}

std::filesystem::path summary_path(const RunConfig &cfg) {
  return cfg.out / (prefix(cfg) + "_summary.csv");
}

std::filesystem::path sidecar_path(const RunConfig &cfg) {
  if (cfg.command == "bench")
    return cfg.out / ("bench_" + cfg.problem + "_config.txt");
  return cfg.out / (prefix(cfg) + "_config.txt");
}

std::string to_key_values(const RunConfig &cfg) {
  std::ostringstream s;
  auto put = [&](const char *key, const auto &value) {
    s << key << " = " << value << '\n';
  };
  if (cfg.command == "selftest") {
    put("instances", cfg.instances);
    put("seed-list", cfg.seeds.empty() ? 1 : cfg.seeds.front());
    return s.str();
  }
  if (cfg.command == "bench") {
    put("problem", cfg.problem);
    put("metric-b", cfg.metric_b);
    put("target", io::format_double(cfg.target));
  }
  put("n", cfg.n);
  put("r", cfg.r);
  put("metric", cfg.metric);
  put("omega", io::format_double(cfg.omega));
  put("schedule", cfg.schedule);
  std::string seeds;
  for (auto v : cfg.seeds)
    seeds += (seeds.empty() ? "" : ",") + std::to_string(v);
  put("seed-list", seeds);
  put("max-iters", cfg.solver.max_iters);
  put("grad-tol", io::format_double(cfg.solver.grad_tol));
  put("armijo-c", io::format_double(cfg.solver.armijo_c));
  put("backtrack", io::format_double(cfg.solver.backtrack_factor));
  put("max-backtracks", cfg.solver.max_backtracks);
  put("initial-step", io::format_double(cfg.solver.initial_step));
  put("no-timing", cfg.solver.record_time ? "false" : "true");
  put("out", cfg.out.string());
  if (!cfg.matrix_a.empty())
    put("matrix-a", cfg.matrix_a);
  if (!cfg.matrix_b.empty())
    put("matrix-b", cfg.matrix_b);
  if (!cfg.matrix_c.empty())
    put("matrix-c", cfg.matrix_c);
  return s.str();
}

ParseOutcome parse_args(const std::vector<std::string> &args, std::ostream &out,
                        std::ostream &err) {
  RunConfig cfg;
  CLI::App app{"Riemannian preconditioned steepest descent on quotient "
               "manifolds"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string seed_list;
  int seed_count = 0;
  bool no_timing = false;
  std::string config_path;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path,
                    "key = value file; flags given here take precedence");
    sub->add_option("--seed-list", seed_list, "comma-separated seeds");
  };
  auto add_solver = [&](CLI::App *sub) {
    sub->add_option("--n", cfg.n, "problem size")->capture_default_str();
    sub->add_option("--r", cfg.r, "rank / subspace dimension")
        ->capture_default_str();
    sub->add_option("--omega", cfg.omega, "omega for the fixed schedule")
        ->capture_default_str();
    sub->add_option("--schedule", cfg.schedule, join(kSchedules));
    sub->add_option("--seeds", seed_count, "run seeds 1..N");
    sub->add_option("--max-iters", cfg.solver.max_iters)->capture_default_str();
    sub->add_option("--grad-tol", cfg.solver.grad_tol)->capture_default_str();
    sub->add_option("--armijo-c", cfg.solver.armijo_c)->capture_default_str();
    sub->add_option("--backtrack", cfg.solver.backtrack_factor,
                    "step reduction factor")
        ->capture_default_str();
    sub->add_option("--max-backtracks", cfg.solver.max_backtracks)
        ->capture_default_str();
    sub->add_option("--initial-step", cfg.solver.initial_step)
        ->capture_default_str();
    sub->add_option("--out", cfg.out,
                    "output directory (default $RPRECON_OUTPUT_DIR or "
                    "rprecon_out)");
    sub->add_option("--matrix-a", cfg.matrix_a, "MatrixMarket file for A");
    sub->add_option("--matrix-b", cfg.matrix_b, "MatrixMarket file for B");
    sub->add_option("--matrix-c", cfg.matrix_c, "MatrixMarket file for C");
    sub->add_flag("--no-timing", no_timing, "write 0 into elapsed_ms");
    sub->add_option("--jobs", cfg.jobs, "seeds solved in parallel")
        ->capture_default_str();
    add_common(sub);
  };

  CLI::App *eig = app.add_subcommand("eig", "generalized eigenproblem");
  eig->add_option("--metric", cfg.metric, join(kEigMetrics));
  add_solver(eig);
  CLI::App *lyap = app.add_subcommand("lyap", "low-rank Lyapunov equation");
  lyap->add_option("--metric", cfg.metric, join(kLyapMetrics));
  add_solver(lyap);
  CLI::App *bench = app.add_subcommand("bench", "paired-seed metric comparison");
  bench->add_option("--problem", cfg.problem, join(kProblems))
      ->capture_default_str();
  bench->add_option("--metric", cfg.metric, "first metric");
  bench->add_option("--metric-b", cfg.metric_b, "second metric");
  bench->add_option("--target", cfg.target, "error level to race to");
  add_solver(bench);
  CLI::App *selftest = app.add_subcommand("selftest", "oracle suite");
  selftest->add_option("--instances", cfg.instances, "instances per check")
      ->capture_default_str();
  add_common(selftest);

  // Splice the config file in front of the remaining flags.
  std::vector<std::string> tokens = args;
  try {
    if (!tokens.empty()) {
      CLI::App *sub = nullptr;
      for (CLI::App *s : {eig, lyap, bench, selftest})
        if (s->get_name() == tokens.front())
          sub = s;
      for (std::size_t i = 1; sub && i < tokens.size(); ++i) {
        std::string path;
        std::size_t drop = 0;
        if (tokens[i] == "--config" && i + 1 < tokens.size()) {
          path = tokens[i + 1];
          drop = 2;
        } else if (tokens[i].rfind("--config=", 0) == 0) {
          path = tokens[i].substr(9);
          drop = 1;
        }
        if (drop == 0)
          continue;
        const auto extra = config_tokens(path, *sub);
        tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                     tokens.begin() + static_cast<std::ptrdiff_t>(i + drop));
        tokens.insert(tokens.begin() + 1, extra.begin(), extra.end());
        break;
      }
    }
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return {std::nullopt, code == 0 ? kOk : kConfigError};
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return {std::nullopt, kConfigError};
  }

  for (CLI::App *s : {eig, lyap, bench, selftest})
    if (s->parsed())
      cfg.command = s->get_name();
  try {
    if (!seed_list.empty())
      cfg.seeds = parse_seed_list(seed_list);
    else if (seed_count > 0) {
      cfg.seeds.clear();
      for (int s = 1; s <= seed_count; ++s)
        cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    } else if (seed_count < 0) {
      throw ConfigError("seeds must be positive");
    }
    cfg.solver.record_time = !no_timing;
    finalize(cfg);
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return {std::nullopt, kConfigError};
  }
  return {cfg, kOk};
}

int run_eig(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  return run_solver_command(cfg, out, err);
}

int run_lyap(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  return run_solver_command(cfg, out, err);
}

int run_bench(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  std::unique_ptr<Runner> runner;
  try {
    runner = make_runner(cfg);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  std::filesystem::create_directories(cfg.out);
  write_sidecar(cfg);

  const std::vector<std::string> metrics{cfg.metric, cfg.metric_b};
  const std::size_t runs = cfg.seeds.size() * 2;
  std::vector<SeedOutcome> outcomes(runs);
  parallel_for(static_cast<int>(runs), cfg.jobs, [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    outcomes[k] = solve_guarded(*runner, cfg.seeds[k / 2], metrics[k % 2]);
  });

  // Wide CSV: one error column per (seed, metric); blank once a run ended.
  std::size_t longest = 0;
  for (const auto &o : outcomes)
    longest = std::max(longest, o.rows.size());
  std::ofstream wide(cfg.out / ("bench_" + cfg.problem + "_wide.csv"));
  wide << "iter";
  for (std::size_t k = 0; k < runs; ++k)
    wide << ",seed" << outcomes[k].seed << '_' << safe(metrics[k % 2]);
  wide << '\n';
  for (std::size_t it = 0; it < longest; ++it) {
    wide << it;
    for (const auto &o : outcomes) {
      wide << ',';
      if (it < o.rows.size())
        wide << io::format_double(o.rows[it].error_measure);
    }
    wide << '\n';
  }

  auto first_hit = [&](const SeedOutcome &o) -> std::optional<int> {
    for (const TraceRow &row : o.rows)
      if (row.error_measure <= cfg.target)
        return row.iter;
    return std::nullopt;
  };
  auto describe = [](const std::optional<int> &hit) {
    return hit ? "iter " + std::to_string(*hit) : std::string("not reached");
  };
  std::ofstream verdicts(cfg.out / ("bench_" + cfg.problem + "_verdicts.txt"));
  bool any_stall = false;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    const SeedOutcome &oa = outcomes[2 * s];
    const SeedOutcome &ob = outcomes[2 * s + 1];
    const auto ha = first_hit(oa);
    const auto hb = first_hit(ob);
    std::string who;
    if (!ha && !hb)
      who = "neither metric reached";
    else if (ha && (!hb || *ha < *hb))
      who = metrics[0] + " reached";
    else if (hb && (!ha || *hb < *ha))
      who = metrics[1] + " reached";
    else
      who = "both metrics reached";
    std::ostringstream line;
    line << "seed " << cfg.seeds[s] << ": " << who << ' '
         << io::format_double(cfg.target) << (ha && hb && *ha == *hb ? " together" : (ha || hb ? " first" : ""))
         << " (" << metrics[0] << ' ' << describe(ha) << ", " << metrics[1]
         << ' ' << describe(hb) << ")";
    out << line.str() << '\n';
    verdicts << line.str() << '\n';
    for (const SeedOutcome *o : {&oa, &ob}) {
      if (!o->message.empty())
        err << "seed " << o->seed << ": " << o->message << '\n';
      any_stall = any_stall || o->stalled;
    }
  }
  return any_stall ? kStalled : kOk;
}

int run_selftest(const RunConfig &cfg, std::ostream &out, std::ostream &) {
  const std::uint64_t seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
  std::vector<checks::CheckResult> all;
  for (auto battery : {checks::oracle_equivalences, checks::invariance_battery,
                       checks::gradient_checks}) {
    auto part = battery(cfg.instances, seed);
    all.insert(all.end(), part.begin(), part.end());
  }
  const bool ok = checks::print_table(all, out);
  out << (ok ? "selftest: all checks passed" : "selftest: FAILED") << '\n';
  return ok ? kOk : kFailure;
}

int run(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  try {
    if (cfg.command == "eig")
      return run_eig(cfg, out, err);
    if (cfg.command == "lyap")
      return run_lyap(cfg, out, err);
    if (cfg.command == "bench")
      return run_bench(cfg, out, err);
    if (cfg.command == "selftest")
      return run_selftest(cfg, out, err);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::filesystem::filesystem_error &e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  err << "unknown command '" << cfg.command << "'\n";
  return kConfigError;
}

int main_entry(const std::vector<std::string> &args, std::ostream &out,
               std::ostream &err) {
  ParseOutcome parsed = parse_args(args, out, err);
  if (!parsed.config)
    return parsed.exit_code;
  return run(*parsed.config, out, err);
}

} // namespace rprecon::cli
