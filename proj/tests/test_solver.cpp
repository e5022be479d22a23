#include "test_support.hpp"

#include <cmath>
#include <random>

#include "rprecon/error.hpp"
#include "rprecon/objectives.hpp"
#include "rprecon/problems.hpp"
#include "rprecon/solver.hpp"

using namespace rprecon;

namespace {

// One-dimensional f(x) = (x - 1)^2 whose direction solve fails for any
// omega above a threshold, or never yields descent.
struct ScalarObjective {
  using Point = double;
  using Tangent = double;

  double fail_above = 1.0;
  bool never_descent = false;

  double cost(double x) const { return (x - 1.0) * (x - 1.0); }
  Direction<double> direction(double x, double omega) const {
    if (omega > fail_above)
      fail(ErrorCode::SingularShift, "mock shift");
    const double g = 2.0 * (x - 1.0);
    const double zeta = never_descent ? g + 1.0 : -0.5 * g;
    return {zeta, g * zeta};
  }
  double retract(double x, double t, double s) const { return x + s * t; }
  double error_measure(double x) const { return std::abs(x - 1.0); }
};

static_assert(RiemannianObjective<ScalarObjective>);
static_assert(RiemannianObjective<StiefelObjective>);
static_assert(RiemannianObjective<PsdObjective>);
static_assert(RiemannianObjective<GhObjective>);

SolverConfig quiet(int max_iters = 500) {
  SolverConfig cfg;
  cfg.max_iters = max_iters;
  cfg.record_time = false;
  return cfg;
}

void check_monotone(const SolveTrace &trace) {
  for (std::size_t i = 1; i < trace.rows.size(); ++i)
    CHECK(trace.rows[i].cost <= trace.rows[i - 1].cost +
                                    roundoff_slack(trace.rows[i - 1].cost));
}

} // namespace

TEST_CASE("omega_next") {
  auto s = OmegaSchedule::adaptive_delta();
  CHECK(s.omega() == 0.0);
  auto up = omega_next(s, DirectionEvent::Descent);
  CHECK(up.schedule.delta == 0.5);
  CHECK(up.omega == 0.5);

  auto down = omega_next(up.schedule, DirectionEvent::NonDescent);
  CHECK(down.schedule.delta == 2.0);
  CHECK(down.omega == 0.0);

  auto g = OmegaSchedule::geometric_barrier();
  CHECK(g.omega() == 0.0);
  auto g2 = omega_next(g, DirectionEvent::Descent);
  CHECK(g2.omega == 0.5);
  auto g3 = omega_next(g2.schedule, DirectionEvent::Descent);
  CHECK(g3.omega == 0.75);
  CHECK(omega_next(g3.schedule, DirectionEvent::NonDescent).omega == 0.0);

  auto f = OmegaSchedule::fixed(0.3);
  CHECK(omega_next(f, DirectionEvent::NonDescent).omega == 0.3);
  CHECK(omega_next(f, DirectionEvent::Descent).omega == 0.3);
  CHECK_THROWS_AS(OmegaSchedule::fixed(1.0), Error);
  CHECK_THROWS_AS(OmegaSchedule::adaptive_delta(0.0), Error);
}

TEST_CASE("schedules stay inside [0, 1 - 1e-8]") {
  std::mt19937_64 rng(5);
  for (auto sched :
       {OmegaSchedule::adaptive_delta(), OmegaSchedule::geometric_barrier()}) {
    for (int i = 0; i < 5000; ++i) {
      // long descent runs push omega to the cap
      const bool descent = (rng() % 10) != 0;
      const auto up = omega_next(
          sched, descent ? DirectionEvent::Descent : DirectionEvent::NonDescent);
      CHECK(up.omega >= 0.0);
      CHECK(up.omega <= OmegaSchedule::kOmegaMax);
      sched = up.schedule;
    }
  }
  auto s = OmegaSchedule::adaptive_delta();
  for (int i = 0; i < 200; ++i)
    s = omega_next(s, DirectionEvent::Descent).schedule;
  CHECK(s.omega() == OmegaSchedule::kOmegaMax);
  CHECK(clamp_omega(std::nan("")) == 0.0);
}

TEST_CASE("armijo_step") {
  const SolverConfig cfg = quiet();
  auto cost = [](double t) { return (t - 1.0) * (t - 1.0); };
  auto retract = [](double x, double z, double s) { return x + s * z; };
  const auto ls = armijo_step(cost, retract, 0.0, 1.0, 1.0, -2.0, cfg);
  CHECK(ls.step == 1.0);
  CHECK(ls.trials == 1);
  CHECK(ls.cost == 0.0);

  try {
    armijo_step(cost, retract, 0.0, -1.0, 1.0, 2.0, cfg);
    FAIL("expected a precondition error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::PreconditionViolated);
  }

  auto square = [](double t) { return t * t; };
  try {
    armijo_step(square, retract, 0.0, 1.0, 0.0, -1.0, cfg);
    FAIL("expected LineSearchFailed");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::LineSearchFailed);
  }

  auto fragile = [](double x, double z, double s) {
    if (s > 0.3)
      fail(ErrorCode::RankDeficient, "mock rank loss");
    return x + s * z;
  };
  const auto halved = armijo_step(cost, fragile, 0.0, 1.0, 1.0, -2.0, cfg);
  CHECK(halved.step == 0.25);
  CHECK(halved.trials == 3);
}

TEST_CASE("failing directions back off omega") {
  ScalarObjective obj;
  obj.fail_above = 0.2;
  const auto res =
      rsd_solve(obj, 5.0, OmegaSchedule::adaptive_delta(), quiet());
  CHECK(res.trace.status == SolveStatus::Converged);
  for (const auto &row : res.trace.rows)
    CHECK(row.omega <= 0.2);
  check_monotone(res.trace);
}

TEST_CASE("persistent non-descent stalls") {
  ScalarObjective obj;
  obj.never_descent = true;
  const auto res =
      rsd_solve(obj, 5.0, OmegaSchedule::adaptive_delta(), quiet());
  CHECK(res.trace.status == SolveStatus::Stalled);
  REQUIRE(res.trace.rows.size() == 1);
  CHECK(std::isnan(res.trace.rows[0].grad_norm));
  CHECK(res.trace.rows[0].omega == 0.0);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.armijo_c = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.backtrack_factor = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.initial_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("start at the minimizer converges immediately") {
  const EigProblem prob = manton_eig(50, 3);
  GeneralizedStiefel m(prob.a, prob.b, 3);
  StiefelObjective obj(m, StiefelMetricSpec::convex_shifted(0),
                       prob.known_solution);
  const auto res = rsd_solve(obj, m.make_point(*prob.known_solution),
                             OmegaSchedule::adaptive_delta(), quiet());
  CHECK(res.trace.status == SolveStatus::Converged);
  CHECK(res.trace.iterations() == 0);
  CHECK(res.trace.rows.size() == 1);
}

TEST_CASE("preconditioned Manton run converges") {
  const EigProblem prob = manton_eig(500, 5);
  GeneralizedStiefel m(prob.a, prob.b, 5);
  StiefelObjective obj(m, StiefelMetricSpec::convex_shifted(0),
                       prob.known_solution);
  const auto res = rsd_solve(obj, obj.initial_point(1),
                             OmegaSchedule::adaptive_delta(), quiet());
  CHECK(res.trace.status == SolveStatus::Converged);
  CHECK(res.trace.rows.back().grad_norm <= 1e-8);
  CHECK(res.trace.rows.back().error_measure <= 1e-6);
  check_monotone(res.trace);
}

TEST_CASE("Euclidean metric trails the preconditioned one") {
  const EigProblem prob = manton_eig(100, 3);
  GeneralizedStiefel m(prob.a, prob.b, 3);
  StiefelObjective pre(m, StiefelMetricSpec::convex_shifted(0),
                       prob.known_solution);
  StiefelObjective euc(m, StiefelMetricSpec::euclidean(), prob.known_solution);
  auto at50 = [](const SolveTrace &t) {
    return t.rows[std::min<std::size_t>(50, t.rows.size() - 1)].error_measure;
  };
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto a = rsd_solve(pre, pre.initial_point(seed),
                             OmegaSchedule::adaptive_delta(), quiet(50));
    const auto b = rsd_solve(euc, euc.initial_point(seed),
                             OmegaSchedule::fixed(0), quiet(50));
    CHECK(at50(a.trace) < at50(b.trace));
    check_monotone(b.trace);
  }
}

TEST_CASE("runs are deterministic") {
  const LyapProblem prob = penzl_lyap(40, 3);
  PsdGeometry geo(prob.a, prob.b, prob.c);
  PsdObjective obj(geo, PsdMetricSpec::Family::Preconditioned, &prob);
  const auto a = rsd_solve(obj, obj.initial_point(4, 3),
                           OmegaSchedule::fixed(0.0), quiet(30));
  const auto b = rsd_solve(obj, obj.initial_point(4, 3),
                           OmegaSchedule::fixed(0.0), quiet(30));
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  for (std::size_t i = 0; i < a.trace.rows.size(); ++i) {
    CHECK(a.trace.rows[i].cost == b.trace.rows[i].cost);
    CHECK(a.trace.rows[i].grad_norm == b.trace.rows[i].grad_norm);
    CHECK(a.trace.rows[i].error_measure == b.trace.rows[i].error_measure);
  }
  CHECK(a.final_point == b.final_point);
  check_monotone(a.trace);
}

TEST_CASE("Euclidean PSD run is plain gradient descent") {
  const LyapProblem prob = penzl_lyap(30, 2);
  PsdGeometry geo(prob.a, prob.b, prob.c);
  PsdObjective obj(geo, PsdMetricSpec::Family::Euclidean, &prob);
  const Matrix y0 = obj.initial_point(9, 2);
  const SolverConfig cfg = quiet();

  Matrix y = y0;
  for (int k = 1; k <= 5; ++k) {
    const double f = geo.cost(y);
    const Matrix g = geo.euclidean_gradient(y);
    const double slope = -g.squaredNorm();
    double s = cfg.initial_step;
    Matrix next = y - s * g;
    while (geo.cost(next) >
           f + cfg.armijo_c * s * slope + roundoff_slack(f)) {
      s *= cfg.backtrack_factor;
      next = y - s * g;
    }
    y = next;
    const auto res = rsd_solve(obj, y0, OmegaSchedule::fixed(0), quiet(k));
    REQUIRE(res.trace.iterations() == k);
    CHECK(test::max_abs(res.final_point - y) <= 1e-12 * test::max_abs(y));
  }
}

TEST_CASE("two-factor objective descends") {
  auto normal = test::source(400);
  const Matrix a = oracle::random_spd(12, normal);
  const Matrix b = oracle::random_spd(10, normal);
  const Matrix c = normal.matrix(12, 10);
  GhGeometry geo(a, b, c);
  for (const auto &spec : {RankMetricSpec::euclidean_natural(),
                           RankMetricSpec::block_diagonal(0.0)}) {
    GhObjective obj(geo, spec);
    const auto res = rsd_solve(obj, obj.initial_point(2, 2),
                               OmegaSchedule::fixed(0), quiet(40));
    CHECK(res.trace.status != SolveStatus::Stalled);
    CHECK(res.trace.rows.back().cost < res.trace.rows.front().cost);
    check_monotone(res.trace);
  }
}
