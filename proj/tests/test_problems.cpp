#include "test_support.hpp"

#include <cmath>
#include <numbers>

#include "rprecon/error.hpp"
#include "rprecon/problems.hpp"
#include "rprecon/solver.hpp"
#include "rprecon/objectives.hpp"
#include "rprecon/stiefel.hpp"

using namespace rprecon;

namespace {

double angle(const Matrix &x, const Matrix &y) {
  return canonical_angles(x, y).maxCoeff();
}

void check_code(ErrorCode expected, auto &&fn) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == expected);
  }
}

} // namespace

TEST_CASE("manton_eig") {
  const EigProblem big = manton_eig(500, 5);
  CHECK(big.a(0, 0) == 10.0);
  CHECK(big.a(499, 499) == 11.0);
  CHECK(big.a(1, 1) - big.a(0, 0) == doctest::Approx(1.0 / 499).epsilon(1e-12));
  CHECK(big.b == Matrix::Identity(500, 500));
  CHECK(big.known_solution->cols() == 5);

  const EigProblem small = manton_eig(2, 1);
  CHECK(small.a == test::diag({10, 11}));
  CHECK(angle(*small.known_solution, test::unit(2, 0)) == 0.0);

  for (Index n : {2, 7, 40}) {
    const EigProblem p = manton_eig(n, 2);
    GeneralizedStiefel m(p.a, p.b, 2);
    const double opt = m.cost(m.make_point(*p.known_solution));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(p.a);
    CHECK(opt == doctest::Approx(0.5 * eig.eigenvalues().head(2).sum())
                     .epsilon(1e-13));
  }
  CHECK_THROWS_AS(manton_eig(3, 4), Error);
}

TEST_CASE("penzl_lyap") {
  const LyapProblem p3 = penzl_lyap(3, 1);
  Matrix a3(3, 3);
  a3 << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  CHECK(p3.a == a3);
  CHECK(p3.c == test::unit(3, 2) * test::unit(3, 2).transpose());
  CHECK(p3.b == Matrix::Identity(3, 3));

  const LyapProblem big = penzl_lyap(500, 5);
  const double h = std::numbers::pi / (2.0 * 501.0);
  const double predicted =
      std::pow(std::sin(500 * h), 2) / std::pow(std::sin(h), 2);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(big.a, Eigen::EigenvaluesOnly);
  const double cond = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  CHECK(cond == doctest::Approx(predicted).epsilon(1e-8));
  CHECK(cond > 0.5e5);
  CHECK(cond < 2e5);
}

TEST_CASE("penzl n = 20 reference solution") {
  const LyapProblem p = penzl_lyap(20, 2);
  const Matrix x = oracle::dense_lyap(p.a, p.b, p.c);
  CHECK(oracle::rel_error(x, oracle::dense_lyap_kron(p.a, p.b, p.c)) <= 1e-10);
  CHECK((p.a * x * p.b + p.b * x * p.a - p.c).norm() <= 1e-12 * p.c.norm());
  const Matrix y = oracle::best_psd_factor(x, 2);
  const double floor = lyap_residual(y, p);
  CHECK(floor == doctest::Approx(oracle::lyap_residual_dense(y, p.a, p.b, p.c))
                     .epsilon(1e-12));
  CHECK(floor > 0.0);
  CHECK(floor < 1.0);
  const Matrix full = oracle::best_psd_factor(x, 20);
  CHECK(lyap_residual(full, p) <= 1e-10);
}

TEST_CASE("make_lyap_problem factors C") {
  auto normal = test::source(500);
  const Matrix a = oracle::random_spd(8, normal);
  const Matrix b = oracle::random_spd(8, normal);
  const Matrix u = normal.matrix(8, 2);
  Matrix c = u.col(0) * u.col(0).transpose() - u.col(1) * u.col(1).transpose();
  const LyapProblem p = make_lyap_problem(a, b, c, 3);
  CHECK(p.c_factor.cols() == 2);
  CHECK(oracle::rel_error(p.c_factor * p.c_signs.asDiagonal() *
                              p.c_factor.transpose(),
                          c) <= 1e-12);
}

TEST_CASE("power_step") {
  const Matrix a = test::diag({3, 2, 1});
  CHECK(test::max_abs(power_step(test::unit(3, 1), a) - test::unit(3, 1)) <=
        1e-15);
  auto normal = test::source(510);
  const Matrix inv = test::diag({1, 1, 4, 5, 6});
  const Matrix xi(Matrix::Identity(5, 5).leftCols(2) * normal.matrix(2, 2));
  CHECK(angle(power_step(qf(xi), inv), xi) <= 1e-14);

  Matrix v = qf(normal.matrix(3, 1));
  const Matrix a2 = test::diag({5, 2, 1});
  for (int k = 0; k < 20; ++k)
    v = power_step(v, a2);
  CHECK(angle(v, test::unit(3, 0)) <= 1e-6);
}

TEST_CASE("inverse_step") {
  const Matrix a = test::diag({3, 2, 1});
  CHECK(test::max_abs(inverse_step(test::unit(3, 1), a) - test::unit(3, 1)) <=
        1e-15);
  auto normal = test::source(520);
  const Matrix inv = test::diag({1, 1, 4, 5, 6});
  const Matrix xi(Matrix::Identity(5, 5).leftCols(2) * normal.matrix(2, 2));
  CHECK(angle(inverse_step(qf(xi), inv), xi) <= 1e-14);

  // A^{-1} = diag(1/5, 1/2, 1): ratio 1/2 per step toward e_3
  Matrix v = qf(normal.matrix(3, 1));
  const Matrix a2 = test::diag({5, 2, 1});
  const InverseIteration it(a2);
  for (int k = 0; k < 30; ++k)
    v = it.step(v);
  CHECK(angle(v, test::unit(3, 2)) <= 1e-6);
  CHECK_THROWS_AS(InverseIteration(test::diag({1, 0})), Error);
}

TEST_CASE("grqi_step") {
  const Matrix a = test::diag({1, 2, 3, 4});
  check_code(ErrorCode::SingularShift,
             [&] { grqi_step(Matrix::Identity(4, 4).leftCols(2), a); });

  for (std::uint64_t s = 0; s < 5; ++s) {
    auto normal = test::source(530, s);
    const Matrix sa = oracle::random_symmetric(10, normal);
    const Matrix x = qf(normal.matrix(10, 2));
    const Matrix z = grqi_solve(x, sa);
    CHECK(oracle::rel_error(
              z, oracle::kron_sylvester(sa, x.transpose() * sa * x, x)) <=
          1e-10);
    CHECK(test::max_abs(grqi_step(x, sa) - qf(z)) <= 1e-12);
  }
}

TEST_CASE("Rayleigh quotient iteration converges cubically") {
  const Matrix a = test::diag({1, 2, 3});
  auto normal = test::source(540);
  Vector d = normal.matrix(3, 1);
  d(0) = 0.0;
  Matrix x = qf(test::unit(3, 0) + 0.15 * d.normalized());
  std::vector<double> theta{angle(x, test::unit(3, 0))};
  while (theta.back() > 1e-7) {
    x = grqi_step(x, a);
    theta.push_back(angle(x, test::unit(3, 0)));
  }
  REQUIRE(theta.size() >= 3);
  for (std::size_t k = 2; k < theta.size(); ++k) {
    const double order = std::log(theta[k] / theta[k - 1]) /
                         std::log(theta[k - 1] / theta[k - 2]);
    CHECK(order >= 2.5);
  }
}

TEST_CASE("subspace_distance") {
  auto normal = test::source(550);
  const Matrix x = normal.matrix(9, 3);
  CHECK(subspace_distance(x, x) <= 1e-15);
  CHECK(subspace_distance(test::unit(4, 0), test::unit(4, 1)) ==
        doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));

  const Matrix e1 = test::unit(2, 0);
  Matrix tilted(2, 1);
  tilted << std::cos(1e-9), std::sin(1e-9);
  CHECK(subspace_distance(e1, tilted) ==
        doctest::Approx(1e-9).epsilon(1e-6));

  for (std::uint64_t s = 0; s < 10; ++s) {
    auto src = test::source(551, s);
    const Matrix a = src.matrix(9, 3);
    const Matrix b = src.matrix(9, 3);
    const Matrix c = src.matrix(9, 3);
    const Matrix q1 = oracle::random_orthogonal(3, src);
    const Matrix q2 = oracle::random_invertible(3, src);
    const double dab = subspace_distance(a, b);
    CHECK(std::abs(subspace_distance(a * q1, b * q2) - dab) <= 1e-10);
    CHECK(subspace_distance(b, a) == doctest::Approx(dab).epsilon(1e-13));
    CHECK(dab <= subspace_distance(a, c) + subspace_distance(c, b) + 1e-10);
  }
  CHECK_THROWS_AS(subspace_distance(Matrix::Zero(4, 1), e1.replicate(2, 1)),
                  Error);
}

TEST_CASE("lyap_residual") {
  const LyapProblem p = penzl_lyap(20, 3);
  auto normal = test::source(560);
  const Matrix y = normal.matrix(20, 3);
  CHECK(lyap_residual(y, p) ==
        doctest::Approx(oracle::lyap_residual_dense(y, p.a, p.b, p.c))
            .epsilon(1e-12));

  auto src = test::source(561);
  const Matrix a = oracle::random_spd(12, src);
  const Matrix b = oracle::random_spd(12, src);
  const Matrix u = src.matrix(12, 3);
  const Matrix c = u * u.transpose();
  const LyapProblem q = make_lyap_problem(a, b, c, 2);
  const Matrix yq = src.matrix(12, 2);
  CHECK(lyap_residual(yq, q) ==
        doctest::Approx(oracle::lyap_residual_dense(yq, a, b, c)).epsilon(1e-12));
  const double alpha = 3.7;
  const LyapProblem scaled = make_lyap_problem(a, b, alpha * c, 2);
  CHECK(lyap_residual(std::sqrt(alpha) * yq, scaled) ==
        doctest::Approx(lyap_residual(yq, q)).epsilon(1e-12));

  LyapProblem zero = p;
  zero.c.setZero();
  zero.c_factor = Matrix::Zero(20, 0);
  zero.c_signs = Vector::Zero(0);
  check_code(ErrorCode::ZeroRhs, [&] { lyap_residual(y, zero); });
  check_code(ErrorCode::DimensionMismatch,
             [&] { lyap_residual(Matrix::Ones(5, 1), p); });
}

TEST_CASE("one omega = 0 step is inverse iteration") {
  const EigProblem prob = manton_eig(100, 3);
  GeneralizedStiefel m(prob.a, prob.b, 3);
  StiefelObjective obj(m, StiefelMetricSpec::convex_shifted(0));
  SolverConfig cfg;
  cfg.max_iters = 1;
  cfg.record_time = false;
  const InverseIteration inv(prob.a);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const StiefelPoint x0 = obj.initial_point(seed);
    const auto res = rsd_solve(obj, x0, OmegaSchedule::fixed(0), cfg);
    REQUIRE(res.trace.rows.size() == 2);
    CHECK(res.trace.rows[1].step == 1.0);
    CHECK(angle(res.final_point.x(), inv.step(x0.x())) <= 1e-10);
  }
}

TEST_CASE("omega near 1 approaches the Rayleigh quotient iteration") {
  const Matrix a = Vector::LinSpaced(6, 1.0, 6.0).asDiagonal();
  GeneralizedStiefel m(a, Matrix::Identity(6, 6), 1);
  const auto spec = StiefelMetricSpec::convex_shifted(OmegaSchedule::kOmegaMax);
  auto normal = test::source(570);
  Vector d = normal.matrix(6, 1);
  d(0) = 0.0;
  d.normalize();
  std::vector<double> gaps;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const StiefelPoint p = m.make_point(qf(test::unit(6, 0) + eps * d));
    const auto sd = m.search_direction(p, spec);
    const Matrix next = m.retract(p, sd.zeta, 1.0).x();
    gaps.push_back(angle(next, grqi_step(p.x(), a)));
  }
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < gaps[1]);
}
