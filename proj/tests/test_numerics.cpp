#include "test_support.hpp"

#include <cmath>

#include "rprecon/error.hpp"
#include "rprecon/numerics.hpp"

using namespace rprecon;

namespace {

void check_code(ErrorCode expected, auto &&fn) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == expected);
  }
}

} // namespace

TEST_CASE("qf") {
  CHECK(test::max_abs(qf(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)) ==
        0.0);
  CHECK(test::max_abs(qf(test::diag({2, 3})) - Matrix::Identity(2, 2)) <=
        1e-15);

  auto normal = test::source(21);
  const Matrix m = normal.matrix(5, 2);
  const Matrix q = qf(m);
  CHECK(test::max_abs(q.transpose() * q - Matrix::Identity(2, 2)) <= 1e-14);
  const Matrix mgs = oracle::mgs_b_orthonormalize(m, Matrix::Identity(5, 5));
  CHECK(test::max_abs(q - mgs) <= 1e-12);
  const Matrix r = q.transpose() * m;
  CHECK(test::max_abs(q * r - m) <= 1e-13);
  CHECK(r(0, 0) > 0.0);
  CHECK(r(1, 1) > 0.0);
  CHECK(std::abs(r(1, 0)) <= 1e-14);

  check_code(ErrorCode::RankDeficient, [] {
    Matrix m(3, 2);
    m << 1, 2, 1, 2, 1, 2;
    qf(m);
  });
}

TEST_CASE("qf is idempotent") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto normal = test::source(22, s);
    const Matrix q = qf(normal.matrix(7, 3));
    CHECK(test::max_abs(qf(q) - q) <= 1e-12);
  }
}

TEST_CASE("b_orthonormalize") {
  const Matrix i3 = Matrix::Identity(3, 3);
  CHECK(test::max_abs(b_orthonormalize(i3, i3) - i3) <= 1e-15);

  const Matrix u = b_orthonormalize(test::unit(2, 0), test::diag({4, 1}));
  CHECK(test::max_abs(u - 0.5 * test::unit(2, 0)) <= 1e-15);

  auto normal = test::source(23);
  const Matrix m = normal.matrix(6, 2);
  const Matrix b = test::diag({1, 2, 3, 4, 5, 6});
  const Matrix ub = b_orthonormalize(m, b);
  CHECK(test::max_abs(ub.transpose() * b * ub - Matrix::Identity(2, 2)) <=
        1e-12);
  CHECK(test::max_abs(oracle::b_projector(ub, b) - oracle::b_projector(m, b)) <=
        1e-12);

  for (std::uint64_t s = 0; s < 10; ++s) {
    auto src = test::source(24, s);
    const Matrix x = src.matrix(8, 3);
    CHECK(test::max_abs(b_orthonormalize(x, Matrix::Identity(8, 8)) - qf(x)) <=
          1e-12);
  }
}

TEST_CASE("sym") {
  CHECK(sym(Matrix::Identity(3, 3)) == Matrix::Identity(3, 3));
  Matrix skew(2, 2);
  skew << 0, 1, -1, 0;
  CHECK(test::max_abs(sym(skew)) == 0.0);
  Matrix d(2, 2);
  d << 1, 2, 4, 3;
  Matrix expected(2, 2);
  expected << 1, 3, 3, 3;
  CHECK(sym(d) == expected);
  check_code(ErrorCode::NotSquare, [] { sym(Matrix::Zero(2, 3)); });
}

TEST_CASE("sqrt_psd") {
  CHECK(test::max_abs(sqrt_psd(Matrix::Identity(3, 3)) -
                      Matrix::Identity(3, 3)) <= 1e-15);
  CHECK(test::max_abs(sqrt_psd(test::diag({4, 9})) - test::diag({2, 3})) <=
        1e-14);

  for (std::uint64_t s = 0; s < 10; ++s) {
    auto normal = test::source(25, s);
    const Matrix l = normal.matrix(3, 3);
    const Matrix ltl = l.transpose() * l;
    const Matrix root = sqrt_psd(ltl);
    CHECK(test::max_abs(root * root - ltl) <= 1e-12 * ltl.norm());
    CHECK(test::max_abs(root - root.transpose()) <= 1e-13 * root.norm());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(root);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-11 * ltl.norm());
    CHECK(oracle::rel_error(root, oracle::sqrtm_psd(ltl)) <= 1e-12);
  }

  // rank-deficient input: round-off negatives are clamped, not reported
  auto normal = test::source(26);
  const Matrix v = normal.matrix(4, 2);
  const Matrix low = v * v.transpose();
  const Matrix root = sqrt_psd(low);
  CHECK(test::max_abs(root * root - low) <= 1e-10 * low.norm());

  check_code(ErrorCode::Indefinite, [] { sqrt_psd(test::diag({1, -1})); });
}

TEST_CASE("gen_eig_spd") {
  const GenEig id = gen_eig_spd(Matrix::Identity(3, 3), Matrix::Identity(3, 3));
  CHECK(test::max_abs(id.values - Vector::Ones(3)) <= 1e-15);
  CHECK(test::max_abs(id.vectors.transpose() * id.vectors -
                      Matrix::Identity(3, 3)) <= 1e-14);

  const GenEig d = gen_eig_spd(test::diag({2, 8}), Matrix::Identity(2, 2));
  CHECK(std::abs(d.values(0) - 2.0) <= 1e-14);
  CHECK(std::abs(d.values(1) - 8.0) <= 1e-14);

  for (double cond : {1e1, 1e3, 1e6}) {
    auto normal = test::source(27, static_cast<std::uint64_t>(cond));
    const Matrix qa = oracle::random_orthogonal(4, normal);
    const Matrix qb = oracle::random_orthogonal(4, normal);
    Vector sa(4), sb(4);
    for (Index i = 0; i < 4; ++i) {
      sa(i) = std::pow(cond, static_cast<double>(i) / 3.0);
      sb(i) = 1.0 + 0.5 * i;
    }
    const Matrix ma = qa * sa.asDiagonal() * qa.transpose();
    const Matrix mb = qb * sb.asDiagonal() * qb.transpose();
    const GenEig ge = gen_eig_spd(ma, mb);
    const Matrix w = ge.vectors;
    CHECK(test::max_abs(w.transpose() * mb * w - Matrix::Identity(4, 4)) <=
          1e-11);
    const Matrix dm = ge.values.asDiagonal();
    CHECK(test::max_abs(w.transpose() * ma * w - dm) <= 1e-11 * cond);
    for (Index i = 1; i < 4; ++i)
      CHECK(ge.values(i) >= ge.values(i - 1));
  }

  check_code(ErrorCode::NotSpd, [] {
    gen_eig_spd(test::diag({1, -1}), Matrix::Identity(2, 2));
  });
}

TEST_CASE("sylvester_pair_solve") {
  auto normal = test::source(28);
  const Matrix f = normal.matrix(4, 2);
  const Matrix i4 = Matrix::Identity(4, 4);
  const Matrix i2 = Matrix::Identity(2, 2);
  CHECK(test::max_abs(sylvester_pair_solve(i4, i4, i2, i2, f) - f / 2.0) <=
        1e-15);

  const Matrix z = sylvester_pair_solve(test::diag({1, 2, 3}),
                                        Matrix::Identity(3, 3), test::diag({2}),
                                        test::diag({3}), Matrix::Ones(3, 1));
  for (Index i = 0; i < 3; ++i)
    CHECK(std::abs(z(i, 0) - 1.0 / (2.0 * (i + 1) + 3.0)) <= 1e-15);

  for (std::uint64_t s = 0; s < 20; ++s) {
    auto src = test::source(29, s);
    const Index n = s == 0 ? 20 : 3 + static_cast<Index>(s % 17);
    const Index r = s == 0 ? 2 : 1 + static_cast<Index>(s % 3);
    const Matrix a = oracle::random_spd(n, src);
    const Matrix b = oracle::random_spd(n, src);
    const Matrix mb = oracle::random_spd(r, src);
    const Matrix ma = oracle::random_spd(r, src);
    const Matrix rhs = src.matrix(n, r);
    const Matrix got = sylvester_pair_solve(a, b, mb, ma, rhs);
    CHECK(oracle::rel_error(got,
                            oracle::kron_sylvester_pair(a, b, mb, ma, rhs)) <=
          1e-10);
  }
}

TEST_CASE("small_lyap_solve") {
  auto normal = test::source(30);
  const Matrix q = oracle::random_symmetric(3, normal);
  CHECK(test::max_abs(small_lyap_solve(Matrix::Identity(3, 3), q) - q / 2.0) <=
        1e-15);

  Matrix q2(2, 2);
  q2 << 2, 4, 4, 6;
  CHECK(test::max_abs(small_lyap_solve(test::diag({1, 3}), q2) -
                      Matrix::Ones(2, 2)) <= 1e-14);

  const Matrix p = oracle::random_spd(4, normal);
  const Matrix q4 = oracle::random_symmetric(4, normal);
  const Matrix s = small_lyap_solve(p, q4);
  const Matrix id = Matrix::Identity(4, 4);
  // P S + S P = Q is vec(S) = (I kron P + P^T kron I)^{-1} vec(Q)
  const Matrix k = oracle::kron(id, p) + oracle::kron(p.transpose(), id);
  const Matrix expected =
      oracle::unvec(k.partialPivLu().solve(oracle::vec(q4)), 4, 4);
  CHECK(oracle::rel_error(s, expected) <= 1e-12);
  CHECK(s == s.transpose());
}

TEST_CASE("shifted_solve") {
  auto normal = test::source(31);
  const Matrix rhs = normal.matrix(3, 2);
  const Matrix i3 = Matrix::Identity(3, 3);
  CHECK(test::max_abs(shifted_solve(i3, i3, 0.0, rhs) - rhs) <= 1e-15);

  const Matrix x = shifted_solve(test::diag({1, 2}), Matrix::Identity(2, 2),
                                 3.0, test::unit(2, 0));
  CHECK(test::max_abs(x + 0.5 * test::unit(2, 0)) <= 1e-15);

  const Matrix a = oracle::random_symmetric(15, normal);
  const Matrix b = oracle::random_spd(15, normal);
  const Matrix f = normal.matrix(15, 3);
  const Matrix z = shifted_solve(a, b, 0.7, f);
  CHECK(((a - 0.7 * b) * z - f).norm() <= 1e-10 * f.norm());

  check_code(ErrorCode::SingularShift, [] {
    shifted_solve(test::diag({1, 2}), Matrix::Identity(2, 2), 2.0,
                  Matrix::Ones(2, 1));
  });
}

TEST_CASE("symmetric_basis and rank helpers") {
  const auto basis = symmetric_basis(3);
  REQUIRE(basis.size() == 6);
  for (const Matrix &e : basis)
    CHECK(e == e.transpose());
  CHECK(basis[0](0, 0) == 1.0);
  CHECK(basis[1](0, 1) == 1.0);
  CHECK(basis[1](1, 0) == 1.0);
  CHECK(basis[2](1, 1) == 1.0);

  CHECK(has_full_column_rank(Matrix::Identity(4, 2)));
  CHECK_FALSE(has_full_column_rank(Matrix::Zero(4, 2)));
  CHECK_FALSE(has_full_column_rank(Matrix::Identity(2, 3)));
  CHECK(inverse_condition(test::diag({4, 2})) == doctest::Approx(0.5));

  check_code(ErrorCode::NotSpd, [] { SpdFactorization(test::diag({1, 0})); });
  check_code(ErrorCode::NotSymmetric, [] {
    Matrix m(2, 2);
    m << 1, 1, 0, 1;
    SpdFactorization f(m);
  });
}
