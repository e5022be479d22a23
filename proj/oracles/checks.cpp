#include "rprecon_oracles/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include "rprecon/error.hpp"
#include "rprecon/fixedrank.hpp"
#include "rprecon/problems.hpp"
#include "rprecon/rng.hpp"
#include "rprecon/stiefel.hpp"
#include "rprecon_oracles/oracles.hpp"

namespace rprecon::checks {

namespace {

constexpr double kOracleTol = 1e-10;
constexpr double kInvarianceTol = 1e-10;
constexpr double kEquivarianceTol = 1e-9;
constexpr double kDefiningTol = 1e-8;
constexpr double kFdTol = 1e-6;
constexpr double kFdStep = 1e-5;

struct Instance {
  Index n;
  Index r;
  NormalSource normal;
};

Instance make_instance(std::uint64_t seed, int i) {
  const std::uint64_t s =
      stream_seed(seed, Stream::TestDirections, static_cast<std::uint64_t>(i));
  const auto n = static_cast<Index>(6 + splitmix64(s) % 15);
  const auto r = static_cast<Index>(1 + splitmix64(s ^ 0x5bd1e995ULL) % 3);
  return {n, r, NormalSource(s)};
}

// Tracks the worst error of one check; NaN sticks.
class Worst {
public:
  Worst(std::string name, double tol) : result_{std::move(name), 0.0, tol, 0} {}

  void add(double err) {
    ++result_.instances;
    if (std::isnan(err) || std::isnan(result_.worst))
      result_.worst = std::numeric_limits<double>::quiet_NaN();
    else
      result_.worst = std::max(result_.worst, err);
  }

  // Runs fn, recording a library error as a failed instance.
  void run(const std::function<double()> &fn) {
    try {
      add(fn());
    } catch (const Error &) {
      add(std::numeric_limits<double>::quiet_NaN());
    }
  }

  CheckResult result() const { return result_; }

private:
  CheckResult result_;
};

// |a - b| relative to the Cauchy-Schwarz bound of the pairing it estimates.
double pairing_error(double a, double b, double scale) {
  return std::abs(a - b) / std::max(scale, 1e-300);
}

double frob_inner(const Matrix &a, const Matrix &b) {
  return (a.array() * b.array()).sum();
}

double frob_inner(const FactorPair &a, const FactorPair &b) {
  return frob_inner(a.g, b.g) + frob_inner(a.h, b.h);
}

double pair_norm(const FactorPair &p) {
  return std::sqrt(p.g.squaredNorm() + p.h.squaredNorm());
}

Matrix oracle_stiefel_point(const Matrix &b, Instance &inst) {
  return oracle::mgs_b_orthonormalize(inst.normal.matrix(inst.n, inst.r), b);
}

struct StiefelCase {
  std::string label;
  StiefelMetricSpec spec;
};

std::vector<StiefelCase> stiefel_cases(int i) {
  const double w = static_cast<double>(i % 5) / 5.0;
  return {{"euclidean", StiefelMetricSpec::euclidean()},
          {"convex_shifted", StiefelMetricSpec::convex_shifted(w)},
          {"concave_shifted", StiefelMetricSpec::concave_shifted(w)}};
}

// Oracle metric operator (a_weight, Shift) from the oracle multiplier.
std::pair<double, Matrix> oracle_shift(const StiefelMetricSpec &spec,
                                       const Matrix &lambda) {
  if (spec.family == StiefelMetricFamily::ConvexShifted)
    return {spec.omega1, -spec.omega2 * lambda};
  return {spec.omega1, spec.omega2 * oracle::sqrtm_psd(lambda.transpose() * lambda)};
}

FactorPair transform(const FactorPair &p, const Matrix &m) {
  return {p.g * m, p.h * m.inverse().transpose()};
}

// Away from critical points the coupled GH metric turns indefinite for
// omega around 0.3, so the coupled cases stay at 0.1.
struct GhCase {
  std::string label;
  RankMetricSpec spec;
};

std::vector<GhCase> gh_cases() {
  return {{"natural", RankMetricSpec::euclidean_natural()},
          {"block(0)", RankMetricSpec::block_diagonal(0.0)},
          {"block(0.1)", RankMetricSpec::block_diagonal(0.1)},
          {"full(0.8,0.1,0.9,0.1)",
           RankMetricSpec::full_hessian(0.8, 0.1, 0.9, 0.1)}};
}

struct PsdCase {
  std::string label;
  PsdMetricSpec spec;
};

std::vector<PsdCase> psd_cases() {
  return {{"euclidean", PsdMetricSpec::euclidean()},
          {"block(0)", PsdMetricSpec::preconditioned(0.0)},
          {"block(0.3)", PsdMetricSpec::preconditioned(0.3)}};
}

// Small PSD right-hand side keeps the omega-coupled metrics definite.
Matrix small_psd(Index n, NormalSource &normal) {
  const Matrix f = normal.matrix(n, 2);
  return 0.05 * f * f.transpose() / static_cast<double>(n);
}

GhTangent gh_gradient(const GhGeometry &geo, const FactorPair &p,
                      const RankMetricSpec &spec) {
  return geo.gradient(p, spec, CgOptions{500, 1e-14});
}

Matrix psd_gradient(const PsdGeometry &geo, const Matrix &y,
                    const PsdMetricSpec &spec) {
  return geo.gradient(y, spec, CgOptions{500, 1e-14});
}

} // namespace

std::vector<CheckResult> oracle_equivalences(int instances, std::uint64_t seed) {
  Worst sylv("sylvester_pair_solve vs Kronecker", kOracleTol);
  Worst psd("psd gradient_block vs Kronecker", kOracleTol);
  Worst grqi_z("grqi_solve vs Kronecker Sylvester", kOracleTol);
  Worst grqi_p("grqi_step span vs Kronecker Sylvester", kOracleTol);
  Worst proj("euclidean_project vs monolithic KKT", kOracleTol);
  Worst lam("lambda_ls vs least squares", kOracleTol);
  Worst sd_e("search_direction euclidean vs KKT", kOracleTol);
  Worst sd_c("search_direction convex vs KKT", kOracleTol);
  Worst sd_cc("search_direction concave vs KKT", kOracleTol);
  Worst mu("search_direction multiplier vs KKT", kOracleTol);

  for (int i = 0; i < instances; ++i) {
    Instance inst = make_instance(seed, i);
    const Index n = inst.n, r = inst.r;
    const Matrix a = oracle::random_spd(n, inst.normal);
    const Matrix b = oracle::random_spd(n, inst.normal);

    sylv.run([&] {
      const Matrix mb = oracle::random_spd(r, inst.normal);
      const Matrix ma = oracle::random_spd(r, inst.normal);
      const Matrix f = inst.normal.matrix(n, r);
      return oracle::rel_error(sylvester_pair_solve(a, b, mb, ma, f),
                               oracle::kron_sylvester_pair(a, b, mb, ma, f));
    });

    psd.run([&] {
      const Matrix c = oracle::random_symmetric(n, inst.normal);
      const Matrix y = inst.normal.matrix(n, r);
      const Matrix ma = y.transpose() * a * y;
      const Matrix mb = y.transpose() * b * y;
      const Matrix egrad = 2.0 * (a * y * mb + b * y * ma - c * y);
      PsdGeometry geo(a, b, c);
      return oracle::rel_error(geo.gradient_block(y),
                               oracle::kron_sylvester_pair(a, b, mb, ma, egrad));
    });

    {
      const Matrix s = oracle::random_symmetric(n, inst.normal);
      const Matrix x = oracle::mgs_b_orthonormalize(
          inst.normal.matrix(n, r), Matrix::Identity(n, n));
      const Matrix z = oracle::kron_sylvester(s, x.transpose() * s * x, x);
      grqi_z.run([&] { return oracle::rel_error(grqi_solve(x, s), z); });
      grqi_p.run([&] {
        const Matrix eye = Matrix::Identity(n, n);
        return oracle::rel_error(oracle::b_projector(grqi_step(x, s), eye),
                                 oracle::b_projector(z, eye));
      });
    }

    GeneralizedStiefel man(a, b, r);
    const Matrix x = oracle_stiefel_point(b, inst);
    const StiefelPoint p = man.make_point(x);

    proj.run([&] {
      const Matrix v = inst.normal.matrix(n, r);
      return oracle::rel_error(man.euclidean_project(p, v).xi,
                               oracle::euclidean_project_oracle(x, b, v));
    });

    const Matrix lambda = oracle::lambda_least_squares(x, a, b);
    lam.run([&] { return oracle::rel_error(man.lambda_ls(p), lambda); });

    for (const StiefelCase &sc : stiefel_cases(i)) {
      Worst &target = sc.spec.family == StiefelMetricFamily::Euclidean
                          ? sd_e
                          : sc.spec.family == StiefelMetricFamily::ConvexShifted
                                ? sd_c
                                : sd_cc;
      oracle::KktSolution ref;
      if (sc.spec.family == StiefelMetricFamily::Euclidean) {
        ref = oracle::kkt_monolithic(Matrix::Identity(n * r, n * r), b * x,
                                     -a * x);
      } else {
        const auto [weight, shift] = oracle_shift(sc.spec, lambda);
        ref = oracle::search_direction_oracle(a, b, x, weight, shift);
      }
      try {
        const StiefelSearchDirection sd = man.search_direction(p, sc.spec);
        target.add(oracle::rel_error(sd.zeta.xi, ref.zeta));
        // The Euclidean branch parametrizes the normal component with the
        // opposite sign.
        const Matrix lib_mu =
            sc.spec.family == StiefelMetricFamily::Euclidean ? Matrix(-sd.mu)
                                                             : sd.mu;
        mu.add(oracle::rel_error(lib_mu, ref.mu));
      } catch (const Error &) {
        target.add(std::numeric_limits<double>::quiet_NaN());
      }
    }
  }
  return {sylv.result(), psd.result(), grqi_z.result(), grqi_p.result(),
          proj.result(), lam.result(),  sd_e.result(),   sd_c.result(),
          sd_cc.result(), mu.result()};
}

std::vector<CheckResult> invariance_battery(int instances, std::uint64_t seed) {
  std::vector<Worst> stiefel_metric, stiefel_grad, gh_metric, gh_grad,
      psd_metric, psd_grad;
  for (const StiefelCase &sc : stiefel_cases(1)) {
    stiefel_metric.emplace_back("stiefel " + sc.label + " metric O(r)",
                                kInvarianceTol);
    stiefel_grad.emplace_back("stiefel " + sc.label + " gradient O(r)",
                              kEquivarianceTol);
  }
  for (const GhCase &gc : gh_cases()) {
    gh_metric.emplace_back("GH " + gc.label + " metric GL(r)", kInvarianceTol);
    gh_grad.emplace_back("GH " + gc.label + " gradient GL(r)",
                         kEquivarianceTol);
  }
  for (const PsdCase &pc : psd_cases()) {
    psd_metric.emplace_back("PSD " + pc.label + " metric O(r)", kInvarianceTol);
    psd_grad.emplace_back("PSD " + pc.label + " gradient O(r)",
                          kEquivarianceTol);
  }
  Worst lam_eq("stiefel lambda O(r) equivariance", kEquivarianceTol);

  for (int i = 0; i < instances; ++i) {
    Instance inst = make_instance(seed, i);
    const Index n = inst.n, r = inst.r;
    const Matrix a = oracle::random_spd(n, inst.normal);
    const Matrix b = oracle::random_spd(n, inst.normal);
    const Matrix q = oracle::random_orthogonal(r, inst.normal);

    // Generalized Stiefel / Grassmann
    {
      GeneralizedStiefel man(a, b, r);
      const Matrix x = oracle_stiefel_point(b, inst);
      const StiefelPoint p = man.make_point(x);
      const StiefelPoint pq = man.make_point(x * q);
      const Matrix xi = oracle::euclidean_project_oracle(
          x, b, inst.normal.matrix(n, r));
      const Matrix eta = oracle::euclidean_project_oracle(
          x, b, inst.normal.matrix(n, r));
      const Matrix lam = man.lambda_ls(p);
      const Matrix lam_q = man.lambda_ls(pq);
      lam_eq.add(oracle::rel_error(lam_q, q.transpose() * lam * q));
      const auto cases = stiefel_cases(i == 0 ? 1 : i);
      for (std::size_t c = 0; c < cases.size(); ++c) {
        const StiefelMetricSpec &spec = cases[c].spec;
        stiefel_metric[c].run([&] {
          const double base =
              man.metric_eval(spec, p, lam, {xi, p}, {eta, p});
          const double moved =
              man.metric_eval(spec, pq, lam_q, {xi * q, pq}, {eta * q, pq});
          const double scale = std::abs(man.metric_eval(spec, p, lam, {xi, p},
                                                        {xi, p})) +
                               std::abs(man.metric_eval(spec, p, lam,
                                                        {eta, p}, {eta, p}));
          return pairing_error(moved, base, scale);
        });
        stiefel_grad[c].run([&] {
          const Matrix z = man.search_direction(p, spec).zeta.xi;
          const Matrix zq = man.search_direction(pq, spec).zeta.xi;
          return oracle::rel_error(zq, z * q);
        });
      }
    }

    // Two-factor G H^T under GL(r)
    {
      const Index m = n + 1;
      const Matrix bm = oracle::random_spd(m, inst.normal);
      const Matrix c = 0.05 * inst.normal.matrix(n, m) / static_cast<double>(n);
      GhGeometry geo(a, bm, c);
      const FactorPair p =
          geo.make_point(inst.normal.matrix(n, r), inst.normal.matrix(m, r));
      const Matrix mt = oracle::random_invertible(r, inst.normal);
      const FactorPair pm = transform(p, mt);
      const GhTangent xi{inst.normal.matrix(n, r), inst.normal.matrix(m, r)};
      const GhTangent eta{inst.normal.matrix(n, r), inst.normal.matrix(m, r)};
      const auto cases = gh_cases();
      for (std::size_t k = 0; k < cases.size(); ++k) {
        const RankMetricSpec &spec = cases[k].spec;
        gh_metric[k].run([&] {
          const double base = geo.metric_eval(spec, p, xi, eta);
          const double moved =
              geo.metric_eval(spec, pm, transform(xi, mt), transform(eta, mt));
          const double scale = std::abs(geo.metric_eval(spec, p, xi, xi)) +
                               std::abs(geo.metric_eval(spec, p, eta, eta));
          return pairing_error(moved, base, scale);
        });
        gh_grad[k].run([&] {
          const GhTangent g = gh_gradient(geo, p, spec);
          const GhTangent gm = gh_gradient(geo, pm, spec);
          // Covariant transform of a gradient: (g_G M, g_H M^{-T}).
          const GhTangent expect = transform(g, mt);
          const double err = std::sqrt((gm.g - expect.g).squaredNorm() +
                                       (gm.h - expect.h).squaredNorm());
          return err / pair_norm(expect);
        });
      }
    }

    // Symmetric Y Y^T under O(r)
    {
      const Matrix c = small_psd(n, inst.normal);
      PsdGeometry geo(a, b, c);
      const Matrix y = inst.normal.matrix(n, r);
      const Matrix xi = inst.normal.matrix(n, r);
      const Matrix eta = inst.normal.matrix(n, r);
      const auto cases = psd_cases();
      for (std::size_t k = 0; k < cases.size(); ++k) {
        const PsdMetricSpec &spec = cases[k].spec;
        psd_metric[k].run([&] {
          const double base = geo.metric_eval(spec, y, xi, eta);
          const double moved = geo.metric_eval(spec, y * q, xi * q, eta * q);
          const double scale = std::abs(geo.metric_eval(spec, y, xi, xi)) +
                               std::abs(geo.metric_eval(spec, y, eta, eta));
          return pairing_error(moved, base, scale);
        });
        psd_grad[k].run([&] {
          const Matrix g = psd_gradient(geo, y, spec);
          const Matrix gq = psd_gradient(geo, y * q, spec);
          return oracle::rel_error(gq, g * q);
        });
      }
    }
  }

  std::vector<CheckResult> out;
  for (auto *group : {&stiefel_metric, &stiefel_grad, &gh_metric, &gh_grad,
                      &psd_metric, &psd_grad})
    for (const Worst &w : *group)
      out.push_back(w.result());
  out.push_back(lam_eq.result());
  return out;
}

std::vector<CheckResult> gradient_checks(int instances, std::uint64_t seed) {
  std::vector<Worst> st_def, st_fd, gh_def, psd_def;
  for (const StiefelCase &sc : stiefel_cases(1)) {
    st_def.emplace_back("stiefel " + sc.label + " defining equation",
                        kDefiningTol);
    st_fd.emplace_back("stiefel " + sc.label + " finite difference", kFdTol);
  }
  for (const GhCase &gc : gh_cases())
    gh_def.emplace_back("GH " + gc.label + " defining equation", kDefiningTol);
  for (const PsdCase &pc : psd_cases())
    psd_def.emplace_back("PSD " + pc.label + " defining equation",
                         kDefiningTol);
  Worst st_egrad("stiefel euclidean gradient finite difference", kFdTol);
  Worst gh_egrad("GH euclidean gradient finite difference", kFdTol);
  Worst psd_egrad("PSD euclidean gradient finite difference", kFdTol);

  for (int i = 0; i < instances; ++i) {
    Instance inst = make_instance(seed, i);
    const Index n = inst.n, r = inst.r;
    const Matrix a = oracle::random_spd(n, inst.normal);
    const Matrix b = oracle::random_spd(n, inst.normal);

    {
      GeneralizedStiefel man(a, b, r);
      const Matrix x = oracle_stiefel_point(b, inst);
      const StiefelPoint p = man.make_point(x);
      const Matrix ax = a * x;
      const Matrix eta =
          oracle::euclidean_project_oracle(x, b, inst.normal.matrix(n, r));
      const Matrix v = inst.normal.matrix(n, r);
      st_egrad.run([&] {
        auto f = [&](const Matrix &z) {
          return 0.5 * (z.transpose() * a * z).trace();
        };
        const double fd = oracle::central_difference(f, x, v, kFdStep);
        return pairing_error(fd, frob_inner(man.euclidean_gradient(p), v),
                             ax.norm() * v.norm());
      });
      const Matrix lam = man.lambda_ls(p);
      const auto cases = stiefel_cases(i == 0 ? 1 : i);
      for (std::size_t c = 0; c < cases.size(); ++c) {
        const StiefelMetricSpec &spec = cases[c].spec;
        const StiefelTangent tan{eta, p};
        st_def[c].run([&] {
          const StiefelTangent zeta = man.search_direction(p, spec).zeta;
          const double lhs = man.metric_eval(spec, p, lam, zeta, tan);
          return pairing_error(lhs, -frob_inner(ax, eta), ax.norm() * eta.norm());
        });
        st_fd[c].run([&] {
          const StiefelTangent zeta = man.search_direction(p, spec).zeta;
          const double slope = man.metric_eval(spec, p, lam, zeta, tan);
          const double fd = (man.cost(man.retract(p, tan, kFdStep)) -
                             man.cost(man.retract(p, tan, -kFdStep))) /
                            (2.0 * kFdStep);
          return pairing_error(fd, -slope, ax.norm() * eta.norm());
        });
      }
    }

    {
      const Index m = n + 1;
      const Matrix bm = oracle::random_spd(m, inst.normal);
      const Matrix c = 0.05 * inst.normal.matrix(n, m) / static_cast<double>(n);
      GhGeometry geo(a, bm, c);
      const FactorPair p =
          geo.make_point(inst.normal.matrix(n, r), inst.normal.matrix(m, r));
      const GhTangent eta{inst.normal.matrix(n, r), inst.normal.matrix(m, r)};
      const GhTangent egrad = geo.euclidean_gradient(p);
      const double scale = pair_norm(egrad) * pair_norm(eta);
      const double fd =
          (geo.cost({p.g + kFdStep * eta.g, p.h + kFdStep * eta.h}) -
           geo.cost({p.g - kFdStep * eta.g, p.h - kFdStep * eta.h})) /
          (2.0 * kFdStep);
      gh_egrad.add(pairing_error(fd, frob_inner(egrad, eta), scale));
      const auto cases = gh_cases();
      for (std::size_t k = 0; k < cases.size(); ++k) {
        gh_def[k].run([&] {
          const GhTangent g = gh_gradient(geo, p, cases[k].spec);
          return pairing_error(geo.metric_eval(cases[k].spec, p, g, eta),
                               frob_inner(egrad, eta), scale);
        });
      }
    }

    {
      const Matrix c = small_psd(n, inst.normal);
      PsdGeometry geo(a, b, c);
      const Matrix y = inst.normal.matrix(n, r);
      const Matrix eta = inst.normal.matrix(n, r);
      const Matrix egrad = geo.euclidean_gradient(y);
      const double scale = egrad.norm() * eta.norm();
      const double fd = oracle::central_difference(
          [&](const Matrix &z) { return geo.cost(z); }, y, eta, kFdStep);
      psd_egrad.add(pairing_error(fd, frob_inner(egrad, eta), scale));
      const auto cases = psd_cases();
      for (std::size_t k = 0; k < cases.size(); ++k) {
        psd_def[k].run([&] {
          const Matrix g = psd_gradient(geo, y, cases[k].spec);
          return pairing_error(geo.metric_eval(cases[k].spec, y, g, eta),
                               frob_inner(egrad, eta), scale);
        });
      }
    }
  }

  std::vector<CheckResult> out{st_egrad.result(), gh_egrad.result(),
                               psd_egrad.result()};
  for (auto *group : {&st_def, &st_fd, &gh_def, &psd_def})
    for (const Worst &w : *group)
      out.push_back(w.result());
  return out;
}

bool print_table(const std::vector<CheckResult> &results, std::ostream &out) {
  bool all = true;
  char line[160];
  std::snprintf(line, sizeof line, "%-48s %5s %12s %10s  %s\n", "check", "n",
                "worst", "tol", "result");
  out << line;
  for (const CheckResult &r : results) {
    std::snprintf(line, sizeof line, "%-48s %5d %12.3e %10.1e  %s\n",
                  r.name.c_str(), r.instances, r.worst, r.tol,
                  r.passed() ? "PASS" : "FAIL");
    out << line;
    all = all && r.passed();
  }
  return all;
}

} // namespace rprecon::checks
