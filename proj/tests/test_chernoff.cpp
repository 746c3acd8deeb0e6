#include <cmath>
#include <sstream>

#include "efdiv/chernoff.hpp"
#include "test_util.hpp"

using namespace efdiv;
using namespace testutil;

namespace {

ParamPoint gaussian1d_point(const FamilyRef& fam, double mu, double var) {
  Eigen::VectorXd v(2);
  v << mu, var;
  return source_point(fam, PointData{v});
}

// Chernoff information for two Poisson rates through the chord-slope
// construction, in the closed algebraic form.
double poisson_reference_info(double l1, double l2) {
  const double rho = l2 / l1;
  const double lr = std::log(rho);
  return l1 * ((rho - 1.0) * (std::log((rho - 1.0) / lr) - 1.0) + lr) / lr;
}

}  // namespace

TEST_CASE("e-geodesic endpoints and interior") {
  Gen g(301);
  for (const FamilyRef& fam : catalog()) {
    CAPTURE(fam->name, fam->vec_dim);
    const auto [p, q] = random_pair(fam, g);
    REQUIRE(max_abs_diff(e_geodesic(p, q, 0.0).data, p.data) == 0.0);
    REQUIRE(max_abs_diff(e_geodesic(p, q, 1.0).data, q.data) == 0.0);
    const ParamPoint mid = e_geodesic(p, q, 0.5);
    REQUIRE(fam->domain_test(mid.data));
    REQUIRE(mid.system == CoordSystem::natural);
  }
  const FamilyRef poisson = make_poisson();
  const auto [p, q] = random_pair(poisson, g);
  REQUIRE_THROWS_AS(e_geodesic(p, q, 1.5), range_error);
  REQUIRE_THROWS_AS(e_geodesic(p, q, -0.1), range_error);
}

TEST_CASE("m-geodesic interpolates expectations and mixture moments") {
  const FamilyRef poisson = make_poisson();
  const ParamPoint p = source_point(poisson, pd1(2.0));
  const ParamPoint q = source_point(poisson, pd1(5.0));
  const ParamPoint ep = legendre_dual(p);
  const ParamPoint eq = legendre_dual(q);

  REQUIRE(max_abs_diff(m_geodesic_eta(ep, eq, 0.0).data, ep.data) == 0.0);
  REQUIRE(max_abs_diff(m_geodesic_eta(ep, eq, 1.0).data, eq.data) == 0.0);
  const ParamPoint half = m_geodesic_eta(ep, eq, 0.5);
  REQUIRE(half.system == CoordSystem::expectation);
  REQUIRE(half.data.vec[0] ==
          Catch::Approx(0.5 * (ep.data.vec[0] + eq.data.vec[0])).margin(1e-15));

  // mean of the lambda-mixture density equals the eta interpolation
  for (double lambda : {0.25, 0.6}) {
    double mixture_mean = 0.0;
    for (long k = 0; k <= 200; ++k) {
      const Eigen::VectorXd x = vec1(double(k));
      mixture_mean += k * ((1.0 - lambda) * density(p, x) +
                           lambda * density(q, x));
    }
    REQUIRE(m_geodesic_eta(ep, eq, lambda).data.vec[0] ==
            Catch::Approx(mixture_mean).margin(1e-9));
  }

  REQUIRE_THROWS_AS(m_geodesic_eta(p, eq, 0.5), dimension_error);
}

TEST_CASE("bisector gap at the endpoints") {
  Gen g(302);
  for (const FamilyRef& fam : catalog()) {
    CAPTURE(fam->name);
    const auto [p, q] = random_pair(fam, g);
    REQUIRE(bisector_gap(p, q, p) ==
            Catch::Approx(-bregman(*fam, q, p).value).margin(1e-13));
    REQUIRE(bisector_gap(p, q, q) ==
            Catch::Approx(bregman(*fam, p, q).value).margin(1e-13));
    REQUIRE(bisector_gap(p, q, p) < 0.0);
    REQUIRE(bisector_gap(p, q, q) > 0.0);
    // degenerate pair: zero everywhere
    REQUIRE(bisector_gap(p, p, q) == Catch::Approx(0.0).margin(1e-14));
  }
}

TEST_CASE("optimality residual is the bisector gap") {
  Gen g(303);
  for (const FamilyRef& fam : catalog()) {
    CAPTURE(fam->name);
    for (int trial = 0; trial < 20; ++trial) {
      const auto [p, q] = random_pair(fam, g);
      const ParamPoint theta = random_point(fam, g);
      const double gap = bisector_gap(p, q, theta);
      const double residual = optimality_residual(p, q, theta);
      REQUIRE(std::abs(gap - residual) <= 1e-12 * (1.0 + std::abs(gap)));
    }
  }

  // vanishing residual at the closed-form optimum
  const FamilyRef poisson = make_poisson();
  const ParamPoint p = source_point(poisson, pd1(2.0));
  const ParamPoint q = source_point(poisson, pd1(5.0));
  const ChernoffResult star = chernoff_closed_form_order1(p, q);
  REQUIRE(std::abs(optimality_residual(p, q, star.theta_star)) <= 1e-10);

  // exactly balanced at the fixed-sigma midpoint
  const FamilyRef gfs = make_gaussian_fixed_sigma(3.0);
  const ParamPoint gp = source_point(gfs, pd1(0.0));
  const ParamPoint gq = source_point(gfs, pd1(2.0));
  REQUIRE(std::abs(optimality_residual(gp, gq, e_geodesic(gp, gq, 0.5))) <=
          1e-15);
}

TEST_CASE("closed-form chernoff information, fixed-sigma gaussian") {
  const FamilyRef gfs = make_gaussian_fixed_sigma(3.0);
  const ParamPoint p = source_point(gfs, pd1(0.0));
  const ParamPoint q = source_point(gfs, pd1(2.0));
  const ChernoffResult res = chernoff_closed_form_order1(p, q);
  REQUIRE(res.method == ChernoffMethod::closed_form);
  REQUIRE(res.alpha_star == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(res.info == Catch::Approx(4.0 / 72.0).margin(1e-13));
  REQUIRE(res.iterations == 0);
}

TEST_CASE("closed-form chernoff information, poisson") {
  const FamilyRef poisson = make_poisson();
  const ParamPoint p = source_point(poisson, pd1(2.0));
  const ParamPoint q = source_point(poisson, pd1(5.0));
  const ChernoffResult res = chernoff_closed_form_order1(p, q);

  REQUIRE(res.info ==
          Catch::Approx(poisson_reference_info(2.0, 5.0)).margin(1e-12));
  REQUIRE(res.alpha_star > 0.0);
  REQUIRE(res.alpha_star < 1.0);

  // alpha* from the chord-slope equation, under the convention that
  // alpha weights theta_p
  const double slope = (2.0 - 5.0) / std::log(2.0 / 5.0);
  const double expected_alpha =
      (std::log(slope) - std::log(5.0)) / std::log(2.0 / 5.0);
  REQUIRE(res.alpha_star == Catch::Approx(expected_alpha).margin(1e-13));

  // grid refinement brackets it
  const oracle::GridMax grid = oracle::alpha_grid_argmax(p, q, 1e-4);
  REQUIRE(std::abs(grid.alpha - res.alpha_star) <= 1e-4);
  REQUIRE(grid.value <= res.info + 1e-12);

  // swap symmetry
  const ChernoffResult swapped = chernoff_closed_form_order1(q, p);
  REQUIRE(swapped.info == Catch::Approx(res.info).margin(1e-12));
  REQUIRE(swapped.alpha_star ==
          Catch::Approx(1.0 - res.alpha_star).margin(1e-12));

  // result invariants: theta* on the geodesic, info = J at alpha*
  const PointData mix =
      combine(p.data, res.alpha_star, q.data, 1.0 - res.alpha_star);
  REQUIRE(max_abs_diff(mix, res.theta_star.data) <= 1e-14);
  REQUIRE(std::abs(res.info -
                   skew_jensen(*poisson, p, q, res.alpha_star).value) <=
          1e-12);
}

TEST_CASE("closed form requires an order-1 scalar family") {
  const FamilyRef mvn = make_gaussian_mvn(2);
  Gen g(304);
  const auto [p, q] = random_pair(mvn, g);
  REQUIRE_THROWS_AS(chernoff_closed_form_order1(p, q), dimension_error);
}

TEST_CASE("bisection agrees with the closed form") {
  const FamilyRef gfs = make_gaussian_fixed_sigma(3.0);
  const ParamPoint gp = source_point(gfs, pd1(0.0));
  const ParamPoint gq = source_point(gfs, pd1(2.0));
  const ChernoffResult gb = chernoff_bisection(gp, gq);
  REQUIRE(gb.method == ChernoffMethod::bisection);
  REQUIRE(gb.alpha_star == Catch::Approx(0.5).margin(1e-9));
  REQUIRE(gb.info == Catch::Approx(4.0 / 72.0).margin(1e-12));

  const FamilyRef poisson = make_poisson();
  const ParamPoint p = source_point(poisson, pd1(2.0));
  const ParamPoint q = source_point(poisson, pd1(5.0));
  const ChernoffResult closed = chernoff_closed_form_order1(p, q);
  const ChernoffResult bisect = chernoff_bisection(p, q);
  REQUIRE(bisect.alpha_star == Catch::Approx(closed.alpha_star).margin(1e-9));
  REQUIRE(bisect.info == Catch::Approx(closed.info).margin(1e-10));
  REQUIRE(std::abs(bisect.bregman_gap) <= 1e-10);
  REQUIRE(bisect.iterations <= 41);
}

TEST_CASE("bisection on 2-D gaussians matches the grid argmax") {
  Gen g(305);
  const FamilyRef mvn = make_gaussian_mvn(2);
  for (int trial = 0; trial < 3; ++trial) {
    const auto [p, q] = random_pair(mvn, g);
    const ChernoffResult res = chernoff_bisection(p, q);
    const oracle::GridMax grid = oracle::alpha_grid_argmax(p, q, 1e-4);
    REQUIRE(std::abs(res.info - grid.value) <= 1e-7);
    REQUIRE(std::abs(res.alpha_star - grid.alpha) <= 1e-4);
  }
}

TEST_CASE("bisection degenerate pair and non-convergence") {
  const FamilyRef poisson = make_poisson();
  const ParamPoint p = source_point(poisson, pd1(2.0));
  const ChernoffResult deg = chernoff_bisection(p, p);
  REQUIRE(deg.alpha_star == 0.5);
  REQUIRE(deg.info == 0.0);
  REQUIRE(deg.iterations == 0);

  const ParamPoint q = source_point(poisson, pd1(5.0));
  BisectionConfig tight;
  tight.alpha_tolerance = 1e-15;
  tight.gap_tolerance = 1e-30;
  tight.max_iterations = 5;
  try {
    chernoff_bisection(p, q, tight);
    FAIL("expected convergence_error");
  } catch (const convergence_error& e) {
    REQUIRE(e.best.iterations == 5);
    REQUIRE(e.best.alpha_star > 0.0);
    REQUIRE(e.best.alpha_star < 1.0);
  }

  BisectionConfig bad;
  bad.max_iterations = 0;
  REQUIRE_THROWS_AS(chernoff_bisection(p, q, bad), std::invalid_argument);
}

TEST_CASE("dispatcher picks the route and tags it") {
  Gen g(306);
  const FamilyRef poisson = make_poisson();
  const auto [p, q] = random_pair(poisson, g);
  REQUIRE(chernoff_information(p, q).method == ChernoffMethod::closed_form);

  const FamilyRef g1 = make_gaussian_1d();
  const auto [a, b] = random_pair(g1, g);
  REQUIRE(chernoff_information(a, b).method == ChernoffMethod::bisection);
}

TEST_CASE("gap is strictly monotone along the geodesic") {
  Gen g(307);
  for (const FamilyRef& fam : catalog()) {
    CAPTURE(fam->name, fam->vec_dim);
    const auto [p, q] = random_pair(fam, g);
    double prev = bisector_gap(p, q, e_geodesic(p, q, 0.0));
    for (int i = 1; i <= 100; ++i) {
      const double lambda = i / 100.0;
      const double cur = bisector_gap(p, q, e_geodesic(p, q, lambda));
      REQUIRE(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("fixed-point identities at the chernoff point") {
  Gen g(308);
  for (const FamilyRef& fam : catalog()) {
    CAPTURE(fam->name);
    const auto [p, q] = random_pair(fam, g);
    const ChernoffResult res = chernoff_information(p, q);
    const double bp = bregman(*fam, p, res.theta_star).value;
    const double bq = bregman(*fam, q, res.theta_star).value;
    REQUIRE(std::abs(bp - bq) <= 1e-10);
    REQUIRE(bp == Catch::Approx(res.info).margin(1e-9));
    REQUIRE(bq == Catch::Approx(res.info).margin(1e-9));
  }
}

TEST_CASE("kl balance at the chernoff point through the oracle") {
  Gen g(309);
  for (const FamilyRef& fam : oracle_friendly()) {
    CAPTURE(fam->name);
    const auto [p, q] = random_pair(fam, g);
    const ChernoffResult res = chernoff_information(p, q);
    const oracle::IntegrationSpec spec = oracle::default_spec(*fam);
    const double to_p = oracle::kl_numeric(res.theta_star, p, spec);
    const double to_q = oracle::kl_numeric(res.theta_star, q, spec);
    REQUIRE(std::abs(to_p - to_q) <= 1e-5);
  }
}

TEST_CASE("chernoff information is symmetric") {
  Gen g(310);
  for (const FamilyRef& fam : catalog()) {
    CAPTURE(fam->name);
    const auto [p, q] = random_pair(fam, g);
    const ChernoffResult a = chernoff_information(p, q);
    const ChernoffResult b = chernoff_information(q, p);
    REQUIRE(std::abs(a.info - b.info) <= 1e-10);
    REQUIRE(std::abs(a.alpha_star + b.alpha_star - 1.0) <= 1e-8);
  }
}

TEST_CASE("chernoff distribution equals the normalized geometric mean") {
  const oracle::IntegrationSpec discrete{oracle::Scheme::discrete_sum};
  const FamilyRef poisson = make_poisson();
  const ParamPoint p = source_point(poisson, pd1(2.0));
  const ParamPoint q = source_point(poisson, pd1(5.0));
  const ChernoffResult res = chernoff_information(p, q);
  REQUIRE(chernoff_point_density_check(p, q, res, discrete) <= 1e-8);
  const ChernoffResult self = chernoff_information(p, p);
  REQUIRE(chernoff_point_density_check(p, p, self, discrete) <= 1e-9);

  const FamilyRef g1 = make_gaussian_1d();
  const ParamPoint gp = gaussian1d_point(g1, 0.0, 9.0);
  const ParamPoint gq = gaussian1d_point(g1, 2.0, 36.0);
  const ChernoffResult gres = chernoff_information(gp, gq);
  const oracle::IntegrationSpec quad{oracle::Scheme::adaptive_quadrature};
  REQUIRE(chernoff_point_density_check(gp, gq, gres, quad) <= 1e-6);

  // vector families have no oracle grid
  Gen g(312);
  const FamilyRef mvn = make_gaussian_mvn(2);
  const auto [mp, mq] = random_pair(mvn, g);
  const ChernoffResult mres = chernoff_information(mp, mq);
  REQUIRE_THROWS_AS(chernoff_point_density_check(
                        mp, mq, mres, oracle::default_spec(*mvn)),
                    unsupported_error);
}

TEST_CASE("alpha sweep tables") {
  const FamilyRef gfs = make_gaussian_fixed_sigma(3.0);
  const ParamPoint p = source_point(gfs, pd1(0.0));
  const ParamPoint q = source_point(gfs, pd1(2.0));

  // swap-symmetric pair: the two-point grid gives equal values
  const SweepTable two = alpha_sweep(p, q, {0.3, 0.7});
  REQUIRE(two.rows.size() == 2);
  REQUIRE(two.rows[0].value == Catch::Approx(two.rows[1].value).margin(1e-14));

  // equal-variance gaussian sweep is symmetric about 1/2 and peaks there
  const FamilyRef g1 = make_gaussian_1d();
  const ParamPoint gp = gaussian1d_point(g1, 0.0, 9.0);
  const ParamPoint gq = gaussian1d_point(g1, 2.0, 9.0);
  const SweepTable sym = alpha_sweep(gp, gq, uniform_alpha_grid(99));
  REQUIRE(sym.rows.size() == 99);
  for (int i = 0; i < 49; ++i)
    REQUIRE(sym.rows[i].value ==
            Catch::Approx(sym.rows[98 - i].value).margin(1e-12));
  REQUIRE(sym.max_row().alpha == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(sym.max_row().value == Catch::Approx(4.0 / 72.0).margin(1e-12));

  // unequal variances: the peak moves off center, located by bisection
  const ParamPoint hp = gaussian1d_point(g1, 0.0, 9.0);
  const ParamPoint hq = gaussian1d_point(g1, 2.0, 36.0);
  const ChernoffResult star = chernoff_information(hp, hq);
  REQUIRE(std::abs(star.alpha_star - 0.5) > 0.01);
  const SweepTable off = alpha_sweep(hp, hq, uniform_alpha_grid(99));
  REQUIRE(std::abs(off.max_row().alpha - star.alpha_star) <= 0.01 + 1e-12);
  REQUIRE(off.max_row().value <= star.info + 1e-9);

  // sweep maxima never exceed the optimized value
  Gen g(311);
  for (const FamilyRef& fam : catalog()) {
    const auto [a, b] = random_pair(fam, g);
    const SweepTable t = alpha_sweep(a, b, uniform_alpha_grid(33));
    REQUIRE(t.max_row().value <=
            chernoff_information(a, b).info + 1e-9);
  }
}

TEST_CASE("sweep csv format") {
  const FamilyRef poisson = make_poisson();
  const ParamPoint p = source_point(poisson, pd1(2.0));
  const ParamPoint q = source_point(poisson, pd1(5.0));
  const SweepTable t = alpha_sweep(p, q, uniform_alpha_grid(9));

  std::ostringstream a, b;
  t.to_csv(a);
  t.to_csv(b);
  REQUIRE(a.str() == b.str());  // stable across runs

  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "alpha,chernoff_alpha_divergence");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    // 17 significant digits round-trip exactly
    const double alpha = std::stod(line.substr(0, comma));
    const double value = std::stod(line.substr(comma + 1));
    REQUIRE(alpha == t.rows[rows].alpha);
    REQUIRE(value == t.rows[rows].value);
    ++rows;
  }
  REQUIRE(rows == 9);
}
