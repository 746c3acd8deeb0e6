#pragma once

#include <cmath>
#include <cstdint>

#include "efdiv/chernoff.hpp"
#include "efdiv/divergences.hpp"
#include "efdiv/family.hpp"
#include "efdiv/sampling.hpp"

namespace efdiv::bayes {

// Two classes from one exponential family with prior w1 on the first.
struct BinaryProblem {
  FamilyRef family;
  ParamPoint theta1;
  ParamPoint theta2;
  double w1 = 0.5;

  BinaryProblem(ParamPoint t1, ParamPoint t2, double prior1)
      : family(t1.family), theta1(std::move(t1)), theta2(std::move(t2)),
        w1(prior1) {
    require_same_family(theta1, theta2, "BinaryProblem");
    require_natural(theta1, "BinaryProblem");
    require_natural(theta2, "BinaryProblem");
    if (!family->domain_test(theta1.data) || !family->domain_test(theta2.data))
      throw domain_error("BinaryProblem: class parameter outside the domain");
    if (!(w1 > 0.0 && w1 < 1.0))
      throw range_error("BinaryProblem: w1 must lie in (0,1)");
  }
};

struct ErrorEstimate {
  double point_estimate = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

// MAP rule; the decision border is linear in the sufficient statistic.
// Ties go to class 1.
inline int map_decide(const BinaryProblem& problem, const Eigen::VectorXd& x) {
  const FamilyDescriptor& f = *problem.family;
  const double score =
      inner_product(f.sufficient_statistic(x),
                    combine(problem.theta1.data, 1.0, problem.theta2.data, -1.0)) -
      f.log_normalizer(problem.theta1.data) +
      f.log_normalizer(problem.theta2.data);
  return score >= std::log((1.0 - problem.w1) / problem.w1) ? 1 : 2;
}

// Monte-Carlo Bayes error: draw the class from the prior, draw the
// observation from that class, count MAP mistakes.
inline ErrorEstimate empirical_bayes_error(const BinaryProblem& problem,
                                           long n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("empirical_bayes_error: n must be >= 1");
  Sampler s1(problem.theta1);
  Sampler s2(problem.theta2);
  Rng rng(seed);
  long mistakes = 0;
  for (long i = 0; i < n; ++i) {
    const int cls = rng.uniform() < problem.w1 ? 1 : 2;
    const Eigen::VectorXd x = cls == 1 ? s1.draw(rng) : s2.draw(rng);
    if (map_decide(problem, x) != cls) ++mistakes;
  }
  const double p_hat = static_cast<double>(mistakes) / static_cast<double>(n);
  return ErrorEstimate{p_hat, std::sqrt(p_hat * (1.0 - p_hat) / n), n};
}

// E* <= w1^alpha w2^(1-alpha) c_alpha(p1 : p2).
inline double chernoff_bound(const BinaryProblem& problem, double alpha) {
  detail::require_alpha_open(alpha, "chernoff_bound");
  const double c =
      chernoff_alpha_coefficient(problem.theta1, problem.theta2, alpha);
  return std::pow(problem.w1, alpha) * std::pow(1.0 - problem.w1, 1.0 - alpha) *
         c;
}

namespace detail_bayes {

// log of the bound as a function of the exponent; convex, so a
// golden-section search pins the global minimum.
inline double golden_min_exponent(const BinaryProblem& problem) {
  const double lw1 = std::log(problem.w1);
  const double lw2 = std::log(1.0 - problem.w1);
  auto objective = [&](double a) {
    return a * lw1 + (1.0 - a) * lw2 -
           chernoff_alpha_divergence(problem.theta1, problem.theta2, a).value;
  };
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 1e-9, hi = 1.0 - 1e-9;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail_bayes

// With equal priors the prior factor is constant and the divergence
// maximizer alpha* is optimal; otherwise the full product is minimized,
// which tightens the bound.
inline double best_chernoff_bound(const BinaryProblem& problem) {
  if (detail_chernoff::same_point(problem.theta1.data, problem.theta2.data))
    return std::sqrt(problem.w1 * (1.0 - problem.w1));
  double alpha;
  if (problem.w1 == 0.5) {
    alpha = chernoff_information(problem.theta1, problem.theta2).alpha_star;
  } else {
    alpha = detail_bayes::golden_min_exponent(problem);
  }
  return chernoff_bound(problem, alpha);
}

struct BoundOrderingReport {
  double chernoff_info = 0.0;
  double resistor = 0.0;
  double jeffreys = 0.0;
  double bhattacharyya_info = 0.0;
  double alpha_star = 0.5;
  bool chernoff_le_resistor = true;
  bool resistor_le_jeffreys = true;
  bool bhattacharyya_le_chernoff = true;

  bool ordering_ok() const {
    return chernoff_le_resistor && resistor_le_jeffreys &&
           bhattacharyya_le_chernoff;
  }
};

// The four error exponents plus the checked (not assumed) ordering
// C* <= R <= J and C_1/2 <= C*.
inline BoundOrderingReport bound_ordering_report(const BinaryProblem& problem) {
  const ParamPoint& p = problem.theta1;
  const ParamPoint& q = problem.theta2;
  BoundOrderingReport out;
  if (detail_chernoff::same_point(p.data, q.data)) return out;
  const ChernoffResult star = chernoff_information(p, q);
  out.chernoff_info = star.info;
  out.alpha_star = star.alpha_star;
  out.resistor = resistor_average(p, q).value;
  out.jeffreys = jeffreys(p, q).value;
  out.bhattacharyya_info = bhattacharyya(p, q).value;
  constexpr double kSlack = 1e-12;
  out.chernoff_le_resistor = out.chernoff_info <= out.resistor + kSlack;
  out.resistor_le_jeffreys = out.resistor <= out.jeffreys + kSlack;
  out.bhattacharyya_le_chernoff =
      out.bhattacharyya_info <= out.chernoff_info + kSlack;
  return out;
}

}  // namespace efdiv::bayes
