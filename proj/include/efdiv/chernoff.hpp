#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "efdiv/divergences.hpp"
#include "efdiv/family.hpp"
#include "efdiv/oracle.hpp"

namespace efdiv {

struct BisectionConfig {
  double alpha_tolerance = 1e-12;
  double gap_tolerance = 1e-10;
  int max_iterations = 200;
};

enum class ChernoffMethod { closed_form, bisection };

// Convention used throughout: theta(alpha) = alpha theta_p + (1-alpha)
// theta_q, so alpha is the weight on the first argument.
struct ChernoffResult {
  double alpha_star = 0.5;
  double info = 0.0;
  ParamPoint theta_star;
  double bregman_gap = 0.0;
  int iterations = 0;
  ChernoffMethod method = ChernoffMethod::bisection;
};

struct convergence_error : std::runtime_error {
  convergence_error(const std::string& msg, ChernoffResult best_iterate)
      : std::runtime_error(msg), best(std::move(best_iterate)) {}
  ChernoffResult best;
};

namespace detail_chernoff {

inline void validate_config(const BisectionConfig& cfg) {
  if (!(cfg.alpha_tolerance > 0.0) || !(cfg.gap_tolerance > 0.0))
    throw std::invalid_argument("BisectionConfig: tolerances must be positive");
  if (cfg.max_iterations < 1)
    throw std::invalid_argument("BisectionConfig: max_iterations must be >= 1");
}

inline void require_pair(const ParamPoint& p, const ParamPoint& q,
                         const char* what) {
  require_same_family(p, q, what);
  require_natural(p, what);
  require_natural(q, what);
}

inline bool same_point(const PointData& a, const PointData& b) {
  if (a.vec != b.vec) return false;
  if (a.mat.has_value() != b.mat.has_value()) return false;
  return !a.mat || *a.mat == *b.mat;
}

inline ParamPoint mix_point(const ParamPoint& p, const ParamPoint& q,
                            double alpha) {
  return ParamPoint{combine(p.data, alpha, q.data, 1.0 - alpha),
                    CoordSystem::natural, p.family};
}

}  // namespace detail_chernoff

// Linear interpolation in natural coordinates, lambda running p -> q.
inline ParamPoint e_geodesic(const ParamPoint& p, const ParamPoint& q,
                             double lambda) {
  detail_chernoff::require_pair(p, q, "e_geodesic");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw range_error("e_geodesic: lambda must lie in [0,1]");
  return natural_point(p.family, combine(p.data, 1.0 - lambda, q.data, lambda));
}

// Linear interpolation in expectation coordinates; the mixture geodesic is
// affine there.
inline ParamPoint m_geodesic_eta(const ParamPoint& p, const ParamPoint& q,
                                 double lambda) {
  require_same_family(p, q, "m_geodesic_eta");
  if (p.system != CoordSystem::expectation ||
      q.system != CoordSystem::expectation)
    throw dimension_error("m_geodesic_eta: expected expectation-coordinate points");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw range_error("m_geodesic_eta: lambda must lie in [0,1]");
  return expectation_point(p.family,
                           combine(p.data, 1.0 - lambda, q.data, lambda));
}

// B_F(theta_p : theta) - B_F(theta_q : theta); zero exactly on the
// right-sided bisector of p and q.
inline double bisector_gap(const ParamPoint& p, const ParamPoint& q,
                           const ParamPoint& theta) {
  detail_chernoff::require_pair(p, q, "bisector_gap");
  require_natural(theta, "bisector_gap");
  const FamilyDescriptor& f = *p.family;
  return detail::bregman_value(f, p.data, theta.data) -
         detail::bregman_value(f, q.data, theta.data);
}

// Stationarity residual of the skew Jensen objective in the mixing weight:
// d/dalpha J^(alpha) = F(theta_p) - F(theta_q) - <theta_p - theta_q,
// grad F(theta)>. Identical to bisector_gap, route aside.
inline double optimality_residual(const ParamPoint& p, const ParamPoint& q,
                                  const ParamPoint& theta) {
  detail_chernoff::require_pair(p, q, "optimality_residual");
  require_natural(theta, "optimality_residual");
  const FamilyDescriptor& f = *p.family;
  const PointData grad = f.grad_log_normalizer(theta.data);
  return f.log_normalizer(p.data) - f.log_normalizer(q.data) -
         inner_product(combine(p.data, 1.0, q.data, -1.0), grad);
}

namespace detail_chernoff {

inline ChernoffResult degenerate_result(const ParamPoint& p,
                                        ChernoffMethod method) {
  return ChernoffResult{0.5, 0.0, p, 0.0, 0, method};
}

inline ChernoffResult finish(const ParamPoint& p, const ParamPoint& q,
                             double alpha, int iterations,
                             ChernoffMethod method) {
  ChernoffResult out;
  out.alpha_star = alpha;
  out.info = detail::clamp_nonnegative(
      detail::jensen_value(*p.family, p.data, q.data, alpha),
      "chernoff information");
  out.theta_star = mix_point(p, q, alpha);
  out.bregman_gap = bisector_gap(p, q, out.theta_star);
  out.iterations = iterations;
  out.method = method;
  return out;
}

}  // namespace detail_chernoff

inline ChernoffResult chernoff_bisection(const ParamPoint& p,
                                         const ParamPoint& q,
                                         const BisectionConfig& cfg = {});

// Order-1 closed form: the optimal mixture point is where the tangent of F
// is parallel to its chord, alpha* = (F'^{-1}(s) - theta_q) / (theta_p -
// theta_q) with s the chord slope.
inline ChernoffResult chernoff_closed_form_order1(const ParamPoint& p,
                                                  const ParamPoint& q) {
  detail_chernoff::require_pair(p, q, "chernoff_closed_form_order1");
  const FamilyDescriptor& f = *p.family;
  if (f.order != 1 || f.vec_dim != 1 || f.mat_dim != 0)
    throw dimension_error(
        "chernoff_closed_form_order1: needs an order-1 scalar family");
  if (detail_chernoff::same_point(p.data, q.data))
    return detail_chernoff::degenerate_result(p, ChernoffMethod::closed_form);
  if (!f.has_inverse_gradient()) return chernoff_bisection(p, q);
  const double tp = p.data.vec[0], tq = q.data.vec[0];
  const double slope =
      (f.log_normalizer(p.data) - f.log_normalizer(q.data)) / (tp - tq);
  const PointData mix = f.inv_grad_log_normalizer(
      PointData{Eigen::VectorXd::Constant(1, slope)});
  double alpha = (mix.vec[0] - tq) / (tp - tq);
  alpha = std::min(std::max(alpha, 1e-15), 1.0 - 1e-15);
  return detail_chernoff::finish(p, q, alpha, 0, ChernoffMethod::closed_form);
}

// Walks the exponential geodesic, halving the mixing-weight interval on
// the sign of the bisector gap. The gap is strictly decreasing in alpha,
// positive at theta_q (alpha 0) and negative at theta_p (alpha 1).
inline ChernoffResult chernoff_bisection(const ParamPoint& p,
                                         const ParamPoint& q,
                                         const BisectionConfig& cfg) {
  detail_chernoff::validate_config(cfg);
  detail_chernoff::require_pair(p, q, "chernoff_bisection");
  if (detail_chernoff::same_point(p.data, q.data))
    return detail_chernoff::degenerate_result(p, ChernoffMethod::bisection);
  double lo = 0.0, hi = 1.0;
  for (int i = 1; i <= cfg.max_iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gap =
        bisector_gap(p, q, detail_chernoff::mix_point(p, q, mid));
    if (std::abs(gap) <= cfg.gap_tolerance)
      return detail_chernoff::finish(p, q, mid, i, ChernoffMethod::bisection);
    if (gap > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= cfg.alpha_tolerance)
      return detail_chernoff::finish(p, q, 0.5 * (lo + hi), i,
                                     ChernoffMethod::bisection);
  }
  ChernoffResult best = detail_chernoff::finish(
      p, q, 0.5 * (lo + hi), cfg.max_iterations, ChernoffMethod::bisection);
  throw convergence_error(
      "chernoff_bisection: no convergence after " +
          std::to_string(cfg.max_iterations) + " iterations; best alpha " +
          std::to_string(best.alpha_star) + " with gap " +
          std::to_string(best.bregman_gap),
      best);
}

// Closed form when the family is order-1 with an invertible gradient,
// geodesic bisection otherwise.
inline ChernoffResult chernoff_information(const ParamPoint& p,
                                           const ParamPoint& q,
                                           const BisectionConfig& cfg = {}) {
  detail_chernoff::require_pair(p, q, "chernoff_information");
  const FamilyDescriptor& f = *p.family;
  if (f.order == 1 && f.vec_dim == 1 && f.mat_dim == 0 &&
      f.has_inverse_gradient())
    return chernoff_closed_form_order1(p, q);
  return chernoff_bisection(p, q, cfg);
}

struct SweepRow {
  double alpha = 0.0;
  double value = 0.0;
};

namespace detail_chernoff {

inline std::string fmt17(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace detail_chernoff

struct SweepTable {
  std::vector<SweepRow> rows;

  // Header plus one row per exponent, C locale, 17 significant digits.
  void to_csv(std::ostream& os) const {
    os << "alpha,chernoff_alpha_divergence\n";
    for (const SweepRow& r : rows)
      os << detail_chernoff::fmt17(r.alpha) << ','
         << detail_chernoff::fmt17(r.value) << '\n';
  }

  const SweepRow& max_row() const {
    if (rows.empty()) throw internal_error("SweepTable: empty table");
    const SweepRow* best = &rows.front();
    for (const SweepRow& r : rows)
      if (r.value > best->value) best = &r;
    return *best;
  }
};

inline SweepTable alpha_sweep(const ParamPoint& p, const ParamPoint& q,
                              std::vector<double> grid) {
  detail_chernoff::require_pair(p, q, "alpha_sweep");
  std::sort(grid.begin(), grid.end());
  SweepTable out;
  out.rows.reserve(grid.size());
  for (double alpha : grid)
    out.rows.push_back({alpha, chernoff_alpha_divergence(p, q, alpha).value});
  return out;
}

inline std::vector<double> uniform_alpha_grid(int n) {
  if (n < 1) throw std::invalid_argument("uniform_alpha_grid: n must be >= 1");
  std::vector<double> grid(n);
  for (int i = 1; i <= n; ++i) grid[i - 1] = static_cast<double>(i) / (n + 1);
  return grid;
}

// Max pointwise deviation between the density at theta* and the normalized
// geometric mean p^alpha* q^(1-alpha*) over the oracle grid.
inline double chernoff_point_density_check(const ParamPoint& p,
                                           const ParamPoint& q,
                                           const ChernoffResult& result,
                                           const oracle::IntegrationSpec& spec) {
  detail_chernoff::require_pair(p, q, "chernoff_point_density_check");
  const double alpha = result.alpha_star;
  const SupportKind kind = p.family->support.kind;
  if (kind != SupportKind::binary &&
      kind != SupportKind::nonnegative_integers &&
      kind != SupportKind::real_line && kind != SupportKind::positive_reals)
    throw unsupported_error(
        "chernoff_point_density_check: needs a 1-D or discrete family");
  const double z = oracle::chernoff_coefficient_numeric(p, q, alpha, spec);
  auto deviation_at = [&](const Eigen::VectorXd& x) {
    const double geo = std::exp(alpha * log_density(p, x) +
                                (1.0 - alpha) * log_density(q, x)) /
                       z;
    return std::abs(density(result.theta_star, x) - geo);
  };
  double worst = 0.0;
  if (kind == SupportKind::binary) {
    for (long k : {0L, 1L})
      worst = std::max(worst,
                       deviation_at(Eigen::VectorXd::Constant(1, double(k))));
    return worst;
  }
  if (kind == SupportKind::nonnegative_integers) {
    const long cutoff =
        oracle::detail_oracle::discrete_cutoff(p, q, spec.tail_epsilon);
    for (long k = 0; k <= cutoff; ++k)
      worst = std::max(worst,
                       deviation_at(Eigen::VectorXd::Constant(1, double(k))));
    return worst;
  }
  if (kind == SupportKind::real_line || kind == SupportKind::positive_reals) {
    const oracle::detail_oracle::Range r =
        oracle::detail_oracle::quadrature_range(p, q, spec);
    constexpr int kGrid = 2001;
    for (int i = 0; i < kGrid; ++i) {
      const double x = r.lo + (r.hi - r.lo) * i / (kGrid - 1);
      worst = std::max(worst, deviation_at(Eigen::VectorXd::Constant(1, x)));
    }
    return worst;
  }
  throw unsupported_error(
      "chernoff_point_density_check: needs a 1-D or discrete family");
}

}  // namespace efdiv
