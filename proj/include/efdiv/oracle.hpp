#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "efdiv/divergences.hpp"
#include "efdiv/families.hpp"
#include "efdiv/family.hpp"
#include "efdiv/sampling.hpp"

// Brute-force evaluators: tail-bounded discrete sums, adaptive quadrature
// and importance-weighted Monte Carlo over the canonical density. They
// never touch the parameter-space divergence algebra they validate.
namespace efdiv::oracle {

enum class Scheme { discrete_sum, adaptive_quadrature, monte_carlo };

struct IntegrationSpec {
  Scheme scheme = Scheme::adaptive_quadrature;
  double tail_epsilon = 1e-14;
  double abs_tolerance = 1e-9;
  double range_sigmas = 12.0;
  long mc_samples = 1'000'000;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

struct GridMax {
  double alpha = 0.5;
  double value = 0.0;
};

namespace detail_oracle {

inline void validate_spec(const IntegrationSpec& spec) {
  if (!(spec.tail_epsilon > 0.0) || !(spec.abs_tolerance > 0.0) ||
      !(spec.range_sigmas > 0.0))
    throw std::invalid_argument("IntegrationSpec: tolerances must be positive");
  if (spec.mc_samples < 1000)
    throw std::invalid_argument("IntegrationSpec: mc_samples must be >= 1000");
}

inline double scalar_log_density(const ParamPoint& theta, double x) {
  return log_density(theta, Eigen::VectorXd::Constant(1, x));
}

// Sums term(k) over k = 0,1,...; envelope(k) must dominate the remaining
// tail once k is past twice the largest mean, where the pmf ratio of every
// involved component has dropped under 1/2.
inline double sum_discrete(const std::function<double(long)>& term,
                           const std::function<double(long)>& envelope,
                           double mean_max, double tail_eps) {
  const long k_min = static_cast<long>(std::ceil(
      std::max(30.0, 2.0 * mean_max + 10.0)));
  constexpr long k_cap = 200000;
  double acc = 0.0;
  for (long k = 0; k < k_cap; ++k) {
    acc += term(k);
    if (k >= k_min && envelope(k) < tail_eps) return acc;
  }
  throw internal_error("sum_discrete: tail bound never reached");
}

inline long discrete_cutoff(const ParamPoint& p, const ParamPoint& q,
                            double tail_eps) {
  const double mean_max = std::max(p.family->sample_moments(p.data).first,
                                   q.family->sample_moments(q.data).first);
  const long k_min = static_cast<long>(std::ceil(
      std::max(30.0, 2.0 * mean_max + 10.0)));
  long k = k_min;
  while (k < 200000) {
    const double bound = 2.0 * (std::exp(scalar_log_density(p, k)) +
                                std::exp(scalar_log_density(q, k)));
    if (bound < tail_eps) return k;
    ++k;
  }
  throw internal_error("discrete_cutoff: tail bound never reached");
}

// Adaptive Simpson with the usual Richardson correction. The interval is
// pre-split so narrow features cannot hide from the first probe.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol) {
  struct Rec {
    const std::function<double(double)>& f;
    double run(double a, double fa, double m, double fm, double b, double fb,
               double whole, double tol, int depth) const {
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
      return run(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
             run(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
    }
  };
  constexpr int kPanels = 64;
  const double h = (b - a) / kPanels;
  double acc = 0.0;
  Rec rec{f};
  for (int i = 0; i < kPanels; ++i) {
    const double x0 = a + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
    const double f0 = f(x0), fm = f(xm), f1 = f(x1);
    const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    acc += rec.run(x0, f0, xm, fm, x1, f1, whole, tol / kPanels, 48);
  }
  return acc;
}

struct Range {
  double lo, hi;
};

// Union of the two per-point ranges. Exponential-tailed supports need far
// more than range_sigmas standard deviations to push the truncation error
// under tail_epsilon, so the positive half-line widens accordingly.
inline Range quadrature_range(const ParamPoint& p, const ParamPoint& q,
                              const IntegrationSpec& spec) {
  const SupportKind kind = p.family->support.kind;
  if (kind == SupportKind::simplex) return {1e-12, 1.0 - 1e-12};
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const ParamPoint* pt : {&p, &q}) {
    const auto [mean, sd] = pt->family->sample_moments(pt->data);
    double r = spec.range_sigmas;
    if (kind == SupportKind::positive_reals)
      r = std::max(r, -std::log(spec.tail_epsilon) + 12.0);
    const double a = mean - r * sd, b = mean + r * sd;
    lo = first ? a : std::min(lo, a);
    hi = first ? b : std::max(hi, b);
    first = false;
  }
  if (kind == SupportKind::positive_reals) lo = std::max(lo, 0.0);
  return {lo, hi};
}

// Density of the two-block simplex family along x -> (x, 1-x).
inline double simplex2_log_density(const ParamPoint& theta, double x) {
  Eigen::VectorXd v(2);
  v[0] = x;
  v[1] = 1.0 - x;
  return log_density(theta, v);
}

inline bool is_scalar_continuous(SupportKind k) {
  return k == SupportKind::real_line || k == SupportKind::positive_reals;
}

inline void require_same_natural(const ParamPoint& p, const ParamPoint& q,
                                 const char* what) {
  require_same_family(p, q, what);
  require_natural(p, what);
  require_natural(q, what);
}

}  // namespace detail_oracle

inline IntegrationSpec default_spec(const FamilyDescriptor& f) {
  IntegrationSpec spec;
  switch (f.support.kind) {
    case SupportKind::nonnegative_integers:
    case SupportKind::binary:
      spec.scheme = Scheme::discrete_sum;
      break;
    case SupportKind::real_line:
    case SupportKind::positive_reals:
    case SupportKind::simplex:
      spec.scheme = Scheme::adaptive_quadrature;
      break;
    case SupportKind::real_vector:
      spec.scheme = Scheme::monte_carlo;
      break;
  }
  return spec;
}

// Importance-weighted coefficient estimate with x ~ p: the weight is
// (q/p)^(1-alpha).
inline McEstimate mc_chernoff_coefficient(const ParamPoint& p,
                                          const ParamPoint& q, double alpha,
                                          const IntegrationSpec& spec,
                                          std::uint64_t seed) {
  detail_oracle::validate_spec(spec);
  bayes::Sampler sampler(p);
  bayes::Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < spec.mc_samples; ++i) {
    const Eigen::VectorXd x = sampler.draw(rng);
    const double w =
        std::exp((1.0 - alpha) * (log_density(q, x) - log_density(p, x)));
    sum += w;
    sum_sq += w * w;
  }
  const double n = static_cast<double>(spec.mc_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n), spec.mc_samples};
}

inline McEstimate mc_kl(const ParamPoint& p, const ParamPoint& q,
                        const IntegrationSpec& spec, std::uint64_t seed) {
  detail_oracle::validate_spec(spec);
  bayes::Sampler sampler(p);
  bayes::Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < spec.mc_samples; ++i) {
    const Eigen::VectorXd x = sampler.draw(rng);
    const double w = log_density(p, x) - log_density(q, x);
    sum += w;
    sum_sq += w * w;
  }
  const double n = static_cast<double>(spec.mc_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n), spec.mc_samples};
}

// int p^alpha q^(1-alpha) by the scheme the spec selects.
inline double chernoff_coefficient_numeric(const ParamPoint& p,
                                           const ParamPoint& q, double alpha,
                                           const IntegrationSpec& spec,
                                           std::uint64_t seed = 0) {
  using namespace detail_oracle;
  validate_spec(spec);
  require_same_natural(p, q, "chernoff_coefficient_numeric");
  efdiv::detail::require_alpha_open(alpha, "chernoff_coefficient_numeric");
  const SupportKind kind = p.family->support.kind;
  const double beta = 1.0 - alpha;
  switch (spec.scheme) {
    case Scheme::discrete_sum: {
      if (kind == SupportKind::binary) {
        double acc = 0.0;
        for (long k : {0L, 1L})
          acc += std::exp(alpha * scalar_log_density(p, k) +
                          beta * scalar_log_density(q, k));
        return acc;
      }
      if (kind != SupportKind::nonnegative_integers)
        throw unsupported_error(
            "chernoff_coefficient_numeric: discrete_sum needs a discrete family");
      const double mean_max =
          std::max(p.family->sample_moments(p.data).first,
                   q.family->sample_moments(q.data).first);
      auto term = [&](long k) {
        return std::exp(alpha * scalar_log_density(p, k) +
                        beta * scalar_log_density(q, k));
      };
      auto envelope = [&](long k) {
        return 2.0 * (std::exp(scalar_log_density(p, k)) +
                      std::exp(scalar_log_density(q, k)));
      };
      return sum_discrete(term, envelope, mean_max, spec.tail_epsilon);
    }
    case Scheme::adaptive_quadrature: {
      if (kind == SupportKind::simplex) {
        if (p.family->vec_dim != 2)
          throw unsupported_error(
              "chernoff_coefficient_numeric: quadrature only covers the "
              "2-block simplex");
        auto f = [&](double x) {
          return std::exp(alpha * simplex2_log_density(p, x) +
                          beta * simplex2_log_density(q, x));
        };
        return adaptive_simpson(f, 1e-12, 1.0 - 1e-12, spec.abs_tolerance);
      }
      if (!is_scalar_continuous(kind))
        throw unsupported_error(
            "chernoff_coefficient_numeric: quadrature needs a 1-D continuous "
            "family");
      const Range r = quadrature_range(p, q, spec);
      auto f = [&](double x) {
        return std::exp(alpha * scalar_log_density(p, x) +
                        beta * scalar_log_density(q, x));
      };
      return adaptive_simpson(f, r.lo, r.hi, spec.abs_tolerance);
    }
    case Scheme::monte_carlo: {
      if (kind != SupportKind::real_vector || p.family->support.sample_dim > 3)
        throw unsupported_error(
            "chernoff_coefficient_numeric: monte_carlo covers continuous "
            "families of dimension <= 3");
      return mc_chernoff_coefficient(p, q, alpha, spec, seed).value;
    }
  }
  throw internal_error("chernoff_coefficient_numeric: unreachable");
}

// int/sum of p log(p/q), with the 0 log 0 = 0 convention.
inline double kl_numeric(const ParamPoint& p, const ParamPoint& q,
                         const IntegrationSpec& spec, std::uint64_t seed = 0) {
  using namespace detail_oracle;
  validate_spec(spec);
  require_same_natural(p, q, "kl_numeric");
  const SupportKind kind = p.family->support.kind;
  auto term_from = [](double lp, double lq) {
    const double px = std::exp(lp);
    return px > 0.0 ? px * (lp - lq) : 0.0;
  };
  switch (spec.scheme) {
    case Scheme::discrete_sum: {
      if (kind == SupportKind::binary) {
        double acc = 0.0;
        for (long k : {0L, 1L})
          acc += term_from(scalar_log_density(p, k), scalar_log_density(q, k));
        return acc;
      }
      if (kind != SupportKind::nonnegative_integers)
        throw unsupported_error("kl_numeric: discrete_sum needs a discrete family");
      const double mean_max =
          std::max(p.family->sample_moments(p.data).first,
                   q.family->sample_moments(q.data).first);
      auto term = [&](long k) {
        return term_from(scalar_log_density(p, k), scalar_log_density(q, k));
      };
      auto envelope = [&](long k) {
        const double lp = scalar_log_density(p, k);
        const double lq = scalar_log_density(q, k);
        const double growth = std::abs(p.data.vec[0] - q.data.vec[0]);
        return (std::exp(lp) + std::exp(lq)) *
               (2.0 * std::abs(lp - lq) + 4.0 * growth + 4.0);
      };
      return sum_discrete(term, envelope, mean_max, spec.tail_epsilon);
    }
    case Scheme::adaptive_quadrature: {
      if (kind == SupportKind::simplex) {
        if (p.family->vec_dim != 2)
          throw unsupported_error(
              "kl_numeric: quadrature only covers the 2-block simplex");
        auto f = [&](double x) {
          return term_from(simplex2_log_density(p, x),
                           simplex2_log_density(q, x));
        };
        return adaptive_simpson(f, 1e-12, 1.0 - 1e-12, spec.abs_tolerance);
      }
      if (!is_scalar_continuous(kind))
        throw unsupported_error("kl_numeric: quadrature needs a 1-D continuous family");
      const Range r = quadrature_range(p, q, spec);
      auto f = [&](double x) {
        return term_from(scalar_log_density(p, x), scalar_log_density(q, x));
      };
      return adaptive_simpson(f, r.lo, r.hi, spec.abs_tolerance);
    }
    case Scheme::monte_carlo: {
      if (kind != SupportKind::real_vector || p.family->support.sample_dim > 3)
        throw unsupported_error(
            "kl_numeric: monte_carlo covers continuous families of dimension <= 3");
      return mc_kl(p, q, spec, seed).value;
    }
  }
  throw internal_error("kl_numeric: unreachable");
}

// Brute-force maximizer of C_alpha over the grid {step, 2 step, ...},
// evaluated through the generic Jensen route. Exact ties resolve to the
// grid point nearest 1/2.
inline GridMax alpha_grid_argmax(const ParamPoint& p, const ParamPoint& q,
                                 double step) {
  if (!(step > 0.0 && step < 0.5))
    throw std::invalid_argument("alpha_grid_argmax: step must lie in (0, 0.5)");
  detail_oracle::require_same_natural(p, q, "alpha_grid_argmax");
  GridMax best{0.5, -1.0};
  for (long i = 1;; ++i) {
    const double alpha = i * step;
    if (alpha >= 1.0) break;
    const double value = chernoff_alpha_divergence(p, q, alpha).value;
    const bool better =
        value > best.value ||
        (value == best.value &&
         std::abs(alpha - 0.5) < std::abs(best.alpha - 0.5));
    if (better) best = {alpha, value};
  }
  return best;
}

// |1 - sum/int of exp(<t(x),theta> - F(theta) + k(x))|.
inline double normalization_check(const ParamPoint& theta,
                                  const IntegrationSpec& spec,
                                  std::uint64_t seed = 0) {
  using namespace detail_oracle;
  validate_spec(spec);
  require_natural(theta, "normalization_check");
  const FamilyDescriptor& f = *theta.family;
  switch (spec.scheme) {
    case Scheme::discrete_sum: {
      if (f.support.kind == SupportKind::binary)
        return std::abs(1.0 - std::exp(scalar_log_density(theta, 0)) -
                        std::exp(scalar_log_density(theta, 1)));
      if (f.support.kind != SupportKind::nonnegative_integers)
        throw unsupported_error(
            "normalization_check: discrete_sum needs a discrete family");
      const double mean = f.sample_moments(theta.data).first;
      auto term = [&](long k) { return std::exp(scalar_log_density(theta, k)); };
      auto envelope = [&](long k) {
        return 2.0 * std::exp(scalar_log_density(theta, k));
      };
      return std::abs(
          1.0 - sum_discrete(term, envelope, mean, spec.tail_epsilon));
    }
    case Scheme::adaptive_quadrature: {
      if (f.support.kind == SupportKind::simplex) {
        if (f.vec_dim != 2)
          throw unsupported_error(
              "normalization_check: quadrature only covers the 2-block simplex");
        auto g = [&](double x) {
          return std::exp(simplex2_log_density(theta, x));
        };
        return std::abs(
            1.0 - adaptive_simpson(g, 1e-12, 1.0 - 1e-12, spec.abs_tolerance));
      }
      if (!is_scalar_continuous(f.support.kind))
        throw unsupported_error(
            "normalization_check: quadrature needs a 1-D continuous family");
      const Range r = quadrature_range(theta, theta, spec);
      auto g = [&](double x) { return std::exp(scalar_log_density(theta, x)); };
      return std::abs(1.0 -
                      adaptive_simpson(g, r.lo, r.hi, spec.abs_tolerance));
    }
    case Scheme::monte_carlo: {
      if (f.support.kind != SupportKind::real_vector)
        throw unsupported_error(
            "normalization_check: monte_carlo needs a vector family");
      // Importance proposal built directly from (mu, Sigma); the weight
      // compares the descriptor density against the textbook normal one.
      const PointData src = f.source.from_natural(theta.data);
      Eigen::LLT<Eigen::MatrixXd> llt(*src.mat);
      const double log_norm =
          0.5 * src.vec.size() * std::log(2.0 * M_PI) +
          llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      bayes::Sampler sampler(theta);
      bayes::Rng rng(seed);
      double sum = 0.0;
      for (long i = 0; i < spec.mc_samples; ++i) {
        const Eigen::VectorXd x = sampler.draw(rng);
        const Eigen::VectorXd c = llt.matrixL().solve(x - src.vec);
        const double log_proposal = -0.5 * c.squaredNorm() - log_norm;
        sum += std::exp(log_density(theta, x) - log_proposal);
      }
      return std::abs(1.0 - sum / static_cast<double>(spec.mc_samples));
    }
  }
  throw internal_error("normalization_check: unreachable");
}

// Exact two-class Bayes error sum/int min(w1 p1, w2 p2).
inline double bayes_error_exact(const ParamPoint& p, const ParamPoint& q,
                                double w1, const IntegrationSpec& spec) {
  using namespace detail_oracle;
  validate_spec(spec);
  require_same_natural(p, q, "bayes_error_exact");
  if (!(w1 > 0.0 && w1 < 1.0))
    throw range_error("bayes_error_exact: w1 must lie in (0,1)");
  const double w2 = 1.0 - w1;
  const SupportKind kind = p.family->support.kind;
  auto term_from = [&](double lp, double lq) {
    return std::min(w1 * std::exp(lp), w2 * std::exp(lq));
  };
  if (kind == SupportKind::binary)
    return term_from(scalar_log_density(p, 0), scalar_log_density(q, 0)) +
           term_from(scalar_log_density(p, 1), scalar_log_density(q, 1));
  if (kind == SupportKind::nonnegative_integers) {
    const double mean_max = std::max(p.family->sample_moments(p.data).first,
                                     q.family->sample_moments(q.data).first);
    auto term = [&](long k) {
      return term_from(scalar_log_density(p, k), scalar_log_density(q, k));
    };
    auto envelope = [&](long k) {
      return 2.0 * (std::exp(scalar_log_density(p, k)) +
                    std::exp(scalar_log_density(q, k)));
    };
    return sum_discrete(term, envelope, mean_max, spec.tail_epsilon);
  }
  if (is_scalar_continuous(kind)) {
    const Range r = quadrature_range(p, q, spec);
    auto f = [&](double x) {
      return term_from(scalar_log_density(p, x), scalar_log_density(q, x));
    };
    return adaptive_simpson(f, r.lo, r.hi, spec.abs_tolerance);
  }
  throw unsupported_error("bayes_error_exact: unsupported family");
}

}  // namespace efdiv::oracle
