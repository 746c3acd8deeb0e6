#pragma once

#include <cmath>
#include <optional>

#include "efdiv/family.hpp"
#include "efdiv/special.hpp"

namespace efdiv {

enum class DivergenceMethod { closed_form, generic_jensen, oracle };

struct DivergenceValue {
  double value = 0.0;
  DivergenceMethod method = DivergenceMethod::generic_jensen;
  std::optional<double> alpha;
};

namespace detail {

inline constexpr double kNegativeClamp = -1e-12;

// Divergences are nonnegative up to rounding; a value below the clamp
// signals a real inconsistency rather than noise.
inline double clamp_nonnegative(double v, const char* what) {
  if (v >= 0.0) return v;
  if (v >= kNegativeClamp) return 0.0;
  throw internal_error(std::string(what) + ": negative value " +
                       std::to_string(v));
}

inline DivergenceValue make_value(double v, DivergenceMethod m,
                                  std::optional<double> alpha,
                                  const char* what) {
  return DivergenceValue{clamp_nonnegative(v, what), m, alpha};
}

inline void require_alpha_open(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw range_error(std::string(what) + ": alpha must lie in (0,1)");
}

inline void require_pair(const FamilyDescriptor& f, const ParamPoint& p,
                         const ParamPoint& q, const char* what) {
  require_same_family(p, q, what);
  if (p.family.get() != &f)
    throw dimension_error(std::string(what) +
                          ": points do not belong to the given family");
  require_natural(p, what);
  require_natural(q, what);
  if (!f.domain_test(p.data) || !f.domain_test(q.data))
    throw domain_error(std::string(what) + ": point outside the domain of " +
                       f.name);
}

inline double bregman_value(const FamilyDescriptor& f, const PointData& p,
                            const PointData& q) {
  const PointData grad_q = f.grad_log_normalizer(q);
  return f.log_normalizer(p) - f.log_normalizer(q) -
         inner_product(combine(p, 1.0, q, -1.0), grad_q);
}

inline double jensen_value(const FamilyDescriptor& f, const PointData& p,
                           const PointData& q, double alpha) {
  const double beta = 1.0 - alpha;
  return alpha * f.log_normalizer(p) + beta * f.log_normalizer(q) -
         f.log_normalizer(combine(p, alpha, q, beta));
}

}  // namespace detail

// B_F(theta_p : theta_q) = F(p) - F(q) - <p - q, grad F(q)>.
inline DivergenceValue bregman(const FamilyDescriptor& f, const ParamPoint& p,
                               const ParamPoint& q) {
  detail::require_pair(f, p, q, "bregman");
  return detail::make_value(detail::bregman_value(f, p.data, q.data),
                            DivergenceMethod::closed_form, std::nullopt,
                            "bregman");
}

// J_F^(alpha)(p:q) = alpha F(p) + (1-alpha) F(q) - F(alpha p + (1-alpha) q).
inline DivergenceValue skew_jensen(const FamilyDescriptor& f,
                                   const ParamPoint& p, const ParamPoint& q,
                                   double alpha) {
  detail::require_pair(f, p, q, "skew_jensen");
  detail::require_alpha_open(alpha, "skew_jensen");
  return detail::make_value(detail::jensen_value(f, p.data, q.data, alpha),
                            DivergenceMethod::generic_jensen, alpha,
                            "skew_jensen");
}

inline DivergenceValue chernoff_alpha_divergence(const ParamPoint& p,
                                                 const ParamPoint& q,
                                                 double alpha) {
  require_same_family(p, q, "chernoff_alpha_divergence");
  return skew_jensen(*p.family, p, q, alpha);
}

// c_alpha(p:q) = exp(-C_alpha) in (0,1].
inline double chernoff_alpha_coefficient(const ParamPoint& p,
                                         const ParamPoint& q, double alpha) {
  return std::exp(-chernoff_alpha_divergence(p, q, alpha).value);
}

// C'_alpha(p:q) = (1 - c_alpha(p:q)) / (alpha (1-alpha)).
inline DivergenceValue chernoff_alpha_divergence_second_type(
    const ParamPoint& p, const ParamPoint& q, double alpha) {
  detail::require_alpha_open(alpha, "chernoff_alpha_divergence_second_type");
  const double c = chernoff_alpha_coefficient(p, q, alpha);
  return detail::make_value((1.0 - c) / (alpha * (1.0 - alpha)),
                            DivergenceMethod::generic_jensen, alpha,
                            "chernoff_alpha_divergence_second_type");
}

// KL between densities equals the Bregman divergence on swapped natural
// parameters: KL(p:q) = B_F(theta_q : theta_p).
inline DivergenceValue kl(const ParamPoint& p, const ParamPoint& q) {
  require_same_family(p, q, "kl");
  return bregman(*p.family, q, p);
}

// R_alpha(p:q) = J_F^(alpha)(p:q) / (1-alpha); alpha == 1 dispatches to KL.
inline DivergenceValue renyi(const ParamPoint& p, const ParamPoint& q,
                             double alpha) {
  if (alpha == 1.0) {
    DivergenceValue v = kl(p, q);
    v.alpha = alpha;
    v.method = DivergenceMethod::generic_jensen;
    return v;
  }
  detail::require_alpha_open(alpha, "renyi");
  const double j = chernoff_alpha_divergence(p, q, alpha).value;
  return detail::make_value(j / (1.0 - alpha),
                            DivergenceMethod::generic_jensen, alpha, "renyi");
}

// T_alpha(p:q) = (1 - exp(-J_F^(alpha)(p:q))) / (1-alpha); alpha == 1
// dispatches to KL so that the alpha -> 1 limit matches the Renyi one.
inline DivergenceValue tsallis(const ParamPoint& p, const ParamPoint& q,
                               double alpha) {
  if (alpha == 1.0) {
    DivergenceValue v = kl(p, q);
    v.alpha = alpha;
    v.method = DivergenceMethod::generic_jensen;
    return v;
  }
  detail::require_alpha_open(alpha, "tsallis");
  const double j = chernoff_alpha_divergence(p, q, alpha).value;
  return detail::make_value(-std::expm1(-j) / (1.0 - alpha),
                            DivergenceMethod::generic_jensen, alpha,
                            "tsallis");
}

// A_a(p:q) = 4/(1-a^2) (1 - c_{(1-a)/2}(p:q)) for a in (-1,1); the
// endpoints dispatch to the two sided KL divergences.
inline DivergenceValue amari_alpha(const ParamPoint& p, const ParamPoint& q,
                                   double alpha_amari) {
  if (alpha_amari == -1.0) {
    DivergenceValue v = kl(p, q);
    v.alpha = std::nullopt;
    return v;
  }
  if (alpha_amari == 1.0) {
    DivergenceValue v = kl(q, p);
    v.alpha = std::nullopt;
    return v;
  }
  if (!(alpha_amari > -1.0 && alpha_amari < 1.0))
    throw range_error("amari_alpha: alpha must lie in [-1,1]");
  const double exponent = 0.5 * (1.0 - alpha_amari);
  const double c = chernoff_alpha_coefficient(p, q, exponent);
  return detail::make_value(
      4.0 / (1.0 - alpha_amari * alpha_amari) * (1.0 - c),
      DivergenceMethod::generic_jensen, exponent, "amari_alpha");
}

inline DivergenceValue bhattacharyya(const ParamPoint& p, const ParamPoint& q) {
  DivergenceValue v = chernoff_alpha_divergence(p, q, 0.5);
  v.alpha = 0.5;
  return v;
}

// Arithmetic mean of the two sided KL divergences.
inline DivergenceValue jeffreys(const ParamPoint& p, const ParamPoint& q) {
  const double a = kl(p, q).value;
  const double b = kl(q, p).value;
  return detail::make_value(0.5 * (a + b), DivergenceMethod::closed_form,
                            std::nullopt, "jeffreys");
}

// Harmonic combination KL(p:q) KL(q:p) / (KL(p:q) + KL(q:p)); defined as 0
// when both sides vanish.
inline DivergenceValue resistor_average(const ParamPoint& p,
                                        const ParamPoint& q) {
  const double a = kl(p, q).value;
  const double b = kl(q, p).value;
  const double sum = a + b;
  const double v = sum > 0.0 ? a * b / sum : 0.0;
  return detail::make_value(v, DivergenceMethod::closed_form, std::nullopt,
                            "resistor_average");
}

// Hand-written closed forms. These are opt-in evaluation routes validated
// against the generic Jensen path, never the other way around.
namespace closed_form {

namespace detail_cf {

inline double log_det_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw domain_error("log_det_spd: matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace detail_cf

// -log int p^alpha q^(1-alpha) for p ~ N(mu1, S1), q ~ N(mu2, S2). The
// mixed covariance carries weight (1-alpha) on the first argument and
// enters the quadratic term through its inverse.
inline double gaussian_chernoff_alpha(const Eigen::VectorXd& mu1,
                                      const Eigen::MatrixXd& s1,
                                      const Eigen::VectorXd& mu2,
                                      const Eigen::MatrixXd& s2, double alpha) {
  detail::require_alpha_open(alpha, "gaussian_chernoff_alpha");
  const Eigen::MatrixXd mix = (1.0 - alpha) * s1 + alpha * s2;
  const Eigen::VectorXd dm = mu1 - mu2;
  const double quad = dm.dot(mix.llt().solve(dm));
  const double logdet = detail_cf::log_det_spd(mix) -
                        (1.0 - alpha) * detail_cf::log_det_spd(s1) -
                        alpha * detail_cf::log_det_spd(s2);
  return 0.5 * alpha * (1.0 - alpha) * quad + 0.5 * logdet;
}

inline double gaussian_renyi(const Eigen::VectorXd& mu_p,
                             const Eigen::MatrixXd& s_p,
                             const Eigen::VectorXd& mu_q,
                             const Eigen::MatrixXd& s_q, double alpha) {
  detail::require_alpha_open(alpha, "gaussian_renyi");
  return gaussian_chernoff_alpha(mu_p, s_p, mu_q, s_q, alpha) / (1.0 - alpha);
}

// Dirichlet Chernoff alpha-divergence straight from the log-normalizer,
// written in concentration parameters (the convex combination acts
// coordinatewise).
inline double dirichlet_chernoff_alpha(const Eigen::VectorXd& a,
                                       const Eigen::VectorXd& b,
                                       double alpha) {
  detail::require_alpha_open(alpha, "dirichlet_chernoff_alpha");
  if (a.size() != b.size())
    throw dimension_error("dirichlet_chernoff_alpha: dimension mismatch");
  const double beta = 1.0 - alpha;
  double term_a = 0.0, term_b = 0.0, term_mix = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    term_a += special::log_gamma(a[i]);
    term_b += special::log_gamma(b[i]);
    term_mix += special::log_gamma(alpha * a[i] + beta * b[i]);
  }
  term_a -= special::log_gamma(a.sum());
  term_b -= special::log_gamma(b.sum());
  term_mix -= special::log_gamma(alpha * a.sum() + beta * b.sum());
  return alpha * term_a + beta * term_b - term_mix;
}

}  // namespace closed_form

}  // namespace efdiv
