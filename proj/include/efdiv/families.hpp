#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "efdiv/family.hpp"
#include "efdiv/special.hpp"

namespace efdiv {

enum class FamilyKind {
  poisson,
  bernoulli,
  exponential,
  gaussian_fixed_sigma,
  gaussian_1d,
  gaussian_mvn,
  dirichlet,
};

struct FamilyHyper {
  double sigma = 1.0;  // gaussian-fixed-sigma
  int d = 1;           // gaussian-mvn, dirichlet
};

namespace detail {

// The natural domains are open; points this close to a boundary are
// treated as outside.
inline constexpr double kBoundaryMargin = 1e-12;

inline bool spd_with_margin(const Eigen::MatrixXd& m) {
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) return false;
  return eig.eigenvalues().minCoeff() > kBoundaryMargin;
}

inline double log1p_exp(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace detail

inline FamilyRef make_poisson() {
  auto f = std::make_shared<FamilyDescriptor>();
  f->name = "poisson";
  f->order = 1;
  f->vec_dim = 1;
  f->support = {SupportKind::nonnegative_integers, 1};
  f->log_normalizer = [](const PointData& t) { return std::exp(t.vec[0]); };
  f->grad_log_normalizer = [](const PointData& t) {
    return PointData{Eigen::VectorXd::Constant(1, std::exp(t.vec[0]))};
  };
  f->inv_grad_log_normalizer = [](const PointData& e) {
    if (!(e.vec[0] > 0.0))
      throw domain_error("poisson: expectation parameter must be positive");
    return PointData{Eigen::VectorXd::Constant(1, std::log(e.vec[0]))};
  };
  f->sufficient_statistic = [](const Eigen::VectorXd& x) {
    return PointData{x};
  };
  f->carrier = [](const Eigen::VectorXd& x) {
    return -special::log_gamma(x[0] + 1.0);
  };
  f->domain_test = [](const PointData& t) { return std::isfinite(t.vec[0]); };
  f->source.to_natural = [](const PointData& s) {
    if (!(s.vec[0] > 0.0)) throw domain_error("poisson: lambda must be > 0");
    return PointData{Eigen::VectorXd::Constant(1, std::log(s.vec[0]))};
  };
  f->source.from_natural = [](const PointData& t) {
    return PointData{Eigen::VectorXd::Constant(1, std::exp(t.vec[0]))};
  };
  f->sample_moments = [](const PointData& t) {
    const double lambda = std::exp(t.vec[0]);
    return std::pair<double, double>{lambda, std::sqrt(lambda)};
  };
  return f;
}

inline FamilyRef make_bernoulli() {
  auto f = std::make_shared<FamilyDescriptor>();
  f->name = "bernoulli";
  f->order = 1;
  f->vec_dim = 1;
  f->support = {SupportKind::binary, 1};
  f->log_normalizer = [](const PointData& t) {
    return detail::log1p_exp(t.vec[0]);
  };
  f->grad_log_normalizer = [](const PointData& t) {
    const double th = t.vec[0];
    return PointData{Eigen::VectorXd::Constant(1, 1.0 / (1.0 + std::exp(-th)))};
  };
  f->inv_grad_log_normalizer = [](const PointData& e) {
    const double p = e.vec[0];
    if (!(p > 0.0 && p < 1.0))
      throw domain_error("bernoulli: expectation parameter must lie in (0,1)");
    return PointData{Eigen::VectorXd::Constant(1, std::log(p / (1.0 - p)))};
  };
  f->sufficient_statistic = [](const Eigen::VectorXd& x) {
    return PointData{x};
  };
  f->carrier = [](const Eigen::VectorXd&) { return 0.0; };
  f->domain_test = [](const PointData& t) { return std::isfinite(t.vec[0]); };
  f->source.to_natural = [](const PointData& s) {
    const double p = s.vec[0];
    if (!(p > 0.0 && p < 1.0))
      throw domain_error("bernoulli: p must lie in (0,1)");
    return PointData{Eigen::VectorXd::Constant(1, std::log(p / (1.0 - p)))};
  };
  f->source.from_natural = [](const PointData& t) {
    return PointData{
        Eigen::VectorXd::Constant(1, 1.0 / (1.0 + std::exp(-t.vec[0])))};
  };
  f->sample_moments = [](const PointData& t) {
    const double p = 1.0 / (1.0 + std::exp(-t.vec[0]));
    return std::pair<double, double>{p, std::sqrt(p * (1.0 - p))};
  };
  return f;
}

// Waiting-time convention: density rate * exp(-rate * x) on x > 0, with
// theta = -rate on the negative half-line.
inline FamilyRef make_exponential() {
  auto f = std::make_shared<FamilyDescriptor>();
  f->name = "exponential";
  f->order = 1;
  f->vec_dim = 1;
  f->support = {SupportKind::positive_reals, 1};
  f->log_normalizer = [](const PointData& t) { return -std::log(-t.vec[0]); };
  f->grad_log_normalizer = [](const PointData& t) {
    return PointData{Eigen::VectorXd::Constant(1, -1.0 / t.vec[0])};
  };
  f->inv_grad_log_normalizer = [](const PointData& e) {
    if (!(e.vec[0] > 0.0))
      throw domain_error("exponential: expectation parameter must be positive");
    return PointData{Eigen::VectorXd::Constant(1, -1.0 / e.vec[0])};
  };
  f->sufficient_statistic = [](const Eigen::VectorXd& x) {
    return PointData{x};
  };
  f->carrier = [](const Eigen::VectorXd&) { return 0.0; };
  f->domain_test = [](const PointData& t) {
    return t.vec[0] < -detail::kBoundaryMargin;
  };
  f->source.to_natural = [](const PointData& s) {
    if (!(s.vec[0] > 0.0)) throw domain_error("exponential: rate must be > 0");
    return PointData{Eigen::VectorXd::Constant(1, -s.vec[0])};
  };
  f->source.from_natural = [](const PointData& t) {
    return PointData{Eigen::VectorXd::Constant(1, -t.vec[0])};
  };
  f->sample_moments = [](const PointData& t) {
    const double mean = -1.0 / t.vec[0];
    return std::pair<double, double>{mean, mean};
  };
  return f;
}

inline FamilyRef make_gaussian_fixed_sigma(double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("gaussian-fixed-sigma: sigma must be > 0");
  auto f = std::make_shared<FamilyDescriptor>();
  const double s2 = sigma * sigma;
  f->name = "gaussian-fixed-sigma";
  f->order = 1;
  f->vec_dim = 1;
  f->support = {SupportKind::real_line, 1};
  f->log_normalizer = [s2](const PointData& t) {
    return 0.5 * t.vec[0] * t.vec[0] * s2;
  };
  f->grad_log_normalizer = [s2](const PointData& t) {
    return PointData{Eigen::VectorXd::Constant(1, t.vec[0] * s2)};
  };
  f->inv_grad_log_normalizer = [s2](const PointData& e) {
    return PointData{Eigen::VectorXd::Constant(1, e.vec[0] / s2)};
  };
  f->sufficient_statistic = [](const Eigen::VectorXd& x) {
    return PointData{x};
  };
  f->carrier = [s2](const Eigen::VectorXd& x) {
    return -0.5 * x[0] * x[0] / s2 - 0.5 * std::log(2.0 * M_PI * s2);
  };
  f->domain_test = [](const PointData& t) { return std::isfinite(t.vec[0]); };
  f->source.to_natural = [s2](const PointData& s) {
    return PointData{Eigen::VectorXd::Constant(1, s.vec[0] / s2)};
  };
  f->source.from_natural = [s2](const PointData& t) {
    return PointData{Eigen::VectorXd::Constant(1, t.vec[0] * s2)};
  };
  f->sample_moments = [s2](const PointData& t) {
    return std::pair<double, double>{t.vec[0] * s2, std::sqrt(s2)};
  };
  return f;
}

// Order-2 univariate Gaussian, theta = (mu/sigma^2, -1/(2 sigma^2)),
// t(x) = (x, x^2). Conventional parameters are (mu, sigma^2).
inline FamilyRef make_gaussian_1d() {
  auto f = std::make_shared<FamilyDescriptor>();
  f->name = "gaussian-1d";
  f->order = 2;
  f->vec_dim = 2;
  f->support = {SupportKind::real_line, 1};
  f->log_normalizer = [](const PointData& t) {
    const double t1 = t.vec[0], t2 = t.vec[1];
    return -0.25 * t1 * t1 / t2 - 0.5 * std::log(-t2) + 0.5 * std::log(M_PI);
  };
  f->grad_log_normalizer = [](const PointData& t) {
    const double t1 = t.vec[0], t2 = t.vec[1];
    Eigen::VectorXd g(2);
    g[0] = -0.5 * t1 / t2;
    g[1] = 0.25 * t1 * t1 / (t2 * t2) - 0.5 / t2;
    return PointData{g};
  };
  f->inv_grad_log_normalizer = [](const PointData& e) {
    const double mu = e.vec[0];
    const double var = e.vec[1] - mu * mu;
    if (!(var > 0.0))
      throw domain_error("gaussian-1d: expectation point needs E[x^2] > E[x]^2");
    Eigen::VectorXd t(2);
    t[0] = mu / var;
    t[1] = -0.5 / var;
    return PointData{t};
  };
  f->sufficient_statistic = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd t(2);
    t[0] = x[0];
    t[1] = x[0] * x[0];
    return PointData{t};
  };
  f->carrier = [](const Eigen::VectorXd&) { return 0.0; };
  f->domain_test = [](const PointData& t) {
    return std::isfinite(t.vec[0]) && t.vec[1] < -detail::kBoundaryMargin;
  };
  f->source.to_natural = [](const PointData& s) {
    const double mu = s.vec[0], var = s.vec[1];
    if (!(var > 0.0)) throw domain_error("gaussian-1d: variance must be > 0");
    Eigen::VectorXd t(2);
    t[0] = mu / var;
    t[1] = -0.5 / var;
    return PointData{t};
  };
  f->source.from_natural = [](const PointData& t) {
    const double var = -0.5 / t.vec[1];
    Eigen::VectorXd s(2);
    s[0] = t.vec[0] * var;
    s[1] = var;
    return PointData{s};
  };
  f->sample_moments = [](const PointData& t) {
    const double var = -0.5 / t.vec[1];
    return std::pair<double, double>{t.vec[0] * var, std::sqrt(var)};
  };
  return f;
}

// Multivariate Gaussian, theta = (Sigma^{-1} mu, Sigma^{-1}/2) with the
// matrix block in the positive definite cone, t(x) = (x, -x x^T).
inline FamilyRef make_gaussian_mvn(int d) {
  if (d < 1) throw std::invalid_argument("gaussian-mvn: d must be >= 1");
  auto f = std::make_shared<FamilyDescriptor>();
  f->name = "gaussian-mvn";
  f->order = d + d * (d + 1) / 2;
  f->vec_dim = d;
  f->mat_dim = d;
  f->support = {SupportKind::real_vector, d};
  f->log_normalizer = [d](const PointData& t) {
    // LU keeps this well defined under asymmetric finite-difference
    // perturbations of the matrix block.
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(*t.mat);
    const double det = lu.determinant();
    if (!(det > 0.0))
      throw domain_error("gaussian-mvn: matrix block must have positive det");
    return 0.25 * t.vec.dot(lu.solve(t.vec)) - 0.5 * std::log(det) +
           0.5 * d * std::log(M_PI);
  };
  f->grad_log_normalizer = [](const PointData& t) {
    const Eigen::MatrixXd inv =
        t.mat->llt().solve(Eigen::MatrixXd::Identity(t.mat->rows(), t.mat->cols()));
    const Eigen::VectorXd half_inv_t1 = 0.5 * (inv * t.vec);
    PointData g;
    g.vec = half_inv_t1;
    g.mat = -half_inv_t1 * half_inv_t1.transpose() - 0.5 * inv;
    return g;
  };
  f->inv_grad_log_normalizer = [](const PointData& e) {
    const Eigen::VectorXd mu = e.vec;
    const Eigen::MatrixXd cov = -*e.mat - mu * mu.transpose();
    if (!detail::spd_with_margin(cov))
      throw domain_error(
          "gaussian-mvn: expectation point implies a non-PD covariance");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    PointData t;
    t.vec = llt.solve(mu);
    t.mat = 0.5 * llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
    return t;
  };
  f->sufficient_statistic = [](const Eigen::VectorXd& x) {
    PointData t;
    t.vec = x;
    t.mat = -x * x.transpose();
    return t;
  };
  f->carrier = [](const Eigen::VectorXd&) { return 0.0; };
  f->domain_test = [](const PointData& t) {
    return t.mat.has_value() && detail::spd_with_margin(*t.mat);
  };
  f->source.to_natural = [](const PointData& s) {
    if (!s.mat) throw dimension_error("gaussian-mvn: missing covariance block");
    Eigen::MatrixXd cov = 0.5 * (*s.mat + s.mat->transpose());
    if (!detail::spd_with_margin(cov))
      throw domain_error("gaussian-mvn: covariance must be symmetric PD");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    PointData t;
    t.vec = llt.solve(s.vec);
    t.mat = 0.5 * llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
    return t;
  };
  f->source.from_natural = [](const PointData& t) {
    Eigen::LLT<Eigen::MatrixXd> llt(*t.mat);
    const Eigen::MatrixXd cov =
        0.5 * llt.solve(Eigen::MatrixXd::Identity(t.mat->rows(), t.mat->cols()));
    PointData s;
    s.vec = cov * t.vec;
    s.mat = 0.5 * (cov + cov.transpose());
    return s;
  };
  return f;
}

// Dirichlet over the open d-simplex, theta_i = concentration_i - 1.
// No analytic inverse gradient: digamma inversion is iterative and the
// geodesic bisection never needs the expectation->natural direction.
inline FamilyRef make_dirichlet(int d) {
  if (d < 1) throw std::invalid_argument("dirichlet: d must be >= 1");
  auto f = std::make_shared<FamilyDescriptor>();
  f->name = "dirichlet";
  f->order = d;
  f->vec_dim = d;
  f->support = {SupportKind::simplex, d};
  f->log_normalizer = [d](const PointData& t) {
    double acc = 0.0, total = 0.0;
    for (int i = 0; i < d; ++i) {
      acc += special::log_gamma(t.vec[i] + 1.0);
      total += t.vec[i];
    }
    return acc - special::log_gamma(static_cast<double>(d) + total);
  };
  f->grad_log_normalizer = [d](const PointData& t) {
    const double total = static_cast<double>(d) + t.vec.sum();
    Eigen::VectorXd g(d);
    const double psi_total = special::digamma(total);
    for (int i = 0; i < d; ++i)
      g[i] = special::digamma(t.vec[i] + 1.0) - psi_total;
    return PointData{g};
  };
  f->sufficient_statistic = [d](const Eigen::VectorXd& x) {
    Eigen::VectorXd t(d);
    for (int i = 0; i < d; ++i) t[i] = std::log(x[i]);
    return PointData{t};
  };
  f->carrier = [](const Eigen::VectorXd&) { return 0.0; };
  f->domain_test = [](const PointData& t) {
    return (t.vec.array() > -1.0 + detail::kBoundaryMargin).all();
  };
  f->source.to_natural = [](const PointData& s) {
    if (!(s.vec.array() > 0.0).all())
      throw domain_error("dirichlet: concentration entries must be > 0");
    return PointData{s.vec.array() - 1.0};
  };
  f->source.from_natural = [](const PointData& t) {
    return PointData{t.vec.array() + 1.0};
  };
  return f;
}

inline FamilyRef make_family(FamilyKind kind, const FamilyHyper& hyper = {}) {
  switch (kind) {
    case FamilyKind::poisson:
      return make_poisson();
    case FamilyKind::bernoulli:
      return make_bernoulli();
    case FamilyKind::exponential:
      return make_exponential();
    case FamilyKind::gaussian_fixed_sigma:
      return make_gaussian_fixed_sigma(hyper.sigma);
    case FamilyKind::gaussian_1d:
      return make_gaussian_1d();
    case FamilyKind::gaussian_mvn:
      return make_gaussian_mvn(hyper.d);
    case FamilyKind::dirichlet:
      return make_dirichlet(hyper.d);
  }
  throw std::invalid_argument("make_family: unknown family kind");
}

}  // namespace efdiv
