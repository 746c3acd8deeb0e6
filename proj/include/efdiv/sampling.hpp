#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "efdiv/families.hpp"
#include "efdiv/family.hpp"
#include "efdiv/special.hpp"

namespace efdiv::bayes {

// All transforms are written out explicitly so that one seed produces one
// stream on every platform; std::* distributions are not pinned down by
// the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0, 1)
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  // standard normal, Box-Muller transform
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
};

namespace detail_sampling {

inline long poisson_inversion(Rng& rng, double lambda) {
  const double u = rng.uniform();
  double p = std::exp(-lambda);
  double cum = p;
  long k = 0;
  while (u > cum && k < 2000) {
    ++k;
    p *= lambda / k;
    cum += p;
  }
  return k;
}

// Transformed rejection with squeeze, good from lambda ~ 10 upward.
inline long poisson_transformed_rejection(Rng& rng, double lambda) {
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * log_lambda - lambda - special::log_gamma(kf + 1.0))
      return static_cast<long>(kf);
  }
}

inline long poisson_draw(Rng& rng, double lambda) {
  return lambda < 30.0 ? poisson_inversion(rng, lambda)
                       : poisson_transformed_rejection(rng, lambda);
}

}  // namespace detail_sampling

// One-point sampler with the per-family setup (conventional parameters,
// Cholesky factor) done once up front.
class Sampler {
 public:
  explicit Sampler(const ParamPoint& theta) : family_(theta.family) {
    require_natural(theta, "Sampler");
    const FamilyDescriptor& f = *family_;
    const std::string& name = f.name;
    if (name == "poisson") {
      kind_ = Kind::poisson;
      lambda_ = std::exp(theta.data.vec[0]);
    } else if (name == "bernoulli") {
      kind_ = Kind::bernoulli;
      prob_ = 1.0 / (1.0 + std::exp(-theta.data.vec[0]));
    } else if (name == "exponential") {
      kind_ = Kind::exponential;
      rate_ = -theta.data.vec[0];
    } else if (name == "gaussian-fixed-sigma" || name == "gaussian-1d") {
      kind_ = Kind::gaussian_scalar;
      const auto [mean, sd] = f.sample_moments(theta.data);
      mu_ = mean;
      sd_ = sd;
    } else if (name == "gaussian-mvn") {
      kind_ = Kind::gaussian_mvn;
      const PointData src = f.source.from_natural(theta.data);
      mvn_mu_ = src.vec;
      Eigen::LLT<Eigen::MatrixXd> llt(*src.mat);
      if (llt.info() != Eigen::Success)
        throw domain_error("Sampler: covariance is not positive definite");
      mvn_chol_ = llt.matrixL();
    } else {
      throw unsupported_error("Sampler: no sampler for family " + name);
    }
  }

  Eigen::VectorXd draw(Rng& rng) const {
    switch (kind_) {
      case Kind::poisson:
        return Eigen::VectorXd::Constant(
            1, static_cast<double>(detail_sampling::poisson_draw(rng, lambda_)));
      case Kind::bernoulli:
        return Eigen::VectorXd::Constant(1,
                                         rng.uniform() < prob_ ? 1.0 : 0.0);
      case Kind::exponential:
        return Eigen::VectorXd::Constant(
            1, -std::log(1.0 - rng.uniform()) / rate_);
      case Kind::gaussian_scalar:
        return Eigen::VectorXd::Constant(1, mu_ + sd_ * rng.normal());
      case Kind::gaussian_mvn: {
        Eigen::VectorXd z(mvn_mu_.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
        return mvn_mu_ + mvn_chol_ * z;
      }
    }
    throw internal_error("Sampler: unreachable");
  }

 private:
  enum class Kind { poisson, bernoulli, exponential, gaussian_scalar, gaussian_mvn };
  FamilyRef family_;
  Kind kind_ = Kind::poisson;
  double lambda_ = 0, prob_ = 0, rate_ = 0, mu_ = 0, sd_ = 0;
  Eigen::VectorXd mvn_mu_;
  Eigen::MatrixXd mvn_chol_;
};

// n i.i.d. draws, deterministic given the seed.
inline std::vector<Eigen::VectorXd> sample(const ParamPoint& theta, long n,
                                           std::uint64_t seed) {
  Sampler sampler(theta);
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) out.push_back(sampler.draw(rng));
  return out;
}

}  // namespace efdiv::bayes
