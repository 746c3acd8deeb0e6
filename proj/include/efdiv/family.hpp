#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace efdiv {

struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct range_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct unsupported_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct internal_error : std::logic_error {
  using std::logic_error::logic_error;
};

enum class SupportKind {
  nonnegative_integers,
  binary,
  real_line,
  positive_reals,
  simplex,
  real_vector,
};

struct SupportInfo {
  SupportKind kind = SupportKind::real_line;
  int sample_dim = 1;
};

enum class CoordSystem { natural, expectation };

// Flat vector plus an optional symmetric matrix block. Parameters,
// gradients and sufficient statistics all share this shape, so the
// composite inner product stays explicit.
struct PointData {
  Eigen::VectorXd vec;
  std::optional<Eigen::MatrixXd> mat;

  PointData() = default;
  explicit PointData(Eigen::VectorXd v) : vec(std::move(v)) {}
  PointData(Eigen::VectorXd v, Eigen::MatrixXd m)
      : vec(std::move(v)), mat(std::move(m)) {}

  bool same_shape(const PointData& other) const {
    if (vec.size() != other.vec.size()) return false;
    if (mat.has_value() != other.mat.has_value()) return false;
    if (mat && (mat->rows() != other.mat->rows() ||
                mat->cols() != other.mat->cols()))
      return false;
    return true;
  }
};

// wa * a + wb * b on both blocks.
inline PointData combine(const PointData& a, double wa, const PointData& b,
                         double wb) {
  if (!a.same_shape(b)) throw dimension_error("combine: shape mismatch");
  PointData out;
  out.vec = wa * a.vec + wb * b.vec;
  if (a.mat) out.mat = wa * *a.mat + wb * *b.mat;
  return out;
}

// Vector dot product, plus tr(A^T B) when both matrix blocks are present.
inline double inner_product(const PointData& a, const PointData& b) {
  if (!a.same_shape(b)) throw dimension_error("inner_product: shape mismatch");
  double out = a.vec.dot(b.vec);
  if (a.mat) out += a.mat->cwiseProduct(*b.mat).sum();
  return out;
}

struct FamilyDescriptor;
using FamilyRef = std::shared_ptr<const FamilyDescriptor>;

struct ParamPoint {
  PointData data;
  CoordSystem system = CoordSystem::natural;
  FamilyRef family;
};

// Bidirectional maps between conventional parameters (lambda, (mu, sigma^2),
// (mu, Sigma), Dirichlet concentration) and natural parameters.
struct SourceMaps {
  std::function<PointData(const PointData&)> to_natural;
  std::function<PointData(const PointData&)> from_natural;
};

struct FamilyDescriptor {
  std::string name;
  int order = 1;    // dimension of the natural parameter space
  int vec_dim = 1;  // vector block size
  int mat_dim = 0;  // matrix block size, 0 when absent
  SupportInfo support;

  std::function<double(const PointData&)> log_normalizer;
  std::function<PointData(const PointData&)> grad_log_normalizer;
  // Null for families without a usable analytic inverse (Dirichlet).
  std::function<PointData(const PointData&)> inv_grad_log_normalizer;
  std::function<PointData(const Eigen::VectorXd&)> sufficient_statistic;
  std::function<double(const Eigen::VectorXd&)> carrier;
  std::function<bool(const PointData&)> domain_test;
  SourceMaps source;
  // (mean, std) of the scalar observable at a natural point; null for
  // vector-sample families. Drives integration ranges and samplers.
  std::function<std::pair<double, double>(const PointData&)> sample_moments;

  bool has_inverse_gradient() const {
    return static_cast<bool>(inv_grad_log_normalizer);
  }
  bool shape_ok(const PointData& p) const {
    if (p.vec.size() != vec_dim) return false;
    if (mat_dim == 0) return !p.mat.has_value();
    return p.mat && p.mat->rows() == mat_dim && p.mat->cols() == mat_dim;
  }
};

inline void require_shape(const FamilyDescriptor& f, const PointData& p,
                          const char* what) {
  if (!f.shape_ok(p))
    throw dimension_error(std::string(what) + ": shape mismatch for family " +
                          f.name);
}

inline ParamPoint natural_point(FamilyRef family, PointData data) {
  require_shape(*family, data, "natural_point");
  if (!family->domain_test(data))
    throw domain_error("natural_point: outside the natural domain of " +
                       family->name);
  return ParamPoint{std::move(data), CoordSystem::natural, std::move(family)};
}

inline ParamPoint expectation_point(FamilyRef family, PointData data) {
  require_shape(*family, data, "expectation_point");
  return ParamPoint{std::move(data), CoordSystem::expectation,
                    std::move(family)};
}

// Conventional parameters in, natural point out.
inline ParamPoint source_point(FamilyRef family, const PointData& conventional) {
  return natural_point(family, family->source.to_natural(conventional));
}

inline void require_same_family(const ParamPoint& a, const ParamPoint& b,
                                const char* what) {
  if (!a.family || !b.family || a.family != b.family)
    throw dimension_error(std::string(what) +
                          ": points must share one family descriptor");
}

inline void require_natural(const ParamPoint& p, const char* what) {
  if (p.system != CoordSystem::natural)
    throw dimension_error(std::string(what) +
                          ": expected a natural-coordinate point");
}

inline double inner_product(const ParamPoint& a, const ParamPoint& b) {
  return inner_product(a.data, b.data);
}

// theta <-> eta through the gradient pair of the log-normalizer.
inline ParamPoint legendre_dual(const ParamPoint& p) {
  if (!p.family) throw dimension_error("legendre_dual: point has no family");
  const FamilyDescriptor& f = *p.family;
  if (p.system == CoordSystem::natural) {
    if (!f.domain_test(p.data))
      throw domain_error("legendre_dual: point outside the domain of " +
                         f.name);
    return ParamPoint{f.grad_log_normalizer(p.data), CoordSystem::expectation,
                      p.family};
  }
  if (!f.has_inverse_gradient())
    throw unsupported_error("legendre_dual: " + f.name +
                            " has no inverse gradient");
  PointData theta = f.inv_grad_log_normalizer(p.data);
  if (!f.domain_test(theta))
    throw domain_error("legendre_dual: image lies outside the domain of " +
                       f.name);
  return ParamPoint{std::move(theta), CoordSystem::natural, p.family};
}

// Convex conjugate at an expectation point, evaluated through the
// maximizer form <theta(eta), eta> - F(theta(eta)).
inline double dual_log_normalizer(const ParamPoint& eta) {
  if (!eta.family)
    throw dimension_error("dual_log_normalizer: point has no family");
  if (eta.system != CoordSystem::expectation)
    throw dimension_error(
        "dual_log_normalizer: expected an expectation-coordinate point");
  const FamilyDescriptor& f = *eta.family;
  if (!f.has_inverse_gradient())
    throw unsupported_error("dual_log_normalizer: " + f.name +
                            " has no inverse gradient");
  PointData theta = f.inv_grad_log_normalizer(eta.data);
  return inner_product(theta, eta.data) - f.log_normalizer(theta);
}

// log p(x; theta) = <t(x), theta> - F(theta) + k(x).
inline double log_density(const ParamPoint& theta, const Eigen::VectorXd& x) {
  require_natural(theta, "log_density");
  const FamilyDescriptor& f = *theta.family;
  return inner_product(f.sufficient_statistic(x), theta.data) -
         f.log_normalizer(theta.data) + f.carrier(x);
}

inline double density(const ParamPoint& theta, const Eigen::VectorXd& x) {
  return std::exp(log_density(theta, x));
}

}  // namespace efdiv
