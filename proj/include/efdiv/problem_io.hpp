#pragma once

#include <json.hpp>
#include <string>

#include "efdiv/bayes.hpp"
#include "efdiv/families.hpp"
#include "efdiv/family.hpp"

// JSON in, catalog objects out. Only conventional parameters cross this
// boundary; natural coordinates stay internal.
namespace efdiv::io {

using json = nlohmann::json;

struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail_io {

inline double number_at(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw input_error("expected numeric field \"" + key + "\"");
  return j.at(key).get<double>();
}

inline Eigen::VectorXd vector_at(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw input_error("expected array field \"" + key + "\"");
  const json& arr = j.at(key);
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number())
      throw input_error("field \"" + key + "\" must hold numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

inline Eigen::MatrixXd matrix_at(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty())
    throw input_error("expected matrix field \"" + key + "\"");
  const json& rows = j.at(key);
  const std::size_t n = rows.size();
  Eigen::MatrixXd m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    if (!rows[r].is_array() || rows[r].size() != n)
      throw input_error("field \"" + key + "\" must be a square matrix");
    for (std::size_t c = 0; c < n; ++c) {
      if (!rows[r][c].is_number())
        throw input_error("field \"" + key + "\" must hold numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c].get<double>();
    }
  }
  return m;
}

// Hyperparameters may sit under "hyper" or at the top level.
inline json hyper_of(const json& j) {
  if (j.contains("hyper")) {
    if (!j.at("hyper").is_object())
      throw input_error("\"hyper\" must be an object");
    return j.at("hyper");
  }
  json out = json::object();
  for (const char* key : {"sigma", "d"})
    if (j.contains(key)) out[key] = j.at(key);
  return out;
}

}  // namespace detail_io

inline FamilyRef family_from_json(const json& j) {
  if (!j.contains("family") || !j.at("family").is_string())
    throw input_error("expected string field \"family\"");
  const std::string name = j.at("family").get<std::string>();
  const json hyper = detail_io::hyper_of(j);
  if (name == "poisson") return make_poisson();
  if (name == "bernoulli") return make_bernoulli();
  if (name == "exponential") return make_exponential();
  if (name == "gaussian-fixed-sigma")
    return make_gaussian_fixed_sigma(detail_io::number_at(hyper, "sigma"));
  if (name == "gaussian-1d") return make_gaussian_1d();
  if (name == "gaussian-mvn") {
    if (!hyper.contains("d"))
      throw input_error("family \"gaussian-mvn\" needs hyperparameter \"d\"");
    return make_gaussian_mvn(hyper.at("d").get<int>());
  }
  if (name == "dirichlet") {
    if (!hyper.contains("d"))
      throw input_error("family \"dirichlet\" needs hyperparameter \"d\"");
    return make_dirichlet(hyper.at("d").get<int>());
  }
  throw input_error("unknown family \"" + name + "\"");
}

// Conventional-parameter object -> natural point. Scalar Gaussians take
// "sigma" as a standard deviation.
inline ParamPoint point_from_json(const FamilyRef& family, const json& obj) {
  using namespace detail_io;
  if (!obj.is_object()) throw input_error("parameter entry must be an object");
  const std::string& name = family->name;
  PointData conventional;
  if (name == "poisson") {
    conventional.vec = Eigen::VectorXd::Constant(1, number_at(obj, "lambda"));
  } else if (name == "bernoulli") {
    conventional.vec = Eigen::VectorXd::Constant(1, number_at(obj, "p"));
  } else if (name == "exponential") {
    const char* key = obj.contains("rate") ? "rate" : "lambda";
    conventional.vec = Eigen::VectorXd::Constant(1, number_at(obj, key));
  } else if (name == "gaussian-fixed-sigma") {
    conventional.vec = Eigen::VectorXd::Constant(1, number_at(obj, "mu"));
  } else if (name == "gaussian-1d") {
    const double sigma = number_at(obj, "sigma");
    if (!(sigma > 0.0)) throw input_error("\"sigma\" must be > 0");
    Eigen::VectorXd v(2);
    v[0] = number_at(obj, "mu");
    v[1] = sigma * sigma;
    conventional.vec = v;
  } else if (name == "gaussian-mvn") {
    conventional.vec = vector_at(obj, "mu");
    conventional.mat = matrix_at(obj, "sigma");
    if (conventional.vec.size() != conventional.mat->rows())
      throw input_error("\"mu\" and \"sigma\" dimensions disagree");
  } else if (name == "dirichlet") {
    conventional.vec = vector_at(obj, "concentration");
  } else {
    throw input_error("no parameter schema for family \"" + name + "\"");
  }
  if (conventional.vec.size() != family->vec_dim)
    throw input_error("parameter dimension does not match the family");
  return source_point(family, conventional);
}

// Single-distribution config: {"family": ..., hyper fields, "params": {...}}.
inline ParamPoint distribution_from_json(const json& j) {
  FamilyRef family = family_from_json(j);
  if (!j.contains("params") || !j.at("params").is_object())
    throw input_error("expected \"params\" object");
  return point_from_json(family, j.at("params"));
}

struct ProblemSpec {
  FamilyRef family;
  ParamPoint p;
  ParamPoint q;
  double w1 = 0.5;
  std::string family_name;
};

// {"family": ..., "hyper"?: {...}, "p": {...}, "q": {...}, "w1"?: number}
inline ProblemSpec problem_from_json(const json& j) {
  ProblemSpec out;
  out.family = family_from_json(j);
  out.family_name = j.at("family").get<std::string>();
  if (!j.contains("p") || !j.contains("q"))
    throw input_error("problem needs \"p\" and \"q\" parameter objects");
  out.p = point_from_json(out.family, j.at("p"));
  out.q = point_from_json(out.family, j.at("q"));
  out.w1 = j.contains("w1") ? detail_io::number_at(j, "w1") : 0.5;
  if (!(out.w1 > 0.0 && out.w1 < 1.0))
    throw input_error("\"w1\" must lie in (0,1)");
  return out;
}

}  // namespace efdiv::io
