#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "bcplab/core.hpp"

namespace bcplab {

// T : l_q^n -> l_p^m stored as an m x n matrix. q is the domain exponent, p the codomain exponent.
struct Operator {
  Matrix matrix;
  double q = 2.0;
  double p = 2.0;

  Operator() = default;
  Operator(Matrix a, double domain_exp, double codomain_exp) : matrix(std::move(a)), q(domain_exp), p(codomain_exp) {
    require_exponent(q);
    require_exponent(p);
    if (!matrix.allFinite()) throw Error("operator has non-finite entries");
  }

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

struct AscentOptions {
  int restarts = 32;
  int max_iter = 500;
  double tol = 1e-12;
  std::uint64_t seed = 0x5eedULL;
};

struct NormResult {
  double value = 0.0;
  Vector argmax;  // unit vector of the domain attaining (approximately) the value
  bool converged = true;
  std::string method;
};

// z with ||z||_{p'} = 1 and <z, y> = ||y||_p. Zero for y = 0.
inline Vector dual_vector(const Vector& y, double p) {
  Vector z = Vector::Zero(y.size());
  const double ny = lp_norm(y, p);
  if (ny == 0.0) return z;
  if (std::isinf(p)) {
    Eigen::Index k;
    y.cwiseAbs().maxCoeff(&k);
    z[k] = y[k] > 0 ? 1.0 : -1.0;
    return z;
  }
  if (p == 1.0) {
    for (Eigen::Index i = 0; i < y.size(); ++i) z[i] = y[i] > 0 ? 1.0 : (y[i] < 0 ? -1.0 : 0.0);
    return z;
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double a = std::abs(y[i]) / ny;
    z[i] = std::copysign(std::pow(a, p - 1.0), y[i]);
  }
  return z;
}

inline NormResult spectral_norm(const Matrix& a) {
  NormResult r;
  r.method = "svd";
  if (a.size() == 0) {
    r.argmax = Vector::Zero(a.cols());
    return r;
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinV);
  r.value = svd.singularValues()(0);
  r.argmax = svd.matrixV().col(0);
  return r;
}

namespace detail {

inline NormResult column_norm(const Matrix& a, double p) {
  NormResult r;
  r.method = "column";
  r.argmax = Vector::Zero(a.cols());
  Eigen::Index best = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double v = lp_norm(a.col(j), p);
    if (v > r.value) {
      r.value = v;
      best = j;
    }
  }
  if (a.cols() > 0) r.argmax[best] = 1.0;
  return r;
}

inline NormResult row_norm(const Matrix& a, double q) {
  NormResult r;
  r.method = "row";
  const double qd = conjugate_exponent(q);
  Eigen::Index best = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double v = lp_norm(a.row(i).transpose(), qd);
    if (v > r.value) {
      r.value = v;
      best = i;
    }
  }
  r.argmax = a.rows() > 0 ? dual_vector(a.row(best).transpose(), qd) : Vector::Zero(a.cols());
  if (r.argmax.isZero()) r.argmax = Vector::Unit(a.cols(), 0);
  return r;
}

// max over sign vectors s of ||A s||_p; exact for a domain exponent of infinity.
inline NormResult vertex_norm(const Matrix& a, double p) {
  NormResult r;
  r.method = "vertex";
  const auto n = a.cols();
  r.argmax = Vector::Ones(n);
  Vector s = Vector::Ones(n);
  // Gray-code walk over sign patterns, keeping s(0) = +1 by symmetry.
  Vector y = a * s;
  r.value = lp_norm(y, p);
  const std::uint64_t count = n > 0 ? (std::uint64_t{1} << (n - 1)) : 1;
  for (std::uint64_t k = 1; k < count; ++k) {
    const int bit = __builtin_ctzll(k) + 1;
    s[bit] = -s[bit];
    y += 2.0 * s[bit] * a.col(bit);
    const double v = lp_norm(y, p);
    if (v > r.value) {
      r.value = v;
      r.argmax = s;
    }
  }
  return r;
}

}  // namespace detail

// Fixed-point ascent x <- dual_{q'}(A^T dual_p(A x)) with seeded restarts; returns the best value.
inline NormResult ascent_norm(const Matrix& a, double q, double p, const AscentOptions& opt = {}) {
  NormResult best;
  best.method = "ascent";
  best.converged = false;
  const auto n = a.cols();
  if (n == 0 || a.rows() == 0) {
    best.argmax = Vector::Zero(n);
    best.converged = true;
    return best;
  }
  const double qd = conjugate_exponent(q);
  Rng rng = make_rng(opt.seed);
  for (int start = 0; start < opt.restarts; ++start) {
    Vector x(n);
    if (start == 0) {
      Eigen::Index j = 0;
      double cmax = -1.0;
      for (Eigen::Index c = 0; c < n; ++c) {
        const double v = lp_norm(a.col(c), p);
        if (v > cmax) {
          cmax = v;
          j = c;
        }
      }
      x = Vector::Unit(n, j);
    } else if (start == 1) {
      x = Vector::Ones(n);
    } else {
      for (Eigen::Index i = 0; i < n; ++i) x[i] = gaussian(rng);
    }
    const double nx = lp_norm(x, q);
    if (nx == 0.0) continue;
    x /= nx;
    double gamma = lp_norm(a * x, p);
    bool converged = false;
    for (int it = 0; it < opt.max_iter; ++it) {
      const Vector y = a * x;
      const Vector z = a.transpose() * dual_vector(y, p);
      const double nz = lp_norm(z, qd);
      if (nz == 0.0) {
        converged = true;
        break;
      }
      Vector xn = dual_vector(z, qd);
      const double nxn = lp_norm(xn, q);
      if (nxn == 0.0) break;
      xn /= nxn;
      const double gn = lp_norm(a * xn, p);
      if (gn >= gamma) {
        const bool small = gn - gamma <= opt.tol * std::max(1.0, gamma);
        x = std::move(xn);
        gamma = gn;
        if (small) {
          converged = true;
          break;
        }
      } else {
        // no further ascent from this start
        converged = true;
        break;
      }
    }
    if (gamma > best.value || best.argmax.size() == 0) {
      best.value = gamma;
      best.argmax = x;
      best.converged = converged;
    }
  }
  return best;
}

// Induced norm sup{||T x||_p : ||x||_q <= 1}. Exact at the corners q = 1, p = inf, q = p = 2,
// and by vertex enumeration for q = inf or p = 1 (up to 24 sign variables); otherwise ascent.
inline NormResult operator_norm(const Matrix& a, double q, double p, const AscentOptions& opt = {}) {
  require_exponent(q);
  require_exponent(p);
  if (q == 1.0) return detail::column_norm(a, p);
  if (std::isinf(p)) return detail::row_norm(a, q);
  if (q == 2.0 && p == 2.0) return spectral_norm(a);
  if (std::isinf(q) && a.cols() <= 24) return detail::vertex_norm(a, p);
  if (p == 1.0 && a.rows() <= 24) {
    // ||A||_{q->1} = ||A^T||_{inf->q'}
    NormResult r = detail::vertex_norm(a.transpose(), conjugate_exponent(q));
    r.argmax = dual_vector(a.transpose() * r.argmax, conjugate_exponent(q));
    if (r.argmax.isZero()) r.argmax = Vector::Unit(a.cols(), 0);
    return r;
  }
  return ascent_norm(a, q, p, opt);
}

inline NormResult operator_norm(const Operator& t, const AscentOptions& opt = {}) {
  return operator_norm(t.matrix, t.q, t.p, opt);
}

// Value only; closed form for 2 x 2 spectral norms: sigma_max = (|a+d, c-b| + |a-d, b+c|) / 2.
inline double operator_norm_value(const Matrix& a, double q, double p, const AscentOptions& opt = {}) {
  if (q == 2.0 && p == 2.0 && a.rows() == 2 && a.cols() == 2) {
    const double s = std::hypot(a(0, 0) + a(1, 1), a(1, 0) - a(0, 1));
    const double d = std::hypot(a(0, 0) - a(1, 1), a(0, 1) + a(1, 0));
    return 0.5 * (s + d);
  }
  return operator_norm(a, q, p, opt).value;
}

inline nlohmann::json exponent_to_json(double p) {
  if (std::isinf(p)) return "inf";
  return p;
}

inline double exponent_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw ConfigError("exponent must be a number or \"inf\"");
  }
  const double p = j.get<double>();
  require_exponent(p);
  return p;
}

inline nlohmann::json matrix_to_json(const Matrix& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) r.push_back(a(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto m = static_cast<Eigen::Index>(j.size());
  const auto n = m > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != n)
      throw DimensionError("ragged matrix in JSON");
    for (Eigen::Index k = 0; k < n; ++k)
      a(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return a;
}

inline nlohmann::json to_json(const Operator& t) {
  return {{"rows", t.rows()}, {"cols", t.cols()}, {"q", exponent_to_json(t.q)}, {"p", exponent_to_json(t.p)},
          {"matrix", matrix_to_json(t.matrix)}};
}

inline Operator operator_from_json(const nlohmann::json& j) {
  Operator t(matrix_from_json(j.at("matrix")), exponent_from_json(j.at("q")), exponent_from_json(j.at("p")));
  if (j.contains("rows") && j.at("rows").get<Eigen::Index>() != t.rows()) throw DimensionError("row count mismatch");
  if (j.contains("cols") && j.at("cols").get<Eigen::Index>() != t.cols()) throw DimensionError("column count mismatch");
  return t;
}

}  // namespace bcplab
