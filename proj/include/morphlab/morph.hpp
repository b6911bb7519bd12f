#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphlab/error.hpp"
#include "morphlab/latent.hpp"

namespace morphlab {

enum class Interpolation { spherical, linear };

inline std::string_view to_string(Interpolation m) {
  return m == Interpolation::spherical ? "spherical" : "linear";
}

inline Interpolation parse_interpolation(std::string_view s) {
  if (s == "spherical" || s == "slerp") return Interpolation::spherical;
  if (s == "linear" || s == "lerp") return Interpolation::linear;
  throw InputError("unknown interpolation mode '" + std::string(s) + "'");
}

inline constexpr double kDefaultDegenerateAngle = 1e-7;

/// How two latents are combined into a morph.
struct MorphRecipe {
  double alpha = 0.5;
  std::size_t identity_rows = kDefaultIdentityRows;
  Interpolation identity_mode = Interpolation::spherical;
  // Rows [identity_rows, end) are combined with this policy.
  Interpolation attribute_mode = Interpolation::spherical;
  std::optional<LatentDirection> direction;
  double degenerate_angle = kDefaultDegenerateAngle;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw InputError("alpha " + std::to_string(alpha) + " outside [0,1]");
    }
    if (!(degenerate_angle > 0.0)) throw InputError("degenerate-angle epsilon must be > 0");
    if (identity_rows < 1) throw InputError("identity row count must be >= 1");
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Angle between u and v in [0, pi].
inline double angle_between(std::span<const double> u, std::span<const double> v) {
  const double c = dot(u, v) / (norm(u) * norm(v));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

inline std::vector<double> lerp(std::span<const double> u, std::span<const double> v,
                                double alpha) {
  if (u.size() != v.size()) throw InputError("lerp: length mismatch");
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = (1.0 - alpha) * u[i] + alpha * v[i];
  return out;
}

/// Spherical interpolation along the great arc from u (alpha = 0) to v
/// (alpha = 1). Falls back to lerp when the angle is below `degenerate_angle`;
/// antipodal inputs have no unique arc and are rejected.
inline std::vector<double> slerp(std::span<const double> u, std::span<const double> v,
                                 double alpha,
                                 double degenerate_angle = kDefaultDegenerateAngle) {
  if (u.size() != v.size()) throw InputError("slerp: length mismatch");
  if (u.empty()) throw InputError("slerp: empty vectors");
  const double nu = norm(u);
  const double nv = norm(v);
  if (!std::isfinite(nu) || !std::isfinite(nv)) throw InputError("slerp: non-finite input");
  if (nu == 0.0 || nv == 0.0) throw DegenerateError("slerp: zero-norm input vector");

  const double theta = std::acos(std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0));
  if (theta < degenerate_angle) return lerp(u, v, alpha);
  if (std::numbers::pi - theta < degenerate_angle) {
    throw DegenerateError("slerp: antipodal inputs, geodesic is not unique");
  }

  const double s = std::sin(theta);
  const double a = std::sin((1.0 - alpha) * theta) / s;
  const double b = std::sin(alpha * theta) / s;
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = a * u[i] + b * v[i];
  return out;
}

/// id + n, componentwise. The same direction is applied to both subjects.
inline Matrix apply_identity_direction(const Matrix& identity, const LatentDirection& n) {
  const Matrix& d = n.matrix();
  if (identity.rows() != d.rows() || identity.cols() != d.cols()) {
    throw InputError("direction shape " + d.shape_string() +
                     " does not match identity part " + identity.shape_string());
  }
  Matrix out = identity;
  auto o = out.values();
  auto dv = d.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += dv[i];
  return out;
}

namespace detail {

inline Matrix combine_rows(const Matrix& a, const Matrix& b, Interpolation mode,
                           double alpha, double eps, std::size_t row_offset) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::vector<double> row;
    try {
      row = mode == Interpolation::spherical ? slerp(a.row(r), b.row(r), alpha, eps)
                                             : lerp(a.row(r), b.row(r), alpha);
    } catch (const DegenerateError& e) {
      throw DegenerateError("style row " + std::to_string(row_offset + r) + ": " + e.what());
    }
    std::copy(row.begin(), row.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace detail

/// Morph pipeline on latents of any matching shape: split at
/// recipe.identity_rows, add the direction to both identity parts, combine
/// identity and attribute rows pairwise, and restack.
inline Matrix build_morph(const Matrix& w1, const Matrix& w2, const MorphRecipe& recipe) {
  recipe.validate();
  if (w1.rows() != w2.rows() || w1.cols() != w2.cols()) {
    throw InputError("latent shapes differ: " + w1.shape_string() + " vs " +
                     w2.shape_string());
  }
  auto p1 = split_rows(w1, recipe.identity_rows);
  auto p2 = split_rows(w2, recipe.identity_rows);
  if (recipe.direction) {
    p1.identity = apply_identity_direction(p1.identity, *recipe.direction);
    p2.identity = apply_identity_direction(p2.identity, *recipe.direction);
  }
  const Matrix identity = detail::combine_rows(p1.identity, p2.identity, recipe.identity_mode,
                                               recipe.alpha, recipe.degenerate_angle, 0);
  const Matrix attributes =
      detail::combine_rows(p1.attributes, p2.attributes, recipe.attribute_mode, recipe.alpha,
                           recipe.degenerate_angle, recipe.identity_rows);
  return stack_rows(identity, attributes);
}

inline LatentCode build_morph_latent(const LatentCode& w1, const LatentCode& w2,
                                     const MorphRecipe& recipe = {}) {
  return LatentCode(build_morph(w1.matrix(), w2.matrix(), recipe));
}

/// One morph per alpha, in the order given.
inline std::vector<LatentCode> build_morph_sweep(const LatentCode& w1, const LatentCode& w2,
                                                 MorphRecipe recipe,
                                                 std::span<const double> alphas) {
  std::vector<LatentCode> out;
  out.reserve(alphas.size());
  for (double a : alphas) {
    recipe.alpha = a;
    out.push_back(build_morph_latent(w1, w2, recipe));
  }
  return out;
}

}  // namespace morphlab
