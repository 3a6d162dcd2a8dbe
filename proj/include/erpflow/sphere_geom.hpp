#pragma once

// Equirectangular panorama geometry: pixel <-> sphere coordinate transforms,
// spherical rotations, wrap-aware bilinear resampling, and the primitive <->
// orthogonal view transforms.
//
// Conventions used throughout:
//  - Pixel (i, j) covers the unit square [i, i+1) x [j, j+1) in continuous
//    coordinates; its sample point is the center (i + 0.5, j + 0.5).
//  - Longitude theta in [-pi, pi) wraps; latitude phi in [-pi/2, pi/2].
//  - Continuous coordinates map linearly:  u = W * (theta + pi) / (2 pi),
//    v = H * (pi/2 - phi) / pi.  The top-left corner (0, 0) is
//    (theta = -pi, phi = pi/2).
//  - Horizontal boundaries wrap mod W.  Vertical coordinates beyond a pole
//    continue onto the antipodal meridian: row -1-k reads row k shifted by
//    W/2 columns, and symmetrically past the south pole.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "erpflow/errors.hpp"

namespace erpflow {

inline constexpr double kPi = std::numbers::pi;

enum class ViewTag { Primitive, Orthogonal };
enum class Axis { X, Y, Z };
enum class ViewDirection { PrimToOrtho, OrthoToPrim };

using Vec2d = Eigen::Vector2d;
using Vec3d = Eigen::Vector3d;
using Mat3d = Eigen::Matrix3d;

template <class T>
using ImagePlane = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Raster geometry of a panorama (or of a derived raster such as a pooled
// correlation level, which may be smaller than a valid panorama).
struct ErpGrid {
  int width = 0;
  int height = 0;

  friend bool operator==(const ErpGrid&, const ErpGrid&) = default;

  std::int64_t pixel_count() const { return std::int64_t(width) * height; }

  // Panorama invariant: even width >= 4, height >= 2.
  bool valid_panorama() const {
    return width >= 4 && width % 2 == 0 && height >= 2;
  }
};

inline ErpGrid checked_grid(int width, int height) {
  ErpGrid g{width, height};
  if (!g.valid_panorama())
    throw std::invalid_argument("ErpGrid requires even width >= 4 and height >= 2");
  return g;
}

template <class T>
struct SphCoord {
  T theta{};  // longitude, radians
  T phi{};    // latitude, radians
};

using SphCoordd = SphCoord<double>;

// Wraps theta into [-pi, pi) and folds phi across the poles onto the
// antipodal meridian so that |phi| <= pi/2.
template <class T>
SphCoord<T> normalized(SphCoord<T> s) {
  const T pi = static_cast<T>(kPi);
  T phi = s.phi - T(2) * pi * std::floor((s.phi + pi) / (T(2) * pi));  // (-pi, pi]
  T theta = s.theta;
  if (phi > pi / T(2)) {
    phi = pi - phi;
    theta += pi;
  } else if (phi < -pi / T(2)) {
    phi = -pi - phi;
    theta += pi;
  }
  theta -= T(2) * pi * std::floor((theta + pi) / (T(2) * pi));
  if (theta >= pi) theta = -pi;  // guard against floor rounding at the seam
  return {theta, phi};
}

template <class T>
SphCoord<T> pixel_to_sph(const ErpGrid& g, const Eigen::Matrix<T, 2, 1>& p) {
  const T pi = static_cast<T>(kPi);
  const T theta = T(2) * pi * p.x() / T(g.width) - pi;
  const T phi = pi / T(2) - pi * p.y() / T(g.height);
  return normalized(SphCoord<T>{theta, phi});
}

template <class T>
Eigen::Matrix<T, 2, 1> sph_to_pixel(const ErpGrid& g, const SphCoord<T>& s) {
  const T pi = static_cast<T>(kPi);
  const T u = T(g.width) * (s.theta + pi) / (T(2) * pi);
  const T v = T(g.height) * (pi / T(2) - s.phi) / pi;
  return {u, v};
}

template <class T>
Eigen::Matrix<T, 3, 1> sph_to_cart(const SphCoord<T>& s) {
  const T c = std::cos(s.phi);
  return {c * std::cos(s.theta), c * std::sin(s.theta), std::sin(s.phi)};
}

// Inverse of sph_to_cart. Renormalizes internally; theta is defined as 0 at
// the poles. Throws ZeroVector when the direction is degenerate.
template <class T>
SphCoord<T> cart_to_sph(const Eigen::Matrix<T, 3, 1>& v) {
  const T n = v.norm();
  if (n < T(1e-9)) throw ZeroVector("cart_to_sph: direction has near-zero norm");
  const T z = v.z() / n;
  if (std::abs(z) >= T(1) - T(1e-12)) {
    return {T(0), z > T(0) ? static_cast<T>(kPi) / T(2) : -static_cast<T>(kPi) / T(2)};
  }
  T theta = std::atan2(v.y(), v.x());  // range [-pi, pi]; fold the seam to [-pi, pi)
  if (theta >= static_cast<T>(kPi)) theta = -static_cast<T>(kPi);
  return {theta, std::asin(z)};
}

template <class T>
struct RotationSpec {
  Axis axis = Axis::X;
  T angle{};  // radians

  RotationSpec inverse() const { return {axis, -angle}; }

  Eigen::Matrix<T, 3, 3> matrix() const {
    const T c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix<T, 3, 3> r;
    switch (axis) {
      case Axis::X:
        r << T(1), T(0), T(0),
             T(0), c, -s,
             T(0), s, c;
        break;
      case Axis::Y:
        r << c, T(0), s,
             T(0), T(1), T(0),
             -s, T(0), c;
        break;
      case Axis::Z:
        r << c, -s, T(0),
             s, c, T(0),
             T(0), T(0), T(1);
        break;
    }
    return r;
  }
};

using RotationSpecd = RotationSpec<double>;

// Rotates a continuous pixel coordinate on the sphere:
// pixel -> sphere -> Cartesian -> rotate -> back. The horizontal output is
// wrapped into [0, W).
template <class T>
Eigen::Matrix<T, 2, 1> sph_rotate(const Eigen::Matrix<T, 3, 3>& rot,
                                  const Eigen::Matrix<T, 2, 1>& p, const ErpGrid& g) {
  const SphCoord<T> s = pixel_to_sph(g, p);
  const SphCoord<T> r = cart_to_sph<T>(rot * sph_to_cart(s));
  Eigen::Matrix<T, 2, 1> q = sph_to_pixel(g, r);
  T u = std::fmod(q.x(), T(g.width));
  if (u < T(0)) u += T(g.width);
  if (u >= T(g.width)) u = T(0);
  return {u, q.y()};
}

template <class T>
Eigen::Matrix<T, 2, 1> sph_rotate(const RotationSpec<T>& spec,
                                  const Eigen::Matrix<T, 2, 1>& p, const ErpGrid& g) {
  return sph_rotate(spec.matrix(), p, g);
}

// Maps an arbitrary integer (row, col) index onto the stored raster:
// columns wrap, rows reflect across the poles with a half-width shift.
inline std::pair<int, int> resolve_erp_index(const ErpGrid& g, int row, int col) {
  const int h = g.height, w = g.width;
  while (row < 0 || row >= h) {
    if (row < 0) {
      row = -1 - row;
    } else {
      row = 2 * h - 1 - row;
    }
    col += w / 2;
  }
  col %= w;
  if (col < 0) col += w;
  return {row, col};
}

// Bilinear blend in index space: the value of cell (r, c) sits at
// coordinates x = c, y = r. Out-of-range taps go through resolve_erp_index.
template <class T>
T bilinear_index_space(const ImagePlane<T>& plane, const ErpGrid& g, double x, double y) {
  const int i0 = static_cast<int>(std::floor(x));
  const int j0 = static_cast<int>(std::floor(y));
  const double fx = x - i0;
  const double fy = y - j0;
  const auto [r00, c00] = resolve_erp_index(g, j0, i0);
  const auto [r01, c01] = resolve_erp_index(g, j0, i0 + 1);
  const auto [r10, c10] = resolve_erp_index(g, j0 + 1, i0);
  const auto [r11, c11] = resolve_erp_index(g, j0 + 1, i0 + 1);
  const double top = (1.0 - fx) * double(plane(r00, c00)) + fx * double(plane(r01, c01));
  const double bot = (1.0 - fx) * double(plane(r10, c10)) + fx * double(plane(r11, c11));
  return static_cast<T>((1.0 - fy) * top + fy * bot);
}

// A panorama raster with one or more channels of real samples.
template <class T>
struct ErpImage {
  ErpGrid grid;
  ViewTag view = ViewTag::Primitive;
  std::vector<ImagePlane<T>> planes;  // each height x width

  ErpImage() = default;
  ErpImage(const ErpGrid& g, int channels, ViewTag tag = ViewTag::Primitive)
      : grid(g), view(tag), planes(channels) {
    if (!g.valid_panorama())
      throw std::invalid_argument("ErpImage requires a valid panorama grid");
    for (auto& p : planes) p = ImagePlane<T>::Zero(g.height, g.width);
  }

  int channels() const { return static_cast<int>(planes.size()); }

  static ErpImage constant(const ErpGrid& g, int channels, T value,
                           ViewTag tag = ViewTag::Primitive) {
    ErpImage img(g, channels, tag);
    for (auto& p : img.planes) p.setConstant(value);
    return img;
  }
};

// Bilinear sample at a continuous (corner-convention) pixel coordinate.
// Exact at pixel centers; horizontal wrap and pole reflection as above.
template <class T>
T bilinear_sample(const ErpImage<T>& img, const Vec2d& p, int channel) {
  return bilinear_index_space(img.planes[channel], img.grid, p.x() - 0.5, p.y() - 0.5);
}

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, 1> bilinear_sample(const ErpImage<T>& img, const Vec2d& p) {
  Eigen::Matrix<T, Eigen::Dynamic, 1> out(img.channels());
  for (int c = 0; c < img.channels(); ++c) out[c] = bilinear_sample(img, p, c);
  return out;
}

inline Mat3d view_rotation_matrix(ViewDirection dir) {
  // Eq.-of-motion for the resampling map: the orthogonal view samples the
  // primitive image at R_x(-90 deg); the inverse transform uses +90 deg.
  const double a = (dir == ViewDirection::PrimToOrtho) ? -kPi / 2 : kPi / 2;
  return RotationSpecd{Axis::X, a}.matrix();
}

// Re-projects the panorama through a 90 degree rotation about the x-axis.
// Output pixel x takes the value Bi(img, rotate(x)); the view tag flips.
template <class T>
ErpImage<T> view_transform_image(const ErpImage<T>& img, ViewDirection dir) {
  const Mat3d rot = view_rotation_matrix(dir);
  ErpImage<T> out(img.grid, img.channels(),
                  dir == ViewDirection::PrimToOrtho ? ViewTag::Orthogonal : ViewTag::Primitive);
  const int h = img.grid.height, w = img.grid.width;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const Vec2d src = sph_rotate<double>(rot, Vec2d(i + 0.5, j + 0.5), img.grid);
      for (int c = 0; c < img.channels(); ++c)
        out.planes[c](j, i) = bilinear_sample(img, src, c);
    }
  }
  return out;
}

// Per-pixel horizontal stretch factor 1/cos(phi), capped at the value of the
// outermost pixel-center row (the true pole lies between centers).
template <class T = float>
ErpImage<T> distortion_map(const ErpGrid& g) {
  ErpImage<T> out(g, 1);
  const double phi_edge = kPi / 2 - kPi * 0.5 / g.height;
  const double cap = 1.0 / std::cos(phi_edge);
  for (int j = 0; j < g.height; ++j) {
    const double phi = kPi / 2 - kPi * (j + 0.5) / g.height;
    const double s = std::min(1.0 / std::cos(phi), cap);
    for (int i = 0; i < g.width; ++i) out.planes[0](j, i) = static_cast<T>(s);
  }
  return out;
}

}  // namespace erpflow
