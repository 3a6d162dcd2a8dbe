#pragma once

// Dense displacement fields on the panorama, wrap-aware displacement
// arithmetic, cross-view flow conversion, and analytic ground-truth flows
// for pure camera rotations.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

#include "erpflow/sphere_geom.hpp"

namespace erpflow {

// Canonical representative of du mod width in [-width/2, width/2).
template <class T>
T wrap_displacement(T du, int width) {
  const T w = static_cast<T>(width);
  return du - w * std::floor(du / w + T(0.5));
}

template <class T>
T wrap_displacement(T du, const ErpGrid& g) {
  return wrap_displacement(du, g.width);
}

// Dense 2-channel displacement field in pixels at this grid's resolution.
// The u component is kept in canonical wrap form; v does not wrap.
template <class T>
struct FlowField {
  ErpGrid grid;
  ViewTag view = ViewTag::Primitive;
  ImagePlane<T> u, v;  // height x width

  static FlowField zero(const ErpGrid& g, ViewTag tag = ViewTag::Primitive) {
    FlowField f;
    f.grid = g;
    f.view = tag;
    f.u = ImagePlane<T>::Zero(g.height, g.width);
    f.v = ImagePlane<T>::Zero(g.height, g.width);
    return f;
  }

  static FlowField constant(const ErpGrid& g, T du, T dv, ViewTag tag = ViewTag::Primitive) {
    FlowField f = zero(g, tag);
    f.u.setConstant(wrap_displacement(du, g.width));
    f.v.setConstant(dv);
    return f;
  }

  void canonicalize() {
    for (int j = 0; j < grid.height; ++j)
      for (int i = 0; i < grid.width; ++i) u(j, i) = wrap_displacement(u(j, i), grid.width);
  }
};

template <class T>
Eigen::Matrix<T, 2, 1> sample_flow(const FlowField<T>& f, double x_index, double y_index) {
  return {bilinear_index_space(f.u, f.grid, x_index, y_index),
          bilinear_index_space(f.v, f.grid, x_index, y_index)};
}

// Converts a flow field between views by endpoint conjugation: each target
// pixel is mapped to the source view, the source flow is read there, the
// displaced endpoint is rotated back, and the wrapped difference is stored.
// Plain per-channel resampling would be wrong -- the rotation changes vector
// directions between views.
template <class T>
FlowField<T> flow_view_transform(const FlowField<T>& flow, ViewDirection dir) {
  const Mat3d to_source = view_rotation_matrix(dir);
  const Mat3d to_target = view_rotation_matrix(
      dir == ViewDirection::PrimToOrtho ? ViewDirection::OrthoToPrim : ViewDirection::PrimToOrtho);
  FlowField<T> out = FlowField<T>::zero(
      flow.grid, dir == ViewDirection::PrimToOrtho ? ViewTag::Orthogonal : ViewTag::Primitive);
  const int h = flow.grid.height, w = flow.grid.width;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const Vec2d xt(i + 0.5, j + 0.5);
      const Vec2d xs = sph_rotate<double>(to_source, xt, flow.grid);
      const Eigen::Matrix<T, 2, 1> d = sample_flow(flow, xs.x() - 0.5, xs.y() - 0.5);
      const Vec2d es(xs.x() + double(d.x()), xs.y() + double(d.y()));
      const Vec2d et = sph_rotate<double>(to_target, es, flow.grid);
      out.u(j, i) = static_cast<T>(wrap_displacement(et.x() - xt.x(), double(w)));
      out.v(j, i) = static_cast<T>(et.y() - xt.y());
    }
  }
  return out;
}

// Exact flow of a pure camera rotation in a static scene:
// flow(x) = rotate(x) - x with the horizontal component wrapped.
template <class T = float>
FlowField<T> analytic_rotation_flow(const ErpGrid& g, const RotationSpecd& camera,
                                    ViewTag tag = ViewTag::Primitive) {
  const Mat3d rot = camera.matrix();
  FlowField<T> out = FlowField<T>::zero(g, tag);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      const Vec2d x(i + 0.5, j + 0.5);
      const Vec2d y = sph_rotate<double>(rot, x, g);
      out.u(j, i) = static_cast<T>(wrap_displacement(y.x() - x.x(), double(g.width)));
      out.v(j, i) = static_cast<T>(y.y() - x.y());
    }
  }
  return out;
}

// Warp the second frame back by a flow field: out(x) = Bi(img, x + flow(x)).
template <class T>
ErpImage<T> warp_image(const ErpImage<T>& img, const FlowField<T>& flow) {
  if (img.grid != flow.grid) throw DimensionMismatch("warp_image: grid mismatch");
  ErpImage<T> out(img.grid, img.channels(), img.view);
  const int h = img.grid.height, w = img.grid.width;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const Vec2d p(i + 0.5 + double(flow.u(j, i)), j + 0.5 + double(flow.v(j, i)));
      for (int c = 0; c < img.channels(); ++c) out.planes[c](j, i) = bilinear_sample(img, p, c);
    }
  }
  return out;
}

// Latitude partition used for region reporting: Poles iff |phi| > pi/4 at
// the pixel center, Equator otherwise.
struct RegionMask {
  ErpGrid grid;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> poles;

  std::int64_t pole_count() const { return poles.count(); }
  std::int64_t equator_count() const { return grid.pixel_count() - pole_count(); }
};

inline RegionMask region_mask(const ErpGrid& g) {
  RegionMask m;
  m.grid = g;
  m.poles.resize(g.height, g.width);
  for (int j = 0; j < g.height; ++j) {
    const double phi = kPi / 2 - kPi * (j + 0.5) / g.height;
    const bool polar = std::abs(phi) > kPi / 4;
    for (int i = 0; i < g.width; ++i) m.poles(j, i) = polar;
  }
  return m;
}

// Bilinear upsampling of a feature-resolution flow to image resolution;
// displacement values are rescaled by the same factor.
template <class T>
FlowField<T> upsample_flow(const FlowField<T>& flow, int factor, const ErpGrid& target) {
  FlowField<T> out = FlowField<T>::zero(target, flow.view);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < target.height; ++j) {
    for (int i = 0; i < target.width; ++i) {
      const double x = (i + 0.5) / factor - 0.5;
      const double y = (j + 0.5) / factor - 0.5;
      const Eigen::Matrix<T, 2, 1> d = sample_flow(flow, x, y);
      out.u(j, i) = static_cast<T>(wrap_displacement(double(d.x()) * factor, double(target.width)));
      out.v(j, i) = d.y() * factor;
    }
  }
  return out;
}

}  // namespace erpflow
