#pragma once

// Evaluation and loss functions: end-point error, spherical end-point error
// (geodesic distance between the flow endpoints on the unit sphere),
// spherical-area-weighted L1, exponentially weighted sequence loss, and the
// Equator/Poles/All region report.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "erpflow/flow_field.hpp"

namespace erpflow {

enum class RegionSelect { All, Poles, Equator };

namespace detail {

template <class T>
void check_comparable(const FlowField<T>& pred, const FlowField<T>& gt) {
  if (pred.grid != gt.grid) throw DimensionMismatch("flow fields have different grids");
}

inline bool selected(const RegionMask& m, int j, int i, RegionSelect sel) {
  switch (sel) {
    case RegionSelect::All: return true;
    case RegionSelect::Poles: return m.poles(j, i);
    case RegionSelect::Equator: return !m.poles(j, i);
  }
  return true;
}

}  // namespace detail

// Mean Euclidean endpoint error in pixels; the horizontal difference is
// wrap-canonicalized first, so flows offset by the panorama width agree.
template <class T>
double epe(const FlowField<T>& pred, const FlowField<T>& gt, RegionSelect sel = RegionSelect::All) {
  detail::check_comparable(pred, gt);
  const RegionMask mask = region_mask(pred.grid);
  double acc = 0.0;
  std::int64_t n = 0;
  for (int j = 0; j < pred.grid.height; ++j) {
    for (int i = 0; i < pred.grid.width; ++i) {
      if (!detail::selected(mask, j, i, sel)) continue;
      const double du = wrap_displacement(double(pred.u(j, i)) - double(gt.u(j, i)), pred.grid.width);
      const double dv = double(pred.v(j, i)) - double(gt.v(j, i));
      acc += std::hypot(du, dv);
      ++n;
    }
  }
  if (n == 0) throw EmptyRegion("epe: selector matches no pixels");
  return acc / double(n);
}

inline double geodesic_distance(const Vec3d& a, const Vec3d& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

// Mean geodesic distance (radians) between predicted and ground-truth flow
// endpoints mapped onto the unit sphere.
template <class T>
double sepe(const FlowField<T>& pred, const FlowField<T>& gt, RegionSelect sel = RegionSelect::All) {
  detail::check_comparable(pred, gt);
  const RegionMask mask = region_mask(pred.grid);
  const ErpGrid g = pred.grid;
  double acc = 0.0;
  std::int64_t n = 0;
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      if (!detail::selected(mask, j, i, sel)) continue;
      ++n;
      if (pred.u(j, i) == gt.u(j, i) && pred.v(j, i) == gt.v(j, i)) continue;  // distance 0
      const Vec2d x(i + 0.5, j + 0.5);
      const Vec2d ep = x + Vec2d(double(pred.u(j, i)), double(pred.v(j, i)));
      const Vec2d eg = x + Vec2d(double(gt.u(j, i)), double(gt.v(j, i)));
      const Vec3d a = sph_to_cart(pixel_to_sph<double>(g, ep));
      const Vec3d b = sph_to_cart(pixel_to_sph<double>(g, eg));
      acc += geodesic_distance(a, b);
    }
  }
  if (n == 0) throw EmptyRegion("sepe: selector matches no pixels");
  return acc / double(n);
}

// L1 flow error weighted by the spherical area of each pixel,
// w_j = cos(phi_j) at pixel centers, normalized by the total weight.
template <class T>
double sphere_weighted_l1(const FlowField<T>& pred, const FlowField<T>& gt) {
  detail::check_comparable(pred, gt);
  const ErpGrid g = pred.grid;
  double num = 0.0, den = 0.0;
  for (int j = 0; j < g.height; ++j) {
    const double w = std::cos(kPi / 2 - kPi * (j + 0.5) / g.height);
    for (int i = 0; i < g.width; ++i) {
      const double du = wrap_displacement(double(pred.u(j, i)) - double(gt.u(j, i)), g.width);
      const double dv = double(pred.v(j, i)) - double(gt.v(j, i));
      num += w * (std::abs(du) + std::abs(dv));
      den += w;
    }
  }
  return num / den;
}

// Sum over iterates of gamma^(N-i) * sphere_weighted_l1(pred_i, gt).
template <class T>
double sequence_loss(const std::vector<FlowField<T>>& preds, const FlowField<T>& gt, double gamma) {
  const int n = static_cast<int>(preds.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    total += std::pow(gamma, double(n - 1 - i)) * sphere_weighted_l1(preds[i], gt);
  return total;
}

// Dual-branch training loss: the orthogonal branch is supervised against the
// view-converted ground truth.
template <class T>
double dual_sequence_loss(const std::vector<FlowField<T>>& preds_primitive,
                          const std::vector<FlowField<T>>& preds_orthogonal,
                          const FlowField<T>& gt_primitive, double gamma) {
  const FlowField<T> gt_ortho = flow_view_transform(gt_primitive, ViewDirection::PrimToOrtho);
  return sequence_loss(preds_primitive, gt_primitive, gamma) +
         sequence_loss(preds_orthogonal, gt_ortho, gamma);
}

struct EvalReport {
  double epe_all = 0, sepe_all = 0;
  double epe_poles = 0, sepe_poles = 0;
  double epe_equator = 0, sepe_equator = 0;
  std::int64_t n_poles = 0, n_equator = 0;
};

// Region means are computed once; the overall value is their pixel-count
// weighted combination, so the decomposition identity holds bitwise.
template <class T>
EvalReport evaluate(const FlowField<T>& pred, const FlowField<T>& gt) {
  EvalReport r;
  const RegionMask mask = region_mask(pred.grid);
  r.n_poles = mask.pole_count();
  r.n_equator = mask.equator_count();
  r.epe_poles = epe(pred, gt, RegionSelect::Poles);
  r.epe_equator = epe(pred, gt, RegionSelect::Equator);
  r.sepe_poles = sepe(pred, gt, RegionSelect::Poles);
  r.sepe_equator = sepe(pred, gt, RegionSelect::Equator);
  const double n = double(r.n_poles + r.n_equator);
  r.epe_all = (double(r.n_poles) * r.epe_poles + double(r.n_equator) * r.epe_equator) / n;
  r.sepe_all = (double(r.n_poles) * r.sepe_poles + double(r.n_equator) * r.sepe_equator) / n;
  return r;
}

}  // namespace erpflow
