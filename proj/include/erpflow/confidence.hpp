#pragma once

// Group-wise correlation confidence: per pixel, the frame-2 descriptor is
// warped by a candidate flow (horizontal modulo, bilinear) and compared to
// the frame-1 descriptor group by group with normalized inner products.

#include <Eigen/Dense>

#include <utility>

#include "erpflow/cost_volume.hpp"

namespace erpflow {

// Per-pixel vector of G group correlations in [-1, 1].
template <class T>
struct ConfidenceMap {
  ErpGrid grid;
  int groups = 0;
  DynMatrix<T> values;  // G x N

  Eigen::Matrix<T, 1, Eigen::Dynamic> per_pixel_mean() const { return values.colwise().mean(); }
};

// Bilinear sample of a descriptor column stack at feature index coordinates.
template <class T>
Eigen::Matrix<double, Eigen::Dynamic, 1> sample_descriptor(const FeatureMap<T>& fm, double x,
                                                           double y) {
  const ErpGrid& g = fm.grid;
  const int i0 = static_cast<int>(std::floor(x));
  const int j0 = static_cast<int>(std::floor(y));
  const double fx = x - i0;
  const double fy = y - j0;
  const auto [r00, c00] = resolve_erp_index(g, j0, i0);
  const auto [r01, c01] = resolve_erp_index(g, j0, i0 + 1);
  const auto [r10, c10] = resolve_erp_index(g, j0 + 1, i0);
  const auto [r11, c11] = resolve_erp_index(g, j0 + 1, i0 + 1);
  const auto col = [&](int r, int c) {
    return fm.data.col(std::int64_t(r) * g.width + c).template cast<double>();
  };
  return (1.0 - fy) * ((1.0 - fx) * col(r00, c00) + fx * col(r01, c01)) +
         fy * ((1.0 - fx) * col(r10, c10) + fx * col(r11, c11));
}

// Warp-consistency confidence of a candidate flow. Descriptors are
// zero-padded up to a multiple of G before grouping (padding preserves
// inner products); a group where both sub-vectors vanish counts as a
// perfect match, a group where exactly one vanishes as no match.
template <class T>
ConfidenceMap<T> groupwise_correlation(const FeatureMap<T>& f1, const FeatureMap<T>& f2,
                                       const FlowField<T>& flow, int groups) {
  if (groups < 1) throw DimensionMismatch("groupwise_correlation: groups must be >= 1");
  if (f1.grid != f2.grid || f1.depth() != f2.depth())
    throw DimensionMismatch("groupwise_correlation: feature maps must share grid and depth");
  if (flow.grid != f1.grid) throw DimensionMismatch("groupwise_correlation: flow grid mismatch");

  const int depth = f1.depth();
  const int padded = ((depth + groups - 1) / groups) * groups;
  const int glen = padded / groups;
  constexpr double kEps = 1e-12;

  ConfidenceMap<T> out;
  out.grid = f1.grid;
  out.groups = groups;
  out.values.resize(groups, f1.pixels());
  const int wf = f1.grid.width, hf = f1.grid.height;

#pragma omp parallel for schedule(static)
  for (int j = 0; j < hf; ++j) {
    for (int i = 0; i < wf; ++i) {
      const std::int64_t q = std::int64_t(j) * wf + i;
      const Vec2d xh = flow_correspondence(flow, i, j);
      const Eigen::VectorXd warped = sample_descriptor(f2, xh.x(), xh.y());
      const Eigen::VectorXd own = f1.data.col(q).template cast<double>();
      for (int g = 0; g < groups; ++g) {
        const int lo = g * glen;
        const int len = std::max(0, std::min(depth - lo, glen));
        if (len == 0) {
          out.values(g, q) = T(1);  // all-padding group: identical zeros
          continue;
        }
        const auto a = own.segment(lo, len);
        const auto b = warped.segment(lo, len);
        const double na = a.norm(), nb = b.norm();
        if (na < kEps && nb < kEps) out.values(g, q) = T(1);
        else if (na < kEps || nb < kEps) out.values(g, q) = T(0);
        else out.values(g, q) = static_cast<T>(a.dot(b) / (na * nb));
      }
    }
  }
  return out;
}

template <class T>
std::pair<ConfidenceMap<T>, ConfidenceMap<T>> confidence_pair(
    const FeatureMap<T>& f1, const FeatureMap<T>& f2, const FlowField<T>& own_flow,
    const FlowField<T>& other_flow_converted, int groups) {
  return {groupwise_correlation(f1, f2, own_flow, groups),
          groupwise_correlation(f1, f2, other_flow_converted, groups)};
}

}  // namespace erpflow
