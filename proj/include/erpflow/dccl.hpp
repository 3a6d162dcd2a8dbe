#pragma once

// Dual-Cost Collaborative Lookup: joint retrieval from the own-view and
// other-view correlation pyramids. The own-view lookup grid is mapped
// point-wise through the 90 degree sphere rotation into the other view, so
// each sampled cost vector lands directly in own-view layout and no second
// resampling pass is needed. Because the rotated query position is
// sub-pixel, the other volume is interpolated over its query dimension as
// well (the volume is linear in the frame-1 descriptor, so this is the
// exact correlation of the interpolated descriptor).

#include <Eigen/Dense>

#include "erpflow/cost_volume.hpp"

namespace erpflow {

template <class T>
struct DualCorrelation {
  CorrelationPatch<T> own;    // same-view correlation cues
  CorrelationPatch<T> cross;  // other-view cues, already in own layout
};

template <class T>
DualCorrelation<T> dccl(const CostPyramid<T>& own_pyr, const CostPyramid<T>& other_pyr,
                        const FlowField<T>& flow, int radius,
                        LookupGrid shape = LookupGrid::Square) {
  if (flow.view != own_pyr.view)
    throw ViewMismatch("dccl: flow view does not match the own pyramid");
  if (other_pyr.view == own_pyr.view)
    throw ViewMismatch("dccl: the two pyramids must come from opposite views");
  if (flow.grid != own_pyr.query_grid || own_pyr.query_grid != other_pyr.query_grid)
    throw DimensionMismatch("dccl: grids do not match");

  DualCorrelation<T> out;
  out.own = lookup(own_pyr, flow, radius, shape);

  // Own-view points map into the other view by +90 deg about x when this is
  // the primitive branch, and by the inverse when it is the orthogonal one.
  const double angle = (own_pyr.view == ViewTag::Primitive) ? kPi / 2 : -kPi / 2;
  const Mat3d rot = RotationSpecd{Axis::X, angle}.matrix();

  auto& cross = out.cross;
  cross.grid = own_pyr.query_grid;
  cross.radius = radius;
  cross.shape = shape;
  cross.offsets = lookup_offsets(radius, shape);
  const int npts = cross.points_per_level();
  cross.values.resize(4 * npts, own_pyr.query_grid.pixel_count());
  const ErpGrid fg = own_pyr.query_grid;
  const bool calibrated = other_pyr.calibrated();

#pragma omp parallel for schedule(static)
  for (int j = 0; j < fg.height; ++j) {
    for (int i = 0; i < fg.width; ++i) {
      const std::int64_t q = std::int64_t(j) * fg.width + i;

      // Frame-1 query position in the other view, with bilinear weights
      // over the four neighboring query columns.
      const Vec2d yq = sph_rotate<double>(rot, Vec2d(i + 0.5, j + 0.5), fg);
      const double qx = yq.x() - 0.5, qy = yq.y() - 0.5;
      const int qi0 = static_cast<int>(std::floor(qx));
      const int qj0 = static_cast<int>(std::floor(qy));
      const double fx = qx - qi0, fy = qy - qj0;
      std::int64_t qcols[4];
      double qw[4];
      {
        const auto [r00, c00] = resolve_erp_index(fg, qj0, qi0);
        const auto [r01, c01] = resolve_erp_index(fg, qj0, qi0 + 1);
        const auto [r10, c10] = resolve_erp_index(fg, qj0 + 1, qi0);
        const auto [r11, c11] = resolve_erp_index(fg, qj0 + 1, qi0 + 1);
        qcols[0] = std::int64_t(r00) * fg.width + c00;
        qcols[1] = std::int64_t(r01) * fg.width + c01;
        qcols[2] = std::int64_t(r10) * fg.width + c10;
        qcols[3] = std::int64_t(r11) * fg.width + c11;
        qw[0] = (1.0 - fy) * (1.0 - fx);
        qw[1] = (1.0 - fy) * fx;
        qw[2] = fy * (1.0 - fx);
        qw[3] = fy * fx;
      }

      double qnorm = 1.0;
      if (calibrated) {
        Eigen::VectorXd qdesc = Eigen::VectorXd::Zero(other_pyr.query_features.rows());
        for (int n = 0; n < 4; ++n)
          qdesc += qw[n] * other_pyr.query_features.col(qcols[n]).template cast<double>();
        qnorm = qdesc.norm();
      }

      const Vec2d xh = flow_correspondence(flow, i, j);
      for (int g = 0; g < npts; ++g) {
        for (int lvl = 0; lvl < 4; ++lvl) {
          // Mirror the own-view path's per-level reach: the grid offset is
          // applied in level units before the rotation.
          const double step = double(1 << lvl);
          const Vec2d own_pt(xh.x() + step * cross.offsets[g].x(),
                             xh.y() + step * cross.offsets[g].y());
          const Vec2d other_pt =
              sph_rotate<double>(rot, Vec2d(own_pt.x() + 0.5, own_pt.y() + 0.5), fg);
          const double ox = (other_pt.x() - 0.5) / step, oy = (other_pt.y() - 0.5) / step;
          const auto& level = other_pyr.levels[lvl];
          double acc = 0.0;
          for (int n = 0; n < 4; ++n)
            acc += qw[n] *
                   double(sample_level_column<T>(level.cells.col(qcols[n]), level.grid, ox, oy));
          if (calibrated) {
            acc = calibrated_value(
                acc, qnorm, interp_descriptor_norm(level.target_features, level.grid, ox, oy));
          }
          cross.values(std::int64_t(lvl) * npts + g, q) = static_cast<T>(acc);
        }
      }
    }
  }
  return out;
}

}  // namespace erpflow
