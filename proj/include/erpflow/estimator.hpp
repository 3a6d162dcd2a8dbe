#pragma once

// Non-learned dual-branch iterative flow estimator. Each branch refines its
// flow by a soft-argmax over the level-1 block of the summed own + cross
// correlation patches; the primitive branch then absorbs the orthogonal
// branch's converted flow through confidence-weighted convex fusion.

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "erpflow/confidence.hpp"
#include "erpflow/cost_volume.hpp"
#include "erpflow/dccl.hpp"
#include "erpflow/flow_field.hpp"

namespace erpflow {

struct EstimatorConfig {
  int iterations = 12;
  int radius = 4;
  double temperature = 0.1;       // soft-argmax sharpness; smaller = closer to argmax
  double fusion_sharpness = 10.0; // beta; 0 averages the branches
  int groups = 8;
  int downsample = 4;
  bool dual = true;               // false: primitive branch only, no fusion
  bool symmetric_fusion = false;  // also fuse the converted primitive flow into the orthogonal branch
  LookupGrid grid_shape = LookupGrid::Square;
};

// Soft-argmax displacement over the level-1 lookup grid:
// delta = sum_g softmax(values_g / tau) * offset_g, so |delta| <= r * sqrt(2).
template <class T>
FlowField<T> soft_argmax_update(const CorrelationPatch<T>& patch, double tau) {
  FlowField<T> delta = FlowField<T>::zero(patch.grid);
  const int npts = patch.points_per_level();
  const auto level1 = patch.level_block(0);
  const int wf = patch.grid.width, hf = patch.grid.height;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < hf; ++j) {
    for (int i = 0; i < wf; ++i) {
      const std::int64_t q = std::int64_t(j) * wf + i;
      double vmax = -1e300;
      for (int g = 0; g < npts; ++g) vmax = std::max(vmax, double(level1(g, q)));
      double wsum = 0.0, du = 0.0, dv = 0.0;
      for (int g = 0; g < npts; ++g) {
        const double w = std::exp((double(level1(g, q)) - vmax) / tau);
        wsum += w;
        du += w * patch.offsets[g].x();
        dv += w * patch.offsets[g].y();
      }
      delta.u(j, i) = static_cast<T>(du / wsum);
      delta.v(j, i) = static_cast<T>(dv / wsum);
    }
  }
  return delta;
}

// Confidence-weighted convex combination of two flow candidates in the same
// view: w = softmax(beta * mean group correlation) per pixel.
template <class T>
FlowField<T> fuse_branches(const FlowField<T>& own, const FlowField<T>& other,
                           const ConfidenceMap<T>& conf_own, const ConfidenceMap<T>& conf_other,
                           double beta) {
  if (own.grid != other.grid || own.grid != conf_own.grid || own.grid != conf_other.grid)
    throw DimensionMismatch("fuse_branches: grids do not match");
  FlowField<T> out = FlowField<T>::zero(own.grid, own.view);
  const int wf = own.grid.width, hf = own.grid.height;
  for (int j = 0; j < hf; ++j) {
    for (int i = 0; i < wf; ++i) {
      const std::int64_t q = std::int64_t(j) * wf + i;
      const double a = beta * double(conf_own.values.col(q).mean());
      const double b = beta * double(conf_other.values.col(q).mean());
      const double m = std::max(a, b);
      const double ea = std::exp(a - m), eb = std::exp(b - m);
      const double w_own = ea / (ea + eb);
      out.u(j, i) = static_cast<T>(w_own * double(own.u(j, i)) + (1.0 - w_own) * double(other.u(j, i)));
      out.v(j, i) = static_cast<T>(w_own * double(own.v(j, i)) + (1.0 - w_own) * double(other.v(j, i)));
    }
  }
  return out;
}

template <class T>
struct EstimateResult {
  FlowField<T> primitive;                     // image resolution
  std::optional<FlowField<T>> orthogonal;     // image resolution; absent in primitive-only mode
  std::vector<FlowField<T>> primitive_trace;  // image resolution, one per iteration
  std::vector<FlowField<T>> orthogonal_trace;
};

// Full pipeline: build both views, descriptors and pyramids, then run the
// iterative dual-branch refinement from zero flow.
template <class T>
EstimateResult<T> estimate(const ErpImage<T>& frame1, const ErpImage<T>& frame2,
                           const EstimatorConfig& cfg) {
  if (frame1.grid != frame2.grid) throw DimensionMismatch("estimate: frame grids differ");
  if (cfg.iterations < 1) throw std::invalid_argument("estimate: iterations must be >= 1");
  const int s = cfg.downsample;

  const FeatureMap<T> fp1 = extract_features(frame1, s);
  const FeatureMap<T> fp2 = extract_features(frame2, s);
  const CostPyramid<T> cp = build_cost_pyramid(fp1, fp2, ViewTag::Primitive);

  FeatureMap<T> fo1, fo2;
  CostPyramid<T> co;
  if (cfg.dual) {
    const ErpImage<T> o1 = view_transform_image(frame1, ViewDirection::PrimToOrtho);
    const ErpImage<T> o2 = view_transform_image(frame2, ViewDirection::PrimToOrtho);
    fo1 = extract_features(o1, s);
    fo2 = extract_features(o2, s);
    co = build_cost_pyramid(fo1, fo2, ViewTag::Orthogonal);
  }

  FlowField<T> flow_p = FlowField<T>::zero(fp1.grid, ViewTag::Primitive);
  FlowField<T> flow_o = FlowField<T>::zero(fp1.grid, ViewTag::Orthogonal);

  EstimateResult<T> result;
  for (int it = 0; it < cfg.iterations; ++it) {
    if (cfg.dual) {
      const DualCorrelation<T> dp = dccl(cp, co, flow_p, cfg.radius, cfg.grid_shape);
      CorrelationPatch<T> patch_p = dp.own;
      patch_p.values += dp.cross.values;  // pre-fusion of the two cue sets
      const FlowField<T> delta_p = soft_argmax_update(patch_p, cfg.temperature);
      flow_p.u += delta_p.u;
      flow_p.v += delta_p.v;
      flow_p.canonicalize();

      const DualCorrelation<T> dorth = dccl(co, cp, flow_o, cfg.radius, cfg.grid_shape);
      CorrelationPatch<T> patch_o = dorth.own;
      patch_o.values += dorth.cross.values;
      const FlowField<T> delta_o = soft_argmax_update(patch_o, cfg.temperature);
      flow_o.u += delta_o.u;
      flow_o.v += delta_o.v;
      flow_o.canonicalize();

      const FlowField<T> o2p = flow_view_transform(flow_o, ViewDirection::OrthoToPrim);
      const auto [conf_p, conf_o2p] = confidence_pair(fp1, fp2, flow_p, o2p, cfg.groups);
      const FlowField<T> fused_p =
          fuse_branches(flow_p, o2p, conf_p, conf_o2p, cfg.fusion_sharpness);

      if (cfg.symmetric_fusion) {
        const FlowField<T> p2o = flow_view_transform(flow_p, ViewDirection::PrimToOrtho);
        const auto [conf_o, conf_p2o] = confidence_pair(fo1, fo2, flow_o, p2o, cfg.groups);
        flow_o = fuse_branches(flow_o, p2o, conf_o, conf_p2o, cfg.fusion_sharpness);
      }
      flow_p = fused_p;
    } else {
      const CorrelationPatch<T> patch_p = lookup(cp, flow_p, cfg.radius, cfg.grid_shape);
      const FlowField<T> delta_p = soft_argmax_update(patch_p, cfg.temperature);
      flow_p.u += delta_p.u;
      flow_p.v += delta_p.v;
      flow_p.canonicalize();
    }

    result.primitive_trace.push_back(upsample_flow(flow_p, s, frame1.grid));
    if (cfg.dual) result.orthogonal_trace.push_back(upsample_flow(flow_o, s, frame1.grid));
  }

  result.primitive = result.primitive_trace.back();
  if (cfg.dual) result.orthogonal = result.orthogonal_trace.back();
  return result;
}

}  // namespace erpflow
