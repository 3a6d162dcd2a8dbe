#pragma once

// Training-free feature descriptors, the all-pairs correlation volume, its
// 4-level average-pooled pyramid, and wrap-aware bilinear lookup of
// correlation values around a flow-displaced query point.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

#include "erpflow/flow_field.hpp"
#include "erpflow/sphere_geom.hpp"

namespace erpflow {

template <class T>
using DynMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// Dense per-pixel descriptors at feature resolution. Column p holds the
// descriptor of feature pixel (col = p % W, row = p / W).
template <class T>
struct FeatureMap {
  ErpGrid grid;        // feature-resolution geometry (W/s x H/s)
  int downsample = 1;  // s
  DynMatrix<T> data;   // depth x (H*W)

  int depth() const { return static_cast<int>(data.rows()); }
  std::int64_t pixels() const { return data.cols(); }
};

// Descriptor: the 5x5 grayscale neighborhood sampled at feature-pixel
// spacing (s image pixels apart, wrap/pole-reflect boundaries), mean-removed
// and L2-normalized. Constant patches normalize to the zero vector.
template <class T>
FeatureMap<T> extract_features(const ErpImage<T>& img, int s) {
  if (s < 1 || img.grid.width % s != 0 || img.grid.height % s != 0)
    throw DimensionMismatch("extract_features: downsample factor must divide the grid");
  FeatureMap<T> fm;
  fm.grid = ErpGrid{img.grid.width / s, img.grid.height / s};
  fm.downsample = s;
  const int wf = fm.grid.width, hf = fm.grid.height;
  constexpr int kHalf = 2;  // 5x5 patch
  constexpr int kD = 25;
  fm.data.resize(kD, std::int64_t(wf) * hf);

  // Grayscale plane once; multi-channel images average their channels.
  ImagePlane<T> gray;
  if (img.channels() == 1) {
    gray = img.planes[0];
  } else {
    gray = ImagePlane<T>::Zero(img.grid.height, img.grid.width);
    for (const auto& p : img.planes) gray += p;
    gray /= static_cast<T>(img.channels());
  }

#pragma omp parallel for schedule(static)
  for (int j = 0; j < hf; ++j) {
    Eigen::Matrix<double, kD, 1> patch;
    for (int i = 0; i < wf; ++i) {
      int k = 0;
      for (int dy = -kHalf; dy <= kHalf; ++dy) {
        for (int dx = -kHalf; dx <= kHalf; ++dx) {
          // Sample points are image pixel centers when s is an integer.
          const auto [r, c] =
              resolve_erp_index(img.grid, j * s + s / 2 + dy * s, i * s + s / 2 + dx * s);
          patch[k++] = double(gray(r, c));
        }
      }
      patch.array() -= patch.mean();
      const double norm = patch.norm();
      if (norm > 1e-12) patch /= norm;
      else patch.setZero();
      fm.data.col(std::int64_t(j) * wf + i) = patch.cast<T>();
    }
  }
  return fm;
}

// All-pairs dot products between the two feature maps: entry (t, q) is the
// correlation of query pixel q in f1 against target pixel t in f2.
template <class T>
DynMatrix<T> all_pairs_correlation(const FeatureMap<T>& f1, const FeatureMap<T>& f2) {
  if (f1.grid != f2.grid || f1.depth() != f2.depth())
    throw DimensionMismatch("all_pairs_correlation: feature maps must share grid and depth");
  return f2.data.transpose() * f1.data;
}

// 4-level correlation pyramid: level k pools the target raster of the
// all-pairs volume by 2^k. Each level keeps one column per query pixel
// holding that query's pooled target raster row-major.
//
// When built from feature maps, the pyramid also carries the query
// descriptor stack and the block-mean pooled target descriptor stack per
// level. An interpolated read of the volume equals the dot product of the
// correspondingly interpolated descriptors, so these stacks let the lookup
// return calibrated cosines instead of attenuated raw dots.
template <class T>
struct CostPyramid {
  struct Level {
    ErpGrid grid;                  // pooled target raster
    DynMatrix<T> cells;            // (grid.H * grid.W) x Nq
    DynMatrix<T> target_features;  // D x (grid.H * grid.W); empty if not carried
  };

  ErpGrid query_grid;
  ViewTag view = ViewTag::Primitive;
  DynMatrix<T> query_features;  // D x Nq; empty if not carried
  std::array<Level, 4> levels;

  bool calibrated() const { return query_features.size() > 0; }
};

// Builds every level directly as block means over the unpooled volume
// (equivalent to repeated 2x2 average pooling; accumulation in double with a
// fixed order keeps the block-mean contract exact). Out-of-range block cells
// wrap horizontally and pole-reflect vertically.
template <class T>
CostPyramid<T> build_pyramid(const DynMatrix<T>& level1, const ErpGrid& query_grid,
                             const ErpGrid& target_grid, ViewTag view = ViewTag::Primitive) {
  if (level1.rows() != target_grid.pixel_count() || level1.cols() != query_grid.pixel_count())
    throw DimensionMismatch("build_pyramid: volume shape does not match the grids");
  CostPyramid<T> pyr;
  pyr.query_grid = query_grid;
  pyr.view = view;
  pyr.levels[0].grid = target_grid;
  pyr.levels[0].cells = level1;
  const std::int64_t nq = query_grid.pixel_count();

  for (int lvl = 1; lvl < 4; ++lvl) {
    const int block = 1 << lvl;
    const ErpGrid lg{std::max(1, target_grid.width / block),
                     std::max(1, target_grid.height / block)};
    auto& out = pyr.levels[lvl];
    out.grid = lg;
    out.cells.resize(lg.pixel_count(), nq);
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < nq; ++q) {
      const auto col = level1.col(q);
      for (int k = 0; k < lg.height; ++k) {
        for (int l = 0; l < lg.width; ++l) {
          double acc = 0.0;
          for (int dy = 0; dy < block; ++dy) {
            for (int dx = 0; dx < block; ++dx) {
              const auto [r, c] = resolve_erp_index(target_grid, k * block + dy, l * block + dx);
              acc += double(col[std::int64_t(r) * target_grid.width + c]);
            }
          }
          out.cells(std::int64_t(k) * lg.width + l, q) =
              static_cast<T>(acc / (double(block) * block));
        }
      }
    }
  }
  return pyr;
}

template <class T>
CostPyramid<T> build_cost_pyramid(const FeatureMap<T>& f1, const FeatureMap<T>& f2,
                                  ViewTag view = ViewTag::Primitive) {
  CostPyramid<T> pyr = build_pyramid(all_pairs_correlation(f1, f2), f1.grid, f2.grid, view);
  pyr.query_features = f1.data;
  pyr.levels[0].target_features = f2.data;
  for (int lvl = 1; lvl < 4; ++lvl) {
    const int block = 1 << lvl;
    const ErpGrid lg = pyr.levels[lvl].grid;
    auto& stack = pyr.levels[lvl].target_features;
    stack.resize(f2.depth(), lg.pixel_count());
    for (int k = 0; k < lg.height; ++k) {
      for (int l = 0; l < lg.width; ++l) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(f2.depth());
        for (int dy = 0; dy < block; ++dy)
          for (int dx = 0; dx < block; ++dx) {
            const auto [r, c] = resolve_erp_index(f2.grid, k * block + dy, l * block + dx);
            acc += f2.data.col(std::int64_t(r) * f2.grid.width + c).template cast<double>();
          }
        stack.col(std::int64_t(k) * lg.width + l) =
            (acc / (double(block) * block)).template cast<T>();
      }
    }
  }
  return pyr;
}

enum class LookupGrid { Square, L1Ball };

inline std::vector<Eigen::Vector2i> lookup_offsets(int radius, LookupGrid shape) {
  std::vector<Eigen::Vector2i> offs;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (shape == LookupGrid::Square || std::abs(dx) + std::abs(dy) <= radius)
        offs.emplace_back(dx, dy);
  return offs;
}

// Per-pixel stack of sampled correlation values over the lookup grid,
// concatenated level-major across the 4 pyramid levels.
template <class T>
struct CorrelationPatch {
  ErpGrid grid;  // query grid
  int radius = 0;
  LookupGrid shape = LookupGrid::Square;
  std::vector<Eigen::Vector2i> offsets;  // grid points per level
  DynMatrix<T> values;                   // (4 * offsets.size()) x Nq

  int points_per_level() const { return static_cast<int>(offsets.size()); }
  auto level_block(int lvl) const {
    return values.middleRows(std::int64_t(lvl) * points_per_level(), points_per_level());
  }
};

// Bilinear sample of one pyramid-level raster held in a matrix column.
template <class T, class Col>
T sample_level_column(const Col& col, const ErpGrid& g, double x, double y) {
  const int i0 = static_cast<int>(std::floor(x));
  const int j0 = static_cast<int>(std::floor(y));
  const double fx = x - i0;
  const double fy = y - j0;
  const auto [r00, c00] = resolve_erp_index(g, j0, i0);
  const auto [r01, c01] = resolve_erp_index(g, j0, i0 + 1);
  const auto [r10, c10] = resolve_erp_index(g, j0 + 1, i0);
  const auto [r11, c11] = resolve_erp_index(g, j0 + 1, i0 + 1);
  const auto at = [&](int r, int c) { return double(col[std::int64_t(r) * g.width + c]); };
  const double top = (1.0 - fx) * at(r00, c00) + fx * at(r01, c01);
  const double bot = (1.0 - fx) * at(r10, c10) + fx * at(r11, c11);
  return static_cast<T>((1.0 - fy) * top + fy * bot);
}

// Norm of the bilinearly interpolated descriptor stack at index coordinates.
// Shares the tap layout of sample_level_column, so a calibrated lookup
// divides each sampled dot product by exactly the norms of the descriptors
// it implicitly interpolated.
template <class T>
double interp_descriptor_norm(const DynMatrix<T>& stack, const ErpGrid& g, double x, double y) {
  const int i0 = static_cast<int>(std::floor(x));
  const int j0 = static_cast<int>(std::floor(y));
  const double fx = x - i0;
  const double fy = y - j0;
  const auto [r00, c00] = resolve_erp_index(g, j0, i0);
  const auto [r01, c01] = resolve_erp_index(g, j0, i0 + 1);
  const auto [r10, c10] = resolve_erp_index(g, j0 + 1, i0);
  const auto [r11, c11] = resolve_erp_index(g, j0 + 1, i0 + 1);
  const auto col = [&](int r, int c) {
    return stack.col(std::int64_t(r) * g.width + c).template cast<double>();
  };
  const Eigen::VectorXd d = (1.0 - fy) * ((1.0 - fx) * col(r00, c00) + fx * col(r01, c01)) +
                            fy * ((1.0 - fx) * col(r10, c10) + fx * col(r11, c11));
  return d.norm();
}

inline double calibrated_value(double raw, double qnorm, double tnorm) {
  const double denom = qnorm * tnorm;
  if (denom < 1e-6) return 0.0;
  return std::clamp(raw / denom, -1.0, 1.0);
}

// Correspondence point of query pixel (i, j) under the current flow, with
// the horizontal modulo applied at feature width (index space).
template <class T>
inline Vec2d flow_correspondence(const FlowField<T>& flow, int i, int j) {
  double x = i + double(flow.u(j, i));
  const int w = flow.grid.width;
  x = std::fmod(x, double(w));
  if (x < 0) x += w;
  return {x, j + double(flow.v(j, i))};
}

// Retrieves the correlation patch around each query pixel's correspondence:
// per level the centroid coordinate is divided by 2^level and the grid
// offsets are applied in that level's index space. Calibrated pyramids
// return the cosine of the interpolated descriptors.
template <class T>
CorrelationPatch<T> lookup(const CostPyramid<T>& pyr, const FlowField<T>& flow, int radius,
                           LookupGrid shape = LookupGrid::Square) {
  if (flow.grid != pyr.query_grid) throw DimensionMismatch("lookup: flow grid != query grid");
  CorrelationPatch<T> patch;
  patch.grid = pyr.query_grid;
  patch.radius = radius;
  patch.shape = shape;
  patch.offsets = lookup_offsets(radius, shape);
  const int npts = patch.points_per_level();
  const std::int64_t nq = pyr.query_grid.pixel_count();
  patch.values.resize(4 * npts, nq);
  const int wf = pyr.query_grid.width, hf = pyr.query_grid.height;
  const bool calibrated = pyr.calibrated();

#pragma omp parallel for schedule(static)
  for (int j = 0; j < hf; ++j) {
    for (int i = 0; i < wf; ++i) {
      const std::int64_t q = std::int64_t(j) * wf + i;
      const double qnorm = calibrated ? double(pyr.query_features.col(q).norm()) : 1.0;
      const Vec2d xh = flow_correspondence(flow, i, j);
      for (int lvl = 0; lvl < 4; ++lvl) {
        const double scale = 1.0 / double(1 << lvl);
        const auto& level = pyr.levels[lvl];
        const auto col = level.cells.col(q);
        for (int g = 0; g < npts; ++g) {
          const double x = xh.x() * scale + patch.offsets[g].x();
          const double y = xh.y() * scale + patch.offsets[g].y();
          double value = sample_level_column<T>(col, level.grid, x, y);
          if (calibrated) {
            value = calibrated_value(
                value, qnorm, interp_descriptor_norm(level.target_features, level.grid, x, y));
          }
          patch.values(std::int64_t(lvl) * npts + g, q) = static_cast<T>(value);
        }
      }
    }
  }
  return patch;
}

}  // namespace erpflow
