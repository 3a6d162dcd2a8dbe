#pragma once

// Synthetic panoramic scenes with analytic ground truth. Textures are
// functions on the sphere evaluated per pixel (no source raster), so a
// rotated camera renders exactly the same scene and both views stay
// alias-consistent.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

#include "erpflow/flow_field.hpp"
#include "erpflow/sphere_geom.hpp"

namespace erpflow {

enum class TextureKind { MultiscaleNoise, Checker, Dots };

struct SceneSpec {
  std::uint64_t seed = 0;
  TextureKind texture = TextureKind::MultiscaleNoise;
  ErpGrid grid;
  RotationSpecd camera;  // frame-2 camera rotation relative to frame 1
};

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double unit_double(std::uint64_t h) {
  return double(h >> 11) * 0x1.0p-53;  // [0, 1)
}

inline std::uint64_t hash_coords(std::uint64_t seed, std::int64_t x, std::int64_t y,
                                 std::int64_t z) {
  std::uint64_t h = splitmix64(seed ^ 0x5bf03635d36bbdf1ULL);
  h = splitmix64(h ^ std::uint64_t(x));
  h = splitmix64(h ^ std::uint64_t(y));
  h = splitmix64(h ^ std::uint64_t(z));
  return h;
}

// Deterministic stream of doubles/gaussians from a seed and an index.
inline double stream_double(std::uint64_t seed, std::uint64_t idx) {
  return unit_double(splitmix64(splitmix64(seed) ^ idx));
}

inline double stream_gaussian(std::uint64_t seed, std::uint64_t idx) {
  // Box-Muller on two stream draws; idx advances by 2.
  const double u1 = std::max(stream_double(seed, 2 * idx), 1e-300);
  const double u2 = stream_double(seed, 2 * idx + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace rng

namespace texture {

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Trilinear value noise on the integer lattice of R^3, in [0, 1].
inline double value_noise(std::uint64_t seed, const Vec3d& p) {
  const std::int64_t x0 = static_cast<std::int64_t>(std::floor(p.x()));
  const std::int64_t y0 = static_cast<std::int64_t>(std::floor(p.y()));
  const std::int64_t z0 = static_cast<std::int64_t>(std::floor(p.z()));
  const double fx = smoothstep(p.x() - double(x0));
  const double fy = smoothstep(p.y() - double(y0));
  const double fz = smoothstep(p.z() - double(z0));
  double c[2][2][2];
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx)
        c[dz][dy][dx] = rng::unit_double(rng::hash_coords(seed, x0 + dx, y0 + dy, z0 + dz));
  const double i00 = c[0][0][0] + (c[0][0][1] - c[0][0][0]) * fx;
  const double i01 = c[0][1][0] + (c[0][1][1] - c[0][1][0]) * fx;
  const double i10 = c[1][0][0] + (c[1][0][1] - c[1][0][0]) * fx;
  const double i11 = c[1][1][0] + (c[1][1][1] - c[1][1][0]) * fx;
  const double i0 = i00 + (i01 - i00) * fy;
  const double i1 = i10 + (i11 - i10) * fy;
  return i0 + (i1 - i0) * fz;
}

// 4 octaves, persistence 0.5, on the unit sphere direction. The base
// frequency follows the raster so the finest octave stays resolvable at
// feature resolution (about six feature pixels per period at s = 4).
inline double multiscale_noise(std::uint64_t seed, const Vec3d& dir, const ErpGrid& grid) {
  double value = 0.0, amp = 1.0, norm = 0.0;
  double freq = std::max(0.4, grid.width / 600.0);
  for (int octave = 0; octave < 4; ++octave) {
    value += amp * value_noise(seed + octave * 0x9e37ULL, dir * freq + Vec3d(17.0, 29.0, 43.0));
    norm += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  return value / norm;
}

inline double checker(std::uint64_t seed, const Vec3d& dir) {
  const double k = 2.5 + 0.5 * rng::stream_double(seed, 7);
  const auto cell = [&](double t) {
    return static_cast<std::int64_t>(std::floor((t + 4.0) * k));
  };
  const bool on = ((cell(dir.x()) + cell(dir.y()) + cell(dir.z())) & 1) != 0;
  return on ? 0.85 : 0.15;
}

// Sum of smooth angular bumps at seeded directions; bandlimited by the
// minimum bump width.
inline double dots(std::uint64_t seed, const Vec3d& dir) {
  constexpr int kDots = 160;
  double acc = 0.0;
  for (int i = 0; i < kDots; ++i) {
    const double z = 2.0 * rng::stream_double(seed, 4 * i) - 1.0;
    const double az = 2.0 * kPi * rng::stream_double(seed, 4 * i + 1);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3d center(r * std::cos(az), r * std::sin(az), z);
    const double sigma = 0.15 + 0.20 * rng::stream_double(seed, 4 * i + 2);
    const double amp = (rng::stream_double(seed, 4 * i + 3) < 0.5) ? -0.6 : 0.6;
    acc += amp * std::exp(-(1.0 - dir.dot(center)) / (0.5 * sigma * sigma));
  }
  return 0.5 + 0.35 * std::tanh(acc);
}

inline double sample(const SceneSpec& spec, const Vec3d& dir) {
  switch (spec.texture) {
    case TextureKind::MultiscaleNoise: return multiscale_noise(spec.seed, dir, spec.grid);
    case TextureKind::Checker: return checker(spec.seed, dir);
    case TextureKind::Dots: return dots(spec.seed, dir);
  }
  return 0.0;
}

}  // namespace texture

// Renders the scene texture through a view rotation: out(x) = tex(R * P(x)).
template <class T = float>
ErpImage<T> render_view(const SceneSpec& spec, const Mat3d& view_rotation,
                        ViewTag tag = ViewTag::Primitive) {
  ErpImage<T> img(spec.grid, 1, tag);
  const int h = spec.grid.height, w = spec.grid.width;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const Vec3d dir = sph_to_cart(pixel_to_sph<double>(spec.grid, Vec2d(i + 0.5, j + 0.5)));
      img.planes[0](j, i) = static_cast<T>(texture::sample(spec, view_rotation * dir));
    }
  }
  return img;
}

template <class T = float>
struct ScenePair {
  ErpImage<T> frame1, frame2;
  FlowField<T> gt;
};

// Frame 1 renders the texture directly; frame 2 renders it through the
// inverse camera rotation, so frame1(x) == frame2(x + gt(x)) by construction.
template <class T = float>
ScenePair<T> generate_pair(const SceneSpec& spec) {
  ScenePair<T> pair;
  pair.frame1 = render_view<T>(spec, Mat3d::Identity());
  pair.frame2 = render_view<T>(spec, spec.camera.inverse().matrix());
  pair.gt = analytic_rotation_flow<T>(spec.grid, spec.camera);
  return pair;
}

// Additive seeded Gaussian noise restricted to |phi| > latitude_threshold.
template <class T>
ErpImage<T> inject_polar_noise(const ErpImage<T>& img, double latitude_threshold, double sigma,
                               std::uint64_t seed) {
  ErpImage<T> out = img;
  if (sigma <= 0.0) return out;
  const ErpGrid g = img.grid;
  for (int j = 0; j < g.height; ++j) {
    const double phi = kPi / 2 - kPi * (j + 0.5) / g.height;
    if (std::abs(phi) <= latitude_threshold) continue;
    for (int i = 0; i < g.width; ++i) {
      const std::uint64_t idx = (std::uint64_t(j) * g.width + i) * std::uint64_t(img.channels());
      for (int c = 0; c < img.channels(); ++c)
        out.planes[c](j, i) += static_cast<T>(sigma * rng::stream_gaussian(seed, idx + c));
    }
  }
  return out;
}

}  // namespace erpflow
