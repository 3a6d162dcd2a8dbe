#include <doctest.h>

#include <cmath>

#include "erpflow/sphere_geom.hpp"
#include "test_util.hpp"

using namespace erpflow;
using test_util::deg;

namespace {

double pixel_dist_wrap(const Vec2d& a, const Vec2d& b, const ErpGrid& g) {
  return std::hypot(wrap_displacement(a.x() - b.x(), double(g.width)), a.y() - b.y());
}

double wrap_displacement_d(double du, int w) { return wrap_displacement(du, w); }

}  // namespace

TEST_CASE("pixel_to_sph matches the linear map") {
  const ErpGrid g8{8, 4};
  const SphCoordd center = pixel_to_sph<double>(g8, Vec2d(4, 2));
  CHECK(center.theta == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(center.phi == doctest::Approx(0.0).epsilon(1e-12));

  const SphCoordd corner = pixel_to_sph<double>(g8, Vec2d(0, 0));
  CHECK(corner.theta == doctest::Approx(-kPi));
  CHECK(corner.phi == doctest::Approx(kPi / 2));

  const ErpGrid g512{512, 256};
  const SphCoordd s = pixel_to_sph<double>(g512, Vec2d(128, 64));
  CHECK(s.theta == doctest::Approx(-kPi / 2));
  CHECK(s.phi == doctest::Approx(kPi / 4));
}

TEST_CASE("sph_to_pixel inverts pixel_to_sph") {
  const ErpGrid g8{8, 4};
  const Vec2d p = sph_to_pixel<double>(g8, {0.0, 0.0});
  CHECK(p.x() == doctest::Approx(4.0));
  CHECK(p.y() == doctest::Approx(2.0));

  const ErpGrid g512{512, 256};
  const Vec2d q = sph_to_pixel<double>(g512, {kPi / 2, -kPi / 4});
  CHECK(q.x() == doctest::Approx(384.0));
  CHECK(q.y() == doctest::Approx(192.0));

  auto gen = test_util::rng(42);
  for (int k = 0; k < 2000; ++k) {
    const Vec2d x = test_util::random_pixel(gen, g512);
    const Vec2d back = sph_to_pixel(g512, pixel_to_sph<double>(g512, x));
    CHECK(pixel_dist_wrap(x, back, g512) < 1e-9);
  }
}

TEST_CASE("sph_to_cart basis directions") {
  const Vec3d fwd = sph_to_cart<double>({0.0, 0.0});
  CHECK((fwd - Vec3d(1, 0, 0)).norm() < 1e-15);
  const Vec3d up = sph_to_cart<double>({0.0, kPi / 2});
  CHECK((up - Vec3d(0, 0, 1)).norm() < 1e-15);
  const Vec3d left = sph_to_cart<double>({kPi / 2, 0.0});
  CHECK((left - Vec3d(0, 1, 0)).norm() < 1e-15);

  auto gen = test_util::rng(7);
  for (int k = 0; k < 1000; ++k) {
    const SphCoordd s{test_util::uniform(gen, -kPi, kPi),
                      test_util::uniform(gen, -kPi / 2, kPi / 2)};
    CHECK(std::abs(sph_to_cart(s).squaredNorm() - 1.0) < 1e-12);
  }
}

TEST_CASE("cart_to_sph pole convention, wrap, and round trip") {
  const SphCoordd pole = cart_to_sph<double>(Vec3d(0, 0, 1));
  CHECK(pole.theta == 0.0);
  CHECK(pole.phi == doctest::Approx(kPi / 2));

  const SphCoordd back = cart_to_sph<double>(Vec3d(-1, 0, 0));
  CHECK(back.theta == doctest::Approx(-kPi));
  CHECK(back.phi == doctest::Approx(0.0));

  CHECK_THROWS_AS(cart_to_sph<double>(Vec3d(0, 0, 1e-10)), ZeroVector);

  auto gen = test_util::rng(11);
  for (int k = 0; k < 2000; ++k) {
    SphCoordd s{test_util::uniform(gen, -kPi, kPi),
                test_util::uniform(gen, -kPi / 2 + 1e-6, kPi / 2 - 1e-6)};
    const SphCoordd r = cart_to_sph(sph_to_cart(s));
    CHECK(std::abs(wrap_displacement(r.theta - s.theta, 2.0 * kPi)) < 1e-9);
    CHECK(std::abs(r.phi - s.phi) < 1e-9);
  }
}

TEST_CASE("sph_rotate group structure") {
  const ErpGrid g{512, 256};
  auto gen = test_util::rng(3);
  const RotationSpecd full{Axis::X, 2.0 * kPi};
  const RotationSpecd quarter{Axis::X, kPi / 2};

  for (int k = 0; k < 500; ++k) {
    const Vec2d x = test_util::random_pixel(gen, g);
    CHECK(pixel_dist_wrap(sph_rotate(full, x, g), Vec2d(std::fmod(x.x(), 512.0), x.y()), g) <
          1e-9);
    Vec2d y = x;
    for (int i = 0; i < 4; ++i) y = sph_rotate(quarter, y, g);
    CHECK(pixel_dist_wrap(y, x, g) < 1e-8);
  }
}

TEST_CASE("sph_rotate X by 90 degrees sends the polar row to the equator") {
  const ErpGrid g{512, 256};
  const RotationSpecd quarter{Axis::X, kPi / 2};
  // Exactly at the pole the output latitude is exactly zero.
  for (double u : {0.25, 128.0, 400.5}) {
    const Vec2d y = sph_rotate(quarter, Vec2d(u, 0.0), g);
    CHECK(std::abs(pixel_to_sph<double>(g, y).phi) < 1e-12);
  }
  // Pixel centers of row 0 stay within the row's own latitude offset.
  const double delta = kPi * 0.5 / g.height;
  for (int i = 0; i < g.width; i += 17) {
    const Vec2d y = sph_rotate(quarter, Vec2d(i + 0.5, 0.5), g);
    CHECK(std::abs(pixel_to_sph<double>(g, y).phi) <= delta + 1e-12);
  }
}

TEST_CASE("sph_rotate composes additively about one axis") {
  const ErpGrid g{256, 128};
  auto gen = test_util::rng(19);
  for (int k = 0; k < 300; ++k) {
    const double a = test_util::uniform(gen, -kPi, kPi);
    const double b = test_util::uniform(gen, -kPi, kPi);
    const Vec2d x = test_util::random_pixel(gen, g);
    const Vec2d two = sph_rotate(RotationSpecd{Axis::X, a},
                                 sph_rotate(RotationSpecd{Axis::X, b}, x, g), g);
    const Vec2d one = sph_rotate(RotationSpecd{Axis::X, a + b}, x, g);
    CHECK(pixel_dist_wrap(two, one, g) < 1e-8);
  }
}

TEST_CASE("sph_rotate preserves geodesic distance") {
  const ErpGrid g{256, 128};
  auto gen = test_util::rng(23);
  for (int k = 0; k < 1000; ++k) {
    const Vec2d x1 = test_util::random_pixel(gen, g);
    const Vec2d x2 = test_util::random_pixel(gen, g);
    const RotationSpecd rot{Axis::X, test_util::uniform(gen, -kPi, kPi)};
    const auto dir = [&](const Vec2d& p) { return sph_to_cart(pixel_to_sph<double>(g, p)); };
    const double before = std::acos(std::clamp(dir(x1).dot(dir(x2)), -1.0, 1.0));
    const double after = std::acos(
        std::clamp(dir(sph_rotate(rot, x1, g)).dot(dir(sph_rotate(rot, x2, g))), -1.0, 1.0));
    CHECK(std::abs(before - after) < 1e-9);
  }
}

TEST_CASE("bilinear_sample is exact at centers and wraps horizontally") {
  const ErpGrid g{8, 4};
  ErpImage<float> img(g, 1);
  auto gen = test_util::rng(5);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 8; ++i) img.planes[0](j, i) = float(test_util::uniform(gen, 0, 1));

  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 8; ++i)
      CHECK(bilinear_sample(img, Vec2d(i + 0.5, j + 0.5), 0) == img.planes[0](j, i));

  // Sampling past the last column interpolates between columns W-1 and 0.
  const double got = bilinear_sample(img, Vec2d(8.0, 1.5), 0);
  const double expect = 0.5 * (double(img.planes[0](1, 7)) + double(img.planes[0](1, 0)));
  CHECK(got == doctest::Approx(expect).epsilon(1e-6));

  const auto c = ErpImage<float>::constant(g, 1, 0.37f);
  for (double u : {-3.2, 0.0, 4.7, 9.9})
    for (double v : {-1.5, 0.01, 2.0, 5.5})
      CHECK(bilinear_sample(c, Vec2d(u, v), 0) == doctest::Approx(0.37).epsilon(1e-6));
}

TEST_CASE("bilinear_sample reproduces affine images away from boundaries") {
  const ErpGrid g{32, 16};
  ErpImage<float> img(g, 1);
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i)
      img.planes[0](j, i) = float(0.2 + 0.01 * (i + 0.5) + 0.03 * (j + 0.5));
  auto gen = test_util::rng(31);
  for (int k = 0; k < 500; ++k) {
    const double u = test_util::uniform(gen, 1.0, g.width - 1.0);
    const double v = test_util::uniform(gen, 1.0, g.height - 1.0);
    CHECK(double(bilinear_sample(img, Vec2d(u, v), 0)) ==
          doctest::Approx(0.2 + 0.01 * u + 0.03 * v).epsilon(1e-5));
  }
}

TEST_CASE("view transform round trip on a smooth panorama") {
  const ErpGrid g{512, 256};
  const SceneSpec spec = test_util::make_scene(99, g, RotationSpecd{Axis::X, 0.0},
                                               TextureKind::Dots);
  const ErpImage<float> img = render_view<float>(spec, Mat3d::Identity());
  const ErpImage<float> ortho = view_transform_image(img, ViewDirection::PrimToOrtho);
  CHECK(ortho.view == ViewTag::Orthogonal);
  const ErpImage<float> back = view_transform_image(ortho, ViewDirection::OrthoToPrim);
  CHECK(back.view == ViewTag::Primitive);

  // Interior mask: skip pixels whose rotated image sits near the sampling
  // poles of the intermediate view.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> interior(g.height, g.width);
  const Mat3d rot = view_rotation_matrix(ViewDirection::OrthoToPrim);
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i) {
      const Vec2d r = sph_rotate<double>(rot, Vec2d(i + 0.5, j + 0.5), g);
      interior(j, i) = std::abs(pixel_to_sph<double>(g, r).phi) < kPi / 2 - deg(10.0);
    }
  CHECK(test_util::psnr(img, back, &interior) > 40.0);
}

TEST_CASE("view transform maps a constant image to itself") {
  const auto c = ErpImage<float>::constant(ErpGrid{64, 32}, 1, 0.5f);
  const auto t = view_transform_image(c, ViewDirection::PrimToOrtho);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 64; ++i) CHECK(t.planes[0](j, i) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("a north-pole dot lands on the orthogonal equator") {
  const ErpGrid g{128, 64};
  ErpImage<float> img(g, 1);
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i) {
      const Vec3d d = sph_to_cart(pixel_to_sph<double>(g, Vec2d(i + 0.5, j + 0.5)));
      img.planes[0](j, i) = float(std::exp(-(1.0 - d.z()) / 0.005));
    }
  const ErpImage<float> ortho = view_transform_image(img, ViewDirection::PrimToOrtho);

  int bi = -1, bj = -1;
  float best = -1;
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i)
      if (ortho.planes[0](j, i) > best) {
        best = ortho.planes[0](j, i);
        bi = i;
        bj = j;
      }
  // The pole's image under the +90 deg point map is (theta=-pi/2, phi=0).
  const Vec2d expect = sph_to_pixel<double>(g, cart_to_sph<double>(
      RotationSpecd{Axis::X, kPi / 2}.matrix() * Vec3d(0, 0, 1)));
  CHECK(std::abs(wrap_displacement_d(bi + 0.5 - expect.x(), g.width)) <= 1.0);
  CHECK(std::abs(bj + 0.5 - expect.y()) <= 1.0);
}

TEST_CASE("view transform preserves the area-weighted mean of a smooth image") {
  const ErpGrid g{256, 128};
  const SceneSpec spec = test_util::make_scene(17, g, RotationSpecd{Axis::X, 0.0},
                                               TextureKind::Dots);
  const ErpImage<float> img = render_view<float>(spec, Mat3d::Identity());
  const ErpImage<float> ortho = view_transform_image(img, ViewDirection::PrimToOrtho);
  const auto weighted_mean = [&](const ErpImage<float>& im) {
    double num = 0, den = 0;
    for (int j = 0; j < g.height; ++j) {
      const double w = std::cos(kPi / 2 - kPi * (j + 0.5) / g.height);
      for (int i = 0; i < g.width; ++i) {
        num += w * double(im.planes[0](j, i));
        den += w;
      }
    }
    return num / den;
  };
  const double a = weighted_mean(img), b = weighted_mean(ortho);
  CHECK(std::abs(a - b) / std::abs(a) < 1e-3);
}

TEST_CASE("distortion_map values and cap") {
  // Odd height puts a row exactly on the equator.
  const ErpImage<float> m5 = distortion_map<float>(ErpGrid{8, 5});
  for (int i = 0; i < 8; ++i) CHECK(m5.planes[0](2, i) == doctest::Approx(1.0));

  // H = 3 puts the outermost row centers at |phi| = 60 deg: 1/cos = 2.
  const ErpImage<float> m3 = distortion_map<float>(ErpGrid{8, 3});
  for (int i = 0; i < 8; ++i) {
    CHECK(m3.planes[0](0, i) == doctest::Approx(2.0));
    CHECK(m3.planes[0](2, i) == doctest::Approx(2.0));
  }

  // Monotone increasing with |phi|.
  const ErpImage<float> m = distortion_map<float>(ErpGrid{16, 64});
  for (int j = 0; j < 31; ++j) CHECK(m.planes[0](j, 0) > m.planes[0](j + 1, 0));
}

TEST_CASE("orthogonal-view distortion map equals the rotated primitive map") {
  const ErpGrid g{128, 64};
  const ErpImage<float> prim = distortion_map<float>(g);
  const ErpImage<float> transformed = view_transform_image(prim, ViewDirection::PrimToOrtho);

  // Independent construction: sample the primitive map through sph_rotate.
  const Mat3d rot = view_rotation_matrix(ViewDirection::PrimToOrtho);
  double max_diff = 0.0;
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i) {
      const Vec2d src = sph_rotate<double>(rot, Vec2d(i + 0.5, j + 0.5), g);
      const double direct = bilinear_sample(prim, src, 0);
      max_diff = std::max(max_diff, std::abs(direct - double(transformed.planes[0](j, i))));
    }
  CHECK(max_diff < 1e-6);

  // The transformed map peaks on the meridian through the former poles
  // (theta = +-pi/2 -> columns W/4 and 3W/4), along the equator row.
  int bi = -1, bj = -1;
  float best = -1;
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i)
      if (transformed.planes[0](j, i) > best) {
        best = transformed.planes[0](j, i);
        bi = i;
        bj = j;
      }
  const bool on_meridian = std::abs(bi + 0.5 - g.width / 4.0) <= 1.0 ||
                           std::abs(bi + 0.5 - 3.0 * g.width / 4.0) <= 1.0;
  CHECK(on_meridian);
  CHECK(std::abs(bj + 0.5 - g.height / 2.0) <= 1.0);
}
