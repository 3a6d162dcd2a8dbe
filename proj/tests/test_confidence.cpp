#include <doctest.h>

#include <cmath>

#include "erpflow/confidence.hpp"
#include "erpflow/datagen.hpp"
#include "test_util.hpp"

using namespace erpflow;
using test_util::deg;

namespace {

struct Fixture {
  ErpGrid grid{256, 128};
  FeatureMap<float> f1, f2;
  FlowField<float> gt;  // feature resolution

  explicit Fixture(std::uint64_t seed, double yaw_pixels) {
    const double yaw = 2.0 * kPi * yaw_pixels / grid.width;
    const SceneSpec spec = test_util::make_scene(seed, grid, {Axis::Z, yaw});
    const ScenePair<float> pair = generate_pair<float>(spec);
    const int s = 4;
    f1 = extract_features(pair.frame1, s);
    f2 = extract_features(pair.frame2, s);
    gt = analytic_rotation_flow<float>(f1.grid, spec.camera);
  }
};

}  // namespace

TEST_CASE("identical frames at zero flow give unit confidence everywhere") {
  const Fixture fx(3, 0.0);
  const auto zero = FlowField<float>::zero(fx.f1.grid);
  const ConfidenceMap<float> conf = groupwise_correlation(fx.f1, fx.f1, zero, 8);
  CHECK(conf.groups == 8);
  CHECK(conf.values.minCoeff() == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("ground-truth flow scores high away from sampling poles") {
  const Fixture fx(7, 8.0);
  const ConfidenceMap<float> conf = groupwise_correlation(fx.f1, fx.f2, fx.gt, 8);
  const RegionMask mask = region_mask(fx.f1.grid);
  double mean = 0;
  std::int64_t n = 0;
  for (int j = 0; j < fx.f1.grid.height; ++j)
    for (int i = 0; i < fx.f1.grid.width; ++i) {
      if (mask.poles(j, i)) continue;
      mean += conf.values.col(Eigen::Index(j) * fx.f1.grid.width + i).mean();
      ++n;
    }
  CHECK(mean / double(n) > 0.95);
}

TEST_CASE("randomly wrong flow scores below the ground truth") {
  const Fixture fx(11, 8.0);
  auto wrong = fx.gt;
  auto gen = test_util::rng(99);
  for (int j = 0; j < wrong.grid.height; ++j)
    for (int i = 0; i < wrong.grid.width; ++i) {
      wrong.u(j, i) += float(test_util::uniform(gen, -8.0, 8.0));
      wrong.v(j, i) += float(test_util::uniform(gen, -8.0, 8.0));
    }
  const ConfidenceMap<float> good = groupwise_correlation(fx.f1, fx.f2, fx.gt, 8);
  const ConfidenceMap<float> bad = groupwise_correlation(fx.f1, fx.f2, wrong, 8);

  // Paired comparison over a fixed pixel subset.
  double mean_good = 0, mean_bad = 0;
  int n = 0;
  for (Eigen::Index q = 0; q < good.values.cols() && n < 100; q += 37, ++n) {
    mean_good += good.values.col(q).mean();
    mean_bad += bad.values.col(q).mean();
  }
  CHECK(mean_bad / n < mean_good / n);
}

TEST_CASE("values stay in [-1, 1] and tolerate non-divisible depths") {
  const Fixture fx(13, 8.0);
  CHECK(fx.f1.depth() == 25);  // 25 is not divisible by 8; zero-padded to 32
  const ConfidenceMap<float> conf = groupwise_correlation(fx.f1, fx.f2, fx.gt, 8);
  CHECK(conf.values.maxCoeff() <= 1.0f + 1e-6f);
  CHECK(conf.values.minCoeff() >= -1.0f - 1e-6f);
  CHECK_THROWS_AS((void)groupwise_correlation(fx.f1, fx.f2, fx.gt, 0), DimensionMismatch);
}

TEST_CASE("permuting channels within a group leaves the map unchanged") {
  const Fixture fx(17, 8.0);
  FeatureMap<float> p1 = fx.f1, p2 = fx.f2;
  // Swap two channels inside group 0 (channels 0..3) in both maps.
  p1.data.row(1).swap(p1.data.row(2));
  p2.data.row(1).swap(p2.data.row(2));
  const ConfidenceMap<float> base = groupwise_correlation(fx.f1, fx.f2, fx.gt, 8);
  const ConfidenceMap<float> perm = groupwise_correlation(p1, p2, fx.gt, 8);
  CHECK((base.values - perm.values).cwiseAbs().maxCoeff() < 1e-6f);
}

TEST_CASE("confidence is invariant to width offsets in the flow") {
  const Fixture fx(19, 8.0);
  auto shifted = fx.gt;
  shifted.u += float(fx.f1.grid.width);
  const ConfidenceMap<float> a = groupwise_correlation(fx.f1, fx.f2, fx.gt, 8);
  const ConfidenceMap<float> b = groupwise_correlation(fx.f1, fx.f2, shifted, 8);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("confidence_pair evaluates both candidates against the same frames") {
  const Fixture fx(23, 8.0);
  auto corrupted = fx.gt;
  corrupted.u += 5.0f;

  SUBCASE("equal flows give identical maps") {
    const auto [a, b] = confidence_pair(fx.f1, fx.f2, fx.gt, fx.gt, 8);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0f);
  }
  SUBCASE("the ground-truth candidate dominates in mean") {
    const auto [a, b] = confidence_pair(fx.f1, fx.f2, fx.gt, corrupted, 8);
    CHECK(a.values.mean() > b.values.mean());
  }
  SUBCASE("identically corrupted candidates tie") {
    const auto [a, b] = confidence_pair(fx.f1, fx.f2, corrupted, corrupted, 8);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0f);
  }
}
