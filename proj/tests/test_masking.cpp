#include "doctest.h"

#include "inptpu/masking.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace inptpu;

namespace {

// All-pairs direction search: some edge of the optimal rectangle is parallel
// to a line through two of the points.
double brute_min_area(const std::vector<Eigen::Vector2d>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const Eigen::Vector2d d = pts[j] - pts[i];
      if (d.norm() < 1e-12) continue;
      const Eigen::Vector2d e = d.normalized(), n(-e.y(), e.x());
      double lo_e = 1e300, hi_e = -1e300, lo_n = 1e300, hi_n = -1e300;
      for (const auto& p : pts) {
        lo_e = std::min(lo_e, p.dot(e));
        hi_e = std::max(hi_e, p.dot(e));
        lo_n = std::min(lo_n, p.dot(n));
        hi_n = std::max(hi_n, p.dot(n));
      }
      best = std::min(best, (hi_e - lo_e) * (hi_n - lo_n));
    }
  }
  return best;
}

OrientedBox random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ext(2.0, 30.0), ang(-std::numbers::pi / 4, std::numbers::pi / 4),
      pos(20.0, 44.0);
  OrientedBox b;
  b.center = {pos(rng), pos(rng)};
  b.height = ext(rng);
  b.width = ext(rng);
  b.angle = ang(rng);
  return b;
}

// Random blob: union of a few filled ellipses, binary.
Mask2D random_mask(std::mt19937_64& rng, int size = 64) {
  std::uniform_real_distribution<double> pos(12.0, size - 12.0), rad(1.5, 9.0), ang(0.0, std::numbers::pi);
  std::uniform_int_distribution<int> parts(1, 3);
  Mask2D m = Mask2D::Zero(size, size);
  const int k = parts(rng);
  for (int p = 0; p < k; ++p) {
    const double cr = pos(rng), cc = pos(rng), ra = rad(rng), rb = rad(rng), t = ang(rng);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const double dr = r - cr, dc = c - cc;
        const double u = (dr * std::cos(t) + dc * std::sin(t)) / ra, v = (-dr * std::sin(t) + dc * std::cos(t)) / rb;
        if (u * u + v * v <= 1.0) m(r, c) = 1.0f;
      }
    }
  }
  if (m.sum() == 0.0f) m(size / 2, size / 2) = 1.0f;
  return m;
}

}  // namespace

TEST_CASE("axis-aligned rectangle gives its own box") {
  Mask2D m = Mask2D::Zero(64, 64);
  m.block(10, 30, 10, 20) = 1.0f;
  const OrientedBox b = masking::compute_obb(m);
  CHECK(b.center.x() == doctest::Approx(14.5));
  CHECK(b.center.y() == doctest::Approx(39.5));
  CHECK(b.height == doctest::Approx(10.0));
  CHECK(b.width == doctest::Approx(20.0));
  CHECK(b.angle == doctest::Approx(0.0));
}

TEST_CASE("45 degree square recovers its generating parameters") {
  const double side = 21.0, cr = 32.0, cc = 32.0;
  Mask2D m = Mask2D::Zero(64, 64);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) {
      const double p = (r - cr + c - cc) / std::numbers::sqrt2, q = (r - cr - (c - cc)) / std::numbers::sqrt2;
      if (std::abs(p) <= side / 2 && std::abs(q) <= side / 2) m(r, c) = 1.0f;
    }
  }
  const OrientedBox b = masking::compute_obb(m);
  CHECK(std::abs(b.center.x() - cr) <= 0.5);
  CHECK(std::abs(b.center.y() - cc) <= 0.5);
  CHECK(std::abs(b.height - side) <= 0.5);
  CHECK(std::abs(b.width - side) <= 0.5);
  CHECK(std::abs(std::abs(b.angle) - std::numbers::pi / 4) < 1e-9);
}

TEST_CASE("single pixel gives a unit box and empty masks throw") {
  Mask2D m = Mask2D::Zero(16, 16);
  m(3, 7) = 1.0f;
  const OrientedBox b = masking::compute_obb(m);
  CHECK(b.height == 1.0);
  CHECK(b.width == 1.0);
  CHECK(b.center.x() == 3.0);
  CHECK(b.center.y() == 7.0);
  Mask2D faint = Mask2D::Constant(16, 16, 0.49f);
  CHECK_THROWS_AS(masking::compute_obb(faint), EmptyMaskError);
  CHECK_THROWS_AS(masking::min_area_rect({}), EmptyMaskError);
}

TEST_CASE("rotating calipers agree with the all-pairs search") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_int_distribution<int> count(3, 25);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(count(rng)));
    for (auto& p : pts) p = {u(rng), u(rng)};
    const OrientedBox b = masking::min_area_rect(pts);
    const double oracle = brute_min_area(pts);
    CHECK(b.area() == doctest::Approx(oracle).epsilon(1e-9));
    // Every point lies inside the returned box.
    for (const auto& p : pts) {
      const Eigen::Vector2d d = p - b.center;
      CHECK(std::abs(d.dot(b.height_axis())) <= b.height / 2 + 1e-9);
      CHECK(std::abs(d.dot(b.width_axis())) <= b.width / 2 + 1e-9);
    }
    CHECK(b.angle >= -std::numbers::pi / 4);
    CHECK(b.angle < std::numbers::pi / 4);
  }
}

TEST_CASE("adaptive axes examples") {
  OrientedBox sq;
  sq.height = sq.width = 10.0;
  EllipseAxes ax = masking::adaptive_axes(sq, 1.0);
  CHECK(ax.a == doctest::Approx(5.0 * std::numbers::sqrt2).epsilon(1e-12));
  CHECK(ax.b == doctest::Approx(5.0 * std::numbers::sqrt2).epsilon(1e-12));
  const Eigen::Vector2d corner = sq.corners()[0];
  CHECK(masking::soft_profile(masking::normalized_radius(sq, ax, corner.x(), corner.y())) == 1.0);

  ax = masking::adaptive_axes(sq, 2.0);
  CHECK(ax.a == doctest::Approx(10.0 * std::numbers::sqrt2).epsilon(1e-12));
  CHECK(ax.b == doctest::Approx(5.0 * std::numbers::sqrt2).epsilon(1e-12));

  OrientedBox tall;
  tall.height = 20.0;
  tall.width = 10.0;
  ax = masking::adaptive_axes(tall, 2.0);
  CHECK(ax.a == doctest::Approx(10.0 * std::numbers::sqrt2).epsilon(1e-12));
  CHECK(ax.b == doctest::Approx(5.0 * std::numbers::sqrt2).epsilon(1e-12));
  ax = masking::adaptive_axes(tall, 0.5);
  CHECK(ax.a == doctest::Approx(10.0 * std::numbers::sqrt2).epsilon(1e-12));
  CHECK(ax.b == doctest::Approx(20.0 * std::numbers::sqrt2).epsilon(1e-12));

  CHECK_THROWS_AS(masking::adaptive_axes(sq, 0.0), DimensionError);
}

TEST_CASE("random box corners sit on the unit contour") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ar(0.25, 4.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const OrientedBox b = random_box(rng);
    // With aspect equal to the box's own, neither axis grows.
    const double own = b.height / b.width;
    const EllipseAxes ax = masking::adaptive_axes(b, own);
    for (const auto& c : b.corners()) CHECK(std::abs(masking::normalized_radius(b, ax, c.x(), c.y()) - 1.0) < 1e-9);
    // Any other aspect grows one axis, so corners move inside.
    const double ratio = ar(rng);
    const EllipseAxes g = masking::adaptive_axes(b, ratio);
    CHECK(std::abs(g.a / g.b - ratio) < 1e-9 * ratio);
    CHECK(g.a >= std::numbers::sqrt2 * b.height / 2 - 1e-12);
    CHECK(g.b >= std::numbers::sqrt2 * b.width / 2 - 1e-12);
    const bool grew_a = g.a > std::numbers::sqrt2 * b.height / 2 + 1e-12;
    const bool grew_b = g.b > std::numbers::sqrt2 * b.width / 2 + 1e-12;
    CHECK(!(grew_a && grew_b));
    for (const auto& c : b.corners()) CHECK(masking::normalized_radius(b, g, c.x(), c.y()) <= 1.0 + 1e-9);
  }
}

TEST_CASE("soft profile shape") {
  CHECK(masking::soft_profile(0.0) == 1.0);
  CHECK(masking::soft_profile(1.0) == 1.0);
  CHECK(masking::soft_profile(1.125) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(masking::soft_profile(1.25) == 0.0);
  CHECK(masking::soft_profile(3.0) == 0.0);
  double prev = 1.0;
  for (double r = 1.0; r <= 1.3; r += 0.001) {
    const double v = masking::soft_profile(r);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("adaptive mask covers the source and stays soft") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ar(0.3, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Mask2D src = random_mask(rng);
    const double aspect = ar(rng);
    const OrientedBox b = masking::compute_obb(src);
    const Mask2D m = masking::adaptive_ellipse_mask(b, aspect, 64, 64);
    bool covered = true;
    for (Eigen::Index i = 0; i < src.size(); ++i) {
      if (src.data()[i] >= 0.5f && m.data()[i] < 1.0f - 1e-6f) covered = false;
    }
    CHECK(covered);
    CHECK((m.array() >= 0.0f).all());
    CHECK((m.array() <= 1.0f).all());
    // Raised cosine slope is 2 pi per unit radius; one pixel moves the
    // radius by at most 1 / min(a, b).
    const EllipseAxes ax = masking::adaptive_axes(b, aspect);
    const double bound = 2.0 * std::numbers::pi / std::min(ax.a, ax.b) + 1e-6;
    const double dr = (m.bottomRows(63) - m.topRows(63)).cwiseAbs().maxCoeff();
    const double dc = (m.rightCols(63) - m.leftCols(63)).cwiseAbs().maxCoeff();
    CHECK(std::max(dr, dc) <= bound);
  }
}

TEST_CASE("adaptive mask video follows each frame") {
  Mask2D a = Mask2D::Zero(32, 32), b = Mask2D::Zero(32, 32);
  a.block(4, 4, 6, 6) = 1.0f;
  b.block(20, 20, 6, 6) = 1.0f;
  const MaskVideo out = masking::adaptive_mask_video(MaskVideo(std::vector<Mask2D>{a, b}), 1.0);
  REQUIRE(out.size() == 2);
  CHECK(out.frames[0](6, 6) == 1.0f);
  CHECK(out.frames[0](23, 23) == 0.0f);
  CHECK(out.frames[1](23, 23) == 1.0f);
  CHECK(out.frames[1](6, 6) == 0.0f);
}

TEST_CASE("square reference in a square region fills a 38 pixel block") {
  ReferenceImage ref(VideoTensor(Shape4{1, 40, 40, 3}, 0.9f));
  Mask2D m = Mask2D::Zero(64, 64);
  m.block(12, 12, 40, 40) = 1.0f;
  const masking::Placement p = masking::placement_for(ref, m);
  CHECK(p.scale == doctest::Approx(0.95));
  CHECK(p.centroid.x() == doctest::Approx(31.5));
  const VideoTensor out = masking::place_reference(ref, m, 64, 64);
  int r0 = 64, r1 = -1, c0 = 64, c1 = -1;
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) {
      if (std::abs(out(0, r, c, 0) - 0.9f) < 1e-6f) {
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      } else {
        CHECK(out(0, r, c, 0) == 0.5f);
      }
    }
  }
  CHECK(r0 == 13);
  CHECK(r1 == 50);
  CHECK(c0 == 13);
  CHECK(c1 == 50);
  CHECK((r0 + r1) / 2.0 == doctest::Approx(31.5));
}

TEST_CASE("reference scale uses the tighter box side") {
  ReferenceImage ref(VideoTensor(Shape4{1, 10, 20, 3}, 0.2f));
  Mask2D m = Mask2D::Zero(64, 64);
  m.block(5, 5, 10, 20) = 1.0f;
  CHECK(masking::placement_for(ref, m).scale == doctest::Approx(0.95));
  m.setZero();
  m.block(5, 5, 30, 20) = 1.0f;
  CHECK(masking::placement_for(ref, m).scale == doctest::Approx(0.95));
}

TEST_CASE("placement at a frame corner is clipped without error") {
  ReferenceImage ref(VideoTensor(Shape4{1, 16, 16, 3}, 1.0f));
  Mask2D m = Mask2D::Zero(32, 32);
  m.block(0, 0, 3, 3) = 1.0f;
  m(0, 0) = 1.0f;
  VideoTensor out;
  CHECK_NOTHROW(out = masking::place_reference(ref, m, 32, 32));
  CHECK(out(0, 0, 0, 0) == doctest::Approx(1.0f));
  CHECK(out(0, 31, 31, 0) == 0.5f);
  CHECK_THROWS_AS(masking::place_reference(ref, Mask2D::Zero(32, 32), 32, 32), EmptyMaskError);
  CHECK_THROWS_AS(masking::place_reference(ref, m, 16, 32), ShapeMismatchError);
}

TEST_CASE("temporal extension copies the placed frame") {
  ReferenceImage ref(VideoTensor(Shape4{1, 8, 8, 3}, 0.7f));
  Mask2D m = Mask2D::Zero(32, 32);
  m.block(8, 8, 12, 12) = 1.0f;
  const VideoTensor one = masking::place_reference(ref, m, 32, 32);
  const VideoTensor many = masking::extend_reference_temporal(one, 5);
  CHECK(many.shape == Shape4{5, 32, 32, 3});
  for (int f = 0; f < 5; ++f)
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 32; ++c) CHECK(many(f, r, c, 1) == one(0, r, c, 1));
  CHECK_THROWS_AS(masking::extend_reference_temporal(one, 0), DimensionError);
}

TEST_CASE("aligned reference follows the moving mask") {
  ReferenceImage ref(VideoTensor(Shape4{1, 8, 8, 3}, 0.1f));
  std::vector<Mask2D> frames;
  for (int f = 0; f < 4; ++f) {
    Mask2D m = Mask2D::Zero(48, 48);
    m.block(4 + 8 * f, 10, 10, 10) = 1.0f;
    frames.push_back(m);
  }
  const VideoTensor out = masking::align_reference_video(ref, MaskVideo(frames));
  REQUIRE(out.frames() == 4);
  for (int f = 0; f < 4; ++f) {
    const VideoTensor single = masking::place_reference(ref, frames[f], 48, 48);
    const int centre = 4 + 8 * f + 5;
    CHECK(out(f, centre, 15, 0) == doctest::Approx(0.1f));
    for (int r = 0; r < 48; ++r)
      for (int c = 0; c < 48; ++c) CHECK(out(f, r, c, 0) == single(0, r, c, 0));
  }
}
