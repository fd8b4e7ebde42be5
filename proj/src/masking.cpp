#include "inptpu/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "inptpu/resample.hpp"

namespace inptpu {

Eigen::Vector2d OrientedBox::width_axis() const { return {std::sin(angle), std::cos(angle)}; }
Eigen::Vector2d OrientedBox::height_axis() const { return {std::cos(angle), -std::sin(angle)}; }

std::vector<Eigen::Vector2d> OrientedBox::corners() const {
  const Eigen::Vector2d u = width_axis() * (width / 2.0);
  const Eigen::Vector2d v = height_axis() * (height / 2.0);
  return {center - u - v, center + u - v, center + u + v, center - u + v};
}

namespace masking {

namespace {

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

struct Candidate {
  double area = std::numeric_limits<double>::infinity();
  Eigen::Vector2d dir{1.0, 0.0};  // edge direction (unit)
  double lo_e = 0.0, hi_e = 0.0, lo_n = 0.0, hi_n = 0.0;
};

// Converts an edge-aligned rectangle to the canonical box representation.
// Vectors here live in the caller's point space, interpreted as (row, col).
OrientedBox to_box(const Candidate& c) {
  const Eigen::Vector2d e = c.dir;
  const Eigen::Vector2d n(-e.y(), e.x());
  OrientedBox box;
  box.center = e * (0.5 * (c.lo_e + c.hi_e)) + n * (0.5 * (c.lo_n + c.hi_n));
  // Edge direction as an angle from the column axis: e = (row, col).
  double theta = std::atan2(e.x(), e.y());
  double along = c.hi_e - c.lo_e;  // extent along the edge direction
  double across = c.hi_n - c.lo_n;
  constexpr double quarter = std::numbers::pi / 2.0;
  while (theta >= std::numbers::pi / 4.0) {
    theta -= quarter;
    std::swap(along, across);
  }
  while (theta < -std::numbers::pi / 4.0) {
    theta += quarter;
    std::swap(along, across);
  }
  box.angle = theta;
  box.width = along;
  box.height = across;
  return box;
}

}  // namespace

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

OrientedBox min_area_rect(const std::vector<Eigen::Vector2d>& points) {
  if (points.empty()) throw EmptyMaskError("min_area_rect: no points");
  const std::vector<Eigen::Vector2d> hull = convex_hull(points);
  const std::size_t n = hull.size();
  if (n == 1) {
    OrientedBox box;
    box.center = hull[0];
    box.width = box.height = 0.0;
    return box;
  }
  if (n == 2) {
    Candidate c;
    const Eigen::Vector2d d = hull[1] - hull[0];
    c.dir = d.normalized();
    const Eigen::Vector2d nrm(-c.dir.y(), c.dir.x());
    c.lo_e = hull[0].dot(c.dir);
    c.hi_e = hull[1].dot(c.dir);
    if (c.lo_e > c.hi_e) std::swap(c.lo_e, c.hi_e);
    c.lo_n = c.hi_n = hull[0].dot(nrm);
    c.area = 0.0;
    return to_box(c);
  }

  auto proj = [&](std::size_t idx, const Eigen::Vector2d& axis) { return hull[idx % n].dot(axis); };

  // Calipers: for edge i, the hull is counter-clockwise with positive-area
  // orientation in (row, col) space, so the inward normal is the left normal.
  Candidate best;
  std::size_t right = 0, top = 0, left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d e = (hull[(i + 1) % n] - hull[i]).normalized();
    const Eigen::Vector2d nrm(-e.y(), e.x());
    if (i == 0) {
      for (std::size_t k = 0; k < n; ++k) {
        if (proj(k, e) > proj(right, e)) right = k;
        if (proj(k, nrm) > proj(top, nrm)) top = k;
        if (proj(k, e) < proj(left, e)) left = k;
      }
    } else {
      for (std::size_t s = 0; s < n && proj(right + 1, e) >= proj(right, e); ++s) right = (right + 1) % n;
      for (std::size_t s = 0; s < n && proj(top + 1, nrm) >= proj(top, nrm); ++s) top = (top + 1) % n;
      for (std::size_t s = 0; s < n && proj(left + 1, e) <= proj(left, e); ++s) left = (left + 1) % n;
    }
    Candidate c;
    c.dir = e;
    c.lo_e = proj(left, e);
    c.hi_e = proj(right, e);
    c.lo_n = proj(i, nrm);
    c.hi_n = proj(top, nrm);
    if (c.lo_n > c.hi_n) std::swap(c.lo_n, c.hi_n);
    c.area = (c.hi_e - c.lo_e) * (c.hi_n - c.lo_n);
    if (c.area < best.area) best = c;
  }
  return to_box(best);
}

OrientedBox compute_obb(const Mask2D& mask) {
  // Only the extreme foreground pixels of each row can be hull vertices.
  std::vector<Eigen::Vector2d> pts;
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    Eigen::Index first = -1, last = -1;
    for (Eigen::Index c = 0; c < mask.cols(); ++c) {
      if (mask(r, c) >= kBinarizeThreshold) {
        if (first < 0) first = c;
        last = c;
      }
    }
    if (first >= 0) {
      pts.emplace_back(static_cast<double>(r), static_cast<double>(first));
      if (last != first) pts.emplace_back(static_cast<double>(r), static_cast<double>(last));
    }
  }
  if (pts.empty()) throw EmptyMaskError("compute_obb: mask has no pixel >= 0.5");
  OrientedBox box = min_area_rect(pts);
  box.height = std::max(1.0, box.height + 1.0);
  box.width = std::max(1.0, box.width + 1.0);
  return box;
}

EllipseAxes adaptive_axes(const OrientedBox& obb, double ref_aspect) {
  if (!(obb.height > 0.0) || !(obb.width > 0.0)) throw DimensionError("adaptive_axes: box extents must be positive");
  if (!(ref_aspect > 0.0) || !std::isfinite(ref_aspect)) throw DimensionError("adaptive_axes: ref_aspect must be positive");
  EllipseAxes axes{std::numbers::sqrt2 * obb.height / 2.0, std::numbers::sqrt2 * obb.width / 2.0};
  const double current = axes.a / axes.b;
  if (current < ref_aspect) {
    axes.a = ref_aspect * axes.b;
  } else if (current > ref_aspect) {
    axes.b = axes.a / ref_aspect;
  }
  return axes;
}

double normalized_radius(const OrientedBox& box, const EllipseAxes& axes, double row, double col) {
  const Eigen::Vector2d d(row - box.center.x(), col - box.center.y());
  const double along_h = d.dot(box.height_axis()) / axes.a;
  const double along_w = d.dot(box.width_axis()) / axes.b;
  return std::sqrt(along_h * along_h + along_w * along_w);
}

double soft_profile(double rho) {
  if (rho <= 1.0) return 1.0;
  if (rho >= kFalloffEnd) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (rho - 1.0) / (kFalloffEnd - 1.0)));
}

Mask2D adaptive_ellipse_mask(const OrientedBox& obb, double ref_aspect, int height, int width) {
  if (height < 1 || width < 1) throw DimensionError("adaptive_ellipse_mask: frame smaller than 1x1");
  const EllipseAxes axes = adaptive_axes(obb, ref_aspect);
  Mask2D out(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      out(r, c) = static_cast<float>(soft_profile(normalized_radius(obb, axes, r, c)));
    }
  }
  return out;
}

MaskVideo adaptive_mask_video(const MaskVideo& source, double ref_aspect) {
  MaskVideo out;
  out.frames.reserve(source.frames.size());
  for (const Mask2D& m : source.frames) {
    // An empty source frame has nothing to cover.
    if (m.size() == 0 || m.maxCoeff() < kBinarizeThreshold) {
      out.frames.push_back(Mask2D::Zero(m.rows(), m.cols()));
      continue;
    }
    out.frames.push_back(adaptive_ellipse_mask(compute_obb(m), ref_aspect,
                                               static_cast<int>(m.rows()), static_cast<int>(m.cols())));
  }
  return out;
}

namespace {

// Draws ref scaled by `scale` and centered at `center` (row, col, pixel-center
// coordinates) over a gray canvas.
VideoTensor render_scaled(const ReferenceImage& ref, const Eigen::Vector2d& center, double scale,
                          int height, int width) {
  const int C = ref.pixels.channels();
  VideoTensor out(Shape4{1, height, width, C}, kNeutralGray);
  std::vector<Eigen::ArrayXXf> planes(static_cast<std::size_t>(C), Eigen::ArrayXXf(ref.height(), ref.width()));
  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) {
      for (int c = 0; c < C; ++c) planes[c](y, x) = ref.pixels(0, y, x, c);
    }
  }
  const double half_h = ref.height() / 2.0;
  const double half_w = ref.width() / 2.0;
  for (int y = 0; y < height; ++y) {
    const double u = (y - center.x()) / scale + half_h;
    if (u < 0.0 || u >= ref.height()) continue;
    for (int x = 0; x < width; ++x) {
      const double v = (x - center.y()) / scale + half_w;
      if (v < 0.0 || v >= ref.width()) continue;
      for (int c = 0; c < C; ++c) out(0, y, x, c) = sample_bilinear(planes[c], u - 0.5, v - 0.5);
    }
  }
  return out;
}

}  // namespace

Placement placement_for(const ReferenceImage& ref, const Mask2D& mask) {
  double total = 0.0, sr = 0.0, sc = 0.0;
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    for (Eigen::Index c = 0; c < mask.cols(); ++c) {
      const double w = mask(r, c);
      total += w;
      sr += w * static_cast<double>(r);
      sc += w * static_cast<double>(c);
    }
  }
  if (!(total > 0.0)) throw EmptyMaskError("place_reference: mask has no foreground");

  auto bbox = [&](float threshold, int& h, int& w) {
    Eigen::Index r0 = mask.rows(), r1 = -1, c0 = mask.cols(), c1 = -1;
    for (Eigen::Index r = 0; r < mask.rows(); ++r) {
      for (Eigen::Index c = 0; c < mask.cols(); ++c) {
        if (mask(r, c) >= threshold) {
          r0 = std::min(r0, r);
          r1 = std::max(r1, r);
          c0 = std::min(c0, c);
          c1 = std::max(c1, c);
        }
      }
    }
    if (r1 < 0) return false;
    h = static_cast<int>(r1 - r0 + 1);
    w = static_cast<int>(c1 - c0 + 1);
    return true;
  };

  Placement p;
  p.centroid = {sr / total, sc / total};
  // Plateau first; soft masks without a plateau fall back to binarization.
  if (!bbox(1.0f - 1e-6f, p.box_height, p.box_width) &&
      !bbox(kBinarizeThreshold, p.box_height, p.box_width)) {
    throw EmptyMaskError("place_reference: mask has no pixel >= 0.5");
  }
  p.scale = kFillFactor * std::min(static_cast<double>(p.box_height) / ref.height(),
                                   static_cast<double>(p.box_width) / ref.width());
  return p;
}

VideoTensor place_reference(const ReferenceImage& ref, const Mask2D& mask, int height, int width) {
  if (mask.rows() != height || mask.cols() != width) {
    throw ShapeMismatchError("place_reference: mask does not match frame shape");
  }
  const Placement p = placement_for(ref, mask);
  return render_scaled(ref, p.centroid, p.scale, height, width);
}

VideoTensor extend_reference_temporal(const VideoTensor& ref_frame, int frames) {
  if (frames < 1) throw DimensionError("extend_reference_temporal: frame count must be >= 1");
  if (ref_frame.frames() != 1) throw DimensionError("extend_reference_temporal: expects one frame");
  std::vector<VideoTensor> copies(static_cast<std::size_t>(frames), ref_frame);
  return concat_frames(copies);
}

VideoTensor align_reference_video(const ReferenceImage& ref, const MaskVideo& mask) {
  if (mask.size() < 1) throw DimensionError("align_reference_video: empty mask video");
  std::vector<VideoTensor> frames;
  frames.reserve(mask.frames.size());
  for (const Mask2D& m : mask.frames) {
    const int h = static_cast<int>(m.rows()), w = static_cast<int>(m.cols());
    // Nothing to place on a frame without foreground; its blend weights are
    // zero or negligible, so neutral gray stands in.
    if (m.size() == 0 || m.maxCoeff() < kBinarizeThreshold) {
      frames.emplace_back(Shape4{1, h, w, ref.pixels.channels()}, kNeutralGray);
    } else {
      frames.push_back(place_reference(ref, m, h, w));
    }
  }
  return concat_frames(frames);
}

VideoTensor reference_panel(const ReferenceImage& ref, int height, int width) {
  if (ref.height() <= height && ref.width() <= width) {
    VideoTensor out(Shape4{1, height, width, ref.pixels.channels()}, kNeutralGray);
    const int top = (height - ref.height()) / 2;
    const int left = (width - ref.width()) / 2;
    for (int y = 0; y < ref.height(); ++y) {
      for (int x = 0; x < ref.width(); ++x) {
        for (int c = 0; c < out.channels(); ++c) out(0, top + y, left + x, c) = ref.pixels(0, y, x, c);
      }
    }
    return out;
  }
  const double scale = std::min(static_cast<double>(height) / ref.height(),
                                static_cast<double>(width) / ref.width());
  return render_scaled(ref, Eigen::Vector2d((height - 1) / 2.0, (width - 1) / 2.0), scale, height, width);
}

}  // namespace masking
}  // namespace inptpu
