#pragma once

// Adaptive masking for shape control and reference placement.
//
// Pixel coordinates are (row, col) with pixel centers at integer indices.
// Oriented boxes describe their axes with an angle measured from the column
// axis: the width axis is u = (cos a, sin a) in (col, row) components and the
// height axis is v = (-sin a, cos a).  An angle of 0 therefore means height
// runs along rows and width along columns.

#include <Eigen/Core>

#include <vector>

#include "inptpu/tensor.hpp"

namespace inptpu {

struct OrientedBox {
  Eigen::Vector2d center{0.0, 0.0};  // (row, col)
  double height = 1.0;
  double width = 1.0;
  double angle = 0.0;  // radians, canonicalized to [-pi/4, pi/4)

  [[nodiscard]] Eigen::Vector2d width_axis() const;   // (row, col)
  [[nodiscard]] Eigen::Vector2d height_axis() const;  // (row, col)
  /// Corners in (row, col), counter-clockwise starting at -u/2 - v/2.
  [[nodiscard]] std::vector<Eigen::Vector2d> corners() const;
  [[nodiscard]] double area() const { return height * width; }
};

/// Semi-axes of the adaptive ellipse; a runs along the box height axis and b
/// along its width axis.
struct EllipseAxes {
  double a = 0.0;
  double b = 0.0;
};

namespace masking {

inline constexpr float kBinarizeThreshold = 0.5f;
inline constexpr double kFalloffEnd = 1.25;
inline constexpr double kFillFactor = 0.95;
inline constexpr float kNeutralGray = 0.5f;

/// Convex hull (counter-clockwise, no collinear points) of a point set.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);

/// Minimum-area enclosing rectangle of a point set by rotating calipers over
/// its convex hull.  Points are (row, col); extents are exact (no pixel
/// footprint).  Degenerate sets give zero extents.
OrientedBox min_area_rect(const std::vector<Eigen::Vector2d>& points);

/// Minimum-area oriented box around the binarized foreground of a mask frame.
/// Extents include the unit footprint of the pixels and are at least 1.
OrientedBox compute_obb(const Mask2D& mask_frame);

/// Grow-only aspect adjustment: sqrt(2) enlargement of the half extents, then
/// exactly one axis grows until a / b == ref_aspect.
EllipseAxes adaptive_axes(const OrientedBox& obb, double ref_aspect);

/// Normalized elliptical radius of (row, col) for an ellipse aligned with box.
double normalized_radius(const OrientedBox& box, const EllipseAxes& axes, double row, double col);

/// Soft profile: 1 on rho <= 1, raised cosine down to 0 at rho = 1.25.
double soft_profile(double rho);

Mask2D adaptive_ellipse_mask(const OrientedBox& obb, double ref_aspect, int height, int width);

/// Adaptive mask for every frame, recomputed from each frame's source mask.
/// Frames without foreground stay empty.
MaskVideo adaptive_mask_video(const MaskVideo& source, double ref_aspect);

/// Placement geometry derived from a mask frame.
struct Placement {
  Eigen::Vector2d centroid{0.0, 0.0};  // (row, col), mask-weighted
  int box_height = 0;                  // plateau bounding box, pixels
  int box_width = 0;
  double scale = 0.0;
};

Placement placement_for(const ReferenceImage& ref, const Mask2D& mask_frame);

/// Reference scaled by 0.95 * min(box_h / H_r, box_w / W_r), centered on the
/// mask centroid without rotation, over a neutral gray canvas.
VideoTensor place_reference(const ReferenceImage& ref, const Mask2D& mask_frame, int height, int width);

/// F copies of a placed reference frame.
VideoTensor extend_reference_temporal(const VideoTensor& ref_frame, int frames);

/// Per-frame placement that follows each frame's mask; frames without a
/// pixel >= 0.5 get a neutral gray frame.
VideoTensor align_reference_video(const ReferenceImage& ref, const MaskVideo& mask);

/// Reference centered on a gray panel, downscaled only when it does not fit.
VideoTensor reference_panel(const ReferenceImage& ref, int height, int width);

}  // namespace masking
}  // namespace inptpu
