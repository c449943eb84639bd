#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gridsurv {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct BoundingBox {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(Point p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
};

// The extended computational lattice: 2^m1 columns (x) by 2^m2 rows (y)
// covering the observation bounding box, which sits in the lower-left
// corner of the extended box. The lattice is treated as wrapped on a torus.
//
// Cells are numbered row-major, index = row * nx() + col, row 0 at ymin.
// Cells are half-open, [left, right) x [bottom, top); points on the far
// edges of the extended box belong to the last column/row.
class Grid {
 public:
  // Tight bounding box of `locations`, or `window` when given (it must
  // contain every location). An axis of zero extent is inflated by one
  // nominal cell width around the data, with a warning.
  static Grid build(std::span<const Point> locations, int m1, int m2, double ext_factor = 2.0,
                    std::optional<BoundingBox> window = std::nullopt);

  int m1() const { return m1_; }
  int m2() const { return m2_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }
  double ext_factor() const { return ext_factor_; }

  const BoundingBox& bbox() const { return bbox_; }
  const BoundingBox& ext_bbox() const { return ext_bbox_; }
  double cell_w() const { return cell_w_; }
  double cell_h() const { return cell_h_; }

  std::size_t col(std::size_t cell) const { return cell % nx_; }
  std::size_t row(std::size_t cell) const { return cell / nx_; }
  std::size_t index(std::size_t col, std::size_t row) const { return row * nx_ + col; }

  Point centroid(std::size_t cell) const;

  // True iff the cell overlaps the observation bounding box with positive area.
  bool in_window(std::size_t cell) const { return obs_mask_.at(cell) != 0; }
  const std::vector<std::uint8_t>& obs_mask() const { return obs_mask_; }
  std::size_t window_cell_count() const;

  // Throws ValidationError when p lies outside the extended box.
  std::size_t cell_of(Point p) const;

  // Euclidean distance between centroids after wrapping each axis
  // displacement onto the torus.
  double toroidal_distance(std::size_t a, std::size_t b) const;

  // Toroidal distance for an index lag (dcol, drow), each taken modulo the
  // grid dimension.
  double lag_distance(std::size_t dcol, std::size_t drow) const;

 private:
  Grid() = default;

  int m1_ = 0;
  int m2_ = 0;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  double ext_factor_ = 2.0;
  BoundingBox bbox_;
  BoundingBox ext_bbox_;
  double cell_w_ = 0.0;
  double cell_h_ = 0.0;
  std::vector<std::uint8_t> obs_mask_;
};

}  // namespace gridsurv
