#include "gridsurv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gridsurv/errors.hpp"
#include "gridsurv/log.hpp"

namespace gridsurv {

namespace {

constexpr int kMaxLog2Cells = 14;

BoundingBox tight_box(std::span<const Point> locations) {
  BoundingBox b{locations[0].x, locations[0].y, locations[0].x, locations[0].y};
  for (const auto& p : locations) {
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  return b;
}

std::size_t wrap_lag(std::size_t lag, std::size_t n) {
  lag %= n;
  return std::min(lag, n - lag);
}

}  // namespace

Grid Grid::build(std::span<const Point> locations, int m1, int m2, double ext_factor,
                 std::optional<BoundingBox> window) {
  if (locations.empty() && !window) {
    throw ValidationError("build_grid: at least one location (or an explicit window) is required");
  }
  if (m1 < 1 || m2 < 1 || m1 > kMaxLog2Cells || m2 > kMaxLog2Cells) {
    throw ValidationError("build_grid: m1 and m2 must lie in [1, 14]");
  }
  if (!std::isfinite(ext_factor) || ext_factor < 2.0) {
    throw ValidationError("build_grid: ext_factor must be a finite value >= 2");
  }
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (!std::isfinite(locations[i].x) || !std::isfinite(locations[i].y)) {
      std::ostringstream os;
      os << "build_grid: location " << i << " has non-finite coordinates";
      throw ValidationError(os.str());
    }
  }

  Grid g;
  g.m1_ = m1;
  g.m2_ = m2;
  g.nx_ = std::size_t{1} << m1;
  g.ny_ = std::size_t{1} << m2;
  g.ext_factor_ = ext_factor;

  BoundingBox box;
  if (window) {
    box = *window;
    if (!(box.width() >= 0.0) || !(box.height() >= 0.0) || !std::isfinite(box.xmin) ||
        !std::isfinite(box.xmax) || !std::isfinite(box.ymin) || !std::isfinite(box.ymax)) {
      throw ValidationError("build_grid: window must be a finite rectangle");
    }
    for (const auto& p : locations) {
      if (!box.contains(p)) throw ValidationError("build_grid: window does not contain every location");
    }
  } else {
    box = tight_box(locations);
  }

  const bool flat_x = box.width() <= 0.0;
  const bool flat_y = box.height() <= 0.0;
  if (flat_x || flat_y) {
    // Nominal cell width comes from the other axis; 1 length unit if both are flat.
    double wx = 1.0;
    double wy = 1.0;
    if (flat_x && !flat_y) wx = ext_factor * box.height() / static_cast<double>(g.ny_);
    if (flat_y && !flat_x) wy = ext_factor * box.width() / static_cast<double>(g.nx_);
    if (flat_x) {
      const double cx = box.xmin;
      box.xmin = cx - 0.5 * wx;
      box.xmax = cx + 0.5 * wx;
    }
    if (flat_y) {
      const double cy = box.ymin;
      box.ymin = cy - 0.5 * wy;
      box.ymax = cy + 0.5 * wy;
    }
    warn("build_grid: observation bounding box is degenerate along " +
         std::string(flat_x && flat_y ? "both axes" : (flat_x ? "x" : "y")) +
         "; inflated by one nominal cell width");
  }

  g.bbox_ = box;
  g.ext_bbox_ = BoundingBox{box.xmin, box.ymin, box.xmin + ext_factor * box.width(),
                            box.ymin + ext_factor * box.height()};
  g.cell_w_ = g.ext_bbox_.width() / static_cast<double>(g.nx_);
  g.cell_h_ = g.ext_bbox_.height() / static_cast<double>(g.ny_);

  g.obs_mask_.assign(g.size(), 0);
  const double tol_x = 1e-12 * g.ext_bbox_.width();
  const double tol_y = 1e-12 * g.ext_bbox_.height();
  for (std::size_t r = 0; r < g.ny_; ++r) {
    const double bottom = g.ext_bbox_.ymin + static_cast<double>(r) * g.cell_h_;
    if (bottom >= box.ymax - tol_y) continue;
    for (std::size_t c = 0; c < g.nx_; ++c) {
      const double left = g.ext_bbox_.xmin + static_cast<double>(c) * g.cell_w_;
      if (left < box.xmax - tol_x) g.obs_mask_[g.index(c, r)] = 1;
    }
  }
  return g;
}

Point Grid::centroid(std::size_t cell) const {
  if (cell >= size()) throw ValidationError("centroid: cell index out of range");
  return Point{ext_bbox_.xmin + (static_cast<double>(col(cell)) + 0.5) * cell_w_,
               ext_bbox_.ymin + (static_cast<double>(row(cell)) + 0.5) * cell_h_};
}

std::size_t Grid::window_cell_count() const {
  return static_cast<std::size_t>(std::count(obs_mask_.begin(), obs_mask_.end(), std::uint8_t{1}));
}

std::size_t Grid::cell_of(Point p) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !ext_bbox_.contains(p)) {
    std::ostringstream os;
    os << "cell_of: point (" << p.x << ", " << p.y << ") lies outside the extended bounding box";
    throw ValidationError(os.str());
  }
  auto axis = [](double v, double lo, double w, std::size_t n) {
    const auto k = static_cast<std::size_t>(std::floor((v - lo) / w));
    return std::min(k, n - 1);
  };
  return index(axis(p.x, ext_bbox_.xmin, cell_w_, nx_), axis(p.y, ext_bbox_.ymin, cell_h_, ny_));
}

double Grid::lag_distance(std::size_t dcol, std::size_t drow) const {
  const double dx = static_cast<double>(wrap_lag(dcol, nx_)) * cell_w_;
  const double dy = static_cast<double>(wrap_lag(drow, ny_)) * cell_h_;
  return std::hypot(dx, dy);
}

double Grid::toroidal_distance(std::size_t a, std::size_t b) const {
  if (a >= size() || b >= size()) throw ValidationError("toroidal_distance: cell index out of range");
  const std::size_t dc = col(a) >= col(b) ? col(a) - col(b) : col(b) - col(a);
  const std::size_t dr = row(a) >= row(b) ? row(a) - row(b) : row(b) - row(a);
  return lag_distance(dc, dr);
}

}  // namespace gridsurv
