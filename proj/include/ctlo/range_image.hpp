#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "ctlo/motion.hpp"
#include "ctlo/se3.hpp"

namespace ctlo {

/// Spherical projection geometry of the range image.
struct ProjectionParams {
  double fov_hor = 0;   // radians
  double fov_ver = 0;   // radians
  double beta_res = 10; // pixels per degree
  int width = 0;
  int height = 0;

  static ProjectionParams FromDegrees(double fov_hor_deg, double fov_ver_deg,
                                      double beta_res_px_per_deg);
};

struct PixelCoord {
  int u = -1;
  int v = -1;
  bool in_bounds = false;
};

/// Floating-point pixel coordinates plus the floored integer cell.
PixelCoord project(const Vec3& p, const ProjectionParams& params);

struct MapPoint {
  Vec3 position{Vec3::Zero()};  // in map-origin frame
  double range = 0;
  int hits = 1;  // merged observation count (blend weight)
};

/// Single range-image map: a w*h table of at most one point per pixel,
/// anchored at `origin` (the begin pose of the current scan).
class RangeImageMap {
 public:
  RangeImageMap() = default;
  explicit RangeImageMap(const ProjectionParams& params);

  const ProjectionParams& params() const { return params_; }
  const Pose& origin() const { return origin_; }
  void set_origin(const Pose& origin) { origin_ = origin; }

  bool occupied(int u, int v) const { return occupied_[idx(u, v)]; }
  const MapPoint& at(int u, int v) const { return cells_[idx(u, v)]; }
  std::size_t occupied_count() const;

  /// Inserts a point given in map-origin frame; keeps the nearest point on
  /// pixel collision. Out-of-bounds projections are ignored.
  void insert(const Vec3& p_local);

  /// Batch merge: per pixel, the nearest candidate wins, and candidates whose
  /// range lies within `kBlendGate` of the nearest are averaged into it. An
  /// already-stored point within the gate is kept as-is, so re-observations
  /// only occlude (replace from in front, beyond the gate) but never nudge the
  /// stored surface. Order-independent within one batch. `weights` carries
  /// prior observation counts (empty: all 1).
  void merge(const std::vector<Vec3>& pts, const std::vector<int>& weights = {});

  static constexpr double kBlendGate = 0.1;  // meters

  std::vector<std::pair<int, int>> occupied_pixels() const;

 private:
  std::size_t idx(int u, int v) const { return static_cast<std::size_t>(v) * params_.width + u; }

  ProjectionParams params_;
  Pose origin_;
  std::vector<MapPoint> cells_;
  std::vector<char> occupied_;
};

struct VertexNormalMaps {
  int width = 0;
  int height = 0;
  std::vector<char> has_vertex;
  std::vector<char> has_normal;
  std::vector<Vec3> vertex;
  std::vector<Vec3> normal;
  std::vector<double> curvature;

  std::size_t idx(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  bool vertex_at(int u, int v) const { return has_vertex[idx(u, v)] != 0; }
  bool normal_at(int u, int v) const { return has_normal[idx(u, v)] != 0; }
};

/// Builds the initial map from scans taken at rest, at identity origin.
RangeImageMap initialize_map(const std::vector<Scan>& scans, const ProjectionParams& params);

/// Re-anchors the map at `new_origin`; points leaving the FoV are dropped.
RangeImageMap shift_origin(const RangeImageMap& map, const Pose& new_origin);

/// Merges a motion-compensated scan into the map (origin must already be the
/// scan-begin pose of `state`).
void update_map(RangeImageMap& map, const Scan& scan, const State& state);

/// Plane fits over k x k patches; emits normals for pixels whose curvature is
/// below delta_sigma. Normals are oriented toward the sensor.
VertexNormalMaps estimate_normals(const RangeImageMap& map, double delta_sigma,
                                  int patch = 5, int min_neighbors = 5, int workers = 1);

}  // namespace ctlo
