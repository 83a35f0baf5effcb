#include "ctlo/range_image.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <unordered_map>

#include "ctlo/parallel.hpp"

namespace ctlo {

namespace {
// neighbor depth-compatibility gate for the patch plane fits; must exceed the
// range noise but stay below real depth steps in typical scenes
constexpr double kNormalRangeGate = 0.2;
}  // namespace

ProjectionParams ProjectionParams::FromDegrees(double fov_hor_deg, double fov_ver_deg,
                                               double beta_res_px_per_deg) {
  ProjectionParams p;
  p.fov_hor = fov_hor_deg * M_PI / 180.0;
  p.fov_ver = fov_ver_deg * M_PI / 180.0;
  p.beta_res = beta_res_px_per_deg;
  p.width = static_cast<int>(std::lround(fov_hor_deg * beta_res_px_per_deg));
  p.height = static_cast<int>(std::lround(fov_ver_deg * beta_res_px_per_deg));
  return p;
}

PixelCoord project(const Vec3& p, const ProjectionParams& params) {
  PixelCoord out;
  const double r = p.norm();
  if (r <= 0) return out;
  const double az = std::atan2(p.y(), p.x());
  const double el = std::asin(p.z() / r);
  const double uf = (0.5 + az / params.fov_hor) * params.width;
  const double vf = (0.5 - el / params.fov_ver) * params.height;
  out.u = static_cast<int>(std::floor(uf));
  out.v = static_cast<int>(std::floor(vf));
  out.in_bounds = out.u >= 0 && out.u < params.width && out.v >= 0 && out.v < params.height;
  return out;
}

RangeImageMap::RangeImageMap(const ProjectionParams& params)
    : params_(params),
      cells_(static_cast<std::size_t>(params.width) * params.height),
      occupied_(static_cast<std::size_t>(params.width) * params.height, 0) {}

std::size_t RangeImageMap::occupied_count() const {
  std::size_t n = 0;
  for (char c : occupied_) n += c != 0;
  return n;
}

void RangeImageMap::insert(const Vec3& p_local) {
  const double r = p_local.norm();
  if (r <= 0) return;
  const PixelCoord px = project(p_local, params_);
  if (!px.in_bounds) return;
  const std::size_t i = idx(px.u, px.v);
  if (!occupied_[i] || r < cells_[i].range) {
    cells_[i] = MapPoint{p_local, r};
    occupied_[i] = 1;
  }
}

void RangeImageMap::merge(const std::vector<Vec3>& pts, const std::vector<int>& weights) {
  // pass 1: nearest candidate range per touched pixel (map content included)
  std::unordered_map<std::size_t, double> min_range;
  std::vector<std::pair<std::size_t, double>> proj(pts.size(), {0, -1.0});
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double r = pts[k].norm();
    if (r <= 0) continue;
    const PixelCoord px = project(pts[k], params_);
    if (!px.in_bounds) continue;
    const std::size_t i = idx(px.u, px.v);
    proj[k] = {i, r};
    auto [it, fresh] = min_range.try_emplace(i, r);
    if (!fresh && r < it->second) it->second = r;
    if (occupied_[i] && cells_[i].range < it->second) it->second = cells_[i].range;
  }

  // pass 2: weighted mean of candidates within the gate of the nearest. The
  // gate must stay below the smallest real depth step in the scene (ledges,
  // crates) or points from different surfaces get averaged into off-surface
  // cells.
  struct Acc {
    Vec3 sum = Vec3::Zero();
    long w = 0;
  };
  std::unordered_map<std::size_t, Acc> acc;
  acc.reserve(min_range.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (proj[k].second < 0) continue;
    const std::size_t i = proj[k].first;
    if (proj[k].second > min_range[i] + kBlendGate) continue;
    const long w = weights.empty() ? 1 : weights[k];
    Acc& a = acc[i];
    a.sum += static_cast<double>(w) * pts[k];
    a.w += w;
  }
  for (auto& [i, a] : acc) {
    // an existing point within the gate joins the average with its stored hit
    // count as weight: re-observations shrink the cell's range noise as
    // 1/sqrt(hits), while the growing weight makes an established cell ever
    // stiffer against being dragged by pose-estimate error
    if (occupied_[i] && cells_[i].range <= min_range[i] + kBlendGate) {
      a.sum += static_cast<double>(cells_[i].hits) * cells_[i].position;
      a.w += cells_[i].hits;
    }
    const Vec3 mean = a.sum / static_cast<double>(a.w);
    cells_[i] = MapPoint{mean, mean.norm(), static_cast<int>(std::min<long>(a.w, 1 << 20))};
    occupied_[i] = 1;
  }
}

std::vector<std::pair<int, int>> RangeImageMap::occupied_pixels() const {
  std::vector<std::pair<int, int>> out;
  for (int v = 0; v < params_.height; ++v) {
    for (int u = 0; u < params_.width; ++u) {
      if (occupied_[idx(u, v)]) out.emplace_back(u, v);
    }
  }
  return out;
}

RangeImageMap initialize_map(const std::vector<Scan>& scans, const ProjectionParams& params) {
  if (scans.empty()) {
    throw std::invalid_argument("initialize_map: no scans provided");
  }
  RangeImageMap map(params);
  // one batch, so coincident observations from different scans average out
  std::vector<Vec3> pts;
  for (const Scan& scan : scans) {
    pts.reserve(pts.size() + scan.points.size());
    for (const ScanPoint& pt : scan.points) pts.push_back(pt.position);
  }
  map.merge(pts);
  return map;
}

RangeImageMap shift_origin(const RangeImageMap& map, const Pose& new_origin) {
  RangeImageMap out(map.params());
  out.set_origin(new_origin);
  const Pose rel = new_origin.inverse() * map.origin();
  std::vector<Vec3> pts;
  std::vector<int> weights;
  for (auto [u, v] : map.occupied_pixels()) {
    pts.push_back(rel * map.at(u, v).position);
    weights.push_back(map.at(u, v).hits);
  }
  out.merge(pts, weights);
  return out;
}

void update_map(RangeImageMap& map, const Scan& scan, const State& state) {
  std::vector<Vec3> world = compensate(scan, state);
  const Pose inv_origin = map.origin().inverse();
  for (Vec3& p : world) p = inv_origin * p;
  map.merge(world);
}

VertexNormalMaps estimate_normals(const RangeImageMap& map, double delta_sigma, int patch,
                                  int min_neighbors, int workers) {
  const int w = map.params().width;
  const int h = map.params().height;
  VertexNormalMaps out;
  out.width = w;
  out.height = h;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  out.has_vertex.assign(n, 0);
  out.has_normal.assign(n, 0);
  out.vertex.assign(n, Vec3::Zero());
  out.normal.assign(n, Vec3::Zero());
  out.curvature.assign(n, 0.0);

  const int half = patch / 2;
  parallel_for(static_cast<std::size_t>(h), workers, [&](std::size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < w; ++u) {
      if (!map.occupied(u, v)) continue;
      const std::size_t i = out.idx(u, v);
      const Vec3 center = map.at(u, v).position;
      out.has_vertex[i] = 1;
      out.vertex[i] = center;

      Vec3 sum = Vec3::Zero();
      Mat3 sq = Mat3::Zero();
      int count = 0;
      for (int dv = -half; dv <= half; ++dv) {
        const int vv = v + dv;
        if (vv < 0 || vv >= h) continue;
        for (int du = -half; du <= half; ++du) {
          const int uu = u + du;
          if (uu < 0 || uu >= w || !map.occupied(uu, vv)) continue;
          // keep the fit one-sided at depth discontinuities: a patch spanning
          // two surfaces (e.g. a ledge in front of a wall) would otherwise
          // yield a tilted normal that belongs to neither
          if (std::abs(map.at(uu, vv).range - map.at(u, v).range) > kNormalRangeGate) continue;
          const Vec3 q = map.at(uu, vv).position;
          sum += q;
          sq += q * q.transpose();
          ++count;
        }
      }
      if (count < min_neighbors) continue;

      const Vec3 mean = sum / count;
      const Mat3 cov = sq / count - mean * mean.transpose();
      Eigen::SelfAdjointEigenSolver<Mat3> eig;
      eig.computeDirect(cov);
      const double lambda_sum = eig.eigenvalues().sum();
      if (lambda_sum <= 0) continue;
      const double curvature = eig.eigenvalues()(0) / lambda_sum;
      if (curvature >= delta_sigma) continue;

      Vec3 normal = eig.eigenvectors().col(0);
      if (normal.dot(center) > 0) normal = -normal;  // toward sensor
      out.has_normal[i] = 1;
      out.normal[i] = normal;
      out.curvature[i] = curvature;
    }
  });
  return out;
}

}  // namespace ctlo
