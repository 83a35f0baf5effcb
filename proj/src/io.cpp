#include "ctlo/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ctlo {

namespace fs = std::filesystem;

namespace {

constexpr char kBinaryMagic[4] = {'C', 'T', 'S', 'C'};

Scan read_scan_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scan file: " + path);
  Scan scan;
  bool window_set = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      hs >> key;
      if (key == "window") {
        if (!(hs >> scan.t_b >> scan.t_e) || scan.t_e <= scan.t_b) {
          throw IoError(path + ":" + std::to_string(lineno) + ": bad window header");
        }
        window_set = true;
      }
      continue;
    }
    ScanPoint pt;
    char c1, c2, c3;
    std::istringstream row(line);
    if (!(row >> pt.position.x() >> c1 >> pt.position.y() >> c2 >> pt.position.z() >> c3 >>
          pt.t) ||
        c1 != ',' || c2 != ',' || c3 != ',' || !std::isfinite(pt.position.norm()) ||
        !std::isfinite(pt.t)) {
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    scan.points.push_back(pt);
  }
  if (!window_set && !scan.points.empty()) {
    scan.t_b = scan.points.front().t;
    scan.t_e = scan.points.back().t + 1e-6;
  }
  return scan;
}

std::vector<Scan> read_scans_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scan file: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kBinaryMagic, 4) != 0) {
    throw IoError(path + ": not a scan container (bad magic)");
  }
  std::vector<Scan> scans;
  while (true) {
    std::uint32_t count;
    if (!in.read(reinterpret_cast<char*>(&count), sizeof(count))) break;
    float tb, te;
    if (!in.read(reinterpret_cast<char*>(&tb), 4) || !in.read(reinterpret_cast<char*>(&te), 4)) {
      throw IoError(path + ": truncated scan record");
    }
    Scan scan;
    scan.t_b = tb;
    scan.t_e = te;
    scan.points.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      float f[4];
      if (!in.read(reinterpret_cast<char*>(f), sizeof(f))) {
        throw IoError(path + ": truncated scan record");
      }
      scan.points[i].position = Vec3(f[0], f[1], f[2]);
      scan.points[i].t = f[3];
    }
    scans.push_back(std::move(scan));
  }
  return scans;
}

}  // namespace

std::vector<Scan> read_scans(const std::string& path) {
  if (!fs::exists(path)) throw IoError("no such path: " + path);
  std::vector<Scan> scans;
  if (fs::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (!e.is_regular_file()) continue;
      const std::string ext = e.path().extension().string();
      if (ext == ".csv" || ext == ".bin") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    for (const std::string& f : files) {
      if (fs::path(f).extension() == ".bin") {
        auto part = read_scans_binary(f);
        scans.insert(scans.end(), part.begin(), part.end());
      } else {
        scans.push_back(read_scan_csv(f));
      }
    }
  } else if (path.size() > 4 && path.ends_with(".bin")) {
    scans = read_scans_binary(path);
  } else {
    scans.push_back(read_scan_csv(path));
  }
  for (std::size_t i = 1; i < scans.size(); ++i) {
    if (scans[i].t_b < scans[i - 1].t_b) {
      throw IoError(path + ": scans out of timestamp order");
    }
  }
  return scans;
}

void write_scans_csv(const std::vector<Scan>& scans, const std::string& dir,
                     const std::string& sensor_label) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < scans.size(); ++i) {
    std::ostringstream name;
    name << "scan_" << std::setw(6) << std::setfill('0') << i << ".csv";
    const std::string path = (fs::path(dir) / name.str()).string();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write scan file: " + path);
    out << "# sensor " << sensor_label << "\n";
    out << std::setprecision(17) << "# window " << scans[i].t_b << " " << scans[i].t_e << "\n";
    for (const ScanPoint& pt : scans[i].points) {
      out << pt.position.x() << "," << pt.position.y() << "," << pt.position.z() << "," << pt.t
          << "\n";
    }
  }
}

void write_scans_binary(const std::vector<Scan>& scans, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scan file: " + path);
  out.write(kBinaryMagic, 4);
  for (const Scan& scan : scans) {
    const std::uint32_t count = static_cast<std::uint32_t>(scan.points.size());
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    const float tb = static_cast<float>(scan.t_b), te = static_cast<float>(scan.t_e);
    out.write(reinterpret_cast<const char*>(&tb), 4);
    out.write(reinterpret_cast<const char*>(&te), 4);
    for (const ScanPoint& pt : scan.points) {
      const float f[4] = {static_cast<float>(pt.position.x()),
                          static_cast<float>(pt.position.y()),
                          static_cast<float>(pt.position.z()), static_cast<float>(pt.t)};
      out.write(reinterpret_cast<const char*>(f), sizeof(f));
    }
  }
}

namespace {

void write_pose_line(std::ostream& out, double t, const Pose& pose) {
  Eigen::Quaterniond q(pose.rotation);
  q.normalize();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  out << std::setprecision(15) << t << " " << pose.translation.x() << " "
      << pose.translation.y() << " " << pose.translation.z() << " " << q.x() << " " << q.y()
      << " " << q.z() << " " << q.w() << "\n";
}

}  // namespace

void write_trajectory(const std::vector<TrajectoryRecord>& records, const std::string& path,
                      bool write_begin) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trajectory: " + path);
  for (const TrajectoryRecord& rec : records) {
    if (write_begin) write_pose_line(out, rec.t_b, rec.T_b);
    write_pose_line(out, rec.t_e, rec.T_e);
  }
}

void write_trajectory(const std::vector<TrajectoryPose>& poses, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trajectory: " + path);
  for (const TrajectoryPose& tp : poses) write_pose_line(out, tp.t, tp.pose);
}

std::vector<TrajectoryPose> read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory: " + path);
  std::vector<TrajectoryPose> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    TrajectoryPose tp;
    double qx, qy, qz, qw;
    if (!(row >> tp.t >> tp.pose.translation.x() >> tp.pose.translation.y() >>
          tp.pose.translation.z() >> qx >> qy >> qz >> qw)) {
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed pose line");
    }
    tp.pose.rotation = Eigen::Quaterniond(qw, qx, qy, qz).normalized().toRotationMatrix();
    out.push_back(tp);
  }
  return out;
}

void export_map(const RangeImageMap& map, const VertexNormalMaps& maps,
                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write map: " + path);
  const auto pixels = map.occupied_pixels();
  out << "ply\nformat ascii 1.0\nelement vertex " << pixels.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nproperty float nx\n"
         "property float ny\nproperty float nz\nend_header\n";
  out << std::setprecision(10);
  for (auto [u, v] : pixels) {
    const Vec3& p = map.at(u, v).position;
    Vec3 n = Vec3::Zero();
    if (maps.width == map.params().width && maps.normal_at(u, v)) {
      n = maps.normal[maps.idx(u, v)];
    }
    out << p.x() << " " << p.y() << " " << p.z() << " " << n.x() << " " << n.y() << " " << n.z()
        << "\n";
  }
}

}  // namespace ctlo
