#pragma once

#include <string>
#include <vector>

#include "ctlo/motion.hpp"
#include "ctlo/pipeline.hpp"
#include "ctlo/range_image.hpp"

namespace ctlo {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads scans from a .csv / .bin file or a directory of them.
/// CSV: '#' header lines ("# window <t_b> <t_e>", "# sensor <label>") then
/// "x,y,z,t" rows. Binary: "CTSC" magic then per-scan records
/// [u32 count][f32 t_b][f32 t_e][count * (f32 x,y,z,t)], little-endian.
std::vector<Scan> read_scans(const std::string& path);

void write_scans_csv(const std::vector<Scan>& scans, const std::string& dir,
                     const std::string& sensor_label = "sim");
void write_scans_binary(const std::vector<Scan>& scans, const std::string& path);

struct TrajectoryPose {
  double t = 0;
  Pose pose;
};

/// "timestamp tx ty tz qx qy qz qw" lines; emits T_e at t_e, plus T_b lines
/// when write_begin is set.
void write_trajectory(const std::vector<TrajectoryRecord>& records, const std::string& path,
                      bool write_begin = false);
void write_trajectory(const std::vector<TrajectoryPose>& poses, const std::string& path);
std::vector<TrajectoryPose> read_trajectory(const std::string& path);

/// ASCII PLY with x y z nx ny nz per occupied pixel (zero normal when the
/// plane fit rejected the pixel).
void export_map(const RangeImageMap& map, const VertexNormalMaps& maps, const std::string& path);

}  // namespace ctlo
