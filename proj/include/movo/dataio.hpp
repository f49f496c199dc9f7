#pragma once

#include "movo/core.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace movo {

/// 8-bit grayscale image, row-major. Minimum 32x32 (pyramid construction floor).
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    std::uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
};

/// Dense per-pixel metric depth in meters. Non-positive values mark invalid pixels.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
};

/// Ordered global poses keyed by strictly increasing frame indices.
struct Trajectory {
    std::vector<std::pair<int, Pose>> poses;

    size_t size() const { return poses.size(); }
    bool empty() const { return poses.empty(); }
};

/// One KITTI-layout sequence: images, calibration, optional ground truth
/// and optional external depth maps.
struct SequenceSource {
    std::filesystem::path image_dir;
    CameraIntrinsics calib;
    std::optional<Trajectory> ground_truth;
    std::optional<std::filesystem::path> depth_dir;
    int frame_count = 0;

    std::filesystem::path image_path(int frame) const;
    std::filesystem::path depth_path(int frame) const;
};

CameraIntrinsics load_kitti_calib(const std::filesystem::path& path);

GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

DepthMap load_pfm(const std::filesystem::path& path);
void save_pfm(const DepthMap& map, const std::filesystem::path& path);

void write_kitti_poses(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_kitti_poses(const std::filesystem::path& path);

/// Zero-padded 6-digit frame stem, e.g. 000042.
std::string frame_stem(int frame);

/// Open `<root>/sequences/<seq>` with calib and, when present, ground truth at
/// `<root>/poses/<seq>.txt` and depth at `<depth_root>/<seq>`.
SequenceSource open_sequence(const std::filesystem::path& root, const std::string& seq,
                             const std::optional<std::filesystem::path>& depth_root);

}  // namespace movo
