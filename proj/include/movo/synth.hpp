#pragma once

#include "movo/core.hpp"
#include "movo/dataio.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace movo {

enum class SceneMode { GeneralDepth, Planar, PureRotation };

struct SceneOptions {
    double speed = 1.0;              // meters per frame
    double speed_variation = 0.0;    // sinusoidal amplitude as a fraction of speed
    double yaw_rate_deg = 0.5;       // degrees per frame
    int width = 640;
    int height = 480;
    CameraIntrinsics intrinsics{525.0, 525.0, 319.5, 239.5};
};

/// Ground-truth scene: world points each anchored to a consecutive-frame pair,
/// a smooth forward-arc camera trajectory, and exact projection geometry.
struct SyntheticScene {
    std::vector<Point3> points;       // world coordinates
    std::vector<int> anchors;         // anchor frame per point (visible at anchor, anchor+1)
    Trajectory trajectory;            // camera-to-world global poses
    CameraIntrinsics intrinsics;
    SceneMode mode = SceneMode::GeneralDepth;
    int width = 0;
    int height = 0;
    std::uint64_t seed = 0;
    double plane_z = 0.0;             // world z of the wall (Planar mode)

    /// World-to-camera transform of a frame.
    Pose world_to_camera(int frame) const;
    /// Ground-truth relative motion T_k (frame k-1 into frame k).
    Pose true_motion(int frame) const;
};

SyntheticScene generate_scene(SceneMode mode, int n_points, int n_frames, std::uint64_t seed,
                              const SceneOptions& opts = {});

struct MatchOptions {
    double noise_sigma = 0.0;       // px, Gaussian on both endpoints
    double outlier_fraction = 0.0;  // exact floor(fraction * n) matches corrupted
    std::uint64_t seed = 0;
};

/// Projections of points co-visible in two consecutive frames. Match id is the
/// point index; corrupted matches get a uniform random curr endpoint.
std::vector<FeatureMatch> exact_matches(const SyntheticScene& scene, int frame_a, int frame_b,
                                        const MatchOptions& opts = {});

/// Depth from point splats with 3 px radius; 0 (invalid) elsewhere. The pixel
/// nearest a projected point carries that point's exact camera-frame depth.
DepthMap exact_depth_map(const SyntheticScene& scene, int frame);

/// LK-trackable rendering: Gaussian blobs at feature projections, plus a
/// plane-attached procedural texture in Planar mode.
GrayImage render_texture_frame(const SyntheticScene& scene, int frame);

/// Write the scene as a KITTI-layout dataset (images, calib, gt poses, depth).
void export_scene(const SyntheticScene& scene, const std::filesystem::path& root,
                  const std::string& seq, const std::filesystem::path& depth_root);

}  // namespace movo
