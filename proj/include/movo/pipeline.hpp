#pragma once

#include "movo/core.hpp"
#include "movo/dataio.hpp"
#include "movo/frontend.hpp"
#include "movo/pnp.hpp"
#include "movo/scale.hpp"
#include "movo/twoview.hpp"

#include <optional>
#include <string>
#include <vector>

namespace movo {

enum class MotionMethod { Essential, Pnp, ConstantVelocity };

const char* to_string(MotionMethod m);

/// Per-frame record of which motion model ran and why.
struct FrameDecision {
    int frame = 0;
    MotionMethod method = MotionMethod::ConstantVelocity;
    double gric_f = 0.0;
    double gric_h = 0.0;
    int match_count = 0;
    int inlier_count = 0;
    double scale = 1.0;
    std::string note;  // fallback reason, empty on the clean path
};

struct PipelineConfig {
    DetectorConfig detector;
    RansacConfig essential_ransac;                 // threshold 1 px
    RansacConfig pnp_ransac{2000, 2.0, 0, 0.99};   // reprojection gate 2 px
    ScaleConfig scale;
    double gric_sigma = 1.0;
    double depth_scale = 1.0;  // multiplier applied to loaded depth values
    std::uint64_t seed = 0;
};

/// Mutable per-sequence state threaded through process_frame.
struct PipelineState {
    Pose global;               // accumulated camera-to-world pose
    Pose last_motion;          // previous frame-to-frame motion (for CV fallback / PnP init)
    double last_scale = 1.0;
    std::vector<Track> tracks;
    std::int64_t next_track_id = 0;
    CameraIntrinsics intrinsics;
    int frame_index = 0;
};

/// Depth for the previous frame. `provider` distinguishes "no depth source
/// configured" (unscaled run) from "file missing mid-sequence" (keep the
/// previous scale).
struct DepthInput {
    const DepthMap* map = nullptr;
    bool provider = false;
};

/// One step of the VO loop: track, GRIC-select essential vs PnP, recover
/// scale, accumulate the global pose. Never throws; failures degrade to the
/// constant-velocity fallback and are recorded in the decision.
std::pair<Pose, FrameDecision> process_frame(PipelineState& state, const GrayImage& prev_img,
                                             const GrayImage& curr_img,
                                             const DepthInput& prev_depth,
                                             const PipelineConfig& cfg);

/// Run the whole sequence; frame 0 is the identity pose.
std::pair<Trajectory, std::vector<FrameDecision>> process_sequence(const SequenceSource& src,
                                                                   const PipelineConfig& cfg);

/// One JSON object per line, schema documented in the README.
void write_decision_log(const std::vector<FrameDecision>& decisions,
                        const std::filesystem::path& path);

}  // namespace movo
