#include "movo/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>

namespace movo {

namespace {

constexpr double kGricUnavailable = 1e18;

std::uint64_t frame_seed(std::uint64_t base, int frame, std::uint64_t salt) {
    return base ^ (static_cast<std::uint64_t>(frame) * 0x9e3779b97f4a7c15ull) ^ salt;
}

}  // namespace

const char* to_string(MotionMethod m) {
    switch (m) {
        case MotionMethod::Essential: return "essential";
        case MotionMethod::Pnp: return "pnp";
        case MotionMethod::ConstantVelocity: return "constant_velocity";
    }
    return "unknown";
}

std::pair<Pose, FrameDecision> process_frame(PipelineState& state, const GrayImage& prev_img,
                                             const GrayImage& curr_img,
                                             const DepthInput& prev_depth,
                                             const PipelineConfig& cfg) {
    const int frame = ++state.frame_index;
    FrameDecision dec;
    dec.frame = frame;

    Pose motion = state.last_motion;  // constant-velocity default
    dec.method = MotionMethod::ConstantVelocity;
    double new_last_scale = state.last_scale;

    std::vector<FeatureMatch> matches;
    bool have_matches = false;
    try {
        MatchResult mr = match_frames(prev_img, curr_img, state.tracks, state.next_track_id,
                                      cfg.detector);
        matches = std::move(mr.matches);
        state.tracks = std::move(mr.tracks);
        state.next_track_id = mr.next_id;
        have_matches = true;
        dec.match_count = static_cast<int>(matches.size());
    } catch (const Error& e) {
        state.tracks.clear();
        dec.note = std::string("frontend: ") + e.what();
    }

    if (have_matches) {
        RansacConfig ecfg = cfg.essential_ransac;
        ecfg.seed = frame_seed(cfg.seed, frame, 0x0e55);
        RansacConfig hcfg = cfg.essential_ransac;
        hcfg.seed = frame_seed(cfg.seed, frame, 0x0411);
        RansacConfig pcfg = cfg.pnp_ransac;
        pcfg.seed = frame_seed(cfg.seed, frame, 0x0909);
        RansacConfig scfg = cfg.essential_ransac;
        scfg.seed = frame_seed(cfg.seed, frame, 0x5ca1);

        // Model scoring: Sampson residuals of F = K^-T E K^-1 vs symmetric
        // transfer residuals of H, over the full match set.
        EssentialResult emodel;
        bool have_e = false;
        dec.gric_f = kGricUnavailable;
        try {
            emodel = estimate_essential_matrix(matches, state.intrinsics, ecfg);
            const Eigen::Matrix3d kinv = state.intrinsics.matrix().inverse();
            const Eigen::Matrix3d f = kinv.transpose() * emodel.e * kinv;
            std::vector<double> res(matches.size());
            for (size_t i = 0; i < matches.size(); ++i) res[i] = sampson_sq(f, matches[i]);
            dec.gric_f = gric_score(res, GricModel::Fundamental,
                                    static_cast<int>(matches.size()), cfg.gric_sigma);
            have_e = true;
        } catch (const Error& e) {
            dec.note += std::string("essential-model: ") + e.what() + "; ";
        }

        dec.gric_h = kGricUnavailable;
        try {
            const HomographyResult hmodel = estimate_homography(matches, hcfg);
            std::vector<double> res(matches.size());
            for (size_t i = 0; i < matches.size(); ++i) {
                res[i] = symmetric_transfer_sq(hmodel.h, matches[i]);
            }
            dec.gric_h = gric_score(res, GricModel::Homography,
                                    static_cast<int>(matches.size()), cfg.gric_sigma);
        } catch (const Error& e) {
            dec.note += std::string("homography-model: ") + e.what() + "; ";
        }

        bool essential_done = false;
        if (have_e && dec.gric_f <= dec.gric_h) {
            try {
                std::vector<FeatureMatch> inliers;
                std::vector<int> orig;
                for (size_t i = 0; i < matches.size(); ++i) {
                    if (emodel.inlier_mask[i]) {
                        inliers.push_back(matches[i]);
                        orig.push_back(static_cast<int>(i));
                    }
                }
                auto [unit_motion, tri_local] =
                    decompose_essential(emodel.e, inliers, state.intrinsics);
                std::vector<std::pair<int, double>> triangulated;
                for (const auto& [li, depth] : tri_local) {
                    triangulated.emplace_back(orig[li], depth);
                }

                ScaleEstimate est{1.0, 0, 0};
                if (!prev_depth.provider) {
                    est.scale = 1.0;
                } else if (prev_depth.map == nullptr) {
                    est.scale = state.last_scale;
                    dec.note += "scale: depth file missing, keeping previous scale; ";
                } else {
                    try {
                        const auto samples =
                            collect_ratios(triangulated, *prev_depth.map, matches);
                        est = estimate_scale(samples, scfg, cfg.scale);
                        new_last_scale = est.scale;
                    } catch (const Error& e) {
                        est.scale = state.last_scale;
                        dec.note += std::string("scale: ") + e.what() +
                                    ", keeping previous scale; ";
                    }
                }
                motion = apply_scale(unit_motion, est);
                dec.method = MotionMethod::Essential;
                dec.scale = est.scale;
                dec.inlier_count = static_cast<int>(inliers.size());
                essential_done = true;
            } catch (const Error& e) {
                dec.note += std::string("essential-decompose: ") + e.what() + "; ";
            }
        }

        if (!essential_done) {
            // PnP on frame-(k-1) keypoints back-projected through the depth map.
            if (prev_depth.map != nullptr) {
                try {
                    std::vector<Correspondence3D2D> corrs;
                    for (const FeatureMatch& m : matches) {
                        const int px = static_cast<int>(std::lround(m.prev.u));
                        const int py = static_cast<int>(std::lround(m.prev.v));
                        if (px < 0 || py < 0 || px >= prev_depth.map->width ||
                            py >= prev_depth.map->height) {
                            continue;
                        }
                        const double d = prev_depth.map->at(px, py);
                        if (d <= 0.0) continue;
                        corrs.push_back({backproject(m.prev, d, state.intrinsics), m.curr});
                    }
                    const PnpResult pr =
                        solve_pnp(corrs, state.intrinsics, state.last_motion, pcfg);
                    motion = pr.motion;
                    dec.method = MotionMethod::Pnp;
                    dec.scale = 1.0;
                    int count = 0;
                    for (bool b : pr.inlier_mask) count += b ? 1 : 0;
                    dec.inlier_count = count;
                } catch (const Error& e) {
                    dec.note += std::string("pnp: ") + e.what() + "; ";
                }
            } else {
                dec.note += "pnp: no depth available; ";
            }
        }
    }

    if (dec.method == MotionMethod::ConstantVelocity) dec.scale = 1.0;

    motion.rotation = orthonormalize(motion.rotation);
    state.global = compose(state.global, inverse(motion));
    state.global.rotation = orthonormalize(state.global.rotation);
    state.last_motion = motion;
    state.last_scale = new_last_scale;
    return {state.global, dec};
}

std::pair<Trajectory, std::vector<FrameDecision>> process_sequence(const SequenceSource& src,
                                                                   const PipelineConfig& cfg) {
    if (src.frame_count < 2) throw Error("process_sequence: need at least 2 frames");

    Trajectory traj;
    std::vector<FrameDecision> decisions;
    PipelineState state;
    state.intrinsics = src.calib;
    traj.poses.emplace_back(0, Pose::identity());

    GrayImage prev = load_pgm(src.image_path(0));
    for (int f = 1; f < src.frame_count; ++f) {
        GrayImage curr = load_pgm(src.image_path(f));
        DepthMap depth;
        DepthInput din;
        din.provider = src.depth_dir.has_value();
        if (din.provider && std::filesystem::exists(src.depth_path(f - 1))) {
            depth = load_pfm(src.depth_path(f - 1));
            if (cfg.depth_scale != 1.0) {
                for (float& v : depth.data) {
                    v = static_cast<float>(v * cfg.depth_scale);
                }
            }
            din.map = &depth;
        }
        auto [global, dec] = process_frame(state, prev, curr, din, cfg);
        traj.poses.emplace_back(f, global);
        decisions.push_back(std::move(dec));
        prev = std::move(curr);
    }
    return {traj, decisions};
}

void write_decision_log(const std::vector<FrameDecision>& decisions,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write decision log: " + path.string());
    for (const FrameDecision& d : decisions) {
        nlohmann::json j{{"frame", d.frame},
                         {"method", to_string(d.method)},
                         {"gric_f", d.gric_f},
                         {"gric_h", d.gric_h},
                         {"match_count", d.match_count},
                         {"inlier_count", d.inlier_count},
                         {"scale", d.scale},
                         {"note", d.note}};
        out << j.dump() << '\n';
    }
}

}  // namespace movo
