#include "movo/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace movo {

namespace {

constexpr double kDeg = M_PI / 180.0;

Eigen::Matrix3d yaw_rotation(double angle) {
    Eigen::Matrix3d r;
    const double c = std::cos(angle), s = std::sin(angle);
    // Rotation about the camera's +y (down) axis.
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
}

bool visible_in(const SyntheticScene& scene, const Point3& world, int frame, double margin) {
    const Pose w2c = scene.world_to_camera(frame);
    const Eigen::Vector3d q = w2c.apply(world.vec());
    if (q.z() < 0.2) return false;
    const CameraIntrinsics& k = scene.intrinsics;
    const double u = k.fx * q.x() / q.z() + k.cx;
    const double v = k.fy * q.y() / q.z() + k.cy;
    return u >= margin && v >= margin && u < scene.width - margin && v < scene.height - margin;
}

}  // namespace

Pose SyntheticScene::world_to_camera(int frame) const {
    return inverse(trajectory.poses[frame].second);
}

Pose SyntheticScene::true_motion(int frame) const {
    // T_k = inverse(C_k) * C_{k-1}
    return compose(world_to_camera(frame), trajectory.poses[frame - 1].second);
}

SyntheticScene generate_scene(SceneMode mode, int n_points, int n_frames, std::uint64_t seed,
                              const SceneOptions& opts) {
    if (n_points < 50) throw Error("generate_scene: n_points must be >= 50");
    if (n_frames < 2) throw Error("generate_scene: n_frames must be >= 2");

    SyntheticScene scene;
    scene.mode = mode;
    scene.intrinsics = opts.intrinsics;
    scene.width = opts.width;
    scene.height = opts.height;
    scene.seed = seed;

    // Forward arc: yaw accumulates, position advances along the heading.
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    double max_forward = 0.0;
    for (int f = 0; f < n_frames; ++f) {
        const double yaw = f * opts.yaw_rate_deg * kDeg;
        Pose c;
        c.rotation = yaw_rotation(yaw);
        c.translation = position;
        scene.trajectory.poses.emplace_back(f, c);
        max_forward = std::max(max_forward, position.z());
        if (mode != SceneMode::PureRotation) {
            const double speed =
                opts.speed * (1.0 + opts.speed_variation * std::sin(2.0 * M_PI * f / 40.0));
            position += c.rotation * Eigen::Vector3d(0, 0, speed);
        }
    }
    scene.plane_z = std::max(10.0, max_forward + 5.0);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> upix(20.0, scene.width - 20.0);
    std::uniform_real_distribution<double> vpix(20.0, scene.height - 20.0);
    std::uniform_real_distribution<double> udepth(2.0, 50.0);

    const CameraIntrinsics& k = scene.intrinsics;
    const int n_anchors = n_frames - 1;
    for (int i = 0; i < n_points; ++i) {
        const int anchor = i % n_anchors;
        const Pose cam = scene.trajectory.poses[anchor].second;  // camera-to-world
        Point3 world;
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const double u = upix(rng);
            const double v = vpix(rng);
            const Eigen::Vector3d ray = normalize({u, v}, k);
            Eigen::Vector3d p_cam;
            if (mode == SceneMode::Planar) {
                // Intersect the pixel ray with the world plane z = plane_z.
                const Eigen::Vector3d d = cam.rotation * ray;
                if (d.z() < 1e-6) continue;
                const double s = (scene.plane_z - cam.translation.z()) / d.z();
                if (s <= 0.2) continue;
                world = Point3::from(cam.translation + s * d);
            } else {
                p_cam = udepth(rng) * ray;
                world = Point3::from(cam.apply(p_cam));
            }
            if (visible_in(scene, world, anchor, 10.0) &&
                visible_in(scene, world, anchor + 1, 10.0)) {
                placed = true;
            }
        }
        if (!placed) {
            // Dead-center fallback; always visible for the motions generated here.
            const Eigen::Vector3d ray = normalize({k.cx, k.cy}, k);
            if (mode == SceneMode::Planar) {
                const Eigen::Vector3d d = cam.rotation * ray;
                const double s = (scene.plane_z - cam.translation.z()) / d.z();
                world = Point3::from(cam.translation + s * d);
            } else {
                world = Point3::from(cam.apply(20.0 * ray));
            }
        }
        scene.points.push_back(world);
        scene.anchors.push_back(anchor);
    }
    return scene;
}

std::vector<FeatureMatch> exact_matches(const SyntheticScene& scene, int frame_a, int frame_b,
                                        const MatchOptions& opts) {
    const Pose w2a = scene.world_to_camera(frame_a);
    const Pose w2b = scene.world_to_camera(frame_b);
    const CameraIntrinsics& k = scene.intrinsics;

    std::vector<FeatureMatch> matches;
    for (size_t i = 0; i < scene.points.size(); ++i) {
        const Eigen::Vector3d pa = w2a.apply(scene.points[i].vec());
        const Eigen::Vector3d pb = w2b.apply(scene.points[i].vec());
        if (pa.z() < 0.2 || pb.z() < 0.2) continue;
        const Point2 xa{k.fx * pa.x() / pa.z() + k.cx, k.fy * pa.y() / pa.z() + k.cy};
        const Point2 xb{k.fx * pb.x() / pb.z() + k.cx, k.fy * pb.y() / pb.z() + k.cy};
        if (xa.u < 0 || xa.v < 0 || xa.u >= scene.width || xa.v >= scene.height) continue;
        if (xb.u < 0 || xb.v < 0 || xb.u >= scene.width || xb.v >= scene.height) continue;
        matches.push_back({xa, xb, static_cast<std::int64_t>(i)});
    }

    std::mt19937_64 rng(scene.seed ^ opts.seed ^
                        (static_cast<std::uint64_t>(frame_a) << 32 | static_cast<std::uint64_t>(frame_b)));
    if (opts.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, opts.noise_sigma);
        for (auto& m : matches) {
            m.prev.u += noise(rng);
            m.prev.v += noise(rng);
            m.curr.u += noise(rng);
            m.curr.v += noise(rng);
        }
    }
    if (opts.outlier_fraction > 0.0) {
        const size_t n_out =
            static_cast<size_t>(std::floor(opts.outlier_fraction * matches.size()));
        std::uniform_real_distribution<double> uu(0.0, scene.width - 1.0);
        std::uniform_real_distribution<double> vv(0.0, scene.height - 1.0);
        for (size_t i = 0; i < n_out; ++i) {
            matches[i].curr = {uu(rng), vv(rng)};
        }
    }
    return matches;
}

DepthMap exact_depth_map(const SyntheticScene& scene, int frame) {
    DepthMap map;
    map.width = scene.width;
    map.height = scene.height;
    map.data.assign(static_cast<size_t>(map.width) * map.height, 0.0f);
    std::vector<float> center_dist(map.data.size(), 1e9f);

    const Pose w2c = scene.world_to_camera(frame);
    const CameraIntrinsics& k = scene.intrinsics;
    constexpr int radius = 3;
    for (const Point3& wp : scene.points) {
        const Eigen::Vector3d q = w2c.apply(wp.vec());
        if (q.z() < 0.2) continue;
        const double u = k.fx * q.x() / q.z() + k.cx;
        const double v = k.fy * q.y() / q.z() + k.cy;
        const int cu = static_cast<int>(std::lround(u));
        const int cv = static_cast<int>(std::lround(v));
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                if (dx * dx + dy * dy > radius * radius) continue;
                const int x = cu + dx, y = cv + dy;
                if (x < 0 || y < 0 || x >= map.width || y >= map.height) continue;
                const float du = static_cast<float>(x - u);
                const float dv = static_cast<float>(y - v);
                const float dist = du * du + dv * dv;
                const size_t idx = static_cast<size_t>(y) * map.width + x;
                // Nearest splat center wins; nearer depth breaks exact ties.
                if (dist < center_dist[idx] ||
                    (dist == center_dist[idx] && q.z() < map.data[idx])) {
                    center_dist[idx] = dist;
                    map.data[idx] = static_cast<float>(q.z());
                }
            }
        }
    }
    return map;
}

GrayImage render_texture_frame(const SyntheticScene& scene, int frame) {
    GrayImage img;
    img.width = scene.width;
    img.height = scene.height;
    img.data.assign(static_cast<size_t>(img.width) * img.height, 0);

    std::vector<double> accum(img.data.size(), 10.0);

    if (scene.mode == SceneMode::Planar) {
        // Plane-attached smooth texture so consecutive frames relate by the
        // ground-truth homography.
        const Pose c2w = scene.trajectory.poses[frame].second;
        const CameraIntrinsics& k = scene.intrinsics;
        std::mt19937_64 rng(scene.seed ^ 0x7e57u);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
        const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                const Eigen::Vector3d d =
                    c2w.rotation * normalize({static_cast<double>(x), static_cast<double>(y)}, k);
                if (d.z() < 1e-6) continue;
                const double s = (scene.plane_z - c2w.translation.z()) / d.z();
                if (s <= 0.0) continue;
                const Eigen::Vector3d p = c2w.translation + s * d;
                const double t = std::sin(0.8 * p.x() + p1) * std::sin(0.9 * p.y() + p2) +
                                 0.5 * std::sin(0.3 * p.x() + 0.4 * p.y() + p3);
                accum[static_cast<size_t>(y) * img.width + x] += 40.0 + 25.0 * t;
            }
        }
    }

    // Gaussian blobs at feature projections give FAST/LK something to lock onto.
    const Pose w2c = scene.world_to_camera(frame);
    const CameraIntrinsics& k = scene.intrinsics;
    constexpr double sigma = 1.6;
    constexpr double amp = 200.0;
    constexpr int rad = 6;
    for (const Point3& wp : scene.points) {
        const Eigen::Vector3d q = w2c.apply(wp.vec());
        if (q.z() < 0.2) continue;
        const double u = k.fx * q.x() / q.z() + k.cx;
        const double v = k.fy * q.y() / q.z() + k.cy;
        if (u < -rad || v < -rad || u >= img.width + rad || v >= img.height + rad) continue;
        const int cu = static_cast<int>(std::lround(u));
        const int cv = static_cast<int>(std::lround(v));
        for (int dy = -rad; dy <= rad; ++dy) {
            for (int dx = -rad; dx <= rad; ++dx) {
                const int x = cu + dx, y = cv + dy;
                if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
                const double du = x - u, dv = y - v;
                accum[static_cast<size_t>(y) * img.width + x] +=
                    amp * std::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma));
            }
        }
    }

    for (size_t i = 0; i < accum.size(); ++i) {
        img.data[i] = static_cast<std::uint8_t>(std::clamp(accum[i], 0.0, 255.0));
    }
    return img;
}

void export_scene(const SyntheticScene& scene, const std::filesystem::path& root,
                  const std::string& seq, const std::filesystem::path& depth_root) {
    namespace fs = std::filesystem;
    const fs::path seq_dir = root / "sequences" / seq;
    const fs::path img_dir = seq_dir / "image_0";
    const fs::path pose_dir = root / "poses";
    const fs::path depth_dir = depth_root / seq;
    fs::create_directories(img_dir);
    fs::create_directories(pose_dir);
    fs::create_directories(depth_dir);

    {
        std::ofstream calib(seq_dir / "calib.txt");
        if (!calib) throw IoError("cannot write calib.txt");
        const CameraIntrinsics& k = scene.intrinsics;
        char buf[256];
        std::snprintf(buf, sizeof(buf), "P0: %.9e 0 %.9e 0 0 %.9e %.9e 0 0 0 1 0\n", k.fx, k.cx,
                      k.fy, k.cy);
        calib << buf;
    }
    write_kitti_poses(scene.trajectory, pose_dir / (seq + ".txt"));
    const int n = static_cast<int>(scene.trajectory.poses.size());
    for (int f = 0; f < n; ++f) {
        save_pgm(render_texture_frame(scene, f), img_dir / (frame_stem(f) + ".pgm"));
        save_pfm(exact_depth_map(scene, f), depth_dir / (frame_stem(f) + ".pfm"));
    }
}

}  // namespace movo
