#include <doctest.h>

#include "movo/frontend.hpp"
#include "movo/synth.hpp"
#include "movo/twoview.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace movo;
namespace fs = std::filesystem;

TEST_CASE("generate_scene is bit-identical for a fixed seed") {
    const SyntheticScene a = generate_scene(SceneMode::GeneralDepth, 120, 5, 31);
    const SyntheticScene b = generate_scene(SceneMode::GeneralDepth, 120, 5, 31);
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].vec() == b.points[i].vec());
        CHECK(a.anchors[i] == b.anchors[i]);
    }
    for (size_t f = 0; f < a.trajectory.poses.size(); ++f) {
        CHECK(a.trajectory.poses[f].second.homogeneous() ==
              b.trajectory.poses[f].second.homogeneous());
    }
}

TEST_CASE("planar scenes place every point on the wall plane") {
    const SyntheticScene scene = generate_scene(SceneMode::Planar, 150, 6, 5);
    CHECK(scene.plane_z >= 10.0);
    for (const Point3& p : scene.points) {
        CHECK(std::abs(p.z - scene.plane_z) < 1e-9);
    }
}

TEST_CASE("general scenes have substantial depth spread") {
    const SyntheticScene scene = generate_scene(SceneMode::GeneralDepth, 200, 2, 6);
    const Pose w2c = scene.world_to_camera(0);
    double dmin = 1e18, dmax = 0.0;
    for (size_t i = 0; i < scene.points.size(); ++i) {
        const double z = w2c.apply(scene.points[i].vec()).z();
        dmin = std::min(dmin, z);
        dmax = std::max(dmax, z);
    }
    CHECK(dmin >= 2.0 - 1e-9);
    CHECK(dmax <= 50.0 + 1e-9);
    CHECK(dmax - dmin > 10.0);
}

TEST_CASE("pure rotation scenes never translate") {
    const SyntheticScene scene = generate_scene(SceneMode::PureRotation, 100, 8, 7);
    for (int f = 1; f < 8; ++f) {
        CHECK(scene.trajectory.poses[f].second.translation.norm() == 0.0);
        CHECK(scene.true_motion(f).translation.norm() < 1e-12);
        CHECK(rotation_angle(scene.true_motion(f).rotation) ==
              doctest::Approx(0.5 * M_PI / 180.0).epsilon(1e-9));
    }
}

TEST_CASE("relative motions compose back to the global trajectory") {
    const SyntheticScene scene = generate_scene(SceneMode::GeneralDepth, 100, 10, 8);
    Pose global = Pose::identity();
    for (int f = 1; f < 10; ++f) {
        global = compose(global, inverse(scene.true_motion(f)));
        const Eigen::Matrix4d expect = scene.trajectory.poses[f].second.homogeneous();
        CHECK((global.homogeneous() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("unit-speed forward motion has 1 m frame-to-frame baselines") {
    const SyntheticScene scene = generate_scene(SceneMode::GeneralDepth, 100, 10, 9);
    for (int f = 1; f < 10; ++f) {
        CHECK(scene.true_motion(f).translation.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("speed variation modulates the baseline length") {
    SceneOptions opts;
    opts.speed_variation = 0.5;
    const SyntheticScene scene = generate_scene(SceneMode::GeneralDepth, 100, 30, 10, opts);
    double bmin = 1e18, bmax = 0.0;
    for (int f = 1; f < 30; ++f) {
        const double b = scene.true_motion(f).translation.norm();
        bmin = std::min(bmin, b);
        bmax = std::max(bmax, b);
    }
    CHECK(bmin < 0.7);
    CHECK(bmax > 1.3);
}

TEST_CASE("exact matches project the same world point into both frames") {
    const SyntheticScene scene = generate_scene(SceneMode::GeneralDepth, 150, 4, 11);
    for (int f = 1; f < 4; ++f) {
        const auto matches = exact_matches(scene, f - 1, f);
        CHECK(matches.size() >= 30);
        const Pose w2a = scene.world_to_camera(f - 1);
        for (const auto& m : matches) {
            const Point3& wp = scene.points[m.id];
            const Point2 expect = project(Point3::from(w2a.apply(wp.vec())),
                                          Pose::identity(), scene.intrinsics);
            CHECK(std::hypot(m.prev.u - expect.u, m.prev.v - expect.v) < 1e-9);
        }
    }
}

TEST_CASE("outlier corruption replaces exactly the requested count") {
    const SyntheticScene scene = generate_scene(SceneMode::GeneralDepth, 200, 2, 12);
    const auto clean = exact_matches(scene, 0, 1);
    MatchOptions mo;
    mo.outlier_fraction = 0.25;
    const auto dirty = exact_matches(scene, 0, 1, mo);
    REQUIRE(clean.size() == dirty.size());
    const size_t n_out = static_cast<size_t>(std::floor(0.25 * clean.size()));
    size_t changed = 0;
    for (size_t i = 0; i < clean.size(); ++i) {
        const bool moved = clean[i].curr.u != dirty[i].curr.u ||
                           clean[i].curr.v != dirty[i].curr.v;
        if (i < n_out) {
            changed += moved ? 1 : 0;
        } else {
            CHECK_FALSE(moved);
        }
        CHECK(clean[i].prev.u == dirty[i].prev.u);
    }
    CHECK(changed >= n_out - 1);  // a random endpoint can coincide by chance
}

TEST_CASE("depth map carries the exact camera depth at feature pixels") {
    const SyntheticScene scene = generate_scene(SceneMode::GeneralDepth, 120, 2, 13);
    const DepthMap map = exact_depth_map(scene, 0);
    const Pose w2c = scene.world_to_camera(0);
    const CameraIntrinsics& k = scene.intrinsics;
    int checked = 0;
    for (const Point3& wp : scene.points) {
        const Eigen::Vector3d q = w2c.apply(wp.vec());
        if (q.z() < 0.2) continue;
        const int u = static_cast<int>(std::lround(k.fx * q.x() / q.z() + k.cx));
        const int v = static_cast<int>(std::lround(k.fy * q.y() / q.z() + k.cy));
        if (u < 0 || v < 0 || u >= map.width || v >= map.height) continue;
        const float d = map.at(u, v);
        // Exact unless a nearer splat center claimed the pixel.
        if (d == static_cast<float>(q.z())) ++checked;
    }
    CHECK(checked >= static_cast<int>(scene.points.size() * 3 / 4));
}

TEST_CASE("depth map is zero away from all splats") {
    const SyntheticScene scene = generate_scene(SceneMode::GeneralDepth, 60, 2, 14);
    const DepthMap map = exact_depth_map(scene, 0);
    const Pose w2c = scene.world_to_camera(0);
    const CameraIntrinsics& k = scene.intrinsics;
    int zero_checked = 0;
    for (int y = 0; y < map.height; y += 7) {
        for (int x = 0; x < map.width; x += 7) {
            double nearest = 1e18;
            for (const Point3& wp : scene.points) {
                const Eigen::Vector3d q = w2c.apply(wp.vec());
                if (q.z() < 0.2) continue;
                const double u = k.fx * q.x() / q.z() + k.cx;
                const double v = k.fy * q.y() / q.z() + k.cy;
                nearest = std::min(nearest, std::hypot(x - u, y - v));
            }
            if (nearest > 5.0) {
                CHECK(map.at(x, y) == 0.0f);
                ++zero_checked;
            }
        }
    }
    CHECK(zero_checked > 100);
}

TEST_CASE("triangulating exact matches with the true motion recovers depth") {
    const SyntheticScene scene = generate_scene(SceneMode::GeneralDepth, 150, 2, 15);
    const Pose motion = scene.true_motion(1);
    const Pose w2a = scene.world_to_camera(0);
    const auto matches = exact_matches(scene, 0, 1);
    for (const auto& m : matches) {
        const double true_depth = w2a.apply(scene.points[m.id].vec()).z();
        const Point3 rec = triangulate(m.prev, m.curr, motion, scene.intrinsics);
        CHECK(std::abs(rec.z - true_depth) < 1e-6 * true_depth);
    }
}

TEST_CASE("rendered frames are deterministic") {
    const SyntheticScene scene = generate_scene(SceneMode::Planar, 100, 2, 16);
    const GrayImage a = render_texture_frame(scene, 0);
    const GrayImage b = render_texture_frame(scene, 0);
    CHECK(a.data == b.data);
    CHECK(a.width == scene.width);
    CHECK(a.height == scene.height);
}

TEST_CASE("LK tracks on planar renders follow the analytic homography") {
    const SyntheticScene scene = generate_scene(SceneMode::Planar, 150, 2, 17);
    const GrayImage img0 = render_texture_frame(scene, 0);
    const GrayImage img1 = render_texture_frame(scene, 1);
    const MatchResult res = match_frames(img0, img1, {}, 0, DetectorConfig{});
    REQUIRE(res.matches.size() >= 30);

    // Frame 0 camera equals the world frame, so the plane is n^T X = d with
    // n = (0,0,1), d = plane_z: H = K (R + t n^T / d) K^-1.
    const Pose m = scene.true_motion(1);
    const Eigen::Matrix3d km = scene.intrinsics.matrix();
    const Eigen::Matrix3d h =
        km * (m.rotation + m.translation * Eigen::Vector3d(0, 0, 1).transpose() / scene.plane_z) *
        km.inverse();
    // Blob aliasing under the large near-edge flow derails a minority of
    // tracks both ways, so forward-backward cannot catch them; judge by the
    // bulk of the distribution.
    std::vector<double> errs;
    for (const auto& fm : res.matches) {
        const Eigen::Vector3d q = h * Eigen::Vector3d(fm.prev.u, fm.prev.v, 1.0);
        errs.push_back(std::hypot(q.x() / q.z() - fm.curr.u, q.y() / q.z() - fm.curr.v));
    }
    std::sort(errs.begin(), errs.end());
    CHECK(errs[errs.size() / 2] < 0.35);
    int good = 0;
    for (double e : errs) good += e < 0.35 ? 1 : 0;
    CHECK(good >= static_cast<int>(errs.size() * 6 / 10));
}

TEST_CASE("export_scene writes a loadable KITTI-layout dataset") {
    const SyntheticScene scene = generate_scene(SceneMode::GeneralDepth, 100, 3, 18);
    const fs::path root = fs::temp_directory_path() /
                          ("movo_synth_" + std::to_string(std::random_device{}()));
    const fs::path depth_root = root / "depth";
    export_scene(scene, root, "07", depth_root);

    const SequenceSource src = open_sequence(root, "07", depth_root);
    CHECK(src.frame_count == 3);
    CHECK(src.calib.fx == doctest::Approx(scene.intrinsics.fx).epsilon(1e-9));
    const GrayImage img = load_pgm(src.image_path(0));
    CHECK(img.width == scene.width);
    const DepthMap map = load_pfm(src.depth_path(1));
    CHECK(map.height == scene.height);
    REQUIRE(src.ground_truth.has_value());
    REQUIRE(src.ground_truth->size() == 3);
    CHECK((src.ground_truth->poses[2].second.translation -
           scene.trajectory.poses[2].second.translation)
              .norm() < 1e-9);
    fs::remove_all(root);
}
