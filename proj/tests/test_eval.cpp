#include <doctest.h>

#include "movo/eval.hpp"

#include <cmath>
#include <random>

using namespace movo;

namespace {

Trajectory straight_line(int n, double step, double y = 0.0) {
    Trajectory t;
    for (int i = 0; i < n; ++i) {
        Pose p;
        p.translation = {0.0, y, step * i};
        t.poses.emplace_back(i, p);
    }
    return t;
}

Trajectory transform_all(const Trajectory& in, double s, const Eigen::Matrix3d& r,
                         const Eigen::Vector3d& t) {
    Trajectory out = in;
    for (auto& [frame, pose] : out.poses) {
        (void)frame;
        pose.translation = s * r * pose.translation + t;
        pose.rotation = r * pose.rotation;
    }
    return out;
}

Trajectory random_walk(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nr(0.0, 0.02), nt(0.0, 1.0);
    Trajectory t;
    Pose cur = Pose::identity();
    for (int i = 0; i < n; ++i) {
        t.poses.emplace_back(i, cur);
        Pose step;
        step.rotation = exp_so3({nr(rng), nr(rng), nr(rng)});
        step.translation = {nt(rng), nt(rng), nt(rng)};
        cur = compose(cur, step);
    }
    return t;
}

}  // namespace

TEST_CASE("aligning a trajectory onto itself leaves it unchanged") {
    const Trajectory t = random_walk(30, 1);
    for (AlignMode mode : {AlignMode::Rigid6DoF, AlignMode::Similarity7DoF}) {
        const Trajectory a = umeyama_align(t, t, mode);
        CHECK(ate(a, t) < 1e-9);
    }
}

TEST_CASE("7DoF alignment undoes a similarity transform exactly") {
    const Trajectory gt = random_walk(40, 2);
    const Eigen::Matrix3d r = exp_so3({0.3, -0.4, 0.2});
    const Trajectory est = transform_all(gt, 3.7, r, {5.0, -2.0, 11.0});
    const Trajectory a = umeyama_align(est, gt, AlignMode::Similarity7DoF);
    CHECK(ate(a, gt) < 1e-9);
    // Rotations are corrected by the same aligning rotation.
    CHECK(a.poses[7].second.rotation.isApprox(gt.poses[7].second.rotation, 1e-9));
}

TEST_CASE("6DoF alignment undoes a rigid transform but not scale") {
    const Trajectory gt = random_walk(40, 3);
    const Eigen::Matrix3d r = exp_so3({-0.2, 0.1, 0.5});
    const Trajectory rigid = transform_all(gt, 1.0, r, {1.0, 2.0, 3.0});
    CHECK(ate(umeyama_align(rigid, gt, AlignMode::Rigid6DoF), gt) < 1e-9);

    const Trajectory scaled = transform_all(gt, 2.0, Eigen::Matrix3d::Identity(),
                                            Eigen::Vector3d::Zero());
    CHECK(ate(umeyama_align(scaled, gt, AlignMode::Rigid6DoF), gt) > 1.0);
    // The similarity alignment recovers the same data exactly.
    CHECK(ate(umeyama_align(scaled, gt, AlignMode::Similarity7DoF), gt) < 1e-9);
}

TEST_CASE("align mode None passes the input through") {
    const Trajectory gt = random_walk(10, 4);
    const Trajectory est = transform_all(gt, 1.0, Eigen::Matrix3d::Identity(), {7.0, 0.0, 0.0});
    const Trajectory a = umeyama_align(est, gt, AlignMode::None);
    CHECK(ate(a, gt) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("alignment of coincident estimated positions is degenerate") {
    const Trajectory gt = random_walk(5, 5);
    Trajectory est = gt;
    for (auto& [frame, pose] : est.poses) {
        (void)frame;
        pose.translation.setZero();
    }
    CHECK_THROWS_AS(umeyama_align(est, gt, AlignMode::Similarity7DoF), DegenerateTrajectory);
}

TEST_CASE("ate of identical trajectories is zero") {
    const Trajectory t = random_walk(20, 6);
    CHECK(ate(t, t) == 0.0);
}

TEST_CASE("ate is the RMSE of position differences") {
    // Offsets of 3, 4, 5 meters: RMSE = sqrt((9+16+25)/3).
    Trajectory gt = straight_line(3, 10.0);
    Trajectory est = gt;
    est.poses[0].second.translation.x() += 3.0;
    est.poses[1].second.translation.x() += 4.0;
    est.poses[2].second.translation.x() += 5.0;
    CHECK(ate(est, gt) == doctest::Approx(std::sqrt(50.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("ate requires equal lengths") {
    const Trajectory a = straight_line(5, 1.0);
    const Trajectory b = straight_line(6, 1.0);
    CHECK_THROWS_AS(ate(a, b), LengthMismatch);
}

TEST_CASE("rpe of identical trajectories is zero") {
    const Trajectory t = random_walk(25, 7);
    const auto [rt, rr] = rpe(t, t);
    CHECK(rt < 1e-12);
    // arccos near 1 limits rotation-angle precision to about sqrt(machine eps).
    CHECK(rr < 1e-5);
}

TEST_CASE("rpe measures a constructed per-frame offset") {
    // gt steps 1 m in z; est steps 1 m in z plus 0.1 m in x each frame:
    // every relative-pose error is exactly 0.1 m, no rotation error.
    Trajectory gt = straight_line(11, 1.0);
    Trajectory est = gt;
    for (int i = 0; i < 11; ++i) est.poses[i].second.translation.x() = 0.1 * i;
    const auto [rt, rr] = rpe(est, gt);
    CHECK(rt == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(rr == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("rpe reports a pure per-frame rotation error in degrees") {
    Trajectory gt = straight_line(6, 1.0);
    Trajectory est = gt;
    const double angle = 2.0 * M_PI / 180.0;
    for (int i = 0; i < 6; ++i) {
        est.poses[i].second.rotation = exp_so3({0.0, angle * i, 0.0});
    }
    const auto [rt, rr] = rpe(est, gt);
    (void)rt;
    CHECK(rr == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("segment errors vanish for a perfect estimate") {
    const Trajectory gt = straight_line(1200, 1.0);  // 1.2 km straight
    const auto [te, re] = kitti_seg_errors(gt, gt);
    CHECK(te == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(re == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("a 1 percent scale error shows up as roughly 1 percent drift") {
    const Trajectory gt = straight_line(1101, 1.0);  // 1.1 km
    const Trajectory est = transform_all(gt, 1.01, Eigen::Matrix3d::Identity(),
                                         Eigen::Vector3d::Zero());
    const auto [te, re] = kitti_seg_errors(est, gt);
    CHECK(te == doctest::Approx(1.0).epsilon(0.05));
    CHECK(re < 1e-9);
}

TEST_CASE("segment errors need at least 100 m of ground truth") {
    const Trajectory gt = straight_line(50, 1.0);  // 49 m
    CHECK_THROWS_AS(kitti_seg_errors(gt, gt), TooShort);
}

TEST_CASE("segment errors are invariant to a rigid transform of the estimate") {
    const Trajectory gt = straight_line(900, 1.0);
    Trajectory est = gt;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 0.5);
    for (auto& [frame, pose] : est.poses) {
        (void)frame;
        pose.translation.x() += n(rng) * 0.01;
    }
    const auto [t1, r1] = kitti_seg_errors(est, gt);
    const Eigen::Matrix3d r = exp_so3({0.1, 0.7, -0.3});
    const Trajectory moved = transform_all(est, 1.0, r, {100.0, -50.0, 3.0});
    const auto [t2, r2] = kitti_seg_errors(moved, gt);
    CHECK(t2 == doctest::Approx(t1).epsilon(1e-9));
    CHECK(r2 == doctest::Approx(r1).epsilon(1e-6));
}

TEST_CASE("evaluate aligns then reports all metrics") {
    const Trajectory gt = straight_line(600, 1.0);
    const Eigen::Matrix3d r = exp_so3({0.0, 0.2, 0.0});
    const Trajectory est = transform_all(gt, 1.0, r, {3.0, 0.0, -2.0});
    const MetricsReport rep = evaluate(est, gt, AlignMode::Rigid6DoF);
    CHECK(rep.ate < 1e-9);
    CHECK(rep.rpe_t < 1e-9);
    CHECK(rep.t_err < 1e-9);

    // Short trajectories: segment errors fall back to zero instead of throwing.
    const Trajectory short_gt = straight_line(20, 1.0);
    const MetricsReport short_rep = evaluate(short_gt, short_gt, AlignMode::None);
    CHECK(short_rep.t_err == 0.0);
    CHECK(short_rep.r_err == 0.0);
}
