#include "movo/eval.hpp"

#include <cmath>

namespace movo {

namespace {

void check_lengths(const Trajectory& est, const Trajectory& gt, size_t min_len) {
    if (est.size() != gt.size()) {
        throw LengthMismatch("trajectory lengths differ");
    }
    if (est.size() < min_len) {
        throw LengthMismatch("trajectories too short for this metric");
    }
}

Pose relative(const Pose& a, const Pose& b) {
    // Motion from a to b: inverse(a) * b.
    return compose(inverse(a), b);
}

}  // namespace

Trajectory umeyama_align(const Trajectory& est, const Trajectory& gt, AlignMode mode) {
    if (mode == AlignMode::None) return est;
    check_lengths(est, gt, 3);
    const int n = static_cast<int>(est.size());

    Eigen::Vector3d mean_e = Eigen::Vector3d::Zero();
    Eigen::Vector3d mean_g = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) {
        mean_e += est.poses[i].second.translation;
        mean_g += gt.poses[i].second.translation;
    }
    mean_e /= n;
    mean_g /= n;

    double var_e = 0.0;
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d de = est.poses[i].second.translation - mean_e;
        const Eigen::Vector3d dg = gt.poses[i].second.translation - mean_g;
        var_e += de.squaredNorm();
        cov += dg * de.transpose();
    }
    var_e /= n;
    cov /= n;
    if (var_e < 1e-18) {
        throw DegenerateTrajectory("umeyama_align: estimated positions are coincident");
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector3d d = Eigen::Vector3d::Ones();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0) d(2) = -1.0;
    const Eigen::Matrix3d r =
        svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
    double s = 1.0;
    if (mode == AlignMode::Similarity7DoF) {
        s = (svd.singularValues().dot(d)) / var_e;
    }
    const Eigen::Vector3d t = mean_g - s * r * mean_e;

    Trajectory out = est;
    for (auto& [frame, pose] : out.poses) {
        (void)frame;
        pose.translation = s * r * pose.translation + t;
        pose.rotation = orthonormalize(r * pose.rotation);
    }
    return out;
}

double ate(const Trajectory& est, const Trajectory& gt) {
    check_lengths(est, gt, 1);
    double sq = 0.0;
    for (size_t i = 0; i < est.size(); ++i) {
        sq += (est.poses[i].second.translation - gt.poses[i].second.translation).squaredNorm();
    }
    return std::sqrt(sq / est.size());
}

std::pair<double, double> rpe(const Trajectory& est, const Trajectory& gt) {
    check_lengths(est, gt, 2);
    double sum_t = 0.0, sum_r = 0.0;
    const size_t m = est.size() - 1;
    for (size_t i = 0; i < m; ++i) {
        const Pose rel_e = relative(est.poses[i].second, est.poses[i + 1].second);
        const Pose rel_g = relative(gt.poses[i].second, gt.poses[i + 1].second);
        const Pose delta = compose(inverse(rel_g), rel_e);
        sum_t += delta.translation.norm();
        sum_r += rotation_angle(delta.rotation) * 180.0 / M_PI;
    }
    return {sum_t / m, sum_r / m};
}

std::pair<double, double> kitti_seg_errors(const Trajectory& est, const Trajectory& gt) {
    check_lengths(est, gt, 2);
    const int n = static_cast<int>(gt.size());

    // Cumulative ground-truth path distance.
    std::vector<double> dist(n, 0.0);
    for (int i = 1; i < n; ++i) {
        dist[i] = dist[i - 1] + (gt.poses[i].second.translation -
                                 gt.poses[i - 1].second.translation).norm();
    }

    double sum_t = 0.0, sum_r = 0.0;
    long count = 0;
    for (int start = 0; start < n; ++start) {
        for (int li = 1; li <= 8; ++li) {
            const double len = 100.0 * li;
            int end = -1;
            for (int j = start; j < n; ++j) {
                if (dist[j] - dist[start] >= len) {
                    end = j;
                    break;
                }
            }
            if (end < 0) continue;
            const Pose rel_e = relative(est.poses[start].second, est.poses[end].second);
            const Pose rel_g = relative(gt.poses[start].second, gt.poses[end].second);
            const Pose delta = compose(inverse(rel_e), rel_g);
            sum_t += delta.translation.norm() / len * 100.0;             // percent
            sum_r += rotation_angle(delta.rotation) * 180.0 / M_PI * 100.0 / len;  // deg/100m
            ++count;
        }
    }
    if (count == 0) throw TooShort("kitti_seg_errors: no 100 m subsequence fits");
    return {sum_t / count, sum_r / count};
}

MetricsReport evaluate(const Trajectory& est, const Trajectory& gt, AlignMode mode) {
    const Trajectory aligned = umeyama_align(est, gt, mode);
    MetricsReport rep;
    rep.ate = ate(aligned, gt);
    const auto [rt, rr] = rpe(aligned, gt);
    rep.rpe_t = rt;
    rep.rpe_r = rr;
    try {
        const auto [te, re] = kitti_seg_errors(aligned, gt);
        rep.t_err = te;
        rep.r_err = re;
    } catch (const TooShort&) {
        rep.t_err = 0.0;
        rep.r_err = 0.0;
    }
    return rep;
}

}  // namespace movo
