#include "movo/pnp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace movo {

namespace {

constexpr double kSentinel = 1e6;

Eigen::Vector2d residual_of(const Correspondence3D2D& corr, const Pose& motion,
                            const CameraIntrinsics& k) {
    const Eigen::Vector3d q = motion.apply(corr.point.vec());
    if (q.z() <= 0.0) return {kSentinel, kSentinel};
    return {k.fx * q.x() / q.z() + k.cx - corr.pixel.u,
            k.fy * q.y() / q.z() + k.cy - corr.pixel.v};
}

double cost_of(const std::vector<Correspondence3D2D>& corrs, const Pose& motion,
               const CameraIntrinsics& k) {
    double c = 0.0;
    for (const auto& corr : corrs) c += residual_of(corr, motion, k).squaredNorm();
    return c;
}

Pose apply_twist(const Eigen::Matrix<double, 6, 1>& xi, const Pose& pose) {
    const Eigen::Matrix3d dr = exp_so3(xi.head<3>());
    Pose out;
    out.rotation = orthonormalize(dr * pose.rotation);
    out.translation = dr * pose.translation + xi.tail<3>();
    return out;
}

struct RefineResult {
    Pose pose;
    double cost = 0.0;
    std::vector<double> history;
    bool converged = false;
};

RefineResult lm_refine(const std::vector<Correspondence3D2D>& corrs,
                       const CameraIntrinsics& k, const Pose& init) {
    RefineResult res;
    res.pose = init;
    res.cost = cost_of(corrs, res.pose, k);
    res.history.push_back(res.cost);
    double lambda = 1e-3;
    const size_t m = corrs.size();

    for (int it = 0; it < 20; ++it) {
        Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
        for (size_t i = 0; i < m; ++i) {
            const Eigen::Vector2d r = residual_of(corrs[i], res.pose, k);
            if (r.x() >= kSentinel) continue;  // behind camera: no gradient
            const Eigen::Matrix<double, 2, 6> j = reprojection_jacobian(corrs[i], res.pose, k);
            h += j.transpose() * j;
            g += j.transpose() * r;
        }
        const Eigen::Matrix<double, 6, 1> step =
            -(h + lambda * Eigen::Matrix<double, 6, 6>::Identity()).ldlt().solve(g);
        if (!step.allFinite()) break;
        const Pose cand = apply_twist(step, res.pose);
        const double cand_cost = cost_of(corrs, cand, k);
        if (cand_cost < res.cost) {
            res.pose = cand;
            res.cost = cand_cost;
            res.history.push_back(cand_cost);
            lambda = std::max(lambda * 0.1, 1e-12);
        } else {
            lambda *= 10.0;
        }
        if (step.norm() < 1e-8) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace

Point3 backproject(const Point2& pixel, double depth, const CameraIntrinsics& k) {
    if (depth <= 0.0) throw InvalidDepth("backproject: non-positive depth");
    return Point3::from(depth * normalize(pixel, k));
}

std::vector<Eigen::Vector2d> reprojection_residuals(
    const std::vector<Correspondence3D2D>& corrs, const Pose& motion,
    const CameraIntrinsics& k) {
    std::vector<Eigen::Vector2d> out;
    out.reserve(corrs.size());
    for (const auto& c : corrs) out.push_back(residual_of(c, motion, k));
    return out;
}

Eigen::Matrix<double, 2, 6> reprojection_jacobian(const Correspondence3D2D& corr,
                                                  const Pose& motion,
                                                  const CameraIntrinsics& k) {
    const Eigen::Vector3d q = motion.apply(corr.point.vec());
    const double iz = 1.0 / q.z();
    Eigen::Matrix<double, 2, 3> dpi;
    dpi << k.fx * iz, 0.0, -k.fx * q.x() * iz * iz,
           0.0, k.fy * iz, -k.fy * q.y() * iz * iz;
    Eigen::Matrix<double, 2, 6> j;
    j.block<2, 3>(0, 0) = dpi * (-skew(q));
    j.block<2, 3>(0, 3) = dpi;
    return j;
}

PnpResult solve_pnp(const std::vector<Correspondence3D2D>& corrs, const CameraIntrinsics& k,
                    const Pose& init, const RansacConfig& cfg) {
    const int n = static_cast<int>(corrs.size());
    if (n < 6) throw InsufficientCorrespondences("solve_pnp: need at least 6 correspondences");

    const double thr_sq = cfg.threshold * cfg.threshold;
    Pose best_pose;
    int best_count = 0;
    std::vector<bool> best_mask;
    int needed = cfg.max_iterations;

    for (int iter = 0; iter < needed; ++iter) {
        std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(iter));
        std::vector<int> sample;
        std::uniform_int_distribution<int> dist(0, n - 1);
        while (static_cast<int>(sample.size()) < 6) {
            const int c = dist(rng);
            if (std::find(sample.begin(), sample.end(), c) == sample.end()) sample.push_back(c);
        }
        std::vector<Correspondence3D2D> subset;
        for (int i : sample) subset.push_back(corrs[i]);
        const RefineResult ref = lm_refine(subset, k, init);
        if (!std::isfinite(ref.cost)) continue;
        std::vector<bool> mask(n, false);
        int count = 0;
        for (int i = 0; i < n; ++i) {
            if (residual_of(corrs[i], ref.pose, k).squaredNorm() < thr_sq) {
                mask[i] = true;
                ++count;
            }
        }
        if (count > best_count) {
            best_count = count;
            best_pose = ref.pose;
            best_mask = std::move(mask);
            needed = std::max(iter + 1, [&] {
                const double w = static_cast<double>(count) / n;
                const double wp = std::pow(w, 6);
                if (wp <= 1e-12) return cfg.max_iterations;
                if (wp >= 1.0 - 1e-12) return 1;
                const double ni = std::log(1.0 - cfg.confidence) / std::log(1.0 - wp);
                if (ni >= static_cast<double>(cfg.max_iterations)) return cfg.max_iterations;
                return std::max(1, static_cast<int>(std::ceil(ni)));
            }());
        }
    }
    if (best_count < 6) {
        throw NoConvergence("solve_pnp: no sample produced 6 reprojection inliers");
    }

    std::vector<Correspondence3D2D> inliers;
    for (int i = 0; i < n; ++i) {
        if (best_mask[i]) inliers.push_back(corrs[i]);
    }
    const RefineResult refit = lm_refine(inliers, k, best_pose);

    PnpResult res;
    res.motion = refit.pose;
    res.refit_cost_history = refit.history;
    res.inlier_mask.assign(n, false);
    int final_count = 0;
    double sq_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e2 = residual_of(corrs[i], res.motion, k).squaredNorm();
        if (e2 < thr_sq) {
            res.inlier_mask[i] = true;
            ++final_count;
            sq_sum += e2;
        }
    }
    if (final_count < best_count) {
        // Refit lost inliers; fall back to the RANSAC-best model.
        res.motion = best_pose;
        res.inlier_mask = best_mask;
        final_count = 0;
        sq_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!res.inlier_mask[i]) continue;
            sq_sum += residual_of(corrs[i], res.motion, k).squaredNorm();
            ++final_count;
        }
    }
    res.final_cost = (final_count > 0) ? sq_sum / final_count : 0.0;
    return res;
}

}  // namespace movo
