#include "movo/twoview.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace movo {

namespace {

Eigen::Vector3d hom(const Point2& p) { return {p.u, p.v, 1.0}; }

// Hartley conditioning: centroid to origin, mean distance sqrt(2).
Eigen::Matrix3d conditioning_transform(const std::vector<Eigen::Vector3d>& pts) {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& p : pts) mean += p.head<2>();
    mean /= static_cast<double>(pts.size());
    double dist = 0.0;
    for (const auto& p : pts) dist += (p.head<2>() - mean).norm();
    dist /= static_cast<double>(pts.size());
    const double s = (dist > 1e-12) ? std::sqrt(2.0) / dist : 1.0;
    Eigen::Matrix3d t;
    t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
    return t;
}

// Nullspace DLT for the bilinear constraint x2^T M x1 = 0; returns M with
// unit Frobenius norm up to sign. Both point sets are conditioned internally.
Eigen::Matrix3d bilinear_dlt(const std::vector<Eigen::Vector3d>& x1,
                             const std::vector<Eigen::Vector3d>& x2) {
    const Eigen::Matrix3d t1 = conditioning_transform(x1);
    const Eigen::Matrix3d t2 = conditioning_transform(x2);
    const size_t n = x1.size();
    Eigen::MatrixXd a(n, 9);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d p = t1 * x1[i];
        const Eigen::Vector3d q = t2 * x2[i];
        a.row(i) << q.x() * p.x(), q.x() * p.y(), q.x() * p.z(),
                    q.y() * p.x(), q.y() * p.y(), q.y() * p.z(),
                    q.z() * p.x(), q.z() * p.y(), q.z() * p.z();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const Eigen::VectorXd e = svd.matrixV().col(8);
    Eigen::Matrix3d m;
    m << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);
    m = t2.transpose() * m * t1;
    return m / m.norm();
}

Eigen::Matrix3d project_to_essential(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix3d e =
        svd.matrixU() * Eigen::Vector3d(1, 1, 0).asDiagonal() * svd.matrixV().transpose();
    return e / e.norm();
}

std::vector<int> sample_distinct(std::mt19937_64& rng, int k, int n) {
    std::vector<int> idx;
    idx.reserve(k);
    std::uniform_int_distribution<int> dist(0, n - 1);
    while (static_cast<int>(idx.size()) < k) {
        const int c = dist(rng);
        if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
    }
    return idx;
}

int adaptive_iterations(int inliers, int total, int sample_size, double confidence,
                        int max_iterations) {
    const double w = static_cast<double>(inliers) / total;
    const double wp = std::pow(w, sample_size);
    if (wp <= 1e-12) return max_iterations;
    if (wp >= 1.0 - 1e-12) return 1;
    const double n = std::log(1.0 - confidence) / std::log(1.0 - wp);
    if (n >= static_cast<double>(max_iterations)) return max_iterations;
    return std::max(1, static_cast<int>(std::ceil(n)));
}

}  // namespace

double sampson_sq(const Eigen::Matrix3d& f, const FeatureMatch& m) {
    const Eigen::Vector3d p1 = hom(m.prev);
    const Eigen::Vector3d p2 = hom(m.curr);
    const Eigen::Vector3d fp1 = f * p1;
    const Eigen::Vector3d ftp2 = f.transpose() * p2;
    const double num = p2.dot(fp1);
    const double den = fp1.x() * fp1.x() + fp1.y() * fp1.y() + ftp2.x() * ftp2.x() +
                       ftp2.y() * ftp2.y();
    if (den < 1e-300) return 1e18;
    return num * num / den;
}

double symmetric_transfer_sq(const Eigen::Matrix3d& h, const FeatureMatch& m) {
    const Eigen::Vector3d p1 = hom(m.prev);
    const Eigen::Vector3d p2 = hom(m.curr);
    const Eigen::Vector3d q2 = h * p1;
    const Eigen::Vector3d q1 = h.inverse() * p2;
    if (std::abs(q2.z()) < 1e-300 || std::abs(q1.z()) < 1e-300) return 1e18;
    const double d2 = (q2.head<2>() / q2.z() - p2.head<2>()).squaredNorm();
    const double d1 = (q1.head<2>() / q1.z() - p1.head<2>()).squaredNorm();
    return d1 + d2;
}

Eigen::Matrix3d eight_point_essential(const std::vector<FeatureMatch>& matches,
                                      const std::vector<int>& idx, const CameraIntrinsics& k) {
    std::vector<Eigen::Vector3d> x1, x2;
    x1.reserve(idx.size());
    x2.reserve(idx.size());
    for (int i : idx) {
        x1.push_back(normalize(matches[i].prev, k));
        x2.push_back(normalize(matches[i].curr, k));
    }
    return project_to_essential(bilinear_dlt(x1, x2));
}

namespace {

Eigen::Matrix3d pixel_fundamental(const Eigen::Matrix3d& e, const CameraIntrinsics& k) {
    const Eigen::Matrix3d kinv = k.matrix().inverse();
    return kinv.transpose() * e * kinv;
}

}  // namespace

EssentialResult estimate_essential_matrix(const std::vector<FeatureMatch>& matches,
                                          const CameraIntrinsics& k, const RansacConfig& cfg) {
    const int n = static_cast<int>(matches.size());
    if (n < 8) throw InsufficientMatches("estimate_essential: need at least 8 matches");

    const double thr_sq = cfg.threshold * cfg.threshold;
    Eigen::Matrix3d best_e = Eigen::Matrix3d::Zero();
    std::vector<bool> best_mask;
    int best_count = 0;
    int needed = cfg.max_iterations;

    for (int iter = 0; iter < needed; ++iter) {
        std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(iter));
        const std::vector<int> sample = sample_distinct(rng, 8, n);
        Eigen::Matrix3d e;
        try {
            e = eight_point_essential(matches, sample, k);
        } catch (const std::exception&) {
            continue;
        }
        const Eigen::Matrix3d f = pixel_fundamental(e, k);
        std::vector<bool> mask(n, false);
        int count = 0;
        for (int i = 0; i < n; ++i) {
            if (sampson_sq(f, matches[i]) < thr_sq) {
                mask[i] = true;
                ++count;
            }
        }
        if (count > best_count) {
            best_count = count;
            best_e = e;
            best_mask = std::move(mask);
            needed = std::max(iter + 1,
                              adaptive_iterations(count, n, 8, cfg.confidence, cfg.max_iterations));
        }
    }
    if (best_count < 8) {
        throw DegenerateConfiguration("estimate_essential: no sample reached 8 inliers");
    }

    // Refit stage. A plain least-squares refit on the gated set is fragile
    // here: an outlier that slipped past the gate by chance drags the fit off
    // by more than the gate width suggests. Guard it the LMedS way: score the
    // winner, the least-squares refit, and a batch of small resamples drawn
    // from the gated set by their median squared Sampson error over that set,
    // and keep the best. On clean data the least-squares refit wins as usual.
    std::vector<int> inlier_idx;
    for (int i = 0; i < n; ++i) {
        if (best_mask[i]) inlier_idx.push_back(i);
    }
    const int ni = static_cast<int>(inlier_idx.size());
    const auto median_sq = [&](const Eigen::Matrix3d& e) {
        const Eigen::Matrix3d f = pixel_fundamental(e, k);
        std::vector<double> r;
        r.reserve(ni);
        for (int i : inlier_idx) r.push_back(sampson_sq(f, matches[i]));
        std::nth_element(r.begin(), r.begin() + ni / 2, r.end());
        return r[ni / 2];
    };
    Eigen::Matrix3d model = best_e;
    double model_med = median_sq(model);
    try {
        const Eigen::Matrix3d ls = eight_point_essential(matches, inlier_idx, k);
        const double m = median_sq(ls);
        if (m < model_med) {
            model = ls;
            model_med = m;
        }
    } catch (const std::exception&) {
    }
    constexpr int kRefitResamples = 50;
    constexpr std::uint64_t kRefitStream = 0x9e3779b97f4a7c15ULL;
    for (int t = 0; t < kRefitResamples; ++t) {
        std::mt19937_64 rng(cfg.seed ^ (kRefitStream + static_cast<std::uint64_t>(t)));
        const std::vector<int> pick = sample_distinct(rng, std::min(8, ni), ni);
        std::vector<int> sub;
        sub.reserve(pick.size());
        for (int p : pick) sub.push_back(inlier_idx[p]);
        if (static_cast<int>(sub.size()) < 8) break;
        Eigen::Matrix3d e;
        try {
            e = eight_point_essential(matches, sub, k);
        } catch (const std::exception&) {
            continue;
        }
        const double m = median_sq(e);
        if (m < model_med) {
            model = e;
            model_med = m;
        }
    }
    const Eigen::Matrix3d f_final = pixel_fundamental(model, k);
    std::vector<bool> final_mask(n, false);
    int final_count = 0;
    for (int i = 0; i < n; ++i) {
        if (sampson_sq(f_final, matches[i]) < thr_sq) {
            final_mask[i] = true;
            ++final_count;
        }
    }
    EssentialResult res;
    // A sharper model may shed a chance inlier or two; anything beyond that
    // means the refit went wrong, so fall back to the RANSAC winner.
    if (final_count >= best_count - std::max(1, best_count / 20) && final_count >= 8) {
        res.e = model;
        res.inlier_mask = std::move(final_mask);
    } else {
        res.e = best_e;
        res.inlier_mask = std::move(best_mask);
    }
    return res;
}

EssentialResult estimate_essential(const std::vector<FeatureMatch>& matches,
                                   const CameraIntrinsics& k, const RansacConfig& cfg) {
    EssentialResult res = estimate_essential_matrix(matches, k, cfg);
    std::vector<FeatureMatch> inliers;
    std::vector<int> orig_idx;
    for (size_t i = 0; i < matches.size(); ++i) {
        if (res.inlier_mask[i]) {
            inliers.push_back(matches[i]);
            orig_idx.push_back(static_cast<int>(i));
        }
    }
    auto [motion, tri] = decompose_essential(res.e, inliers, k);
    res.motion = motion;
    res.triangulated.clear();
    for (const auto& [local, depth] : tri) {
        res.triangulated.emplace_back(orig_idx[local], depth);
    }
    return res;
}

std::pair<Pose, std::vector<std::pair<int, double>>> decompose_essential(
    const Eigen::Matrix3d& e, const std::vector<FeatureMatch>& matches,
    const CameraIntrinsics& k) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    if (u.determinant() < 0) u.col(2) *= -1.0;
    if (v.determinant() < 0) v.col(2) *= -1.0;
    Eigen::Matrix3d w;
    w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    const Eigen::Matrix3d r1 = orthonormalize(u * w * v.transpose());
    const Eigen::Matrix3d r2 = orthonormalize(u * w.transpose() * v.transpose());
    const Eigen::Vector3d t = u.col(2).normalized();

    struct Candidate {
        Pose pose;
        int both_positive = 0;
        std::vector<std::pair<int, double>> depths;  // gated, frame k-1 depth
    };
    std::array<Candidate, 4> cands;
    cands[0].pose = {r1, t};
    cands[1].pose = {r1, -t};
    cands[2].pose = {r2, t};
    cands[3].pose = {r2, -t};

    const int n = static_cast<int>(matches.size());
    for (Candidate& c : cands) {
        for (int i = 0; i < n; ++i) {
            Point3 p;
            try {
                p = triangulate(matches[i].prev, matches[i].curr, c.pose, k);
            } catch (const AtInfinity&) {
                continue;
            }
            const double z1 = p.z;
            const double z2 = c.pose.apply(p.vec()).z();
            if (z1 > 0.0 && z2 > 0.0) {
                ++c.both_positive;
                if (z1 > kMinTriangulatedDepth && z1 < kMaxTriangulatedDepth) {
                    c.depths.emplace_back(i, z1);
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i < 4; ++i) {
        if (cands[i].both_positive > cands[best].both_positive) best = i;
    }
    int second = -1;
    for (int i = 0; i < 4; ++i) {
        if (i == best) continue;
        if (second < 0 || cands[i].both_positive > cands[second].both_positive) second = i;
    }
    const int margin = cands[best].both_positive - cands[second].both_positive;
    if (margin < static_cast<int>(std::ceil(0.10 * n)) || cands[best].both_positive == 0) {
        throw ChiralityAmbiguous("decompose_essential: chirality margin below 10% of matches");
    }
    return {cands[best].pose, std::move(cands[best].depths)};
}

Point3 triangulate(const Point2& x_prev, const Point2& x_curr, const Pose& motion,
                   const CameraIntrinsics& k) {
    const Eigen::Matrix3d km = k.matrix();
    Eigen::Matrix<double, 3, 4> p1 = Eigen::Matrix<double, 3, 4>::Zero();
    p1.block<3, 3>(0, 0) = km;
    Eigen::Matrix<double, 3, 4> p2;
    p2.block<3, 3>(0, 0) = motion.rotation;
    p2.block<3, 1>(0, 3) = motion.translation;
    p2 = km * p2;

    Eigen::Matrix4d a;
    a.row(0) = x_prev.u * p1.row(2) - p1.row(0);
    a.row(1) = x_prev.v * p1.row(2) - p1.row(1);
    a.row(2) = x_curr.u * p2.row(2) - p2.row(0);
    a.row(3) = x_curr.v * p2.row(2) - p2.row(1);
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullV);
    Eigen::Vector4d x = svd.matrixV().col(3);
    x /= x.head<3>().norm() > 0 ? x.norm() : 1.0;
    if (std::abs(x.w()) < 1e-12) {
        throw AtInfinity("triangulate: homogeneous w underflow");
    }
    return Point3::from(x.head<3>() / x.w());
}

HomographyResult estimate_homography(const std::vector<FeatureMatch>& matches,
                                     const RansacConfig& cfg) {
    const int n = static_cast<int>(matches.size());
    if (n < 4) throw InsufficientMatches("estimate_homography: need at least 4 matches");

    std::vector<Eigen::Vector3d> all1, all2;
    all1.reserve(n);
    all2.reserve(n);
    for (const auto& m : matches) {
        all1.push_back(hom(m.prev));
        all2.push_back(hom(m.curr));
    }

    auto dlt_h = [&](const std::vector<int>& idx) -> Eigen::Matrix3d {
        std::vector<Eigen::Vector3d> x1, x2;
        for (int i : idx) {
            x1.push_back(all1[i]);
            x2.push_back(all2[i]);
        }
        const Eigen::Matrix3d t1 = conditioning_transform(x1);
        const Eigen::Matrix3d t2 = conditioning_transform(x2);
        const size_t m = idx.size();
        Eigen::MatrixXd a(2 * m, 9);
        for (size_t i = 0; i < m; ++i) {
            const Eigen::Vector3d p = t1 * x1[i];
            const Eigen::Vector3d q = t2 * x2[i];
            a.row(2 * i) << 0, 0, 0, -q.z() * p.transpose(), q.y() * p.transpose();
            a.row(2 * i + 1) << q.z() * p.transpose(), 0, 0, 0, -q.x() * p.transpose();
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
        if (svd.singularValues()(std::min<int>(7, static_cast<int>(2 * m) - 1)) < 1e-10) {
            throw DegenerateConfiguration("estimate_homography: degenerate sample");
        }
        const Eigen::VectorXd hv = svd.matrixV().col(8);
        Eigen::Matrix3d h;
        h << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
        h = t2.inverse() * h * t1;
        if (std::abs(h(2, 2)) < 1e-12) {
            throw DegenerateConfiguration("estimate_homography: h22 underflow");
        }
        return h / h(2, 2);
    };

    const double gate = 2.0 * cfg.threshold * cfg.threshold;  // mean of two transfers
    Eigen::Matrix3d best_h;
    std::vector<bool> best_mask;
    int best_count = 0;
    int needed = cfg.max_iterations;
    for (int iter = 0; iter < needed; ++iter) {
        std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(iter));
        const std::vector<int> sample = sample_distinct(rng, 4, n);
        Eigen::Matrix3d h;
        try {
            h = dlt_h(sample);
        } catch (const DegenerateConfiguration&) {
            continue;
        }
        std::vector<bool> mask(n, false);
        int count = 0;
        for (int i = 0; i < n; ++i) {
            if (symmetric_transfer_sq(h, matches[i]) < gate) {
                mask[i] = true;
                ++count;
            }
        }
        if (count > best_count) {
            best_count = count;
            best_h = h;
            best_mask = std::move(mask);
            needed = std::max(iter + 1,
                              adaptive_iterations(count, n, 4, cfg.confidence, cfg.max_iterations));
        }
    }
    if (best_count < 4) {
        throw DegenerateConfiguration("estimate_homography: no sample reached 4 inliers");
    }
    std::vector<int> inlier_idx;
    for (int i = 0; i < n; ++i) {
        if (best_mask[i]) inlier_idx.push_back(i);
    }
    HomographyResult res;
    try {
        const Eigen::Matrix3d refit = dlt_h(inlier_idx);
        std::vector<bool> mask(n, false);
        int count = 0;
        for (int i = 0; i < n; ++i) {
            if (symmetric_transfer_sq(refit, matches[i]) < gate) {
                mask[i] = true;
                ++count;
            }
        }
        if (count >= best_count) {
            res.h = refit;
            res.inlier_mask = std::move(mask);
            return res;
        }
    } catch (const DegenerateConfiguration&) {
    }
    res.h = best_h;
    res.inlier_mask = std::move(best_mask);
    return res;
}

double gric_score(const std::vector<double>& squared_residuals, GricModel model, int n,
                  double sigma) {
    const double d = (model == GricModel::Fundamental) ? 3.0 : 2.0;
    const double kparams = (model == GricModel::Fundamental) ? 7.0 : 8.0;
    const double r = 4.0;
    const double cap = 2.0 * (r - d);
    const double s2 = sigma * sigma;
    double sum = 0.0;
    for (double e2 : squared_residuals) sum += std::min(e2 / s2, cap);
    return sum + std::log(4.0) * d * n + std::log(4.0 * n) * kparams;
}

}  // namespace movo
