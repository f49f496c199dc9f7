#include "movo/core.hpp"

#include <cmath>

namespace movo {

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
        flip(2, 2) = -1.0;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    return r;
}

Eigen::Vector3d normalize(const Point2& pt, const CameraIntrinsics& k) {
    return {(pt.u - k.cx) / k.fx, (pt.v - k.cy) / k.fy, 1.0};
}

Point2 project(const Point3& p, const Pose& pose, const CameraIntrinsics& k) {
    const Eigen::Vector3d q = pose.apply(p.vec());
    if (q.z() <= 0.0) {
        throw PointBehindCamera("project: transformed point has non-positive depth");
    }
    return {k.fx * q.x() / q.z() + k.cx, k.fy * q.y() / q.z() + k.cy};
}

Pose compose(const Pose& a, const Pose& b) {
    Pose out;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation * b.translation + a.translation;
    return out;
}

Pose inverse(const Pose& p) {
    Pose out;
    out.rotation = p.rotation.transpose();
    out.translation = -(p.rotation.transpose() * p.translation);
    return out;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& t) {
    Eigen::Matrix3d m;
    m << 0.0, -t.z(), t.y(),
         t.z(), 0.0, -t.x(),
        -t.y(), t.x(), 0.0;
    return m;
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& omega) {
    const double theta = omega.norm();
    if (theta < 1e-12) {
        return Eigen::Matrix3d::Identity() + skew(omega);
    }
    const Eigen::Matrix3d k = skew(omega / theta);
    return Eigen::Matrix3d::Identity() + std::sin(theta) * k +
           (1.0 - std::cos(theta)) * k * k;
}

double rotation_angle(const Eigen::Matrix3d& r) {
    double c = (r.trace() - 1.0) * 0.5;
    c = std::max(-1.0, std::min(1.0, c));
    return std::acos(c);
}

}  // namespace movo
