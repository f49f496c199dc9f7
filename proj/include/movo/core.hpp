#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace movo {

// Error hierarchy. IO/parse failures and geometric degeneracies are thrown;
// per-point failures (tracking, triangulation gates) are reported as flags.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct PointBehindCamera : Error { using Error::Error; };
struct InsufficientMatches : Error { using Error::Error; };
struct InsufficientFeatures : Error { using Error::Error; };
struct DegenerateConfiguration : Error { using Error::Error; };
struct ChiralityAmbiguous : Error { using Error::Error; };
struct AtInfinity : Error { using Error::Error; };
struct NoValidSamples : Error { using Error::Error; };
struct NoConsensus : Error { using Error::Error; };
struct InvalidDepth : Error { using Error::Error; };
struct InsufficientCorrespondences : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct DegenerateTrajectory : Error { using Error::Error; };
struct TooShort : Error { using Error::Error; };
struct TooSmall : Error { using Error::Error; };

/// Pinhole calibration (pixels). fx, fy must be positive.
struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    Eigen::Matrix3d matrix() const {
        Eigen::Matrix3d k;
        k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
        return k;
    }
    bool valid() const { return fx > 0.0 && fy > 0.0; }
};

struct Point2 {
    double u = 0.0;
    double v = 0.0;
};

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Eigen::Vector3d vec() const { return {x, y, z}; }
    static Point3 from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// A pair of pixel locations tracked between frame k-1 (prev) and frame k (curr).
struct FeatureMatch {
    Point2 prev;
    Point2 curr;
    std::int64_t id = -1;
};

/// Rigid transform: rotation in SO(3) plus translation. The frame-to-frame
/// motion T_k maps frame k-1 coordinates into frame k: x_k = R x_{k-1} + t.
struct Pose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static Pose identity() { return {}; }

    Eigen::Matrix4d homogeneous() const {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.block<3, 3>(0, 0) = rotation;
        m.block<3, 1>(0, 3) = translation;
        return m;
    }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
        return rotation * p + translation;
    }
};

/// Nearest rotation matrix in Frobenius norm (SVD projection onto SO(3)).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m);

/// Homogeneous normalized coordinates [(u-cx)/fx, (v-cy)/fy, 1].
Eigen::Vector3d normalize(const Point2& pt, const CameraIntrinsics& k);

/// Perspective projection of a camera-frame-k-1 point through `pose` into pixels.
/// Throws PointBehindCamera when the transformed point has z <= 0.
Point2 project(const Point3& p, const Pose& pose, const CameraIntrinsics& k);

/// a then b collapsed into one transform: x -> R_a (R_b x + t_b) + t_a.
Pose compose(const Pose& a, const Pose& b);

Pose inverse(const Pose& p);

/// Cross-product matrix [t]x with skew(t) * v == t x v.
Eigen::Matrix3d skew(const Eigen::Vector3d& t);

/// Rodrigues exponential map, axis-angle vector -> rotation.
Eigen::Matrix3d exp_so3(const Eigen::Vector3d& omega);

/// Geodesic distance between rotations, radians.
double rotation_angle(const Eigen::Matrix3d& r);

}  // namespace movo
