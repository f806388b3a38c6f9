#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>
#include <cmath>

namespace cmpush {

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double kPi = 3.14159265358979323846;
    constexpr double kTwoPi = 2.0 * kPi;
    a = std::fmod(a, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    if (a > kPi) a -= kTwoPi;
    return a;
}

/// Planar placement of an object on the table: translation plus z-rotation.
struct PlanarPose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;  // radians, normalized to (-pi, pi]

    PlanarPose() = default;
    PlanarPose(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

    Eigen::Vector2d translation() const { return {x, y}; }
    Eigen::Rotation2Dd rotation() const { return Eigen::Rotation2Dd(theta); }

    PlanarPose normalized() const { return {x, y, wrap_angle(theta)}; }
};

using PointCloud = std::vector<Eigen::Vector3d>;

/// World <- body rigid transform of a tabletop object whose body-frame origin
/// sits `z_center` above the table plane z = 0.
inline Eigen::Isometry3d planar_to_rigid3(const PlanarPose& g, double z_center) {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = Eigen::AngleAxisd(g.theta, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    t.translation() = Eigen::Vector3d(g.x, g.y, z_center);
    return t;
}

inline Eigen::Vector2d rotate2(double theta, const Eigen::Vector2d& v) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() * b.y() - a.y() * b.x();
}

}  // namespace cmpush
