#pragma once

#include <cstdint>
#include <vector>

#include "cmpush/geometry.hpp"
#include "cmpush/superquadric.hpp"

namespace cmpush {

/// Paper-matched safety limit on pusher speed (m/s).
constexpr double kMaxPushSpeed = 0.025;
/// A pusher farther than this from the object boundary is contact-free (m).
constexpr double kContactTolerance = 0.02;
/// Limit-surface torque radius as a fraction of the mean silhouette radius
/// (uniform-pressure disc approximation).
constexpr double kTorqueRadiusFactor = 0.6;

struct PushAction {
    Eigen::Vector2d contact_point{0.0, 0.0};  // world coordinates, m
    double push_direction = 0.0;              // world z-rotation angle, rad
    double speed = 0.01;                      // m/s, in (0, kMaxPushSpeed]
};

struct FrictionParams {
    double mu_surface = 0.3;  // object-table
    double mu_robot = 0.5;    // object-pusher
    double gravity = 9.81;
};

struct ContactForce {
    double fx = 0.0;
    double fy = 0.0;
    Eigen::Vector2d vec() const { return {fx, fy}; }
    double norm() const { return vec().norm(); }
};

/// Ellipsoidal limit-surface constants.
struct LimitSurfaceModel {
    double f_max = 0.0;    // mu * m * g, N
    double tau_max = 0.0;  // f_max * c_r, N m

    static LimitSurfaceModel from(const Superquadric& shape, double mass,
                                  const FrictionParams& friction);
    double radius() const { return tau_max / f_max; }  // c_r
};

struct QuasiStaticResult {
    PlanarPose pose;
    ContactForce force;               // world frame, N
    Eigen::Vector3d body_twist{0, 0, 0};  // (vx, vy, omega) in the body frame
    bool in_contact = false;
    bool sticking = false;
};

/// One quasi-static step with an externally supplied contact normal
/// (2D inward unit normal in the world frame) and torque radius c_r.
/// Throws on non-positive mass or a degenerate normal.
QuasiStaticResult quasi_static_step(const PlanarPose& pose, double mass, const PushAction& action,
                                    const Eigen::Vector2d& contact_normal,
                                    const FrictionParams& friction, double cr, double dt);

/// Process model: next pose under the quasi-static ellipsoidal limit-surface
/// push. Kinematics are mass-invariant; mass enters only the force channel.
PlanarPose analytical_process(const PlanarPose& pose, double mass, const PushAction& action,
                              const Eigen::Vector2d& contact_normal,
                              const FrictionParams& friction, double cr, double dt);

/// Observation model: expected 2D contact force consistent with the object
/// twist, on the limit surface.
ContactForce analytical_tactile(const PlanarPose& pose, double mass, const PushAction& action,
                                const Eigen::Vector2d& contact_normal,
                                const FrictionParams& friction, double cr);

/// Shape-aware step: projects the contact point onto the silhouette, derives
/// the inward normal from the superquadric, and resolves contact-free pushes
/// (pose unchanged, zero force).
QuasiStaticResult process_step(const Superquadric& shape, const PlanarPose& pose, double mass,
                               const PushAction& action, const FrictionParams& friction,
                               double dt);

/// Distance from a world point to the object silhouette boundary (>= 0; zero
/// when on or inside the boundary).
double contact_distance(const Superquadric& shape, const PlanarPose& pose,
                        const Eigen::Vector2d& world_pt);

struct NoiseSpec {
    double contact_jitter_sigma = 0.0;   // m, per fine step
    double friction_jitter_rel = 0.0;    // multiplicative, per fine step
};

struct RolloutSample {
    double t = 0.0;
    PlanarPose pose;
    ContactForce force;
    Eigen::Vector2d pusher{0.0, 0.0};  // pusher position at t
};

/// Ground-truth world: same physics family integrated at a fine timestep with
/// contact jitter and friction perturbation, subsampled to the filter period.
std::vector<RolloutSample> ground_truth_rollout(const PlanarPose& true_pose, double true_mass,
                                                const Superquadric& shape,
                                                const PushAction& action,
                                                const FrictionParams& friction, double duration,
                                                const NoiseSpec& noise, std::uint64_t rng_seed,
                                                double fine_dt = 1e-3, double period = 0.1);

/// Boundary-uniform push affordance: contact point on the silhouette, inward
/// push direction within 45 degrees of the inward normal, safe speed.
PushAction sample_push_action(const Superquadric& shape, const PlanarPose& pose,
                              std::uint64_t rng_seed);

}  // namespace cmpush
