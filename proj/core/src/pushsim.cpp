#include "cmpush/pushsim.hpp"

#include <cmath>
#include <stdexcept>

#include "cmpush/rng.hpp"

namespace cmpush {
namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }

PlanarPose integrate_twist(const PlanarPose& pose, const Eigen::Vector3d& body_twist, double dt) {
    const double vx = body_twist[0], vy = body_twist[1], w = body_twist[2];
    Eigen::Vector2d delta;
    if (std::abs(w) < 1e-9) {
        delta = {vx * dt, vy * dt};
    } else {
        const double s = std::sin(w * dt), c = std::cos(w * dt);
        delta = {(s * vx - (1.0 - c) * vy) / w, ((1.0 - c) * vx + s * vy) / w};
    }
    const Eigen::Vector2d dw = rotate2(pose.theta, delta);
    return PlanarPose(pose.x + dw.x(), pose.y + dw.y(), pose.theta + w * dt);
}

}  // namespace

LimitSurfaceModel LimitSurfaceModel::from(const Superquadric& shape, double mass,
                                          const FrictionParams& friction) {
    LimitSurfaceModel m;
    m.f_max = friction.mu_surface * mass * friction.gravity;
    m.tau_max = m.f_max * kTorqueRadiusFactor * silhouette_mean_radius(shape);
    return m;
}

QuasiStaticResult quasi_static_step(const PlanarPose& pose, double mass, const PushAction& action,
                                    const Eigen::Vector2d& contact_normal,
                                    const FrictionParams& friction, double cr, double dt) {
    if (mass <= 0.0) throw std::invalid_argument("quasi_static_step: mass must be > 0");
    if (dt <= 0.0) throw std::invalid_argument("quasi_static_step: dt must be > 0");
    const double n_norm = contact_normal.norm();
    if (!std::isfinite(n_norm) || n_norm < 1e-9)
        throw std::invalid_argument("quasi_static_step: degenerate contact normal");

    QuasiStaticResult out;
    out.pose = pose;
    out.in_contact = true;
    if (action.speed <= 0.0) return out;

    const double th = pose.theta;
    const Eigen::Vector2d n_b = rotate2(-th, contact_normal / n_norm);  // inward
    const Eigen::Vector2d vp_w =
        action.speed * Eigen::Vector2d(std::cos(action.push_direction),
                                       std::sin(action.push_direction));
    const Eigen::Vector2d vp_b = rotate2(-th, vp_w);
    const Eigen::Vector2d r = rotate2(-th, action.contact_point - pose.translation());

    if (vp_b.dot(n_b) <= 1e-12) return out;  // separating or tangential approach

    const double c2 = cr * cr;
    const double f_max = friction.mu_surface * mass * friction.gravity;
    const double denom = c2 + r.squaredNorm();

    // sticking solution: contact point moves with the pusher
    Eigen::Vector3d twist;
    twist[0] = ((c2 + r.x() * r.x()) * vp_b.x() + r.x() * r.y() * vp_b.y()) / denom;
    twist[1] = (r.x() * r.y() * vp_b.x() + (c2 + r.y() * r.y()) * vp_b.y()) / denom;
    twist[2] = (r.x() * twist[1] - r.y() * twist[0]) / c2;

    const double twist_scale =
        std::sqrt(twist[0] * twist[0] + twist[1] * twist[1] + c2 * twist[2] * twist[2]);
    Eigen::Vector2d f_b = Eigen::Vector2d::Zero();
    bool sticking = true;
    if (twist_scale > 1e-12) {
        f_b = f_max * Eigen::Vector2d(twist[0], twist[1]) / twist_scale;
        const Eigen::Vector2d t_b = perp(n_b);
        const double fn = f_b.dot(n_b), ft = f_b.dot(t_b);
        if (!(fn > 0.0 && std::abs(ft) <= friction.mu_robot * fn + 1e-12)) {
            // sliding: force pinned to the pusher friction-cone edge
            sticking = false;
            const double side = ft >= 0.0 ? 1.0 : -1.0;
            const Eigen::Vector2d e =
                (n_b + friction.mu_robot * side * t_b) / std::sqrt(1.0 + friction.mu_robot *
                                                                             friction.mu_robot);
            const double k = cross2(r, e);  // torque per unit force
            // contact maintenance along the normal fixes the twist magnitude
            const double den2 = e.dot(n_b) + (k / c2) * perp(r).dot(n_b);
            if (den2 <= 1e-9) return out;
            const double lambda = vp_b.dot(n_b) / den2;
            if (lambda <= 0.0) return out;
            twist = {lambda * e.x(), lambda * e.y(), lambda * k / c2};
            f_b = (f_max / std::sqrt(1.0 + (k * k) / c2)) * e;
        }
    }

    out.body_twist = twist;
    out.sticking = sticking;
    out.pose = integrate_twist(pose, twist, dt);
    const Eigen::Vector2d f_w = rotate2(th, f_b);
    out.force = {f_w.x(), f_w.y()};
    return out;
}

PlanarPose analytical_process(const PlanarPose& pose, double mass, const PushAction& action,
                              const Eigen::Vector2d& contact_normal,
                              const FrictionParams& friction, double cr, double dt) {
    return quasi_static_step(pose, mass, action, contact_normal, friction, cr, dt).pose;
}

ContactForce analytical_tactile(const PlanarPose& pose, double mass, const PushAction& action,
                                const Eigen::Vector2d& contact_normal,
                                const FrictionParams& friction, double cr) {
    return quasi_static_step(pose, mass, action, contact_normal, friction, cr, 1e-3).force;
}

double contact_distance(const Superquadric& shape, const PlanarPose& pose,
                        const Eigen::Vector2d& world_pt) {
    const Eigen::Vector2d q = rotate2(-pose.theta, world_pt - pose.translation());
    if (silhouette_value(shape, q) <= 1.0) return 0.0;
    return (q - silhouette_closest_point(shape, q)).norm();
}

QuasiStaticResult process_step(const Superquadric& shape, const PlanarPose& pose, double mass,
                               const PushAction& action, const FrictionParams& friction,
                               double dt) {
    const Eigen::Vector2d q = rotate2(-pose.theta, action.contact_point - pose.translation());
    const Eigen::Vector2d b = silhouette_closest_point(shape, q);
    const bool outside = silhouette_value(shape, q) > 1.0;
    QuasiStaticResult out;
    out.pose = pose;
    if (outside && (q - b).norm() > kContactTolerance) {
        out.in_contact = false;
        return out;
    }
    const Eigen::Vector2d n_in_w = rotate2(pose.theta, -silhouette_outward_normal(shape, b));
    PushAction a = action;
    a.contact_point = rotate2(pose.theta, b) + pose.translation();
    const double cr = kTorqueRadiusFactor * silhouette_mean_radius(shape);
    return quasi_static_step(pose, mass, a, n_in_w, friction, cr, dt);
}

std::vector<RolloutSample> ground_truth_rollout(const PlanarPose& true_pose, double true_mass,
                                                const Superquadric& shape,
                                                const PushAction& action,
                                                const FrictionParams& friction, double duration,
                                                const NoiseSpec& noise, std::uint64_t rng_seed,
                                                double fine_dt, double period) {
    if (duration <= 0.0) throw std::invalid_argument("ground_truth_rollout: duration must be > 0");
    Rng rng(rng_seed);
    const int n_steps = static_cast<int>(std::llround(duration / fine_dt));
    const int record_every = std::max(1, static_cast<int>(std::llround(period / fine_dt)));
    const Eigen::Vector2d dir(std::cos(action.push_direction), std::sin(action.push_direction));
    const double cr = kTorqueRadiusFactor * silhouette_mean_radius(shape);

    PlanarPose pose = true_pose;
    std::vector<RolloutSample> samples;
    samples.reserve(static_cast<size_t>(n_steps / record_every) + 1);

    for (int k = 1; k <= n_steps; ++k) {
        const double t = k * fine_dt;
        const Eigen::Vector2d pusher = action.contact_point + action.speed * t * dir;
        Eigen::Vector2d cp = pusher;
        if (noise.contact_jitter_sigma > 0.0) {
            cp.x() += noise.contact_jitter_sigma * rng.normal();
            cp.y() += noise.contact_jitter_sigma * rng.normal();
        }
        FrictionParams fr = friction;
        if (noise.friction_jitter_rel > 0.0) {
            const double scale =
                std::max(0.05, 1.0 + noise.friction_jitter_rel * rng.normal());
            fr.mu_surface *= scale;
        }
        PushAction a = action;
        a.contact_point = cp;

        // resolve contact against the fitted silhouette with the true pose
        const Eigen::Vector2d q = rotate2(-pose.theta, cp - pose.translation());
        const Eigen::Vector2d b = silhouette_closest_point(shape, q);
        const bool outside = silhouette_value(shape, q) > 1.0;
        QuasiStaticResult step;
        step.pose = pose;
        if (!(outside && (q - b).norm() > kContactTolerance)) {
            const Eigen::Vector2d n_in_w =
                rotate2(pose.theta, -silhouette_outward_normal(shape, b));
            a.contact_point = rotate2(pose.theta, b) + pose.translation();
            step = quasi_static_step(pose, true_mass, a, n_in_w, fr, cr, fine_dt);
        }
        pose = step.pose;
        if (k % record_every == 0) {
            samples.push_back({t, pose, step.force, pusher});
        }
    }
    return samples;
}

PushAction sample_push_action(const Superquadric& shape, const PlanarPose& pose,
                              std::uint64_t rng_seed) {
    shape.require_valid();
    Rng rng(rng_seed);
    const Eigen::Vector2d b = silhouette_sample_boundary(shape, rng);
    const Eigen::Vector2d n_in_b = -silhouette_outward_normal(shape, b);
    const double normal_angle_w = std::atan2(n_in_b.y(), n_in_b.x()) + pose.theta;
    // inward within 45 degrees of the inward normal (strictly, to keep the
    // contract away from the boundary of the cone)
    const double pd = wrap_angle(normal_angle_w + rng.uniform(-0.95, 0.95) * 0.25 * kPi);

    PushAction a;
    a.contact_point = rotate2(pose.theta, b) + pose.translation();
    a.push_direction = pd;
    a.speed = rng.uniform(0.3, 1.0) * kMaxPushSpeed;
    return a;
}

}  // namespace cmpush
