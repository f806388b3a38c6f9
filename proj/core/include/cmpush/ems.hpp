#pragma once

#include <cstdint>
#include <vector>

#include "cmpush/geometry.hpp"
#include "cmpush/superquadric.hpp"

namespace cmpush {

/// Tuning knobs for the robust EM fit with candidate switching.
struct EmsConfig {
    double outlier_weight = 0.1;     // w0, probability mass of the uniform outlier component
    double interaction_volume = 1.0; // V, cubic meters
    double convergence_tol = 1e-3;
    int max_iters = 60;
    int candidate_count = 8;
    int mstep_iters = 12;
};

struct FitResult {
    Superquadric shape;
    PlanarPose pose;                  // recovered planar placement g
    double noise_var = 1e-6;          // sigma^2
    std::vector<double> inlier_probs; // gamma expectations, one per input point
    bool converged = false;
    int iterations = 0;
    double nll = 0.0;                 // final negative log-likelihood
};

struct EStepResult {
    std::vector<Eigen::Vector3d> closest_points;
    std::vector<double> inlier_probs;
};

/// Transform a world point into the body frame of a tabletop object.
/// Convention: the object rests on the table plane z = 0, so its body-frame
/// origin sits at height az.
Eigen::Vector3d world_to_body(const Superquadric& s, const PlanarPose& g,
                              const Eigen::Vector3d& p);
Eigen::Vector3d body_to_world(const Superquadric& s, const PlanarPose& g,
                              const Eigen::Vector3d& q);

/// Expectation step: closest surface points and inlier posteriors.
EStepResult e_step(const Superquadric& shape, const PlanarPose& pose, double noise_var,
                   const EmsConfig& cfg, const PointCloud& cloud);

/// Robust superquadric recovery from a noisy, possibly outlier-ridden cloud.
/// Throws std::invalid_argument for clouds with fewer than 50 points.
FitResult ems_fit(const PointCloud& cloud, const EmsConfig& cfg, std::uint64_t rng_seed);

}  // namespace cmpush
