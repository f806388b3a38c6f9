#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "cmpush/geometry.hpp"
#include "cmpush/pushsim.hpp"

namespace cmpush {

/// Fixed workspace depth range for grayscale normalization (meters).
constexpr double kDepthNear = 0.3;
constexpr double kDepthFar = 1.2;
/// Flattened visual dimensions of the observation vector.
constexpr int kImageSize = 64;
constexpr int kVisualDim = kImageSize * kImageSize;
constexpr int kObservationDim = kVisualDim + 2;

/// Pinhole camera with rigid world -> camera extrinsics.
struct CameraModel {
    double fx = 70.0, fy = 70.0;
    double cx = 32.0, cy = 32.0;
    int width = kImageSize, height = kImageSize;
    Eigen::Isometry3d world_to_camera = Eigen::Isometry3d::Identity();

    bool valid() const {
        return fx > 0.0 && fy > 0.0 && cx >= 0.0 && cx < width && cy >= 0.0 && cy < height;
    }

    /// Camera 0.8 m above the table center, looking straight down.
    static CameraModel default_overhead();
};

/// Row-major grayscale image, values in [0, 1].
struct Image {
    int width = 0, height = 0;
    std::vector<double> pixels;  // row-major

    double& at(int row, int col) { return pixels[static_cast<size_t>(row) * width + col]; }
    double at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }
};

using ObservationVector = Eigen::VectorXd;  // length kObservationDim

struct NoiseModel {
    double sigma_vis = 0.05;  // grayscale units
    double sigma_tac = 0.05;  // Newtons
};

/// Render the initial cloud transformed by the planar pose delta from
/// `initial_pose` to `pose`: nearest-point splatting with z-buffering, inverse
/// depth mapped linearly to [0, 1] over the workspace range.
/// Throws std::runtime_error when every point falls behind the camera.
Image render(const PlanarPose& pose, const PlanarPose& initial_pose,
             const PointCloud& initial_cloud, const CameraModel& camera);

/// Row-major flatten of a 64x64 image with the two tactile components last.
ObservationVector assemble_observation(const Image& image, const ContactForce& force);

/// Invert assemble_observation (for round-trip checks and debugging).
void split_observation(const ObservationVector& z, Image& image, ContactForce& force);

/// Diagonal observation covariance entries (variances).
Eigen::VectorXd observation_noise_diag(const NoiseModel& noise);

}  // namespace cmpush
