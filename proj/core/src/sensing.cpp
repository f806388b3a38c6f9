#include "cmpush/sensing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmpush {

CameraModel CameraModel::default_overhead() {
    CameraModel c;
    c.fx = c.fy = 70.0;
    c.cx = c.cy = 32.0;
    c.width = c.height = kImageSize;
    // camera axes: x_cam = x_world, y_cam = -y_world, z_cam looks down at the table
    Eigen::Matrix3d r;
    r << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    c.world_to_camera = Eigen::Isometry3d::Identity();
    c.world_to_camera.linear() = r;
    c.world_to_camera.translation() = Eigen::Vector3d(0.0, 0.0, 0.8);
    return c;
}

Image render(const PlanarPose& pose, const PlanarPose& initial_pose,
             const PointCloud& initial_cloud, const CameraModel& camera) {
    if (initial_cloud.empty()) throw std::invalid_argument("render: empty cloud");
    if (!camera.valid()) throw std::invalid_argument("render: invalid camera");

    // pose delta: rotate about the initial position, then translate
    const double dtheta = wrap_angle(pose.theta - initial_pose.theta);
    const double ct = std::cos(dtheta), st = std::sin(dtheta);
    const Eigen::Vector2d p0 = initial_pose.translation();
    const Eigen::Vector2d p1 = pose.translation();

    Image img;
    img.width = camera.width;
    img.height = camera.height;
    img.pixels.assign(static_cast<size_t>(camera.width) * camera.height, 0.0);
    std::vector<double> zbuf(img.pixels.size(), std::numeric_limits<double>::infinity());

    bool any_in_front = false;
    for (const auto& p : initial_cloud) {
        const double rx = p.x() - p0.x(), ry = p.y() - p0.y();
        const Eigen::Vector3d moved(ct * rx - st * ry + p1.x(), st * rx + ct * ry + p1.y(), p.z());
        const Eigen::Vector3d pc = camera.world_to_camera * moved;
        if (pc.z() <= 1e-6) continue;
        any_in_front = true;
        const int u = static_cast<int>(std::lround(camera.fx * pc.x() / pc.z() + camera.cx));
        const int v = static_cast<int>(std::lround(camera.fy * pc.y() / pc.z() + camera.cy));
        if (u < 0 || u >= camera.width || v < 0 || v >= camera.height) continue;
        const size_t idx = static_cast<size_t>(v) * camera.width + u;
        if (pc.z() < zbuf[idx]) {
            zbuf[idx] = pc.z();
            img.pixels[idx] = std::clamp((kDepthFar - pc.z()) / (kDepthFar - kDepthNear), 0.0, 1.0);
        }
    }
    if (!any_in_front) throw std::runtime_error("render: all points behind the camera");
    return img;
}

ObservationVector assemble_observation(const Image& image, const ContactForce& force) {
    if (image.width != kImageSize || image.height != kImageSize)
        throw std::invalid_argument("assemble_observation: image must be 64x64");
    ObservationVector z(kObservationDim);
    for (int i = 0; i < kVisualDim; ++i) z[i] = image.pixels[i];
    z[kVisualDim] = force.fx;
    z[kVisualDim + 1] = force.fy;
    return z;
}

void split_observation(const ObservationVector& z, Image& image, ContactForce& force) {
    if (z.size() != kObservationDim)
        throw std::invalid_argument("split_observation: wrong length");
    image.width = image.height = kImageSize;
    image.pixels.assign(kVisualDim, 0.0);
    for (int i = 0; i < kVisualDim; ++i) image.pixels[i] = z[i];
    force.fx = z[kVisualDim];
    force.fy = z[kVisualDim + 1];
}

Eigen::VectorXd observation_noise_diag(const NoiseModel& noise) {
    if (noise.sigma_vis <= 0.0 || noise.sigma_tac <= 0.0)
        throw std::invalid_argument("observation_noise_diag: sigmas must be > 0");
    Eigen::VectorXd r(kObservationDim);
    r.head(kVisualDim).setConstant(noise.sigma_vis * noise.sigma_vis);
    r[kVisualDim] = r[kVisualDim + 1] = noise.sigma_tac * noise.sigma_tac;
    return r;
}

}  // namespace cmpush
