#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "cmpush/geometry.hpp"
#include "cmpush/rng.hpp"

namespace cmpush {

/// Five-parameter superquadric: shape exponents and semi-axis lengths.
/// Exponents are restricted to (0, 2], which keeps the surface convex.
struct Superquadric {
    double eps1 = 1.0;
    double eps2 = 1.0;
    double ax = 0.1;
    double ay = 0.1;
    double az = 0.1;

    bool valid() const;
    void require_valid() const;  // throws std::invalid_argument when invalid
};

/// Inside-outside function: < 1 inside, = 1 on the surface, > 1 outside.
double implicit_value(const Superquadric& s, const Eigen::Vector3d& p);

/// Gradient of the inside-outside function. May be degenerate (non-finite or
/// vanishing) at the axis poles.
Eigen::Vector3d implicit_gradient(const Superquadric& s, const Eigen::Vector3d& p);

/// Unit normal pointing away from the interior at a surface point.
/// Throws std::domain_error when the gradient is degenerate (axis poles).
Eigen::Vector3d outward_normal(const Superquadric& s, const Eigen::Vector3d& surface_pt);

/// Surface point of the (eta, omega) parameterization,
/// eta in [-pi/2, pi/2], omega in [-pi, pi].
Eigen::Vector3d surface_point(const Superquadric& s, double eta, double omega);

/// Local area element |S_eta x S_omega| of the parameterization.
double area_element(const Superquadric& s, double eta, double omega);

/// Total surface area via graded composite Gauss-Legendre quadrature over the
/// parametric domain.
double surface_area(const Superquadric& s, int cells_per_axis = 96);

/// Closest point on the surface to an arbitrary point. Radial-scaling seed
/// refined by damped Gauss-Newton in the parametric domain.
Eigen::Vector3d closest_surface_point(const Superquadric& s, const Eigen::Vector3d& p,
                                      int refine_steps = 10);

/// Area-weighted cell table over the parametric domain for repeated uniform
/// surface sampling.
class SurfaceSampler {
public:
    explicit SurfaceSampler(const Superquadric& s, int grid_eta = 96, int grid_omega = 96);

    Eigen::Vector3d sample(Rng& rng) const;
    const Superquadric& shape() const { return shape_; }

private:
    Superquadric shape_;
    int ne_, no_;
    std::vector<double> cum_;       // cumulative cell mass over the first octant
    std::vector<double> cell_max_;  // density bound per cell (s-space)
};

/// `count` points distributed uniformly per unit area on the surface.
PointCloud surface_sample(const Superquadric& s, int count, std::uint64_t rng_seed);

// ---- z = 0 silhouette (the mid-height cross-section used by pushing) ----

/// Superellipse inside-outside value of the silhouette at body-frame (qx, qy).
double silhouette_value(const Superquadric& s, const Eigen::Vector2d& q);

/// Boundary point of the silhouette at parameter omega in [-pi, pi].
Eigen::Vector2d silhouette_point(const Superquadric& s, double omega);

/// Closest silhouette boundary point to a body-frame 2D point.
Eigen::Vector2d silhouette_closest_point(const Superquadric& s, const Eigen::Vector2d& q);

/// Unit outward normal of the silhouette at a boundary point.
Eigen::Vector2d silhouette_outward_normal(const Superquadric& s, const Eigen::Vector2d& boundary_pt);

/// Arc-length mean of the silhouette boundary radius.
double silhouette_mean_radius(const Superquadric& s);

/// Arc-length-uniform random boundary point, returns (point, omega).
Eigen::Vector2d silhouette_sample_boundary(const Superquadric& s, Rng& rng);

}  // namespace cmpush
