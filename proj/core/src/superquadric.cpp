#include "cmpush/superquadric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmpush {
namespace {

constexpr double kPi = 3.14159265358979323846;

inline double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

/// |t|^e with a guard against 0^negative.
inline double pow_abs(double t, double e) {
    const double a = std::abs(t);
    if (a == 0.0) {
        if (e > 0.0) return 0.0;
        if (e == 0.0) return 1.0;
        return std::numeric_limits<double>::infinity();
    }
    return std::pow(a, e);
}

/// sgn(cos u)|cos u|^e and its companion for sin.
inline double cos_e(double u, double e) {
    const double c = std::cos(u);
    return sgn(c) * pow_abs(c, e);
}
inline double sin_e(double u, double e) {
    const double s = std::sin(u);
    return sgn(s) * pow_abs(s, e);
}

/// Double-graded map [0,1] -> [0,1] clustering nodes at both ends, with its
/// derivative. Used to resolve the integrable |cos|^(eps-1) singularities of
/// the area element at the parametric edges.
inline double graded(double s, double& deriv) {
    constexpr double m = 3.0;
    const double a = std::pow(s, m);
    const double b = std::pow(1.0 - s, m);
    const double den = a + b;
    const double da = m * std::pow(s, m - 1.0);
    const double db = m * std::pow(1.0 - s, m - 1.0);
    deriv = (da * b + a * db) / (den * den);
    return a / den;
}

// 4-point Gauss-Legendre nodes/weights on [0, 1]
constexpr double kGl4X[4] = {0.06943184420297371, 0.33000947820757187,
                             0.66999052179242813, 0.93056815579702623};
constexpr double kGl4W[4] = {0.17392742256872692, 0.32607257743127305,
                             0.32607257743127305, 0.17392742256872692};

}  // namespace

bool Superquadric::valid() const {
    return eps1 > 0.0 && eps1 <= 2.0 && eps2 > 0.0 && eps2 <= 2.0 && ax > 0.0 && ay > 0.0 &&
           az > 0.0 && std::isfinite(ax) && std::isfinite(ay) && std::isfinite(az);
}

void Superquadric::require_valid() const {
    if (!valid()) throw std::invalid_argument("Superquadric: parameters out of range");
}

double implicit_value(const Superquadric& s, const Eigen::Vector3d& p) {
    if (!p.allFinite()) throw std::invalid_argument("implicit_value: non-finite point");
    const double gx = pow_abs(p.x() / s.ax, 2.0 / s.eps2);
    const double gy = pow_abs(p.y() / s.ay, 2.0 / s.eps2);
    const double g = gx + gy;
    const double first = g == 0.0 ? 0.0 : std::pow(g, s.eps2 / s.eps1);
    return first + pow_abs(p.z() / s.az, 2.0 / s.eps1);
}

Eigen::Vector3d implicit_gradient(const Superquadric& s, const Eigen::Vector3d& p) {
    const double gx = pow_abs(p.x() / s.ax, 2.0 / s.eps2);
    const double gy = pow_abs(p.y() / s.ay, 2.0 / s.eps2);
    const double g = gx + gy;
    const double outer = g == 0.0 ? (s.eps2 / s.eps1 >= 1.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                  : std::pow(g, s.eps2 / s.eps1 - 1.0);
    const double dx = (2.0 / s.eps1) * outer * pow_abs(p.x() / s.ax, 2.0 / s.eps2 - 1.0) *
                      sgn(p.x()) / s.ax;
    const double dy = (2.0 / s.eps1) * outer * pow_abs(p.y() / s.ay, 2.0 / s.eps2 - 1.0) *
                      sgn(p.y()) / s.ay;
    const double dz = (2.0 / s.eps1) * pow_abs(p.z() / s.az, 2.0 / s.eps1 - 1.0) * sgn(p.z()) / s.az;
    return {p.x() == 0.0 ? 0.0 : dx, p.y() == 0.0 ? 0.0 : dy, p.z() == 0.0 ? 0.0 : dz};
}

Eigen::Vector3d outward_normal(const Superquadric& s, const Eigen::Vector3d& surface_pt) {
    s.require_valid();
    const Eigen::Vector3d grad = implicit_gradient(s, surface_pt);
    const double n = grad.norm();
    if (!std::isfinite(n) || n < 1e-12) {
        throw std::domain_error("outward_normal: degenerate gradient at axis pole");
    }
    return grad / n;
}

Eigen::Vector3d surface_point(const Superquadric& s, double eta, double omega) {
    const double c1 = cos_e(eta, s.eps1);
    const double z1 = sin_e(eta, s.eps1);
    const double c2 = cos_e(omega, s.eps2);
    const double s2 = sin_e(omega, s.eps2);
    return {s.ax * c1 * c2, s.ay * c1 * s2, s.az * z1};
}

double area_element(const Superquadric& s, double eta, double omega) {
    const double ce = std::cos(eta), se = std::sin(eta);
    const double co = std::cos(omega), so = std::sin(omega);

    const double c1 = sgn(ce) * pow_abs(ce, s.eps1);
    const double z1 = sgn(se) * pow_abs(se, s.eps1);
    (void)z1;
    const double c2 = sgn(co) * pow_abs(co, s.eps2);
    const double s2 = sgn(so) * pow_abs(so, s.eps2);

    const double dc1 = -s.eps1 * pow_abs(ce, s.eps1 - 1.0) * se;
    const double dz1 = s.eps1 * pow_abs(se, s.eps1 - 1.0) * ce;
    const double dc2 = -s.eps2 * pow_abs(co, s.eps2 - 1.0) * so;
    const double ds2 = s.eps2 * pow_abs(so, s.eps2 - 1.0) * co;

    const Eigen::Vector3d t_eta(s.ax * dc1 * c2, s.ay * dc1 * s2, s.az * dz1);
    const Eigen::Vector3d t_omega(s.ax * c1 * dc2, s.ay * c1 * ds2, 0.0);
    const double ae = t_eta.cross(t_omega).norm();
    return std::isfinite(ae) ? ae : 0.0;
}

double surface_area(const Superquadric& s, int cells_per_axis) {
    s.require_valid();
    const int n = std::max(4, cells_per_axis);
    const double hs = 1.0 / n;
    double total = 0.0;
    // first octant in graded coordinates, exploiting reflection symmetry
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double cell = 0.0;
            for (int a = 0; a < 4; ++a) {
                const double su = (i + kGl4X[a]) * hs;
                double du;
                const double eta = 0.5 * kPi * graded(su, du);
                for (int b = 0; b < 4; ++b) {
                    const double sv = (j + kGl4X[b]) * hs;
                    double dv;
                    const double omega = 0.5 * kPi * graded(sv, dv);
                    const double ae = area_element(s, eta, omega);
                    cell += kGl4W[a] * kGl4W[b] * ae * du * dv;
                }
            }
            total += cell * hs * hs * 0.25 * kPi * kPi;
        }
    }
    return 8.0 * total;
}

namespace {

/// Map a surface point back to (eta, omega) parameters.
void invert_parameters(const Superquadric& s, const Eigen::Vector3d& q, double& eta,
                       double& omega) {
    const double sz = std::clamp(q.z() / s.az, -1.0, 1.0);
    const double sin_eta = sgn(sz) * pow_abs(sz, 1.0 / s.eps1);
    eta = std::asin(std::clamp(sin_eta, -1.0, 1.0));
    const double c1 = cos_e(eta, s.eps1);
    if (std::abs(c1) < 1e-12) {
        omega = 0.0;
        return;
    }
    const double u = q.x() / (s.ax * c1);
    const double v = q.y() / (s.ay * c1);
    omega = std::atan2(sgn(v) * pow_abs(v, 1.0 / s.eps2), sgn(u) * pow_abs(u, 1.0 / s.eps2));
}

}  // namespace

Eigen::Vector3d closest_surface_point(const Superquadric& s, const Eigen::Vector3d& p,
                                      int refine_steps) {
    s.require_valid();
    if (!p.allFinite()) throw std::invalid_argument("closest_surface_point: non-finite point");

    // Radial-scaling seed: F(t p) = t^(2/eps1) F(p), so t* = F(p)^(-eps1/2).
    Eigen::Vector3d seed;
    const double f = implicit_value(s, p);
    if (f < 1e-12 || p.norm() < 1e-12) {
        // at/near the center: nearest surface point lies along the shortest semi-axis
        const double m = std::min({s.ax, s.ay, s.az});
        if (m == s.az) seed = {0.0, 0.0, s.az * sgn(p.z() == 0.0 ? 1.0 : p.z())};
        else if (m == s.ax) seed = {s.ax * sgn(p.x() == 0.0 ? 1.0 : p.x()), 0.0, 0.0};
        else seed = {0.0, s.ay * sgn(p.y() == 0.0 ? 1.0 : p.y()), 0.0};
    } else {
        seed = std::pow(f, -s.eps1 / 2.0) * p;
    }

    double eta, omega;
    invert_parameters(s, seed, eta, omega);

    // Damped Gauss-Newton on ||S(eta, omega) - p||^2 with numeric Jacobian.
    double lambda = 1e-6;
    Eigen::Vector3d best = surface_point(s, eta, omega);
    double best_d2 = (best - p).squaredNorm();
    const double h = 1e-6;
    for (int it = 0; it < refine_steps; ++it) {
        const Eigen::Vector3d r = surface_point(s, eta, omega) - p;
        const Eigen::Vector3d je =
            (surface_point(s, eta + h, omega) - surface_point(s, eta - h, omega)) / (2.0 * h);
        const Eigen::Vector3d jo =
            (surface_point(s, eta, omega + h) - surface_point(s, eta, omega - h)) / (2.0 * h);
        Eigen::Matrix2d jtj;
        jtj << je.dot(je), je.dot(jo), je.dot(jo), jo.dot(jo);
        const Eigen::Vector2d jtr(je.dot(r), jo.dot(r));
        bool improved = false;
        for (int tries = 0; tries < 8; ++tries) {
            Eigen::Matrix2d a = jtj;
            a(0, 0) += lambda * (1.0 + jtj(0, 0));
            a(1, 1) += lambda * (1.0 + jtj(1, 1));
            const Eigen::Vector2d step = a.ldlt().solve(-jtr);
            const double eta_n = std::clamp(eta + step.x(), -0.5 * kPi + 1e-9, 0.5 * kPi - 1e-9);
            const double omega_n = omega + step.y();
            const Eigen::Vector3d cand = surface_point(s, eta_n, omega_n);
            const double d2 = (cand - p).squaredNorm();
            if (d2 < best_d2) {
                eta = eta_n;
                omega = omega_n;
                best = cand;
                best_d2 = d2;
                lambda = std::max(1e-9, lambda * 0.3);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }
    return best;
}

SurfaceSampler::SurfaceSampler(const Superquadric& s, int grid_eta, int grid_omega)
    : shape_(s), ne_(grid_eta), no_(grid_omega) {
    s.require_valid();
    cum_.resize(static_cast<size_t>(ne_) * no_);
    cell_max_.resize(cum_.size());
    double acc = 0.0;
    const double he = 1.0 / ne_, ho = 1.0 / no_;
    for (int i = 0; i < ne_; ++i) {
        for (int j = 0; j < no_; ++j) {
            double mass = 0.0, mx = 0.0;
            for (int a = 0; a < 4; ++a) {
                double du;
                const double eta = 0.5 * kPi * graded((i + kGl4X[a]) * he, du);
                for (int b = 0; b < 4; ++b) {
                    double dv;
                    const double omega = 0.5 * kPi * graded((j + kGl4X[b]) * ho, dv);
                    const double w = area_element(shape_, eta, omega) * du * dv;
                    mass += kGl4W[a] * kGl4W[b] * w;
                    mx = std::max(mx, w);
                }
            }
            acc += mass;
            cum_[static_cast<size_t>(i) * no_ + j] = acc;
            cell_max_[static_cast<size_t>(i) * no_ + j] = 2.0 * mx;
        }
    }
}

Eigen::Vector3d SurfaceSampler::sample(Rng& rng) const {
    const double total = cum_.back();
    const double r = rng.uniform() * total;
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), r);
    const size_t cell = std::min(static_cast<size_t>(it - cum_.begin()), cum_.size() - 1);
    const int i = static_cast<int>(cell) / no_;
    const int j = static_cast<int>(cell) % no_;
    const double he = 1.0 / ne_, ho = 1.0 / no_;

    double eta = 0.0, omega = 0.0;
    const double bound = std::max(cell_max_[cell], 1e-300);
    for (int tries = 0; tries < 64; ++tries) {
        const double su = (i + rng.uniform()) * he;
        const double sv = (j + rng.uniform()) * ho;
        double du, dv;
        const double e = 0.5 * kPi * graded(su, du);
        const double o = 0.5 * kPi * graded(sv, dv);
        const double w = area_element(shape_, e, o) * du * dv;
        eta = e;
        omega = o;
        if (rng.uniform() * bound < w) break;
    }
    Eigen::Vector3d p = surface_point(shape_, eta, omega);
    // random octant via reflection symmetry
    if (rng.uniform() < 0.5) p.x() = -p.x();
    if (rng.uniform() < 0.5) p.y() = -p.y();
    if (rng.uniform() < 0.5) p.z() = -p.z();
    return p;
}

PointCloud surface_sample(const Superquadric& s, int count, std::uint64_t rng_seed) {
    if (count < 1) throw std::invalid_argument("surface_sample: count must be >= 1");
    SurfaceSampler sampler(s);
    Rng rng(rng_seed);
    PointCloud out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(sampler.sample(rng));
    return out;
}

// ---- silhouette helpers ----

double silhouette_value(const Superquadric& s, const Eigen::Vector2d& q) {
    return pow_abs(q.x() / s.ax, 2.0 / s.eps2) + pow_abs(q.y() / s.ay, 2.0 / s.eps2);
}

Eigen::Vector2d silhouette_point(const Superquadric& s, double omega) {
    return {s.ax * cos_e(omega, s.eps2), s.ay * sin_e(omega, s.eps2)};
}

Eigen::Vector2d silhouette_closest_point(const Superquadric& s, const Eigen::Vector2d& q) {
    // radial seed
    double omega;
    const double v = silhouette_value(s, q);
    Eigen::Vector2d seed;
    if (v < 1e-12 || q.norm() < 1e-12) {
        seed = {s.ax, 0.0};
    } else {
        seed = std::pow(v, -s.eps2 / 2.0) * q;
    }
    {
        const double u = seed.x() / s.ax, w = seed.y() / s.ay;
        omega = std::atan2(sgn(w) * pow_abs(w, 1.0 / s.eps2), sgn(u) * pow_abs(u, 1.0 / s.eps2));
    }
    // 1-D damped Newton on distance in omega
    Eigen::Vector2d best = silhouette_point(s, omega);
    double best_d2 = (best - q).squaredNorm();
    const double h = 1e-6;
    double lambda = 1e-6;
    for (int it = 0; it < 10; ++it) {
        const Eigen::Vector2d r = silhouette_point(s, omega) - q;
        const Eigen::Vector2d j =
            (silhouette_point(s, omega + h) - silhouette_point(s, omega - h)) / (2.0 * h);
        const double jtj = j.dot(j), jtr = j.dot(r);
        bool improved = false;
        for (int tries = 0; tries < 6; ++tries) {
            const double step = -jtr / (jtj + lambda * (1.0 + jtj));
            const Eigen::Vector2d cand = silhouette_point(s, omega + step);
            const double d2 = (cand - q).squaredNorm();
            if (d2 < best_d2) {
                omega += step;
                best = cand;
                best_d2 = d2;
                lambda = std::max(1e-9, lambda * 0.3);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }
    return best;
}

Eigen::Vector2d silhouette_outward_normal(const Superquadric& s, const Eigen::Vector2d& b) {
    const double p = 2.0 / s.eps2;
    double gx = p * pow_abs(b.x() / s.ax, p - 1.0) * sgn(b.x()) / s.ax;
    double gy = p * pow_abs(b.y() / s.ay, p - 1.0) * sgn(b.y()) / s.ay;
    if (b.x() == 0.0) gx = 0.0;
    if (b.y() == 0.0) gy = 0.0;
    Eigen::Vector2d g(gx, gy);
    double n = g.norm();
    if (!std::isfinite(n) || n < 1e-12) {
        // fall back to a finite-difference normal of the boundary tangent
        const double u = b.x() / s.ax, v = b.y() / s.ay;
        double omega = std::atan2(sgn(v) * pow_abs(v, 1.0 / s.eps2), sgn(u) * pow_abs(u, 1.0 / s.eps2));
        const double h = 1e-5;
        const Eigen::Vector2d t = silhouette_point(s, omega + h) - silhouette_point(s, omega - h);
        g = Eigen::Vector2d(t.y(), -t.x());
        if (g.dot(b) < 0.0) g = -g;
        n = g.norm();
    }
    return g / n;
}

namespace {

struct BoundaryTable {
    std::vector<double> omega;
    std::vector<double> cum_len;  // cumulative chord length
};

BoundaryTable boundary_table(const Superquadric& s, int segments = 512) {
    BoundaryTable t;
    t.omega.resize(segments + 1);
    t.cum_len.resize(segments + 1);
    Eigen::Vector2d prev = silhouette_point(s, -kPi);
    t.omega[0] = -kPi;
    t.cum_len[0] = 0.0;
    for (int k = 1; k <= segments; ++k) {
        const double o = -kPi + 2.0 * kPi * k / segments;
        const Eigen::Vector2d p = silhouette_point(s, o);
        t.omega[k] = o;
        t.cum_len[k] = t.cum_len[k - 1] + (p - prev).norm();
        prev = p;
    }
    return t;
}

}  // namespace

double silhouette_mean_radius(const Superquadric& s) {
    const BoundaryTable t = boundary_table(s);
    double acc = 0.0;
    for (size_t k = 1; k < t.omega.size(); ++k) {
        const double mid = 0.5 * (t.omega[k - 1] + t.omega[k]);
        acc += silhouette_point(s, mid).norm() * (t.cum_len[k] - t.cum_len[k - 1]);
    }
    return acc / t.cum_len.back();
}

Eigen::Vector2d silhouette_sample_boundary(const Superquadric& s, Rng& rng) {
    const BoundaryTable t = boundary_table(s);
    const double target = rng.uniform() * t.cum_len.back();
    const auto it = std::upper_bound(t.cum_len.begin(), t.cum_len.end(), target);
    size_t k = std::min(static_cast<size_t>(it - t.cum_len.begin()), t.cum_len.size() - 1);
    if (k == 0) k = 1;
    const double seg = t.cum_len[k] - t.cum_len[k - 1];
    const double f = seg > 0.0 ? (target - t.cum_len[k - 1]) / seg : 0.5;
    const double omega = t.omega[k - 1] + f * (t.omega[k] - t.omega[k - 1]);
    return silhouette_point(s, omega);
}

}  // namespace cmpush
