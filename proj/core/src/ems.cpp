#include "cmpush/ems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cmpush/optimize.hpp"

namespace cmpush {
namespace {

constexpr double kPi = 3.14159265358979323846;

// box constraints for the M-step: eps in [0.01, 2], semi-axes in [1 mm, 1 m]
constexpr double kEpsLo = 0.01, kEpsHi = 2.0;
constexpr double kAxisLo = 1e-3, kAxisHi = 1.0;

Eigen::VectorXd pack(const Superquadric& s, const PlanarPose& g) {
    Eigen::VectorXd x(8);
    x << s.eps1, s.eps2, s.ax, s.ay, s.az, g.x, g.y, g.theta;
    return x;
}

void unpack(const Eigen::VectorXd& x, Superquadric& s, PlanarPose& g) {
    s.eps1 = x[0];
    s.eps2 = x[1];
    s.ax = x[2];
    s.ay = x[3];
    s.az = x[4];
    g.x = x[5];
    g.y = x[6];
    g.theta = x[7];
}

/// Radial approximation of the distance from a body-frame point to the
/// surface: scale the point onto the surface along its ray from the origin.
double radial_distance(const Superquadric& s, const Eigen::Vector3d& q) {
    const double f = implicit_value(s, q);
    const double r = q.norm();
    if (f < 1e-12 || r < 1e-12) return std::min({s.ax, s.ay, s.az}) - r;
    return r * std::abs(1.0 - std::pow(f, -s.eps1 / 2.0));
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    const size_t k = std::min(v.size() - 1, static_cast<size_t>(q * (v.size() - 1) + 0.5));
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

struct InitGuess {
    Superquadric shape;
    PlanarPose pose;
};

InitGuess initial_guess(const PointCloud& cloud) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& p : cloud) c += p;
    c /= static_cast<double>(cloud.size());

    // planar orientation from the xy scatter
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& p : cloud) {
        const Eigen::Vector2d d(p.x() - c.x(), p.y() - c.y());
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(cloud.size());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const Eigen::Vector2d major = es.eigenvectors().col(1);
    const double theta = std::atan2(major.y(), major.x());

    std::vector<double> us, vs, zs;
    us.reserve(cloud.size());
    vs.reserve(cloud.size());
    zs.reserve(cloud.size());
    const double ct = std::cos(theta), st = std::sin(theta);
    for (const auto& p : cloud) {
        const double dx = p.x() - c.x(), dy = p.y() - c.y();
        us.push_back(std::abs(ct * dx + st * dy));
        vs.push_back(std::abs(-st * dx + ct * dy));
        zs.push_back(p.z());
    }
    InitGuess g;
    g.shape.eps1 = 1.0;
    g.shape.eps2 = 1.0;
    g.shape.ax = std::clamp(quantile(us, 0.95), kAxisLo, kAxisHi);
    g.shape.ay = std::clamp(quantile(vs, 0.95), kAxisLo, kAxisHi);
    g.shape.az = std::clamp(0.5 * quantile(zs, 0.95), kAxisLo, kAxisHi);
    g.pose = PlanarPose(c.x(), c.y(), theta);
    return g;
}

struct Candidate {
    Superquadric shape;
    double theta_offset;
};

std::vector<Candidate> make_candidates(const Superquadric& s) {
    std::vector<Candidate> out;
    // x/y swap, realizable on the table by a quarter turn
    out.push_back({{s.eps1, s.eps2, s.ay, s.ax, s.az}, 0.5 * kPi});
    // permutations moving the vertical axis; exponents swap roles
    out.push_back({{s.eps2, s.eps1, s.az, s.ay, s.ax}, 0.0});
    out.push_back({{s.eps2, s.eps1, s.ax, s.az, s.ay}, 0.0});
    out.push_back({{s.eps2, s.eps1, s.az, s.ax, s.ay}, 0.5 * kPi});
    out.push_back({{s.eps2, s.eps1, s.ay, s.az, s.ax}, 0.5 * kPi});
    // exponent inflections
    const double i1 = std::clamp(2.0 - s.eps1, kEpsLo, kEpsHi);
    const double i2 = std::clamp(2.0 - s.eps2, kEpsLo, kEpsHi);
    out.push_back({{i1, s.eps2, s.ax, s.ay, s.az}, 0.0});
    out.push_back({{s.eps1, i2, s.ax, s.ay, s.az}, 0.0});
    out.push_back({{i1, i2, s.ax, s.ay, s.az}, 0.0});
    return out;
}

struct EmState {
    Superquadric shape;
    PlanarPose pose;
    double sigma2 = 1e-4;
    double nll = std::numeric_limits<double>::infinity();
};

class EmDriver {
public:
    EmDriver(const PointCloud& cloud, const EmsConfig& cfg) : cloud_(cloud), cfg_(cfg) {}

    /// One E-step + M-step; returns the post-step NLL.
    double iterate(EmState& st, int mstep_iters) {
        const EStepResult e = e_step(st.shape, st.pose, st.sigma2, cfg_, cloud_);
        gamma_ = e.inlier_probs;

        // M-step over shape and planar pose; noise variance in closed form after
        BoxBounds b;
        b.lo.resize(8);
        b.hi.resize(8);
        b.lo << kEpsLo, kEpsLo, kAxisLo, kAxisLo, kAxisLo, st.pose.x - 0.5, st.pose.y - 0.5, -7.0;
        b.hi << kEpsHi, kEpsHi, kAxisHi, kAxisHi, kAxisHi, st.pose.x + 0.5, st.pose.y + 0.5, 7.0;
        const double sigma2 = st.sigma2;
        Objective obj = [&](const Eigen::VectorXd& x) { return objective(x, sigma2); };
        const MinimizeResult r = minimize_bounded(obj, pack(st.shape, st.pose), b, mstep_iters);
        unpack(r.x, st.shape, st.pose);
        st.pose = st.pose.normalized();

        // closed-form isotropic noise update from the weighted residuals
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < cloud_.size(); ++i) {
            const double d = radial_distance(st.shape, world_to_body(st.shape, st.pose, cloud_[i]));
            num += gamma_[i] * d * d;
            den += gamma_[i];
        }
        st.sigma2 = std::max(num / std::max(3.0 * den, 1e-12), 1e-10);
        st.nll = nll(st);
        return st.nll;
    }

    double nll(const EmState& st) const {
        const double log_c_term = 1.5 * std::log(2.0 * kPi * st.sigma2);
        double acc = 0.0;
        for (size_t i = 0; i < cloud_.size(); ++i) {
            const double d = radial_distance(st.shape, world_to_body(st.shape, st.pose, cloud_[i]));
            const double g = gamma_.empty() ? 1.0 : gamma_[i];
            acc += g * (d * d / (2.0 * st.sigma2) + log_c_term);
        }
        return acc + static_cast<double>(cloud_.size()) * std::log(surface_area_cached(st.shape));
    }

    const std::vector<double>& gamma() const { return gamma_; }

private:
    double objective(const Eigen::VectorXd& x, double sigma2) const {
        Superquadric s;
        PlanarPose g;
        unpack(x, s, g);
        if (!s.valid()) return std::numeric_limits<double>::infinity();
        double acc = 0.0;
        for (size_t i = 0; i < cloud_.size(); ++i) {
            const double d = radial_distance(s, world_to_body(s, g, cloud_[i]));
            acc += gamma_[i] * d * d;
        }
        return acc / (2.0 * sigma2) +
               static_cast<double>(cloud_.size()) * std::log(surface_area_cached(s));
    }

    double surface_area_cached(const Superquadric& s) const {
        return surface_area(s, 8);  // coarse but smooth; plenty for log-area
    }

    const PointCloud& cloud_;
    const EmsConfig& cfg_;
    std::vector<double> gamma_;
};

}  // namespace

Eigen::Vector3d world_to_body(const Superquadric& s, const PlanarPose& g,
                              const Eigen::Vector3d& p) {
    const double ct = std::cos(g.theta), st = std::sin(g.theta);
    const double dx = p.x() - g.x, dy = p.y() - g.y, dz = p.z() - s.az;
    return {ct * dx + st * dy, -st * dx + ct * dy, dz};
}

Eigen::Vector3d body_to_world(const Superquadric& s, const PlanarPose& g,
                              const Eigen::Vector3d& q) {
    const double ct = std::cos(g.theta), st = std::sin(g.theta);
    return {ct * q.x() - st * q.y() + g.x, st * q.x() + ct * q.y() + g.y, q.z() + s.az};
}

EStepResult e_step(const Superquadric& shape, const PlanarPose& pose, double noise_var,
                   const EmsConfig& cfg, const PointCloud& cloud) {
    shape.require_valid();
    if (noise_var <= 0.0) throw std::invalid_argument("e_step: noise_var must be > 0");
    EStepResult out;
    out.closest_points.reserve(cloud.size());
    out.inlier_probs.reserve(cloud.size());

    const double norm = std::pow(2.0 * kPi * noise_var, -1.5);
    const double outlier_term =
        cfg.outlier_weight <= 0.0
            ? 0.0
            : cfg.outlier_weight / ((1.0 - cfg.outlier_weight) * cfg.interaction_volume);

    for (const auto& p : cloud) {
        const Eigen::Vector3d q = world_to_body(shape, pose, p);
        const Eigen::Vector3d mu = closest_surface_point(shape, q, 6);
        const double r2 = (q - mu).squaredNorm();
        const double gauss = norm * std::exp(-0.5 * r2 / noise_var);
        const double gamma = cfg.outlier_weight <= 0.0 ? 1.0 : gauss / (gauss + outlier_term);
        out.closest_points.push_back(body_to_world(shape, pose, mu));
        out.inlier_probs.push_back(gamma);
    }
    return out;
}

FitResult ems_fit(const PointCloud& cloud, const EmsConfig& cfg,
                  [[maybe_unused]] std::uint64_t rng_seed) {
    if (cloud.size() < 50) throw std::invalid_argument("ems_fit: need at least 50 points");
    for (const auto& p : cloud)
        if (!p.allFinite()) throw std::invalid_argument("ems_fit: non-finite point in cloud");

    EmDriver driver(cloud, cfg);
    const InitGuess init = initial_guess(cloud);
    EmState st;
    st.shape = init.shape;
    st.pose = init.pose;
    st.sigma2 = 1e-4;

    EmState best = st;
    std::vector<double> nll_history;
    int iters = 0;
    bool converged = false;
    int candidates_spent = 0;

    for (; iters < cfg.max_iters; ++iters) {
        const Eigen::VectorXd before = pack(st.shape, st.pose);
        const double sigma_before = std::sqrt(st.sigma2);
        driver.iterate(st, cfg.mstep_iters);
        nll_history.push_back(st.nll);
        if (st.nll < best.nll) best = st;

        const Eigen::VectorXd after = pack(st.shape, st.pose);
        const double delta = std::max((after.head(5) - before.head(5)).cwiseAbs().maxCoeff(),
                                      std::abs(std::sqrt(st.sigma2) - sigma_before));
        if (delta < cfg.convergence_tol) {
            converged = true;
        }

        // stalled? try candidate switching
        const size_t h = nll_history.size();
        const bool stalled =
            converged ||
            (h >= 3 && (nll_history[h - 3] - nll_history[h - 1]) <
                           cfg.convergence_tol * std::abs(nll_history[h - 3]));
        if (stalled && candidates_spent < cfg.candidate_count) {
            EmState switched = st;
            bool any = false;
            const auto cands = make_candidates(st.shape);
            for (size_t ci = 0; ci < cands.size() && candidates_spent < cfg.candidate_count; ++ci) {
                ++candidates_spent;
                EmState trial = st;
                trial.shape = cands[ci].shape;
                trial.pose.theta = wrap_angle(trial.pose.theta + cands[ci].theta_offset);
                if (!trial.shape.valid()) continue;
                EmDriver td(cloud, cfg);
                td.iterate(trial, cfg.mstep_iters / 2 + 1);
                td.iterate(trial, cfg.mstep_iters / 2 + 1);
                if (trial.nll < switched.nll - 1e-9) {
                    switched = trial;
                    any = true;
                }
            }
            if (any) {
                st = switched;
                nll_history.clear();
                converged = false;
                if (st.nll < best.nll) best = st;
                continue;
            }
        }
        if (converged) {
            ++iters;
            break;
        }
    }

    FitResult res;
    res.shape = best.shape;
    res.pose = best.pose.normalized();
    res.noise_var = best.sigma2;
    res.converged = converged;
    res.iterations = iters;
    res.nll = best.nll;
    const EStepResult final_e = e_step(best.shape, res.pose, best.sigma2, cfg, cloud);
    res.inlier_probs = final_e.inlier_probs;
    return res;
}

}  // namespace cmpush
