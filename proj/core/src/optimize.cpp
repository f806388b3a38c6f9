#include "cmpush/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace cmpush {
namespace {

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double fx,
                                 const BoxBounds& b, double rel) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
        const double scale = std::max({std::abs(x[i]), 0.1 * (b.hi[i] - b.lo[i]), 1e-8});
        double h = rel * scale;
        Eigen::VectorXd xp = x;
        if (x[i] + h > b.hi[i]) h = -h;  // step inward at the boundary
        xp[i] = x[i] + h;
        g[i] = (f(xp) - fx) / h;
    }
    return g;
}

}  // namespace

MinimizeResult minimize_bounded(const Objective& f, const Eigen::VectorXd& x0,
                                const BoxBounds& bounds, int max_iters, double grad_rel_step,
                                double tol) {
    const int n = static_cast<int>(x0.size());
    Eigen::VectorXd x = bounds.clamp(x0);
    double fx = f(x);
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = numeric_gradient(f, x, fx, bounds, grad_rel_step);

    MinimizeResult res{x, fx, 0};
    for (int it = 0; it < max_iters; ++it) {
        res.iterations = it + 1;
        Eigen::VectorXd dir = -(h_inv * g);
        if (dir.dot(g) > 0.0) dir = -g;  // reset on loss of descent direction

        double alpha = 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new;
        double f_new = fx;
        for (int ls = 0; ls < 25; ++ls) {
            x_new = bounds.clamp(x + alpha * dir);
            f_new = f(x_new);
            if (f_new < fx - 1e-12 * std::abs(fx)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;

        const Eigen::VectorXd g_new = numeric_gradient(f, x_new, f_new, bounds, grad_rel_step);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            const Eigen::VectorXd hy = h_inv * y;
            const double yhy = y.dot(hy);
            // BFGS inverse update
            h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
                     (hy * s.transpose() + s * hy.transpose()) / sy;
        }
        const double delta = (x_new - x).cwiseAbs().maxCoeff();
        x = x_new;
        fx = f_new;
        g = g_new;
        res.x = x;
        res.value = fx;
        if (delta < tol) break;
    }
    return res;
}

MinimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const BoxBounds& bounds,
                           double initial_step, int max_evals) {
    const int n = static_cast<int>(x0.size());
    const int m = n + 1;
    std::vector<Eigen::VectorXd> v(m);
    std::vector<double> fv(m);
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return f(bounds.clamp(x));
    };
    v[0] = bounds.clamp(x0);
    fv[0] = eval(v[0]);
    for (int i = 0; i < n; ++i) {
        v[i + 1] = v[0];
        const double span = bounds.hi[i] - bounds.lo[i];
        v[i + 1][i] += initial_step * (std::isfinite(span) ? std::min(span, 1.0) : 1.0);
        v[i + 1] = bounds.clamp(v[i + 1]);
        fv[i + 1] = eval(v[i + 1]);
    }
    std::vector<int> idx(m);
    while (evals < max_evals) {
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        const int best = idx[0], worst = idx[m - 1], second = idx[m - 2];
        if (std::abs(fv[worst] - fv[best]) < 1e-12 * (1.0 + std::abs(fv[best]))) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < m; ++i)
            if (i != worst) centroid += v[i];
        centroid /= n;

        const Eigen::VectorXd xr = centroid + (centroid - v[worst]);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - v[worst]);
            const double fe = eval(xe);
            if (fe < fr) { v[worst] = bounds.clamp(xe); fv[worst] = fe; }
            else { v[worst] = bounds.clamp(xr); fv[worst] = fr; }
        } else if (fr < fv[second]) {
            v[worst] = bounds.clamp(xr);
            fv[worst] = fr;
        } else {
            const Eigen::VectorXd xc = centroid + 0.5 * (v[worst] - centroid);
            const double fc = eval(xc);
            if (fc < fv[worst]) {
                v[worst] = bounds.clamp(xc);
                fv[worst] = fc;
            } else {
                for (int i = 0; i < m; ++i) {
                    if (i == best) continue;
                    v[i] = bounds.clamp(v[best] + 0.5 * (v[i] - v[best]));
                    fv[i] = eval(v[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i < m; ++i)
        if (fv[i] < fv[best]) best = i;
    return {v[best], fv[best], evals};
}

}  // namespace cmpush
