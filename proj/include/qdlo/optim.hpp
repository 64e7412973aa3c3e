// Local optimizers shared by the synthesis and QAOA layers:
//   * trust_region_minimize: damped-BFGS model with a Steihaug-Toint CG
//     subproblem.  Steps are accepted only when actual/predicted reduction
//     exceeds 0.1.
//   * golden_maximize: scalar maximization on an open interval.
//   * nelder_mead: derivative-free minimizer with an evaluation budget.

#pragma once

#include "qdlo/common.hpp"

#include <functional>
#include <limits>

namespace qdlo::opt {

struct TrustRegionSettings {
    int max_iterations = 2000;
    double gradient_tol = 1e-9;
    double initial_radius = 1.0;
    double max_radius = 100.0;
    double accept_ratio = 0.1;
    double min_radius = 1e-13;
    int cg_max_iterations = 60;  // Steihaug truncation
};

struct TrustRegionReport {
    int iterations = 0;
    double value = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;  // gradient tolerance reached
};

namespace detail {

// Positive root of ||s + tau d|| = radius.
inline double boundary_step(const RVec& s, const RVec& d, double radius) {
    const double dd = d.squaredNorm();
    const double sd = s.dot(d);
    const double ss = s.squaredNorm();
    const double disc = sd * sd + dd * (radius * radius - ss);
    return (-sd + std::sqrt(std::max(0.0, disc))) / dd;
}

inline RVec steihaug_cg(const Eigen::MatrixXd& b, const RVec& g, double radius, int cg_cap) {
    const Eigen::Index n = g.size();
    RVec s = RVec::Zero(n);
    RVec r = -g;
    RVec d = r;
    double rr = r.squaredNorm();
    const double gnorm = std::sqrt(rr);
    if (gnorm < 1e-300) return s;
    const double tol = std::min(0.5, std::sqrt(gnorm)) * gnorm;
    const int max_cg = std::min(static_cast<int>(2 * n) + 10, cg_cap);
    for (int it = 0; it < max_cg; ++it) {
        RVec bd = b * d;
        const double dbd = d.dot(bd);
        if (dbd <= 0.0) {
            return s + boundary_step(s, d, radius) * d;
        }
        const double alpha = rr / dbd;
        if ((s + alpha * d).norm() >= radius) {
            return s + boundary_step(s, d, radius) * d;
        }
        s += alpha * d;
        r -= alpha * bd;
        const double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= tol) break;
        d = r + (rr_new / rr) * d;
        rr = rr_new;
    }
    return s;
}

}  // namespace detail

// f(x, grad) must return the value and fill grad (same size as x).
template <class F>
TrustRegionReport trust_region_minimize(F&& f, RVec& x, const TrustRegionSettings& cfg = {}) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
    RVec g(n), g_new(n);
    double fx = f(x, g);
    double radius = cfg.initial_radius;
    bool scaled = false;
    TrustRegionReport rep;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        rep.iterations = it;
        rep.gradient_norm = g.norm();
        if (rep.gradient_norm <= cfg.gradient_tol) {
            rep.converged = true;
            break;
        }
        RVec s = detail::steihaug_cg(b, g, radius, cfg.cg_max_iterations);
        const double snorm = s.norm();
        if (snorm < 1e-300 || radius < cfg.min_radius) break;
        const double pred = -(g.dot(s) + 0.5 * s.dot(b * s));
        if (pred <= 0.0) {
            radius *= 0.25;
            continue;
        }
        const double fx_new = f(x + s, g_new);
        const double rho = (fx - fx_new) / pred;
        if (rho > cfg.accept_ratio) {
            RVec y = g_new - g;
            const double sy = s.dot(y);
            if (!scaled && sy > 0.0) {
                // Shanno scaling of the initial model
                b *= y.squaredNorm() / sy;
                scaled = true;
            }
            RVec bs = b * s;
            const double sbs = s.dot(bs);
            // Powell damping keeps the model positive definite.
            double theta = 1.0;
            if (sy < 0.2 * sbs) theta = (0.8 * sbs) / (sbs - sy);
            RVec yb = theta * y + (1.0 - theta) * bs;
            const double syb = s.dot(yb);
            if (syb > 1e-14 * s.squaredNorm()) {
                b += (yb * yb.transpose()) / syb - (bs * bs.transpose()) / sbs;
            }
            x += s;
            fx = fx_new;
            g = g_new;
        }
        if (rho < 0.25)
            radius = std::max(0.25 * snorm, cfg.min_radius * 0.5);
        else if (rho > 0.75 && snorm >= 0.99 * radius)
            radius = std::min(2.0 * radius, cfg.max_radius);
    }
    rep.value = fx;
    rep.gradient_norm = g.norm();
    return rep;
}

// Scalar maximization of a smooth single-peaked function on (lo, hi).
inline double golden_maximize(const std::function<double(double)>& f, double lo, double hi,
                              double tol = 1e-10) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

struct NelderMeadResult {
    RVec x;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    std::vector<double> trace;  // best value after each evaluation
};

// Budget-capped Nelder-Mead around x0 with the given initial simplex scale.
inline NelderMeadResult nelder_mead(const std::function<double(const RVec&)>& f, const RVec& x0,
                                    double scale, int budget) {
    const Eigen::Index n = x0.size();
    NelderMeadResult res;
    res.x = x0;
    if (budget <= 0) return res;

    auto eval = [&](const RVec& x) {
        double v = f(x);
        ++res.evaluations;
        if (v < res.value) {
            res.value = v;
            res.x = x;
        }
        res.trace.push_back(res.value);
        return v;
    };

    std::vector<RVec> pts;
    std::vector<double> vals;
    pts.push_back(x0);
    vals.push_back(eval(x0));
    for (Eigen::Index i = 0; i < n && res.evaluations < budget; ++i) {
        RVec p = x0;
        p(i) += scale;
        pts.push_back(p);
        vals.push_back(eval(p));
    }
    if (pts.size() < static_cast<std::size_t>(n) + 1) return res;

    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    while (res.evaluations < budget) {
        std::vector<std::size_t> order(pts.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<RVec> p2;
        std::vector<double> v2;
        for (auto i : order) {
            p2.push_back(pts[i]);
            v2.push_back(vals[i]);
        }
        pts = std::move(p2);
        vals = std::move(v2);

        RVec centroid = RVec::Zero(n);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
        centroid /= static_cast<double>(pts.size() - 1);

        RVec refl = centroid + alpha * (centroid - pts.back());
        double frefl = eval(refl);
        if (frefl < vals.front()) {
            if (res.evaluations >= budget) break;
            RVec exp = centroid + gamma * (refl - centroid);
            double fexp = eval(exp);
            if (fexp < frefl) {
                pts.back() = exp;
                vals.back() = fexp;
            } else {
                pts.back() = refl;
                vals.back() = frefl;
            }
        } else if (frefl < vals[vals.size() - 2]) {
            pts.back() = refl;
            vals.back() = frefl;
        } else {
            if (res.evaluations >= budget) break;
            RVec contr = centroid + rho * (pts.back() - centroid);
            double fcontr = eval(contr);
            if (fcontr < vals.back()) {
                pts.back() = contr;
                vals.back() = fcontr;
            } else {
                for (std::size_t i = 1; i < pts.size() && res.evaluations < budget; ++i) {
                    pts[i] = pts.front() + sigma * (pts[i] - pts.front());
                    vals[i] = eval(pts[i]);
                }
            }
        }
    }
    return res;
}

}  // namespace qdlo::opt
