#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frontlab/numerics.hpp"

namespace frontlab {

/// A sampled function on a uniform time grid, with asserted limits at both
/// infinities. Immutable by convention: operations return new profiles.
struct Profile {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;
    double left_limit = 0.0;
    double right_limit = 0.0;

    std::size_t size() const { return values.size(); }
    double t(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double t_end() const { return t(values.size() - 1); }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    /// Cubic read with limit extension beyond the grid.
    double eval(double t_query) const {
        return cubic_interp_uniform(t0, dt, values, t_query, left_limit, right_limit);
    }

    void validate() const {
        require(dt > 0 && is_finite(dt) && is_finite(t0), "Profile: bad grid");
        require(values.size() >= 16, "Profile: need at least 16 samples");
        for (double v : values) require(is_finite(v), "Profile: non-finite sample");
        require(is_finite(left_limit) && is_finite(right_limit), "Profile: non-finite limits");
        if (left_limit == 0.0)
            require(std::abs(values.front()) <= 1e-3 * std::max(max_abs(), 1e-300),
                    "Profile: grid does not reach far enough left for left_limit = 0");
    }
};

template <class F>
Profile make_profile(double t0, double dt, std::size_t n, F&& f, double left, double right) {
    Profile p;
    p.t0 = t0;
    p.dt = dt;
    p.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.values[i] = f(t0 + dt * static_cast<double>(i));
    p.left_limit = left;
    p.right_limit = right;
    return p;
}

/// Resample onto a new uniform grid; out-of-range reads take the limits.
inline Profile resample(const Profile& x, double t0, double dt, std::size_t n) {
    Profile out;
    out.t0 = t0;
    out.dt = dt;
    out.left_limit = x.left_limit;
    out.right_limit = x.right_limit;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = x.eval(t0 + dt * static_cast<double>(i));
    return out;
}

/// |x|_mu = max( sup_{t>=0} |x|, sup_{t<=0} e^{-mu t} |x| ), evaluated on the grid.
inline double weighted_norm(const Profile& x, double mu) {
    require(mu >= 0, "weighted_norm: mu must be nonnegative");
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x.t(i);
        const double w = t <= 0.0 ? std::exp(-mu * t) : 1.0;
        m = std::max(m, w * std::abs(x.values[i]));
    }
    return m;
}

/// Weighted distance between two profiles; y is resampled onto x's grid when
/// the grids differ.
inline double profile_distance(const Profile& x, const Profile& y, double mu) {
    const Profile* yy = &y;
    Profile tmp;
    if (y.t0 != x.t0 || y.dt != x.dt || y.size() != x.size()) {
        tmp = resample(y, x.t0, x.dt, x.size());
        yy = &tmp;
    }
    Profile diff = x;
    for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= yy->values[i];
    diff.left_limit = x.left_limit - yy->left_limit;
    diff.right_limit = x.right_limit - yy->right_limit;
    return weighted_norm(diff, mu);
}

/// Amplitude/exponent decomposition of a (left) tail: x(t) ~ B e^{exponent t}.
struct AsymptoticFit {
    double B = 0.0;
    double exponent = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double max_residual = 0.0;  // weighted by e^{-factor*lambda_ref*t} when a reference is given
};

struct TailFitOptions {
    std::optional<double> lambda_ref;  // reference decay rate for the residual weight
    double factor = 1.99;              // the residual weight is e^{-factor*lambda_ref*t}
};

/// Least-squares fit of log x(t) over the window [win_lo, win_hi] (a left-tail
/// window: the profile must be strictly positive there).
inline AsymptoticFit fit_tail_exponent(const Profile& x, double win_lo, double win_hi,
                                       TailFitOptions opts = {}) {
    require(win_lo < win_hi, "fit_tail_exponent: empty window");
    const double floor = 1e3 * machine_eps * x.max_abs();
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x.t(i);
        if (t < win_lo || t > win_hi) continue;
        const double v = x.values[i];
        require(v > 0, "fit_tail_exponent: window not strictly positive");
        if (v < floor) throw std::runtime_error("fit_tail_exponent: window touches noise floor");
        ts.push_back(t);
        ys.push_back(std::log(v));
    }
    require(ts.size() >= 20, "fit_tail_exponent: window shorter than 20 samples");
    const LineFit lf = fit_line(ts, ys);
    AsymptoticFit out;
    out.exponent = lf.slope;
    out.B = std::exp(lf.intercept);
    out.window_lo = win_lo;
    out.window_hi = win_hi;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        double r = std::abs(std::exp(ys[k]) - out.B * std::exp(out.exponent * ts[k]));
        if (opts.lambda_ref) r *= std::exp(-opts.factor * (*opts.lambda_ref) * ts[k]);
        out.max_residual = std::max(out.max_residual, r);
    }
    return out;
}

/// Time of the first up-crossing of `level`, located to sub-grid precision by
/// a cubic solve inside the bracketing cell. All samples before the crossing
/// must lie below the level.
inline double first_crossing_time(const Profile& x, double level) {
    const auto& v = x.values;
    if (v.front() >= level) throw std::runtime_error("align: no crossing (starts at or above level)");
    std::size_t idx = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] >= level) {
            idx = i;
            break;
        }
    }
    if (idx == 0) throw std::runtime_error("align: no crossing");
    // the cubic interpolant may wiggle inside the cell; bisect it
    double lo = x.t(idx - 1), hi = x.t(idx);
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (x.eval(mid) < level) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Translate so the first up-crossing of `level` sits at t = 0 and the profile
/// stays below the level on the left. The grid is unchanged; values are
/// resampled at sub-grid precision.
inline Profile align_by_level(const Profile& x, double level) {
    require(level > x.left_limit, "align: level not above left limit");
    const double shift = first_crossing_time(x, level);
    Profile out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = x.eval(x.t(i) + shift);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.t(i) >= 0.0) break;
        if (out.values[i] >= level + 1e-9 * (1.0 + level))
            throw std::runtime_error("align: non-unique first crossing within tolerance");
    }
    return out;
}

}  // namespace frontlab
