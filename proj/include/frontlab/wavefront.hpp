#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "frontlab/birth.hpp"
#include "frontlab/charroots.hpp"
#include "frontlab/profile.hpp"

namespace frontlab {

/// Kernel parameters of the smoothing operator I_eps: sigma = sqrt(1+4 eps^2),
/// left kernel rate 2/(1+sigma), right kernel rate (1+sigma)/(2 eps^2).
/// eps = 0 is the first-order limit (right kernel vanishes, I = I^-_0).
struct WaveParams {
    double c = 0.0;
    double eps = 0.0;
    double sigma = 1.0;
    double rate_minus = 1.0;
    double rate_plus = std::numeric_limits<double>::infinity();

    static WaveParams from_eps(double eps) {
        require(is_finite(eps) && eps >= 0.0, "WaveParams: need eps >= 0");
        WaveParams wp;
        wp.eps = eps;
        wp.c = eps > 0 ? 1.0 / eps : std::numeric_limits<double>::infinity();
        wp.sigma = std::sqrt(1.0 + 4.0 * eps * eps);
        wp.rate_minus = 2.0 / (1.0 + wp.sigma);
        wp.rate_plus = eps > 0 ? (1.0 + wp.sigma) / (2.0 * eps * eps)
                               : std::numeric_limits<double>::infinity();
        return wp;
    }
    static WaveParams from_speed(double c) {
        require(is_finite(c) && c > 0.0, "WaveParams: need c > 0");
        WaveParams wp = from_eps(1.0 / c);
        wp.c = c;
        return wp;
    }
};

struct IepsOptions {
    /// When set, the profile is modelled below the grid as
    /// x(s) = x[0] e^{rate (s - t0)} instead of the constant left limit.
    /// The fixed-point solver uses this with rate = lambda1(eps); without it
    /// the h-shifted reads erode an exponentially small left tail.
    std::optional<double> left_tail_rate;
    /// Per-cell reconstruction order for the kernel quadrature: 3 (cubic,
    /// default) or 1 (linear). Both are exact for piecewise-linear input.
    int cell_order = 3;
};

/// The smoothing operator (I_eps x)(t) =
///   sigma^{-1} ( int_{-inf}^t e^{-r_-(t-s)} x(s-h) ds
///              + int_t^{+inf} e^{r_+(t-s)} x(s-h) ds ).
/// Per-cell exact integration of the local interpolant against the
/// exponential kernels (expm1-stable weights, so huge rate*dt is fine); mass
/// beyond the grid is integrated in closed form from the asserted limits (or
/// the left tail model). Output lives on the input grid.
inline Profile apply_I_eps(const Profile& x, const WaveParams& wp, double h,
                           IepsOptions opts = {}) {
    require(h >= 0, "apply_I_eps: need h >= 0");
    require(opts.cell_order == 1 || opts.cell_order == 3, "apply_I_eps: cell_order must be 1 or 3");
    const std::size_t n = x.size();
    require(n >= 16, "apply_I_eps: profile too short");
    const double dt = x.dt, t0 = x.t0;
    const double rm = wp.rate_minus;
    const bool second_order = wp.eps > 0.0;
    const double rp = wp.rate_plus;
    const bool cubic = opts.cell_order == 3;
    const auto& v = x.values;

    const double thm = rm * dt;
    const double e0m = exp_w0(thm), e1m = exp_w1(thm), decm = std::exp(-thm);
    const auto wm = exp_cell_weights(thm);
    std::vector<double> Jm(n), Jp;
    const double rho = opts.left_tail_rate.value_or(0.0);
    Jm[0] = opts.left_tail_rate ? v[0] / (rm + rho) : x.left_limit / rm;
    for (std::size_t i = 1; i < n; ++i) {
        // cell [t_{i-1}, t_i]; kernel measured from t_i, so the stencil
        // weights come out reversed
        double cell;
        if (cubic && i >= 2 && i + 1 < n)
            cell = dt * (wm[3] * v[i - 2] + wm[2] * v[i - 1] + wm[1] * v[i] + wm[0] * v[i + 1]);
        else
            cell = dt * (v[i] * e0m + (v[i - 1] - v[i]) * e1m);
        Jm[i] = decm * Jm[i - 1] + cell;
    }

    if (second_order) {
        const double thp = rp * dt;
        const double e0p = exp_w0(thp), e1p = exp_w1(thp), decp = std::exp(-thp);
        const auto wp4 = exp_cell_weights(thp);
        Jp.resize(n);
        Jp[n - 1] = x.right_limit / rp;
        for (std::size_t i = n - 1; i-- > 0;) {
            double cell;
            if (cubic && i >= 1 && i + 2 < n)
                cell = dt * (wp4[0] * v[i - 1] + wp4[1] * v[i] + wp4[2] * v[i + 1] + wp4[3] * v[i + 2]);
            else
                cell = dt * (v[i] * e0p + (v[i + 1] - v[i]) * e1p);
            Jp[i] = decp * Jp[i + 1] + cell;
        }
    }

    std::vector<double> J(n);
    for (std::size_t i = 0; i < n; ++i) J[i] = Jm[i] + (second_order ? Jp[i] : 0.0);

    // closed-form reads left of the grid (the h-shift can query there)
    auto read_below = [&](double q) {
        const double D = t0 - q;  // > 0
        double jm, jp = 0.0;
        if (opts.left_tail_rate) {
            jm = v[0] * std::exp(-rho * D) / (rm + rho);
            if (second_order)
                jp = v[0] * (std::exp(-rho * D) - std::exp(-rp * D)) / (rp - rho) +
                     std::exp(-rp * D) * Jp[0];
        } else {
            jm = x.left_limit / rm;
            if (second_order)
                jp = x.left_limit * (-std::expm1(-rp * D)) / rp + std::exp(-rp * D) * Jp[0];
        }
        return jm + jp;
    };

    Profile out = x;
    for (std::size_t i = 0; i < n; ++i) {
        const double q = x.t(i) - h;
        out.values[i] =
            (q < t0 ? read_below(q) : cubic_interp_uniform(t0, dt, J, q, J[0], J[n - 1])) / wp.sigma;
    }

    // tail corrections must stay small relative to the result
    if (!opts.left_tail_rate) {
        double sup = 0.0;
        for (double y : out.values) sup = std::max(sup, std::abs(y));
        const double kernel_mass = (1.0 / rm + (second_order ? 1.0 / rp : 0.0)) / wp.sigma;
        const double mismatch = std::max(std::abs(x.values.front() - x.left_limit),
                                         std::abs(x.values.back() - x.right_limit));
        if (mismatch * kernel_mass > 0.01 * sup)
            throw std::runtime_error("apply_I_eps: grid too short for the asserted limits");
    }
    return out;
}

/// Sup of |eps^2 x'' - x' - x + g(x(. - h))| over the interior grid, using
/// fourth-order central differences and cubic-interpolated delayed reads.
inline double residual_ode(const Profile& x, const BirthFunction& g, double h, double eps) {
    const std::size_t n = x.size();
    require(n >= 16, "residual_ode: profile too short");
    const double dt = x.dt;
    require(eps * eps / (dt * dt) <= 1e6, "residual_ode: eps^2/dt^2 conditioning guard exceeded");
    const std::size_t lead = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(h / dt)) + 2);
    double sup = 0.0;
    for (std::size_t i = lead; i + 2 < n; ++i) {
        const auto& v = x.values;
        const double d1 = (-v[i + 2] + 8 * v[i + 1] - 8 * v[i - 1] + v[i - 2]) / (12 * dt);
        const double d2 =
            (-v[i + 2] + 16 * v[i + 1] - 30 * v[i] + 16 * v[i - 1] - v[i - 2]) / (12 * dt * dt);
        const double xd = x.eval(x.t(i) - h);
        sup = std::max(sup, std::abs(eps * eps * d2 - d1 - v[i] + g(xd)));
    }
    return sup;
}

struct TailCheck {
    AsymptoticFit fit;
    double lambda1_ref = 0.0;
    double remainder_rate = 0.0;
    bool ok = false;
};

struct FrontReport {
    Profile profile;
    double c = 0.0;
    double eps = 0.0;
    double residual_fix = 0.0;
    double residual_ode = 0.0;
    bool positivity_ok = false;
    std::optional<double> tau;  // unique A-crossing; empty when degenerate
    bool monotone_tail_ok = false;
    TailCheck tail;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;  // fixed point without a level crossing (e.g. constant kappa)
    double contraction_factor = 0.0;  // max step ratio over the last <= 10 iterations
    std::vector<std::string> warnings;
    GConstants constants;
};

struct FrontOptions {
    double t_min = 0.0, t_max = 0.0, dt = 0.0;  // 0 -> auto
    double tol = 1e-9;           // stopping tolerance on the sup step size
    double residual_tol = 1e-8;  // converged requires residual_fix below this
    int max_iter = 2000;
    double damping = 0.7;
    double c_min_margin = 0.05;
    bool force = false;  // skip the (H) and c_min gates
    int grid_density = 2000;
    double fit_factor = 1.99;
    double remainder_slack = 0.05;
    /// Below the first crossing of tail_anchor_rel * kappa the iterate is
    /// replaced by its exact B e^{lambda1 t} tail every step. This removes
    /// sub-lambda1 contamination (which the iteration amplifies) and keeps
    /// the far tail strictly monotone; the induced fixed-point displacement
    /// scales linearly with the anchor and stays well under residual_tol at
    /// the default.
    double tail_anchor_rel = 1e-8;
};

namespace detail {

struct TailAware {
    const Profile& x;
    double rate;
    double eval(double t) const {
        if (t < x.t0) return x.values.front() * std::exp(rate * (t - x.t0));
        if (t > x.t_end()) return x.right_limit;
        return cubic_interp_uniform(x.t0, x.dt, x.values, t, x.values.front(), x.right_limit);
    }
};

// first up-crossing of level with the tail-aware read; empty when none
inline std::optional<double> crossing_time(const Profile& x, double level) {
    if (x.values.front() >= level) return std::nullopt;
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (x.values[i] >= level) {
            double lo = x.t(i - 1), hi = x.t(i);
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (x.eval(mid) < level) lo = mid; else hi = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
    return std::nullopt;
}

inline bool realign_tail_aware(Profile& x, double level, double rate) {
    const auto shift = crossing_time(x, level);
    if (!shift) return false;
    const TailAware ext{x, rate};
    Profile out = x;
    for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = ext.eval(x.t(i) + *shift);
    x = std::move(out);
    return true;
}

// replace everything below the first up-crossing of the anchor level by the
// pure exponential tail through the anchor point
inline void sanitize_tail(Profile& x, double anchor_level, double rate) {
    std::size_t ia = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x.values[i] >= anchor_level) {
            ia = i;
            break;
        }
    }
    if (ia == 0) return;
    const double B = x.values[ia] * std::exp(-rate * x.t(ia));
    for (std::size_t i = 0; i < ia; ++i) x.values[i] = B * std::exp(rate * x.t(i));
}

}  // namespace detail

/// Asymptotic certification of a converged front: the left-tail exponent must
/// match lambda1(eps) within 2%, and the remainder x - B e^{lambda1 t} must
/// decay at a fitted rate of at least factor * lambda * (1 - slack).
inline TailCheck verify_asymptotics(const Profile& x, double kappa, double p, double h, double eps,
                                    double fit_factor = 1.99, double slack = 0.05) {
    TailCheck out;
    const double lam = real_root_lambda(p, h);
    out.lambda1_ref = eps > 0 ? real_roots_eps(p, h, eps).lambda1 : lam;

    auto level_time = [&](double value) {
        const auto t = detail::crossing_time(x, value);
        require(t.has_value(), "verify_asymptotics: tail window level not crossed");
        return *t;
    };
    const double wlo = level_time(1e-5 * kappa), whi = level_time(1e-3 * kappa);
    TailFitOptions fo;
    fo.lambda_ref = lam;
    fo.factor = fit_factor;
    out.fit = fit_tail_exponent(x, wlo, whi, fo);

    // fixed-exponent amplitude on a far window, remainder rate on a mid window
    const double flo = level_time(1e-7 * kappa), fhi = level_time(1e-5 * kappa);
    double lsum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x.t(i);
        if (t < flo || t > fhi) continue;
        lsum += std::log(x.values[i]) - out.lambda1_ref * t;
        ++cnt;
    }
    require(cnt >= 10, "verify_asymptotics: far window too short");
    const double B = std::exp(lsum / static_cast<double>(cnt));

    const double rlo = level_time(3e-4 * kappa), rhi = level_time(3e-2 * kappa);
    std::vector<double> ts, ys;
    double rel_sup = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x.t(i);
        if (t < rlo || t > rhi) continue;
        const double model = B * std::exp(out.lambda1_ref * t);
        const double r = std::abs(x.values[i] - model);
        rel_sup = std::max(rel_sup, r / model);
        ts.push_back(t);
        ys.push_back(std::log(std::max(r, 1e-300)));
    }
    bool rem_ok;
    if (rel_sup <= 1e-10) {
        // the tail is a pure exponential to within rounding; there is no
        // remainder left to rate-fit
        out.remainder_rate = std::numeric_limits<double>::infinity();
        rem_ok = true;
    } else {
        out.remainder_rate = fit_line(ts, ys).slope;
        rem_ok = out.remainder_rate >= fit_factor * lam * (1.0 - slack);
    }
    const bool exp_ok = std::abs(out.fit.exponent - out.lambda1_ref) <= 0.02 * out.lambda1_ref;
    out.ok = exp_ok && rem_ok;
    return out;
}

/// Solve the travelling-front profile at speed c by damped fixed-point
/// iteration of x <- (1-w) x + w I_eps(g o x), re-aligned to the zeta1/2
/// crossing after every step to pin the translation mode. The iterate's left
/// tail is closed with the exact rate lambda1(eps).
inline FrontReport solve_front(const BirthFunction& g, double h, double c, const Profile& seed,
                               FrontOptions opts = {}) {
    require(h > 0, "solve_front: need h > 0");
    const WaveParams wp = WaveParams::from_speed(c);
    FrontReport rep;
    rep.c = c;
    rep.eps = wp.eps;

    const HypothesisReport hyp = certify_H(g, h, opts.grid_density);
    rep.constants = hyp.constants;
    if (!hyp.G_ok) throw std::runtime_error("solve_front: (G) certification failed");
    if (!hyp.H_ok && !opts.force)
        throw std::runtime_error("solve_front: (H) certification failed (use force to override)");
    const double p = hyp.constants.p, kappa = hyp.constants.kappa;
    const double c_min = std::max(4.0 / std::sqrt(p - 1.0), 2.0 * std::sqrt(p - 1.0)) *
                         (1.0 + opts.c_min_margin);
    if (c < c_min && !opts.force)
        throw std::runtime_error("solve_front: speed below c_min = " + std::to_string(c_min));

    const double lambda = real_root_lambda(p, h);
    const double lambda1 = wp.eps > 0 ? real_roots_eps(p, h, wp.eps).lambda1 : lambda;
    const double level = hyp.constants.zeta1 / 2.0;

    const double t_min = opts.t_min != 0.0 ? opts.t_min
                                           : std::log(1e-8 * kappa) / lambda - 5.0;
    const double t_max = opts.t_max != 0.0 ? opts.t_max : 50.0 * std::max(1.0, h);
    const double dt = opts.dt > 0.0 ? opts.dt : 0.005 * std::max(1.0, h);
    const std::size_t n = static_cast<std::size_t>(std::ceil((t_max - t_min) / dt)) + 1;
    const double anchor = opts.tail_anchor_rel * kappa;

    Profile x = resample(seed, t_min, dt, n);
    x.left_limit = 0.0;
    x.right_limit = kappa;
    detail::realign_tail_aware(x, level, lambda1);
    detail::sanitize_tail(x, anchor, lambda1);

    // the exponential closure presumes a decaying left tail; an iterate that
    // is still above the anchor at the left boundary (e.g. a constant seed)
    // gets the plain constant-limit model instead
    auto apply = [&](const Profile& xc) {
        Profile f = xc;
        for (double& v : f.values) v = g(v);
        f.right_limit = kappa;  // g(kappa) = kappa
        IepsOptions iopt;
        if (xc.values.front() <= anchor) {
            iopt.left_tail_rate = lambda1;
            f.left_limit = 0.0;  // g(0) = 0
        } else {
            f.left_limit = f.values.front();
        }
        return apply_I_eps(f, wp, h, iopt);
    };

    std::vector<double> deltas;
    bool lost_positivity = false;
    int align_failures = 0;
    rep.converged = false;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        Profile y = apply(x);
        Profile xn = x;
        for (std::size_t i = 0; i < n; ++i)
            xn.values[i] = (1.0 - opts.damping) * x.values[i] + opts.damping * y.values[i];
        if (!detail::realign_tail_aware(xn, level, lambda1)) ++align_failures;
        detail::sanitize_tail(xn, anchor, lambda1);
        double d = 0.0, mn = xn.values[0];
        for (std::size_t i = 0; i < n; ++i) {
            d = std::max(d, std::abs(xn.values[i] - x.values[i]));
            mn = std::min(mn, xn.values[i]);
        }
        if (mn < -1e-12 * kappa) lost_positivity = true;
        deltas.push_back(d);
        x = std::move(xn);
        if (d <= opts.tol) {
            rep.converged = true;
            ++it;
            break;
        }
    }
    rep.iterations = it;
    if (lost_positivity) rep.warnings.push_back("lost positivity during iteration");
    if (align_failures > 0)
        rep.warnings.push_back("alignment skipped on " + std::to_string(align_failures) +
                               " iterations");

    for (std::size_t k = deltas.size() >= 11 ? deltas.size() - 10 : 1; k < deltas.size(); ++k)
        if (deltas[k - 1] > 0)
            rep.contraction_factor = std::max(rep.contraction_factor, deltas[k] / deltas[k - 1]);

    {
        Profile y = apply(x);
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(x.values[i] - y.values[i]));
        rep.residual_fix = r;
        rep.converged = rep.converged && r <= opts.residual_tol;
    }
    rep.residual_ode = residual_ode(x, g, h, wp.eps);

    double mn = x.values[0], mx = x.values[0];
    for (double v : x.values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    rep.positivity_ok = mn > 0.0;

    // unique A-crossing and strict monotonicity to its left
    const double A = hyp.constants.A;
    int crossings = 0;
    std::size_t tau_idx = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (x.values[i - 1] < A && x.values[i] >= A) {
            if (crossings == 0) tau_idx = i;
            ++crossings;
        }
    }
    if (crossings == 0 || mx - mn < 1e-6 * std::max(1.0, kappa)) {
        rep.degenerate = true;
        rep.warnings.push_back("degenerate: no crossing");
    } else {
        double lo = x.t(tau_idx - 1), hi = x.t(tau_idx);
        for (int b = 0; b < 60; ++b) {
            const double mid = 0.5 * (lo + hi);
            if (x.eval(mid) < A) lo = mid; else hi = mid;
        }
        rep.tau = 0.5 * (lo + hi);
        rep.monotone_tail_ok = crossings == 1;
        for (std::size_t i = 1; i < tau_idx && rep.monotone_tail_ok; ++i)
            if (!(x.values[i] > x.values[i - 1])) rep.monotone_tail_ok = false;
        rep.tail = verify_asymptotics(x, kappa, p, h, wp.eps, opts.fit_factor,
                                      opts.remainder_slack);
    }
    rep.profile = std::move(x);
    return rep;
}

inline TailCheck verify_asymptotics(const FrontReport& front, double p, double h,
                                    double fit_factor = 1.99, double slack = 0.05) {
    require(front.converged && front.positivity_ok,
            "verify_asymptotics: front must be converged and positive");
    return verify_asymptotics(front.profile, front.constants.kappa, p, h, front.eps, fit_factor,
                              slack);
}

struct UniquenessReport {
    double max_distance_sup = 0.0;
    double max_distance_weighted = 0.0;
    double mu_weighted = 0.0;
    int converged_count = 0;
    std::vector<bool> seed_converged;
};

/// Solve from several seeds at the same speed, align all by the zeta1/2
/// crossing, and report the maximal pairwise distance in the sup norm and in
/// the (lambda - 0.1 lambda)-weighted norm. Non-converged seeds are excluded;
/// fewer than two converged seeds is an error.
inline UniquenessReport uniqueness_probe(const BirthFunction& g, double h, double c,
                                         const std::vector<Profile>& seeds,
                                         FrontOptions opts = {}) {
    require(seeds.size() >= 2, "uniqueness_probe: need at least two seeds");
    UniquenessReport out;
    std::vector<Profile> fronts;
    for (const auto& s : seeds) {
        FrontReport r = solve_front(g, h, c, s, opts);
        out.seed_converged.push_back(r.converged && !r.degenerate);
        if (out.seed_converged.back()) fronts.push_back(std::move(r.profile));
    }
    out.converged_count = static_cast<int>(fronts.size());
    if (fronts.size() < 2)
        throw std::runtime_error("uniqueness_probe: fewer than two seeds converged");
    const double p = g.p0();
    const double lam = real_root_lambda(p, h);
    out.mu_weighted = lam - 0.1 * lam;
    for (std::size_t i = 0; i < fronts.size(); ++i)
        for (std::size_t j = i + 1; j < fronts.size(); ++j) {
            out.max_distance_sup =
                std::max(out.max_distance_sup, profile_distance(fronts[i], fronts[j], 0.0));
            out.max_distance_weighted = std::max(
                out.max_distance_weighted, profile_distance(fronts[i], fronts[j], out.mu_weighted));
        }
    return out;
}

}  // namespace frontlab
