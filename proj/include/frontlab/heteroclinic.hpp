#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "frontlab/birth.hpp"
#include "frontlab/charroots.hpp"
#include "frontlab/profile.hpp"

namespace frontlab {

namespace detail {

/// Explicit RK4 for x'(t) = rhs(t, x, x(t-h)) with cubic-Hermite dense output
/// for the delayed reads. Requires dt <= h so every delayed argument lies in
/// already-integrated territory.
class DelayIntegrator {
  public:
    DelayIntegrator(double t_start, double dt, double h,
                    std::function<double(double)> history,
                    std::function<double(double, double, double)> rhs)
        : t_start_(t_start), dt_(dt), h_(h), history_(std::move(history)), rhs_(std::move(rhs)) {
        require(dt_ > 0 && dt_ <= h_, "DelayIntegrator: need 0 < dt <= h");
        x_.push_back(history_(t_start_));
        f_.push_back(rhs_(t_start_, x_.back(), eval(t_start_ - h_)));
    }

    double eval(double t) const {
        if (t <= t_start_) return history_(t);
        const double pos = (t - t_start_) / dt_;
        std::size_t i = static_cast<std::size_t>(pos);
        if (i + 1 >= x_.size()) i = x_.size() - 2;
        const double th = pos - static_cast<double>(i);
        const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
        const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
        return h00 * x_[i] + h10 * dt_ * f_[i] + h01 * x_[i + 1] + h11 * dt_ * f_[i + 1];
    }

    /// Advance one step; returns the new state value.
    double step() {
        const std::size_t n = x_.size() - 1;
        const double t = t_start_ + dt_ * static_cast<double>(n);
        const double x = x_[n];
        const double k1 = f_[n];
        const double dmid = eval(t + 0.5 * dt_ - h_);
        const double k2 = rhs_(t + 0.5 * dt_, x + 0.5 * dt_ * k1, dmid);
        const double k3 = rhs_(t + 0.5 * dt_, x + 0.5 * dt_ * k2, dmid);
        const double dend = eval(t + dt_ - h_);
        const double k4 = rhs_(t + dt_, x + dt_ * k3, dend);
        const double xn = x + dt_ / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        x_.push_back(xn);
        f_.push_back(rhs_(t + dt_, xn, dend));
        return xn;
    }

    double t_current() const { return t_start_ + dt_ * static_cast<double>(x_.size() - 1); }
    const std::vector<double>& states() const { return x_; }
    double t_start() const { return t_start_; }
    double dt() const { return dt_; }

  private:
    double t_start_, dt_, h_;
    std::function<double(double)> history_;
    std::function<double(double, double, double)> rhs_;
    std::vector<double> x_, f_;
};

}  // namespace detail

struct DDERun {
    Profile history;     // on [-h, 0]
    Profile trajectory;  // on [0, T]
    double step = 0.0;
    int interpolation_order = 3;
    double error_estimate = 0.0;  // sup difference against a halved-step run
};

struct DDEOptions {
    std::optional<double> blowup_bound;  // default 10 * zeta2 from certify_G
    bool estimate_error = true;
    int grid_density = 2000;
};

/// Integrate x'(t) = -x(t) + g(x(t-h)) from the given history on [-h, 0].
inline DDERun dde_simulate(const BirthFunction& g, double h, const Profile& history, double T,
                           double dt, DDEOptions opts = {}) {
    require(h > 0 && T > 0, "dde_simulate: need h > 0, T > 0");
    require(dt > 0 && dt <= h / 8.0, "dde_simulate: need dt <= h/8");
    require(history.t0 <= -h + 1e-12 && history.t_end() >= -1e-12,
            "dde_simulate: history must cover [-h, 0]");
    const double bound =
        opts.blowup_bound ? *opts.blowup_bound : 10.0 * certify_G(g, opts.grid_density).constants.zeta2;

    auto run_once = [&](double step_sz) {
        const std::size_t n = static_cast<std::size_t>(std::llround(T / step_sz));
        detail::DelayIntegrator integ(
            0.0, step_sz, h, [&](double t) { return history.eval(t); },
            [&g](double, double x, double xd) { return -x + g(xd); });
        for (std::size_t i = 0; i < n; ++i) {
            const double x = integ.step();
            if (std::abs(x) > bound) throw std::runtime_error("dde_simulate: blow-up");
        }
        return integ;
    };

    auto integ = run_once(dt);
    DDERun out;
    out.history = history;
    out.step = dt;
    out.trajectory.t0 = 0.0;
    out.trajectory.dt = dt;
    out.trajectory.values = integ.states();
    out.trajectory.left_limit = integ.states().front();
    out.trajectory.right_limit = integ.states().back();
    if (opts.estimate_error) {
        auto fine = run_once(dt / 2.0);
        double sup = 0.0;
        for (std::size_t i = 0; i < out.trajectory.size(); ++i)
            sup = std::max(sup, std::abs(out.trajectory.values[i] - fine.states()[2 * i]));
        out.error_estimate = sup;
    }
    return out;
}

struct BackboneOptions {
    double dt = 0.0;               // 0 -> h/32
    double seed_amplitude = 1e-8;  // seed peak, relative to kappa
    double kappa_tol = 1e-8;       // convergence tolerance at +infinity
    double sustain_multiple = 5.0; // trailing window length, in units of h
    double max_span = 500.0;       // integration budget beyond the seed
    bool force = false;            // skip the (H) gate
    int grid_density = 2000;
    double out_dt = 0.0;           // 0 -> dt
    double tail_floor = 1e-12;     // left end of the output grid reaches B e^{lambda t} ~ floor * kappa
    double pad_right = 0.0;        // extra plateau beyond the sustained window
};

struct BackboneResult {
    Profile psi;             // aligned: psi(0) = zeta1/2, psi < zeta1/2 left of 0
    double lambda = 0.0;     // positive real root of eq. (char)
    double tail_amplitude = 0.0;  // psi(t) ~ B e^{lambda t} at -infinity
    double align_shift = 0.0;
    GConstants constants;
    HypothesisReport hypothesis;
    bool monotone_below_A = true;
    double step = 0.0;
    double seed_time = 0.0;  // left end of the seeding interval (raw coordinates)
};

/// Compute the eps = 0 backbone heteroclinic of x' = -x + g(x(t-h)): seed with
/// e^{lambda t} at small amplitude, integrate until the trajectory stays within
/// kappa_tol of kappa over a trailing window, then normalize psi(0) = zeta1/2.
/// The left tail of the output is the analytic continuation B e^{lambda t}.
inline BackboneResult solve_heteroclinic(const BirthFunction& g, double h,
                                         BackboneOptions opts = {}) {
    require(h > 0, "solve_heteroclinic: need h > 0");
    BackboneResult out;
    out.hypothesis = certify_H(g, h, opts.grid_density);
    out.constants = out.hypothesis.constants;
    if (!out.hypothesis.G_ok) throw std::runtime_error("solve_heteroclinic: (G) certification failed");
    if (!out.hypothesis.H_ok && !opts.force)
        throw std::runtime_error("solve_heteroclinic: (H) certification failed (use force to override)");

    const double kappa = out.constants.kappa;
    const double lambda = real_root_lambda(out.constants.p, h);
    out.lambda = lambda;
    const double dt = opts.dt > 0 ? opts.dt : h / 32.0;
    out.step = dt;
    const double t_seed = std::log(opts.seed_amplitude * kappa) / lambda;
    out.seed_time = t_seed;

    detail::DelayIntegrator integ(
        t_seed + h, dt, h, [lambda](double t) { return std::exp(lambda * t); },
        [&g](double, double x, double xd) { return -x + g(xd); });

    const std::size_t sustain = static_cast<std::size_t>(std::ceil(opts.sustain_multiple * h / dt));
    std::size_t run_within = 0;
    bool settled = false;
    while (integ.t_current() < t_seed + h + opts.max_span) {
        const double x = integ.step();
        if (std::abs(x) > 10.0 * out.constants.zeta2)
            throw std::runtime_error("solve_heteroclinic: blow-up");
        run_within = std::abs(x - kappa) <= opts.kappa_tol ? run_within + 1 : 0;
        if (run_within >= sustain) {
            settled = true;
            break;
        }
    }
    if (!settled)
        throw std::runtime_error("solve_heteroclinic: no convergence to kappa (check (H))");

    // raw trajectory on [t_seed, t_end], seed interval included
    Profile raw;
    raw.t0 = t_seed;
    raw.dt = dt;
    const std::size_t n_hist = static_cast<std::size_t>(std::llround(h / dt));
    for (std::size_t i = 0; i < n_hist; ++i)
        raw.values.push_back(std::exp(lambda * (t_seed + dt * static_cast<double>(i))));
    for (double v : integ.states()) raw.values.push_back(v);
    raw.left_limit = 0.0;
    raw.right_limit = kappa;

    // monotone shape below A (reported, not fatal)
    {
        const double A = out.constants.A;
        out.monotone_below_A = true;
        for (std::size_t i = 1; i < raw.size(); ++i) {
            if (raw.values[i] >= A) break;
            if (raw.values[i] <= raw.values[i - 1]) {
                out.monotone_below_A = false;
                break;
            }
        }
    }

    const double level = out.constants.zeta1 / 2.0;
    const double shift = first_crossing_time(raw, level);
    out.align_shift = shift;
    out.tail_amplitude = std::exp(lambda * shift);

    const double out_dt = opts.out_dt > 0 ? opts.out_dt : dt;
    const double t_left_target = std::log(opts.tail_floor * kappa / out.tail_amplitude) / lambda;
    const double t_right_target = raw.t_end() - shift + opts.pad_right;
    const std::size_t n_out =
        static_cast<std::size_t>(std::ceil((t_right_target - t_left_target) / out_dt)) + 1;
    const double t0_out = t_right_target - out_dt * static_cast<double>(n_out - 1);

    Profile psi;
    psi.t0 = t0_out;
    psi.dt = out_dt;
    psi.left_limit = 0.0;
    psi.right_limit = kappa;
    psi.values.resize(n_out);
    const double seed_interior = t_seed + h;  // analytic below this point (raw coordinates)
    for (std::size_t i = 0; i < n_out; ++i) {
        const double traw = psi.t(i) + shift;
        psi.values[i] = traw <= seed_interior ? std::exp(lambda * traw) : raw.eval(traw);
    }
    out.psi = std::move(psi);
    return out;
}

struct VariationalResult {
    bool decayed = false;
    double sup_last_window = 0.0;
    double sup_history = 0.0;
    double horizon = 0.0;
};

/// Integrate the variational equation phi' = -phi + q(t) phi(t-h) along psi,
/// q(t) = g'(psi(t-h)), and report sup|phi| over the trailing window. The flag
/// is true when that sup fell below ratio * sup|phi0|.
inline VariationalResult variational_decay_check(const BirthFunction& g, double h,
                                                 const Profile& psi, const Profile& phi0,
                                                 double horizon_multiple = 20.0,
                                                 double window_multiple = 5.0, double ratio = 1e-3) {
    require(h > 0, "variational_decay_check: need h > 0");
    require(phi0.t0 <= -h + 1e-12 && phi0.t_end() >= -1e-12,
            "variational_decay_check: phi0 must cover [-h, 0]");
    VariationalResult out;
    out.horizon = horizon_multiple * h;
    for (double v : phi0.values) out.sup_history = std::max(out.sup_history, std::abs(v));

    const double dt = h / 64.0;
    detail::DelayIntegrator integ(
        0.0, dt, h, [&](double t) { return phi0.eval(t); },
        [&](double t, double x, double xd) { return -x + g.d1(psi.eval(t - h)) * xd; });
    const std::size_t n = static_cast<std::size_t>(std::llround(out.horizon / dt));
    const std::size_t wstart = n - static_cast<std::size_t>(std::llround(window_multiple * h / dt));
    for (std::size_t i = 0; i < n; ++i) {
        const double x = integ.step();
        if (i + 1 >= wstart) out.sup_last_window = std::max(out.sup_last_window, std::abs(x));
    }
    out.decayed = out.sup_last_window < ratio * out.sup_history;
    return out;
}

}  // namespace frontlab
