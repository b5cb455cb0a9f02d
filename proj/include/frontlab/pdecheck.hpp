#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "frontlab/birth.hpp"
#include "frontlab/profile.hpp"

namespace frontlab {

/// One method-of-lines run of u_t = u_xx - u + g(u(t-h, x)) on [0, L] with
/// zero-flux boundaries, explicit time stepping, and the delayed term read
/// from a ring buffer by linear interpolation in time.
struct FieldRun {
    double L = 0.0, dx = 0.0;
    double dt = 0.0;  // satisfies dt <= dx^2/4
    double h = 0.0, T = 0.0;
    std::vector<double> snapshot_times;
    std::vector<std::vector<double>> snapshots;
    std::string history_mode;  // "frozen" or "travelling"
    double c_init = 0.0, x_offset = 0.0;

    std::size_t nx() const { return snapshots.empty() ? 0 : snapshots.front().size(); }
    double x(std::size_t j) const { return dx * static_cast<double>(j); }
};

struct PdeOptions {
    double dt = 0.0;          // 0 -> dx^2/4
    double snap_every = 0.5;  // snapshot cadence, time units
    double boundary_guard = 0.9;  // error out when the front passes this fraction of L
    std::optional<double> guard_level;  // level tracked by the boundary guard
};

namespace detail {

class PdeStepper {
  public:
    PdeStepper(const BirthFunction& g, double h, double L, double dx, double dt)
        : g_(g), h_(h), L_(L), dx_(dx), dt_(dt) {
        require(L > 0 && dx > 0 && dx < L, "simulate_pde: bad domain");
        if (dt_ <= 0) dt_ = 0.25 * dx_ * dx_;
        if (dt_ > 0.25 * dx_ * dx_ + 1e-15) throw std::runtime_error("simulate_pde: CFL violated");
        nx_ = static_cast<std::size_t>(std::llround(L_ / dx_)) + 1;
        depth_ = static_cast<std::size_t>(std::ceil(h_ / dt_)) + 2;
    }

    std::size_t nx() const { return nx_; }
    double dt() const { return dt_; }

    // history(theta, x) for theta in [-h, 0]
    template <class H>
    void prime(H&& history) {
        buffer_.assign(depth_, std::vector<double>(nx_));
        const double t0 = -static_cast<double>(depth_ - 1) * dt_;
        for (std::size_t k = 0; k < depth_; ++k) {
            const double th = t0 + dt_ * static_cast<double>(k);
            for (std::size_t j = 0; j < nx_; ++j)
                buffer_[k][j] = history(std::min(th, 0.0), dx_ * static_cast<double>(j));
        }
        head_ = depth_ - 1;  // buffer_[head_] is the field at the current time
        t_ = 0.0;
    }

    const std::vector<double>& field() const { return buffer_[head_]; }
    double time() const { return t_; }

    void step() {
        const std::vector<double>& u = buffer_[head_];
        // delayed field at t - h, linear in time between buffered steps
        const double back = h_ / dt_;
        const std::size_t k1 = static_cast<std::size_t>(std::floor(back));
        const double w = back - static_cast<double>(k1);
        const auto& a = ring(-static_cast<long>(k1));
        const auto& b = ring(-static_cast<long>(k1) - 1);
        const double r = dt_ / (dx_ * dx_);
        std::vector<double>& next = scratch_;
        next.resize(nx_);
        for (std::size_t j = 0; j < nx_; ++j) {
            const double um = j == 0 ? u[1] : u[j - 1];
            const double up = j + 1 == nx_ ? u[nx_ - 2] : u[j + 1];
            const double delayed = (1.0 - w) * a[j] + w * b[j];
            next[j] = u[j] + r * (up - 2.0 * u[j] + um) + dt_ * (-u[j] + g_(delayed));
        }
        head_ = (head_ + 1) % depth_;
        buffer_[head_].swap(next);
        t_ += dt_;
    }

  private:
    const std::vector<double>& ring(long offset) const {
        long k = static_cast<long>(head_) + offset;
        const long d = static_cast<long>(depth_);
        k = ((k % d) + d) % d;
        return buffer_[static_cast<std::size_t>(k)];
    }

    const BirthFunction& g_;
    double h_, L_, dx_, dt_;
    double t_ = 0.0;
    std::size_t nx_ = 0, depth_ = 0, head_ = 0;
    std::vector<std::vector<double>> buffer_;
    std::vector<double> scratch_;
};

inline void collect_run(PdeStepper& st, FieldRun& run, double T, const PdeOptions& opts,
                        double kappa_guess) {
    run.dt = st.dt();
    run.T = T;
    run.snapshot_times.push_back(0.0);
    run.snapshots.push_back(st.field());
    const std::size_t nsteps = static_cast<std::size_t>(std::llround(T / st.dt()));
    const std::size_t every =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.snap_every / st.dt())));
    const double level = opts.guard_level.value_or(0.5 * kappa_guess);
    for (std::size_t i = 1; i <= nsteps; ++i) {
        st.step();
        if (i % every == 0 || i == nsteps) {
            run.snapshot_times.push_back(st.time());
            run.snapshots.push_back(st.field());
            const auto& u = st.field();
            for (std::size_t j = 1; j < u.size(); ++j) {
                const bool crossed = (u[j - 1] - level) * (u[j] - level) <= 0.0 && u[j - 1] != u[j];
                if (crossed && run.x(j) > opts.boundary_guard * run.L)
                    throw std::runtime_error("simulate_pde: front hit boundary");
            }
        }
    }
}

}  // namespace detail

/// Frozen-history run: u(t, .) = init for t in [-h, 0].
inline FieldRun simulate_pde(const BirthFunction& g, double h, double L, double dx, double T,
                             const std::vector<double>& init, PdeOptions opts = {}) {
    require(h > 0 && T > 0, "simulate_pde: need h > 0, T > 0");
    detail::PdeStepper st(g, h, L, dx, opts.dt);
    require(init.size() == st.nx(), "simulate_pde: init size does not match the grid");
    st.prime([&](double, double x) {
        const std::size_t j = static_cast<std::size_t>(std::llround(x / dx));
        return init[std::min(j, init.size() - 1)];
    });
    FieldRun run;
    run.L = L;
    run.dx = dx;
    run.h = h;
    run.history_mode = "frozen";
    double kap = 0.0;
    for (double v : init) kap = std::max(kap, std::abs(v));
    detail::collect_run(st, run, T, opts, std::max(kap, 1e-12));
    return run;
}

/// Travelling-history run for validating a computed front profile at speed c:
/// u(t, x) = phi(t + (x_offset - x)/c) for t in [-h, 0], so the invaded
/// (kappa) region sits on the left and the front advances to the right.
inline FieldRun simulate_pde_travelling(const BirthFunction& g, double h, double L, double dx,
                                        double T, const Profile& front, double c, double x_offset,
                                        PdeOptions opts = {}) {
    require(h > 0 && T > 0 && c > 0, "simulate_pde_travelling: need h, T, c > 0");
    detail::PdeStepper st(g, h, L, dx, opts.dt);
    st.prime([&](double th, double x) { return front.eval(th + (x_offset - x) / c); });
    FieldRun run;
    run.L = L;
    run.dx = dx;
    run.h = h;
    run.history_mode = "travelling";
    run.c_init = c;
    run.x_offset = x_offset;
    detail::collect_run(st, run, T, opts, std::abs(front.right_limit));
    return run;
}

struct SpeedFit {
    double c_est = 0.0;
    double residual_rms = 0.0;  // RMS deviation of crossing positions from the fitted line
    int snapshots_used = 0;
};

namespace detail {
inline std::optional<double> level_position(const std::vector<double>& u, double dx, double level) {
    for (std::size_t j = 1; j < u.size(); ++j) {
        if ((u[j - 1] - level) * (u[j] - level) <= 0.0 && u[j - 1] != u[j]) {
            const double w = (level - u[j - 1]) / (u[j] - u[j - 1]);
            return dx * (static_cast<double>(j - 1) + w);
        }
    }
    return std::nullopt;
}
}  // namespace detail

/// Level-crossing positions per snapshot, least-squares slope over the second
/// half of the run. Works for fronts of either orientation.
inline SpeedFit measure_front_speed(const FieldRun& run, double level) {
    require(run.snapshots.size() >= 10, "measure_front_speed: need at least 10 snapshots");
    std::vector<double> ts, xs;
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
        const auto pos = detail::level_position(run.snapshots[k], run.dx, level);
        if (!pos) throw std::runtime_error("measure_front_speed: no crossing in snapshot");
        ts.push_back(run.snapshot_times[k]);
        xs.push_back(*pos);
    }
    const std::size_t half = ts.size() / 2;
    std::vector<double> t2(ts.begin() + half, ts.end()), x2(xs.begin() + half, xs.end());
    const LineFit lf = fit_line(t2, x2);
    SpeedFit out;
    out.c_est = std::abs(lf.slope);
    out.snapshots_used = static_cast<int>(t2.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < t2.size(); ++i) {
        const double r = x2[i] - (lf.intercept + lf.slope * t2[i]);
        ss += r * r;
    }
    out.residual_rms = std::sqrt(ss / static_cast<double>(t2.size()));
    return out;
}

/// Extract the final field, align it to the front by the level crossing, and
/// return the sup error over the window where the front lies in
/// [0.01 kappa, 0.99 kappa].
inline double compare_profile(const FieldRun& run, const Profile& front, double c, double level,
                              double kappa) {
    require(!run.snapshots.empty(), "compare_profile: empty run");
    const auto& u = run.snapshots.back();
    const auto xc = detail::level_position(u, run.dx, level);
    if (!xc) throw std::runtime_error("compare_profile: no crossing in final snapshot");
    // orientation: does u increase with x at the crossing?
    const std::size_t jc = static_cast<std::size_t>(*xc / run.dx);
    const double sign = u[std::min(jc + 1, u.size() - 1)] >= u[jc > 0 ? jc - 1 : 0] ? 1.0 : -1.0;

    const double th_lo = first_crossing_time(front, 0.01 * kappa);
    const double th_hi = first_crossing_time(front, 0.99 * kappa);
    double sup = 0.0;
    for (double th = th_lo; th <= th_hi; th += front.dt) {
        const double x = *xc + sign * c * th;
        if (x < 0.0 || x > run.L)
            throw std::runtime_error("compare_profile: profile window not contained in domain");
        const double uval = cubic_interp_uniform(0.0, run.dx, u, x, u.front(), u.back());
        sup = std::max(sup, std::abs(uval - front.eval(th)));
    }
    return sup;
}

}  // namespace frontlab
