#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace frontlab {

inline constexpr double machine_eps = std::numeric_limits<double>::epsilon();

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline bool is_finite(double x) { return std::isfinite(x); }

/// Bisection with caller-supplied endpoint values (the caller's sign
/// classification is trusted, so a 1-ulp re-evaluation difference at an
/// endpoint cannot invalidate the bracket).
template <class F>
double bisect_prepared(F&& f, double lo, double hi, double flo, int iters = 200) {
    const bool lo_neg = flo < 0;
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == lo_neg) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Bisection on a sign change; f(lo) and f(hi) must have opposite signs.
template <class F>
double bisect(F&& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    require((flo < 0) != (fhi < 0), "bisect: no sign change in bracket");
    return bisect_prepared(f, lo, hi, flo, iters);
}

/// Newton iteration with a bisection safeguard inside a sign-changing bracket.
template <class F, class DF>
double newton_bracketed(F&& f, DF&& df, double lo, double hi, double tol = 1e-14) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    require((flo < 0) != (fhi < 0), "newton_bracketed: no sign change in bracket");
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fz = f(z);
        if (fz == 0.0) return z;
        if ((fz < 0) == (flo < 0)) lo = z; else hi = z;
        const double dz = fz / df(z);
        double znew = z - dz;
        if (!(znew > lo && znew < hi)) znew = 0.5 * (lo + hi);
        if (std::abs(znew - z) <= tol * (1.0 + std::abs(znew))) return znew;
        z = znew;
    }
    return z;
}

/// w0(t) = int_0^1 exp(-t u) du, stable down to t = 0.
inline double exp_w0(double theta) {
    if (theta < 1e-8) return 1.0 - theta / 2 + theta * theta / 6;
    return -std::expm1(-theta) / theta;
}

/// w1(t) = int_0^1 u exp(-t u) du. The direct form cancels badly for small t,
/// so switch to the series below t = 0.1.
inline double exp_w1(double theta) {
    if (theta > 0.1) return (1.0 - (1.0 + theta) * std::exp(-theta)) / (theta * theta);
    const double t = theta;
    return 0.5 - t / 3 + t * t / 8 - t * t * t / 30 + t * t * t * t / 144 - t * t * t * t * t / 840;
}

/// E_j(t) = int_0^1 u^j e^{-t u} du for j = 0..3. Series below t = 0.5, the
/// integration-by-parts recurrence above.
inline std::array<double, 4> exp_moments(double theta) {
    std::array<double, 4> E{};
    if (theta < 0.5) {
        for (int j = 0; j < 4; ++j) {
            double term = 1.0, sum = 0.0;
            for (int m = 0; m < 26; ++m) {
                sum += term / static_cast<double>(j + m + 1);
                term *= -theta / static_cast<double>(m + 1);
                if (std::abs(term) < 1e-20) break;
            }
            E[j] = sum;
        }
        return E;
    }
    const double e = std::exp(-theta);
    E[0] = -std::expm1(-theta) / theta;
    for (int j = 1; j < 4; ++j) E[j] = (static_cast<double>(j) * E[j - 1] - e) / theta;
    return E;
}

/// Weights of the exact integral of the cubic Lagrange interpolant (stencil
/// offsets {-1, 0, 1, 2} around the cell [0, 1]) against e^{-theta u}:
/// int_0^1 e^{-theta u} x(u) du = sum_k w[k] x_k. Exact for cubics; reduces to
/// the classical (-1, 13, 13, -1)/24 rule at theta = 0.
inline std::array<double, 4> exp_cell_weights(double theta) {
    const auto E = exp_moments(theta);
    return {-E[3] / 6 + E[2] / 2 - E[1] / 3, E[3] / 2 - E[2] - E[1] / 2 + E[0],
            -E[3] / 2 + E[2] / 2 + E[1], (E[3] - E[1]) / 6};
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares line through (t[i], y[i]).
inline LineFit fit_line(std::span<const double> t, std::span<const double> y) {
    require(t.size() == y.size() && t.size() >= 2, "fit_line: need two or more points");
    const double n = static_cast<double>(t.size());
    double st = 0, sy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
    }
    const double mt = st / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sxx += (t[i] - mt) * (t[i] - mt);
        sxy += (t[i] - mt) * (y[i] - my);
    }
    require(sxx > 0, "fit_line: degenerate abscissae");
    LineFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mt;
    return out;
}

/// Cubic interpolation on a uniform grid (4-point Lagrange, clamped stencil
/// near the ends). Out-of-range queries return the supplied fill values.
inline double cubic_interp_uniform(double t0, double dt, std::span<const double> y, double t,
                                   double left_fill, double right_fill) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
    const double pos = (t - t0) / dt;
    if (pos <= 0.0) return pos == 0.0 ? y[0] : left_fill;
    if (pos >= static_cast<double>(n - 1)) return pos == static_cast<double>(n - 1) ? y[n - 1] : right_fill;
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(pos);
    if (i < 1) i = 1;
    if (i > n - 3) i = n - 3;
    const double th = pos - static_cast<double>(i);
    const double ym1 = y[i - 1], y0 = y[i], y1 = y[i + 1], y2 = y[i + 2];
    return -th * (th - 1) * (th - 2) / 6.0 * ym1 + (th * th - 1) * (th - 2) / 2.0 * y0 -
           th * (th + 1) * (th - 2) / 2.0 * y1 + th * (th * th - 1) / 6.0 * y2;
}

}  // namespace frontlab
