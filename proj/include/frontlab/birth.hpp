#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "frontlab/numerics.hpp"

namespace frontlab {

enum class BirthKind { nicholson, mackey_glass, tent, table, custom };

/// A scalar birth function g with value and first three derivatives.
/// Builtins carry closed-form derivatives; table functions only reach d2
/// (their derivatives come from central differences on the stored samples).
///
/// For x < 0 all builtins use the bounded extension g(x) = clip(p x e^x),
/// where clip is the identity above -1/2 and approaches -1 smoothly below.
/// Fronts never sample x < 0 once positivity holds, so the extension only
/// affects transient iterations.
struct BirthFunction {
    BirthKind kind = BirthKind::custom;
    std::vector<double> params;
    bool has_third_derivative = true;
    bool derivatives_approximate = false;  // true for table functions

    std::function<double(double)> f, fd1, fd2, fd3;

    double operator()(double x) const { return f(x); }
    double d1(double x) const { return fd1(x); }
    double d2(double x) const { return fd2(x); }
    double d3(double x) const {
        if (!has_third_derivative)
            throw std::runtime_error("birth function: third derivative unavailable");
        return fd3(x);
    }
    double p0() const { return fd1(0.0); }
};

namespace detail {

// smooth floor at -1: identity for u >= -1/2, then -1 + exp(2(u+1/2))/2
inline double clip_value(double u) { return u >= -0.5 ? u : -1.0 + 0.5 * std::exp(2.0 * (u + 0.5)); }
inline double clip_d1(double u) { return u >= -0.5 ? 1.0 : std::exp(2.0 * (u + 0.5)); }
inline double clip_d2(double u) { return u >= -0.5 ? 0.0 : 2.0 * std::exp(2.0 * (u + 0.5)); }
inline double clip_d3(double u) { return u >= -0.5 ? 0.0 : 4.0 * std::exp(2.0 * (u + 0.5)); }

// negative-side extension e(x) = clip(p x e^x) and its derivatives
inline double ext_value(double p, double x) { return clip_value(p * x * std::exp(x)); }
inline double ext_d1(double p, double x) {
    const double u = p * x * std::exp(x);
    return clip_d1(u) * p * (1.0 + x) * std::exp(x);
}
inline double ext_d2(double p, double x) {
    const double e = std::exp(x);
    const double u = p * x * e, u1 = p * (1.0 + x) * e, u2 = p * (2.0 + x) * e;
    return clip_d2(u) * u1 * u1 + clip_d1(u) * u2;
}
inline double ext_d3(double p, double x) {
    const double e = std::exp(x);
    const double u = p * x * e, u1 = p * (1.0 + x) * e, u2 = p * (2.0 + x) * e, u3 = p * (3.0 + x) * e;
    return clip_d3(u) * u1 * u1 * u1 + 3.0 * clip_d2(u) * u1 * u2 + clip_d1(u) * u3;
}

}  // namespace detail

/// Nicholson blowflies nonlinearity g(x) = p x e^{-x}, p > 1.
inline BirthFunction make_nicholson(double p) {
    require(is_finite(p) && p > 1.0, "nicholson: need finite p > 1");
    BirthFunction g;
    g.kind = BirthKind::nicholson;
    g.params = {p};
    g.f = [p](double x) { return x >= 0 ? p * x * std::exp(-x) : detail::ext_value(p, x); };
    g.fd1 = [p](double x) { return x >= 0 ? p * (1.0 - x) * std::exp(-x) : detail::ext_d1(p, x); };
    g.fd2 = [p](double x) { return x >= 0 ? p * (x - 2.0) * std::exp(-x) : detail::ext_d2(p, x); };
    g.fd3 = [p](double x) { return x >= 0 ? p * (3.0 - x) * std::exp(-x) : detail::ext_d3(p, x); };
    return g;
}

/// Mackey-Glass nonlinearity g(x) = p x / (1 + x^n), p > 1, n >= 1.
inline BirthFunction make_mackey_glass(double p, double n) {
    require(is_finite(p) && p > 1.0, "mackey_glass: need finite p > 1");
    require(is_finite(n) && n >= 1.0, "mackey_glass: need finite n >= 1");
    BirthFunction g;
    g.kind = BirthKind::mackey_glass;
    g.params = {p, n};
    g.f = [p, n](double x) {
        if (x < 0) return detail::ext_value(p, x);
        return x == 0 ? 0.0 : p * x / (1.0 + std::pow(x, n));
    };
    g.fd1 = [p, n](double x) {
        if (x < 0) return detail::ext_d1(p, x);
        if (x == 0) return p;
        const double s = std::pow(x, n), d = 1.0 + s;
        return p * (1.0 + (1.0 - n) * s) / (d * d);
    };
    g.fd2 = [p, n](double x) {
        if (x < 0) return detail::ext_d2(p, x);
        if (x == 0) return n == 1.0 ? -2.0 * p : 0.0;
        const double s = std::pow(x, n), d = 1.0 + s;
        return p * n * s * ((n - 1.0) * s - (n + 1.0)) / (x * d * d * d);
    };
    g.fd3 = [p, n](double x) {
        if (x < 0) return detail::ext_d3(p, x);
        if (x == 0) return n == 1.0 ? 6.0 * p : 0.0;
        const double s = std::pow(x, n), d = 1.0 + s;
        const double bracket = (1.0 - n * n) * s * s + (4.0 * n * n + 2.0) * s + (1.0 - n * n);
        return p * n * s * bracket / (x * x * d * d * d * d);
    };
    return g;
}

/// Asymmetric tent map: slope p up to the knee at x = theta, then slope -q,
/// floored at zero. Piecewise linear, so only C^0 at the knee; the derivative
/// there is taken one-sided from the left.
inline BirthFunction make_tent(double p, double q, double theta) {
    require(is_finite(p) && p > 1.0, "tent: need finite rising slope p > 1");
    require(is_finite(q) && q > 0.0, "tent: need finite falling slope q > 0");
    require(is_finite(theta) && theta > 0.0, "tent: need finite knee theta > 0");
    BirthFunction g;
    g.kind = BirthKind::tent;
    g.params = {p, q, theta};
    g.f = [p, q, theta](double x) {
        if (x < 0) return detail::ext_value(p, x);
        return x <= theta ? p * x : std::max(0.0, p * theta - q * (x - theta));
    };
    g.fd1 = [p, q, theta](double x) {
        if (x < 0) return detail::ext_d1(p, x);
        if (x <= theta) return p;
        return p * theta - q * (x - theta) > 0 ? -q : 0.0;
    };
    g.fd2 = [p](double x) { return x < 0 ? detail::ext_d2(p, x) : 0.0; };
    g.fd3 = [p](double x) { return x < 0 ? detail::ext_d3(p, x) : 0.0; };
    return g;
}

/// User-supplied birth function as a sampled table on [0, x_max] with
/// monotone-cubic (Fritsch-Carlson) interpolation. Derivatives are central
/// differences on the stored samples; the third derivative is unavailable.
inline BirthFunction make_table(std::vector<double> xs, std::vector<double> gs) {
    require(xs.size() == gs.size() && xs.size() >= 4, "table: need 4 or more samples");
    require(xs.front() == 0.0 && gs.front() == 0.0, "table: must start at (0, 0)");
    for (std::size_t i = 1; i < xs.size(); ++i)
        require(xs[i] > xs[i - 1], "table: abscissae must increase");
    for (double v : gs) require(is_finite(v), "table: non-finite sample");

    const std::size_t n = xs.size();
    // Fritsch-Carlson slopes
    std::vector<double> d(n), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (gs[i + 1] - gs[i]) / (xs[i + 1] - xs[i]);
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
        d[i] = (delta[i - 1] * delta[i] <= 0.0) ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0.0) {
            d[i] = d[i + 1] = 0.0;
            continue;
        }
        const double a = d[i] / delta[i], b = d[i + 1] / delta[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            d[i] = tau * a * delta[i];
            d[i + 1] = tau * b * delta[i];
        }
    }

    auto hermite = [xs, gs, d](double x) {
        const std::size_t n2 = xs.size();
        if (x <= xs.front()) return gs.front() + d.front() * (x - xs.front());
        if (x >= xs.back()) return gs.back();
        std::size_t i = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin() - 1;
        if (i >= n2 - 1) i = n2 - 2;
        const double hseg = xs[i + 1] - xs[i], th = (x - xs[i]) / hseg;
        const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
        const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
        return h00 * gs[i] + h10 * hseg * d[i] + h01 * gs[i + 1] + h11 * hseg * d[i + 1];
    };

    const double p = d[0];
    require(p > 1.0, "table: slope at zero must exceed 1");
    BirthFunction g;
    g.kind = BirthKind::table;
    g.params = {};
    g.has_third_derivative = false;
    g.derivatives_approximate = true;
    const double hstep = [&] {
        double m = xs.back();
        for (std::size_t i = 0; i + 1 < n; ++i) m = std::min(m, xs[i + 1] - xs[i]);
        return m;
    }();
    g.f = [hermite, p](double x) { return x >= 0 ? hermite(x) : detail::ext_value(p, x); };
    g.fd1 = [hermite, hstep, p](double x) {
        if (x < 0) return detail::ext_d1(p, x);
        return (hermite(x + hstep) - hermite(std::max(0.0, x - hstep))) /
               (hstep + std::min(x, hstep));
    };
    g.fd2 = [hermite, hstep, p](double x) {
        if (x < 0) return detail::ext_d2(p, x);
        if (x < hstep) x = hstep;
        return (hermite(x + hstep) - 2.0 * hermite(x) + hermite(x - hstep)) / (hstep * hstep);
    };
    g.fd3 = [](double) { return 0.0; };
    return g;
}

inline BirthFunction make_custom(std::function<double(double)> f, std::function<double(double)> d1,
                                 std::function<double(double)> d2, std::function<double(double)> d3) {
    BirthFunction g;
    g.kind = BirthKind::custom;
    g.f = std::move(f);
    g.fd1 = std::move(d1);
    g.fd2 = std::move(d2);
    g.fd3 = std::move(d3);
    return g;
}

/// Certified constants of hypothesis (G).
struct GConstants {
    double p = 0.0;       // g'(0)
    double kappa = 0.0;   // positive fixed point
    double gamma = 0.0;   // g'(kappa)
    double A = 0.0;       // monotonicity radius, in (0, kappa/2]
    double zeta1 = 0.0;   // persistence band lower end
    double zeta2 = 0.0;   // persistence band upper end = max g on [0, kappa]
    std::optional<double> x_max;  // critical point of g, when one exists in the scan range
};

struct GCertificate {
    GConstants constants;
    bool ok = false;
    std::string violated_clause;  // empty when ok
    int grid_density = 0;
    double tol = 0.0;
};

/// Sampled certification of hypothesis (G): locates the positive fixed point,
/// the monotonicity radius A, the persistence bounds zeta1 <= zeta2, and
/// checks each inequality of (G) on the grid. Structural failures (no or
/// multiple positive fixed points) throw; inequality violations return
/// ok = false with the first violated clause.
inline GCertificate certify_G(const BirthFunction& g, int grid_density = 2000) {
    require(grid_density >= 1000, "certify_G: grid density below 1000 per unit");
    GCertificate cert;
    cert.grid_density = grid_density;
    cert.tol = 1e-9;
    GConstants& c = cert.constants;
    c.p = g.d1(0.0);
    auto fail = [&](const std::string& clause) {
        cert.ok = false;
        cert.violated_clause = clause;
        return cert;
    };

    // scan range: double until g(R) <= R, then extend past the crossing
    double R = 1.0;
    while (g(R) > R) {
        R *= 2.0;
        require(R < 1e6, "certify_G: no bounded scan range found");
    }
    R += 1.0;
    const std::size_t nsamp = static_cast<std::size_t>(std::ceil(grid_density * R));
    const double step = R / static_cast<double>(nsamp);

    // positive fixed points of g via sign changes of g(x) - x; a plateau of
    // near-zero residuals means a continuum of fixed points, not an isolated one
    std::vector<double> fixed;
    std::size_t plateau = 0;
    double uprev = g(step) - step;
    double xprev = step;
    for (std::size_t i = 2; i <= nsamp; ++i) {
        const double x = step * static_cast<double>(i);
        const double u = g(x) - x;
        plateau = std::abs(u) <= 1e-12 * (1.0 + x) ? plateau + 1 : 0;
        if (plateau >= 10)
            throw std::invalid_argument("certify_G: no isolated positive fixed point");
        if ((uprev < 0) != (u < 0))
            fixed.push_back(bisect_prepared([&](double z) { return g(z) - z; }, xprev, x, uprev));
        uprev = u;
        xprev = x;
    }
    if (!(c.p > 1.0)) return fail("p = g'(0) > 1");
    if (fixed.empty()) throw std::invalid_argument("certify_G: no positive fixed point found");
    if (fixed.size() > 1)
        throw std::invalid_argument("certify_G: more than one positive fixed point (violates (G))");
    c.kappa = fixed.front();
    c.gamma = g.d1(c.kappa);

    // critical point: first sign change of g' over a scan range wide enough
    // for slowly-peaking nonlinearities (Mackey-Glass near n = 1 peaks at
    // (n-1)^{-1/n}, far beyond kappa)
    const double Rh = std::max(4.0 * std::max(c.kappa, 1.0), 16.0);
    {
        const std::size_t m = static_cast<std::size_t>(std::ceil(grid_density * Rh));
        const double st = Rh / static_cast<double>(m);
        double dprev = g.d1(st * 0.5);
        double xp = st * 0.5;
        for (std::size_t i = 1; i <= m; ++i) {
            const double x = st * static_cast<double>(i);
            const double dcur = g.d1(x);
            if ((dprev > 0) && (dcur <= 0)) {
                c.x_max = bisect_prepared([&](double z) { return -g.d1(z); }, xp, x, -dprev);
                break;
            }
            dprev = dcur;
            xp = x;
        }
    }

    // A = sup{a in (0, kappa/2]: g' > 0 on [0, a)}
    c.A = (c.x_max && *c.x_max < c.kappa / 2) ? *c.x_max : c.kappa / 2;
    {
        const std::size_t m = static_cast<std::size_t>(std::ceil(grid_density * c.A)) + 1;
        for (std::size_t i = 0; i < m; ++i) {
            const double x = c.A * static_cast<double>(i) / static_cast<double>(m);
            if (!(g.d1(x) > 0)) return fail("g' > 0 on [0, A)");
        }
    }

    // zeta2 = max g on [0, kappa]; refined through the critical point when inside
    {
        const std::size_t m = static_cast<std::size_t>(std::ceil(grid_density * c.kappa));
        double best = g(c.kappa);
        for (std::size_t i = 0; i <= m; ++i) {
            const double x = c.kappa * static_cast<double>(i) / static_cast<double>(m);
            best = std::max(best, g(x));
        }
        if (c.x_max && *c.x_max < c.kappa) best = std::max(best, g(*c.x_max));
        c.zeta2 = best;
    }

    // g > 0 on (0, zeta2]
    {
        const std::size_t m = static_cast<std::size_t>(std::ceil(grid_density * c.zeta2));
        for (std::size_t i = 1; i <= m; ++i) {
            const double x = c.zeta2 * static_cast<double>(i) / static_cast<double>(m);
            if (!(g(x) > 0)) return fail("g > 0 on (0, zeta2]");
        }
    }

    // zeta1: largest value <= min(g(zeta2), A) with g(zeta1) = min over [zeta1, zeta2].
    // Precompute a suffix minimum of g on a fine grid of [0, zeta2] and scan down.
    {
        const double cap = std::min(g(c.zeta2), c.A);
        if (!(cap > 0)) return fail("positive zeta1 exists");
        const std::size_t m = static_cast<std::size_t>(std::ceil(grid_density * c.zeta2)) + 1;
        const double st = c.zeta2 / static_cast<double>(m - 1);
        std::vector<double> suffmin(m);
        suffmin[m - 1] = g(c.zeta2);
        for (std::size_t i = m - 1; i-- > 0;)
            suffmin[i] = std::min(g(st * static_cast<double>(i)), suffmin[i + 1]);
        const double tol = 1e-9 * (1.0 + c.zeta2);
        double found = -1.0;
        const std::size_t icap = static_cast<std::size_t>(cap / st);
        // the cap itself is the preferred (largest) candidate
        if (g(cap) <= suffmin[std::min(icap + 1, m - 1)] + tol) {
            found = cap;
        } else {
            for (std::size_t i = icap + 1; i-- > 0;) {
                const double x = st * static_cast<double>(i);
                if (x > cap || x <= 0.0) continue;
                if (g(x) <= suffmin[std::min(i + 1, m - 1)] + tol) {
                    // refine the switch point between the neighbouring samples
                    const double sm = suffmin[std::min(i + 2, m - 1)];
                    found = x;
                    if (i + 1 < m && g(st * static_cast<double>(i + 1)) > sm + tol) {
                        double lo = x, hi = std::min(cap, st * static_cast<double>(i + 1));
                        for (int it = 0; it < 60; ++it) {
                            const double mid = 0.5 * (lo + hi);
                            if (g(mid) <= sm + tol) lo = mid; else hi = mid;
                        }
                        found = lo;
                    }
                    break;
                }
            }
        }
        if (found <= 0) return fail("positive zeta1 exists");
        c.zeta1 = found;
    }

    // invariance: g([zeta1, zeta2]) inside [zeta1, zeta2]
    {
        const std::size_t m =
            static_cast<std::size_t>(std::ceil(grid_density * (c.zeta2 - c.zeta1))) + 2;
        const double tol = 1e-7 * (1.0 + c.zeta2);
        for (std::size_t i = 0; i <= m; ++i) {
            const double x =
                c.zeta1 + (c.zeta2 - c.zeta1) * static_cast<double>(i) / static_cast<double>(m);
            const double v = g(x);
            if (v < c.zeta1 - tol || v > c.zeta2 + tol)
                return fail("g([zeta1, zeta2]) inside [zeta1, zeta2]");
        }
    }

    cert.ok = true;
    return cert;
}

/// Schwarzian derivative (Sg)(x) = g'''/g' - (3/2)(g''/g')^2.
/// Signals "critical point" when |g'(x)| is below the tolerance.
inline double schwarzian(const BirthFunction& g, double x, double dtol = 1e-9) {
    const double d1 = g.d1(x);
    if (std::abs(d1) <= dtol) throw std::domain_error("schwarzian: critical point");
    const double r3 = g.d3(x) / d1;
    const double r2 = g.d2(x) / d1;
    return r3 - 1.5 * r2 * r2;
}

enum class HBranch { gamma01, gamma_neg, inconclusive };

inline const char* to_string(HBranch b) {
    switch (b) {
        case HBranch::gamma01: return "gamma01";
        case HBranch::gamma_neg: return "gamma_neg";
        default: return "inconclusive";
    }
}

struct HypothesisReport {
    bool G_ok = false;
    bool H_ok = false;
    bool schwarzian_ok = false;
    HBranch branch = HBranch::inconclusive;
    GConstants constants;
    std::vector<std::string> messages;
};

/// Certification of (H) through the delay-stability test: either
/// Gamma = g'(kappa) in [0, 1], or Gamma < 0 with
/// e^{-h} > -Gamma ln((Gamma^2 - Gamma)/(Gamma^2 + 1)), together with a
/// unique critical point and a sampled-negative Schwarzian. Gamma > 1 is
/// reported as inconclusive (neither branch applies).
inline HypothesisReport certify_H(const BirthFunction& g, double h, int grid_density = 2000) {
    require(h >= 0 && is_finite(h), "certify_H: need h >= 0");
    HypothesisReport rep;
    GCertificate gc = certify_G(g, grid_density);
    rep.constants = gc.constants;
    rep.G_ok = gc.ok;
    if (!gc.ok) {
        rep.messages.push_back("(G) failed: " + gc.violated_clause);
        return rep;
    }

    const double Gamma = gc.constants.gamma;
    bool branch_ok = false;
    if (Gamma >= 0.0 && Gamma <= 1.0) {
        rep.branch = HBranch::gamma01;
        branch_ok = true;
        rep.messages.push_back("Gamma in [0,1]: stability holds for every delay");
    } else if (Gamma < 0.0) {
        rep.branch = HBranch::gamma_neg;
        const double rhs = -Gamma * std::log((Gamma * Gamma - Gamma) / (Gamma * Gamma + 1.0));
        branch_ok = std::exp(-h) > rhs;
        rep.messages.push_back(branch_ok
                                   ? "Gamma < 0: delay inequality e^{-h} > rhs holds"
                                   : "Gamma < 0: delay inequality fails at this h");
    } else {
        rep.branch = HBranch::inconclusive;
        rep.messages.push_back("Gamma > 1: no stability branch applies, result inconclusive");
    }

    // Schwarzian clause: unique critical point, Sg < 0 sampled away from it
    if (!g.has_third_derivative) {
        rep.schwarzian_ok = false;
        rep.messages.push_back("schwarzian unavailable (table function)");
    } else {
        const double Rh = std::max(4.0 * std::max(gc.constants.kappa, gc.constants.zeta2), 16.0);
        const std::size_t m = static_cast<std::size_t>(std::ceil(grid_density * Rh));
        const double st = Rh / static_cast<double>(m);
        int sign_changes = 0;
        double dprev = g.d1(st * 0.5);
        for (std::size_t i = 1; i <= m; ++i) {
            const double dcur = g.d1(st * static_cast<double>(i));
            if ((dprev > 0) != (dcur > 0)) ++sign_changes;
            dprev = dcur;
        }
        bool neg = true;
        const double guard = 1e-6 * (1.0 + gc.constants.p);
        for (std::size_t i = 1; i <= m; ++i) {
            const double x = st * static_cast<double>(i);
            if (std::abs(g.d1(x)) <= guard) continue;
            if (!(schwarzian(g, x) < 0)) {
                neg = false;
                break;
            }
        }
        rep.schwarzian_ok = (sign_changes == 1) && neg;
        if (sign_changes != 1)
            rep.messages.push_back("critical-point count is " + std::to_string(sign_changes) +
                                   ", the stability test needs exactly one");
        if (!neg) rep.messages.push_back("sampled Schwarzian not negative everywhere");
    }

    rep.H_ok = rep.G_ok && branch_ok && rep.schwarzian_ok;
    return rep;
}

}  // namespace frontlab
