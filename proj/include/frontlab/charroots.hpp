#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "frontlab/numerics.hpp"

namespace frontlab {

/// The quasi-polynomial chi(z) = eps^2 z^2 - z - 1 + p e^{-z h}.
/// eps = 0 selects the first-order symbol z + 1 - p e^{-z h} (up to sign
/// conventions this is the characteristic function of the delay equation).
struct QuasiPolynomial {
    double p = 2.0;
    double h = 1.0;
    double eps = 0.0;

    QuasiPolynomial(double p_, double h_, double eps_ = 0.0) : p(p_), h(h_), eps(eps_) {
        require(is_finite(p) && p > 1.0, "QuasiPolynomial: need p > 1");
        require(is_finite(h) && h > 0.0, "QuasiPolynomial: need h > 0");
        require(is_finite(eps) && eps >= 0.0, "QuasiPolynomial: need eps >= 0");
    }
};

namespace detail {
// e^{-z h} with the real exponent clamped at 700 so far-left contour walks
// keep the phase without overflowing; the magnitude cap does not move roots.
inline std::complex<double> exp_mzh(const QuasiPolynomial& qp, std::complex<double> z) {
    std::complex<double> w = -z * qp.h;
    if (w.real() > 700.0) w = {700.0, w.imag()};
    return std::exp(w);
}
}  // namespace detail

inline std::complex<double> chi(const QuasiPolynomial& qp, std::complex<double> z) {
    return qp.eps * qp.eps * z * z - z - 1.0 + qp.p * detail::exp_mzh(qp, z);
}

inline std::complex<double> chi_derivative(const QuasiPolynomial& qp, std::complex<double> z) {
    return 2.0 * qp.eps * qp.eps * z - 1.0 - qp.p * qp.h * detail::exp_mzh(qp, z);
}

/// The unique real root of z = -1 + p e^{-z h} in (0, p-1). The residual
/// z + 1 - p e^{-z h} is strictly increasing, so the bracketed Newton is
/// certified by the sign change at the ends.
inline double real_root_lambda(double p, double h) {
    require(p > 1.0 && h > 0.0, "real_root_lambda: need p > 1, h > 0");
    auto f = [&](double z) { return z + 1.0 - p * std::exp(-z * h); };
    auto df = [&](double z) { return 1.0 + p * h * std::exp(-z * h); };
    return newton_bracketed(f, df, 0.0, p - 1.0, 1e-15);
}

struct RealRootsEps {
    double lambda1 = 0.0;
    double lambda_inf = 0.0;
};

/// The two real roots of eps^2 z^2 - z - 1 + p e^{-z h} for
/// eps in (0, 1/(2 sqrt(p-1))), certified inside the bracket chain
/// lambda < lambda1 < 2(p-1) < eps^-2 - 2(p-1) < lambda_inf < eps^-2 + 1.
/// lambda_inf is solved in the offset variable z = eps^-2 + c; the direct
/// form eps^2 z^2 - z cancels catastrophically near z ~ eps^-2.
inline RealRootsEps real_roots_eps(double p, double h, double eps) {
    require(p > 1.0 && h > 0.0, "real_roots_eps: need p > 1, h > 0");
    require(eps > 0.0 && eps < 1.0 / (2.0 * std::sqrt(p - 1.0)),
            "real_roots_eps: need 0 < eps < 1/(2 sqrt(p-1))");
    const double lam = real_root_lambda(p, h);
    const double e2 = eps * eps;

    auto f1 = [&](double z) { return e2 * z * z - z - 1.0 + p * std::exp(-z * h); };
    auto df1 = [&](double z) { return 2.0 * e2 * z - 1.0 - p * h * std::exp(-z * h); };
    if (!(f1(lam) > 0.0 && f1(2.0 * (p - 1.0)) < 0.0))
        throw std::runtime_error("real_roots_eps: lambda1 bracket shows no sign change");
    RealRootsEps out;
    out.lambda1 = newton_bracketed(f1, df1, lam, 2.0 * (p - 1.0), 1e-15);

    const double zc = 1.0 / e2;
    auto fexp = [&](double c) {
        const double arg = -(zc + c) * h;
        return arg < -745.0 ? 0.0 : p * std::exp(arg);
    };
    auto f2 = [&](double c) { return c - 1.0 + e2 * c * c + fexp(c); };
    auto df2 = [&](double c) { return 1.0 + 2.0 * e2 * c - h * fexp(c); };
    const double clo = -2.0 * (p - 1.0), chi_ = 1.0;
    if (!(f2(clo) < 0.0 && f2(chi_) > 0.0))
        throw std::runtime_error("real_roots_eps: lambda_inf bracket shows no sign change");
    out.lambda_inf = zc + newton_bracketed(f2, df2, clo, chi_, 1e-15);
    return out;
}

struct CharRoot {
    std::complex<double> z;
    double abs_chi = 0.0;
    double abs_dchi = 0.0;  // simplicity margin |chi'(z)|
};

struct CharRootSet {
    std::vector<CharRoot> roots;
    double re_min = 0.0, re_max = 0.0, im_max = 0.0;  // certified window
    long count_by_argument_principle = 0;
};

struct Rect {
    double re_lo, re_hi, im_lo, im_hi;
    double width() const { return re_hi - re_lo; }
    double height() const { return im_hi - im_lo; }
    std::complex<double> center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
    bool contains(std::complex<double> z, double pad = 0.0) const {
        return z.real() >= re_lo - pad && z.real() <= re_hi + pad && z.imag() >= im_lo - pad &&
               z.imag() <= im_hi + pad;
    }
};

namespace detail {

// Accumulate the phase change of chi along the segment [za, zb]. Every
// segment is verified through its midpoint: both halves must turn by less
// than pi/2 and their principal arguments must agree with the whole segment
// (a 2 pi discrepancy unmasks an aliased full winding). A segment that cannot
// be refined means the contour passes through (or numerically touches) a root.
inline double edge_phase(const QuasiPolynomial& qp, std::complex<double> za,
                         std::complex<double> zb) {
    struct Seg {
        std::complex<double> a, b, fa, fb;
        int depth;
    };
    auto val = [&](std::complex<double> z) {
        const std::complex<double> f = chi(qp, z);
        if (f == std::complex<double>(0.0, 0.0))
            throw std::runtime_error("charroots: contour through root");
        return f;
    };
    constexpr int kInitialPieces = 32;
    constexpr double kHalfPi = 1.5707963267948966;
    std::vector<Seg> stack;
    stack.reserve(2 * kInitialPieces);
    std::complex<double> prev = za, fprev = val(za);
    for (int i = kInitialPieces; i >= 1; --i) {
        const std::complex<double> z =
            za + (zb - za) * (static_cast<double>(kInitialPieces - i + 1) / kInitialPieces);
        const std::complex<double> fz = val(z);
        stack.push_back({prev, z, fprev, fz, 0});
        prev = z;
        fprev = fz;
    }
    double total = 0.0;
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        const std::complex<double> m = 0.5 * (s.a + s.b);
        const std::complex<double> fm = val(m);
        const double d1 = std::arg(fm / s.fa);
        const double d2 = std::arg(s.fb / fm);
        const double d = std::arg(s.fb / s.fa);
        if (std::abs(d1) <= kHalfPi && std::abs(d2) <= kHalfPi &&
            std::abs(d1 + d2 - d) < 3.141592653589793) {
            total += d1 + d2;
            continue;
        }
        if (s.depth >= 48) throw std::runtime_error("charroots: contour through root");
        stack.push_back({m, s.b, fm, s.fb, s.depth + 1});
        stack.push_back({s.a, m, s.fa, fm, s.depth + 1});
    }
    return total;
}

// Winding number of chi around the rectangle boundary (counterclockwise).
inline long winding_raw(const QuasiPolynomial& qp, const Rect& r) {
    using C = std::complex<double>;
    const C c1{r.re_lo, r.im_lo}, c2{r.re_hi, r.im_lo}, c3{r.re_hi, r.im_hi}, c4{r.re_lo, r.im_hi};
    const double total =
        edge_phase(qp, c1, c2) + edge_phase(qp, c2, c3) + edge_phase(qp, c3, c4) + edge_phase(qp, c4, c1);
    const double turns = total / (2.0 * 3.14159265358979323846);
    const long n = std::lround(turns);
    if (std::abs(turns - static_cast<double>(n)) > 0.25)
        throw std::runtime_error("charroots: winding number did not close to an integer");
    return n;
}

inline bool newton_polish(const QuasiPolynomial& qp, std::complex<double>& z) {
    for (int it = 0; it < 80; ++it) {
        const std::complex<double> f = chi(qp, z);
        const std::complex<double> df = chi_derivative(qp, z);
        if (std::abs(df) == 0.0) return false;
        const std::complex<double> dz = f / df;
        z -= dz;
        if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) return true;
    }
    return false;
}

// Subdivide until every cell holds at most one root, then polish from the
// cell centre. Split lines are nudged when they pass too close to a root.
inline void enumerate_in_rect(const QuasiPolynomial& qp, Rect r, long count,
                              std::vector<std::complex<double>>& out, int depth = 0) {
    if (count == 0) return;
    if (depth > 120) throw std::runtime_error("charroots: subdivision depth exceeded");
    if (count == 1) {
        std::complex<double> z = r.center();
        if (newton_polish(qp, z) && r.contains(z, 1e-9 * (1.0 + std::abs(z)))) {
            out.push_back(z);
            return;
        }
        // Newton escaped the cell: shrink it and retry
    }
    const bool split_re = r.width() >= r.height();
    for (int attempt = 0; attempt < 6; ++attempt) {
        const double frac = 0.5 + 0.04 * static_cast<double>(attempt);
        Rect a = r, b = r;
        if (split_re) {
            const double mid = r.re_lo + frac * r.width();
            a.re_hi = mid;
            b.re_lo = mid;
        } else {
            const double mid = r.im_lo + frac * r.height();
            a.im_hi = mid;
            b.im_lo = mid;
        }
        try {
            const long na = winding_raw(qp, a);
            const long nb = winding_raw(qp, b);
            if (na + nb != count)
                throw std::runtime_error("charroots: split counts do not add up");
            std::vector<std::complex<double>> sub;
            enumerate_in_rect(qp, a, na, sub, depth + 1);
            enumerate_in_rect(qp, b, nb, sub, depth + 1);
            out.insert(out.end(), sub.begin(), sub.end());
            return;
        } catch (const std::runtime_error&) {
            if (attempt == 5) throw;
        }
    }
}

inline void dedupe_roots(std::vector<std::complex<double>>& zs) {
    std::sort(zs.begin(), zs.end(), [](auto a, auto b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    std::vector<std::complex<double>> out;
    for (const auto& z : zs) {
        if (!out.empty() && std::abs(z - out.back()) <= 1e-9 * (1.0 + std::abs(z))) continue;
        out.push_back(z);
    }
    zs.swap(out);
}

}  // namespace detail

/// Argument-principle count of roots inside the rectangle. The contour is
/// nudged outward and retried when it passes through a root.
inline long winding_count(const QuasiPolynomial& qp, Rect r) {
    for (int attempt = 0;; ++attempt) {
        try {
            return detail::winding_raw(qp, r);
        } catch (const std::runtime_error&) {
            if (attempt >= 5) throw;
            const double dr = 3.1e-3 * (1.0 + r.width()) * (attempt + 1);
            const double di = 2.3e-3 * (1.0 + r.height()) * (attempt + 1);
            r.re_lo -= dr;
            r.re_hi += dr;
            r.im_lo -= di;
            r.im_hi += di;
        }
    }
}

/// A-priori bound on |Im z| for roots with Re z >= re_min: from chi = 0,
/// |z + 1 - eps^2 z^2| = p e^{-Re z h}, so |z| satisfies a closed quadratic.
inline double strip_im_bound(const QuasiPolynomial& qp, double re_min) {
    const double P = qp.p * std::exp(-re_min * qp.h);
    if (qp.eps == 0.0) return 1.0 + P;
    const double e2 = qp.eps * qp.eps;
    return (1.0 + std::sqrt(1.0 + 4.0 * e2 * (1.0 + P))) / (2.0 * e2);
}

/// All roots in the rectangle [re_lo, re_hi] x [-im_max, im_max], certified by
/// the argument principle. Real roots come from a sign scan on the axis;
/// nonreal ones from winding subdivision of the upper half (mirrored down by
/// conjugate symmetry). The total is checked against the full-rectangle
/// winding number; a mismatch lowers the axis gap and retries.
inline CharRootSet roots_in_rect(const QuasiPolynomial& qp, double re_lo, double re_hi,
                                 double im_max) {
    require(re_lo < re_hi && im_max > 0, "roots_in_rect: empty rectangle");
    CharRootSet out;
    out.re_min = re_lo;
    out.re_max = re_hi;
    out.im_max = im_max;

    // real roots: dense sign scan + certified polish
    std::vector<std::complex<double>> roots;
    {
        const int nscan = std::max(2000, static_cast<int>(200.0 * (re_hi - re_lo)));
        auto fre = [&](double x) { return chi(qp, {x, 0.0}).real(); };
        double xprev = re_lo, fprev = fre(xprev);
        for (int i = 1; i <= nscan; ++i) {
            const double x = re_lo + (re_hi - re_lo) * static_cast<double>(i) / nscan;
            const double fx = fre(x);
            if (fx == 0.0) {
                roots.emplace_back(x, 0.0);
            } else if ((fprev < 0) != (fx < 0)) {
                roots.emplace_back(bisect(fre, xprev, x), 0.0);
            }
            xprev = x;
            fprev = fx;
        }
    }
    const std::size_t n_real = roots.size();

    // nonreal roots from the upper subrectangle, then mirror
    double gap = std::min(1e-4 * im_max, 1e-4);
    long total = 0;
    for (int attempt = 0;; ++attempt) {
        std::vector<std::complex<double>> upper;
        Rect up{re_lo, re_hi, gap, im_max};
        const long nup = winding_count(qp, up);
        detail::enumerate_in_rect(qp, up, nup, upper);
        detail::dedupe_roots(upper);

        std::vector<std::complex<double>> all(roots.begin(), roots.begin() + n_real);
        for (const auto& z : upper) {
            all.push_back(z);
            all.push_back(std::conj(z));
        }
        total = winding_count(qp, {re_lo, re_hi, -im_max, im_max});
        if (static_cast<long>(all.size()) == total) {
            roots.swap(all);
            break;
        }
        if (attempt >= 3)
            throw std::runtime_error("charroots: enumeration does not match winding count");
        gap *= 1e-2;  // roots hiding between the axis and the gap line
    }

    detail::dedupe_roots(roots);
    out.count_by_argument_principle = total;
    for (const auto& z : roots) {
        CharRoot r;
        r.z = z;
        r.abs_chi = std::abs(chi(qp, z));
        r.abs_dchi = std::abs(chi_derivative(qp, z));
        if (r.abs_chi > 1e-10 * (1.0 + std::norm(z)))
            throw std::runtime_error("charroots: polished root fails the residual bound");
        if (r.abs_dchi <= 1e-8 * (1.0 + std::abs(z)))
            throw std::runtime_error("charroots: root is not certifiably simple");
        out.roots.push_back(r);
    }
    return out;
}

/// Roots in the vertical strip re_min <= Re z <= re_max, with the imaginary
/// window taken from the a-priori bound so no root escapes the contour.
inline CharRootSet roots_in_strip(const QuasiPolynomial& qp, double re_min, double re_max) {
    return roots_in_rect(qp, re_min, re_max, strip_im_bound(qp, re_min) + 1.0);
}

/// d(mu) = number of roots of eq. (char) with Re z > mu. Throws "resonant mu"
/// when a root's real part lies within tol of mu.
inline int count_d(double mu, double p, double h, double tol = 1e-8) {
    require(mu >= 0.0, "count_d: need mu >= 0");
    const QuasiPolynomial qp{p, h, 0.0};
    const double lam = real_root_lambda(p, h);
    const CharRootSet set = roots_in_strip(qp, mu - 10.0 * tol, lam + 0.1);
    int count = 0;
    for (const auto& r : set.roots) {
        if (std::abs(r.z.real() - mu) <= tol)
            throw std::runtime_error("count_d: resonant mu");
        if (r.z.real() > mu) ++count;
    }
    return count;
}

}  // namespace frontlab
