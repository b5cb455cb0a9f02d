#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "frontlab/charroots.hpp"

using namespace frontlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// independent oracle: plain bisection on z + 1 - p e^{-z h} over (0, p-1)
double lambda_oracle(double p, double h) {
    double lo = 0.0, hi = p - 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid + 1.0 - p * std::exp(-mid * h) > 0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("chi evaluation") {
    const QuasiPolynomial qp{2.0, 1.0, 0.0};
    CHECK_THAT(chi(qp, {0.0, 0.0}).real(), WithinAbs(1.0, 1e-15));  // chi(0) = p - 1
    CHECK(chi(qp, {0.0, 0.0}).imag() == 0.0);

    // h -> 0 collapses the real root to p - 1
    const QuasiPolynomial qp0{2.0, 1e-9, 0.0};
    CHECK_THAT(std::abs(chi(qp0, {1.0, 0.0})), WithinAbs(0.0, 1e-8));

    // bisection oracle locates the (2, 1) root near 0.3748
    const double lam = lambda_oracle(2.0, 1.0);
    CHECK_THAT(lam, WithinAbs(0.3748225281836234, 1e-12));
    CHECK(std::abs(chi(qp, {lam, 0.0})) <= 1e-6);

    // eps = 0 reduction is exact
    const QuasiPolynomial qpe{2.0, 1.0, 0.3};
    const std::complex<double> z{0.4, 1.3};
    CHECK(std::abs(chi(qpe, z) - (0.09 * z * z + chi(qp, z))) <= 1e-14);

    // clamped exponential keeps the value finite far left
    CHECK(std::isfinite(std::abs(chi(qp, {-2000.0, 3.0}))));
}

TEST_CASE("real_root_lambda") {
    CHECK_THAT(real_root_lambda(2.0, 1e-9), WithinAbs(1.0, 1e-8));
    CHECK_THAT(real_root_lambda(2.0, 1.0), WithinAbs(0.3748225281836234, 1e-12));
    CHECK_THAT(real_root_lambda(2.0, 1.0), WithinAbs(lambda_oracle(2.0, 1.0), 1e-12));

    const double e = std::exp(1.0);
    const double lam = real_root_lambda(e, 1.0);
    CHECK(lam > 0.0);
    CHECK(lam < e - 1.0);
    CHECK_THAT(lam + 1.0, WithinRel(std::exp(1.0 - lam), 1e-13));  // lam + 1 = e^{1 - lam}
    CHECK_THAT(lam, WithinAbs(0.5571455989976115, 1e-12));

    for (double p : {1.5, 2.0, e, 5.0})
        for (double h : {0.25, 1.0, 2.0})
            CHECK_THAT(real_root_lambda(p, h), WithinAbs(lambda_oracle(p, h), 1e-12));
}

TEST_CASE("real_roots_eps brackets and values") {
    const auto rr = real_roots_eps(2.0, 1.0, 0.1);
    CHECK(rr.lambda1 > 0.3748);
    CHECK(rr.lambda1 < 2.0);
    CHECK(rr.lambda_inf > 98.0);
    CHECK(rr.lambda_inf < 101.0);
    CHECK_THAT(rr.lambda1, WithinAbs(0.37541609446682334, 1e-10));
    CHECK_THAT(rr.lambda_inf, WithinAbs(100.99019513592782, 1e-8));

    // still two real roots close to the regime boundary (0.24 < 1/(2 sqrt(1)) = 0.5)
    CHECK_NOTHROW(real_roots_eps(2.0, 1.0, 0.24));
    CHECK_THROWS_AS(real_roots_eps(2.0, 1.0, 0.6), std::invalid_argument);
}

TEST_CASE("lambda1(eps) -> lambda quadratically") {
    const double lam = real_root_lambda(2.0, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const double d = real_roots_eps(2.0, 1.0, eps).lambda1 - lam;
        CHECK(d > 0.0);
        CHECK(d < prev);
        // d / eps^2 -> lam^2 / (1 + p h e^{-lam h}); the constant is ~0.0592
        CHECK_THAT(d / (eps * eps), WithinRel(0.05916, 2e-3));
        prev = d;
    }
}

TEST_CASE("bracket chain holds exactly as stated") {
    for (double p : {1.5, 2.0, 5.0}) {
        for (double h : {0.25, 1.0}) {
            const double lam = real_root_lambda(p, h);
            const double eps_max = 1.0 / (2.0 * std::sqrt(p - 1.0));
            for (double f : {0.4, 0.2, 0.1}) {
                const double eps = f * eps_max;
                const auto rr = real_roots_eps(p, h, eps);
                const double inv = 1.0 / (eps * eps);
                CHECK(lam < rr.lambda1);
                CHECK(rr.lambda1 < 2.0 * (p - 1.0));
                CHECK(2.0 * (p - 1.0) < inv - 2.0 * (p - 1.0));
                CHECK(inv - 2.0 * (p - 1.0) < rr.lambda_inf);
                CHECK(rr.lambda_inf < inv + 1.0);
            }
        }
    }
}

TEST_CASE("roots_in_strip finds exactly the real root for (2, 1)") {
    const QuasiPolynomial qp{2.0, 1.0, 0.0};
    const auto set = roots_in_strip(qp, 0.1, 2.0);
    REQUIRE(set.roots.size() == 1);
    CHECK(set.count_by_argument_principle == 1);
    CHECK_THAT(set.roots[0].z.real(), WithinAbs(lambda_oracle(2.0, 1.0), 1e-10));
    CHECK(set.roots[0].z.imag() == 0.0);
    CHECK(set.roots[0].abs_chi <= 1e-10 * (1.0 + std::norm(set.roots[0].z)));
    CHECK(set.roots[0].abs_dchi > 1e-8);
}

TEST_CASE("deep strip count matches the winding number") {
    const QuasiPolynomial qp{2.0, 1.0, 0.0};
    const auto set = roots_in_strip(qp, -4.0, 2.0);
    CHECK(set.count_by_argument_principle == static_cast<long>(set.roots.size()));
    CHECK(set.roots.size() > 10);  // lambda plus many conjugate pairs
    // conjugate closure within 1e-10
    for (const auto& r : set.roots) {
        if (std::abs(r.z.imag()) < 1e-10) continue;
        bool found = false;
        for (const auto& s : set.roots)
            if (std::abs(s.z - std::conj(r.z)) <= 1e-10 * (1.0 + std::abs(r.z))) found = true;
        CHECK(found);
    }
    // no root escapes the certified imaginary window
    for (const auto& r : set.roots) CHECK(std::abs(r.z.imag()) <= set.im_max);
}

TEST_CASE("half-plane beyond 2(p-1) holds only lambda_inf") {
    const QuasiPolynomial qp{2.0, 1.0, 0.1};
    const auto rr = real_roots_eps(2.0, 1.0, 0.1);
    const auto set = roots_in_strip(qp, 2.0, 1.0 / (0.1 * 0.1) + 2.0);
    REQUIRE(set.roots.size() == 1);
    CHECK_THAT(set.roots[0].z.real(), WithinAbs(rr.lambda_inf, 1e-7));
    CHECK(set.roots[0].z.imag() == 0.0);
}

TEST_CASE("(5, 2) carries a complex pair right of 0.01") {
    // chi vanishes at 0.27534 +- 2.58533i; the pair sits inside the strip
    // [0.01, lambda + 0.1], so a full-window count there is 3, not 1
    const QuasiPolynomial qp{5.0, 2.0, 0.0};
    const std::complex<double> z0{0.275335, 2.585331};
    CHECK(std::abs(chi(qp, z0)) < 1e-4);
    const double lam = real_root_lambda(5.0, 2.0);
    CHECK_THAT(lam, WithinAbs(0.576967201387524, 1e-12));
    const auto set = roots_in_strip(qp, 0.01, lam + 0.1);
    REQUIRE(set.roots.size() == 3);
    double best = 1e9;
    for (const auto& r : set.roots) best = std::min(best, std::abs(r.z - z0));
    CHECK(best < 1e-5);
    // the real axis is isolated by |Im z| < pi/h: counting there certifies
    // the "only one real root" claim
    CHECK(winding_count(qp, {0.01, lam + 0.1, -3.141592653589793 / 2.0,
                             3.141592653589793 / 2.0}) == 1);
}

TEST_CASE("winding counts add across a split strip") {
    const QuasiPolynomial qp{5.0, 2.0, 0.0};
    const double lam = real_root_lambda(5.0, 2.0);
    const double bound = strip_im_bound(qp, 0.01) + 1.0;
    const long total = winding_count(qp, {0.01, lam + 0.1, -bound, bound});
    const long left = winding_count(qp, {0.01, 0.4, -bound, bound});
    const long right = winding_count(qp, {0.4, lam + 0.1, -bound, bound});
    CHECK(total == left + right);
    CHECK(total == 3);
    CHECK(left == 2);
    CHECK(right == 1);
}

TEST_CASE("count_d") {
    const double lam = real_root_lambda(2.0, 1.0);
    CHECK(count_d(lam - 0.01, 2.0, 1.0) == 1);
    CHECK(count_d(lam + 0.01, 2.0, 1.0) == 0);
    const int d0 = count_d(0.0, 2.0, 1.0);
    CHECK(d0 == 1);
    CHECK(d0 % 2 == 1);  // conjugate symmetry forces an odd count
    CHECK_THROWS_WITH(count_d(lam, 2.0, 1.0), Catch::Matchers::ContainsSubstring("resonant"));
}
