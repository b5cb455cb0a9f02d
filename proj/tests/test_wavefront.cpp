#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "frontlab/heteroclinic.hpp"
#include "frontlab/wavefront.hpp"

using namespace frontlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const double kKappa = std::log(2.0);
const double kLambda = 0.3748225281836234;  // (char) root at p = 2, h = 1

const BackboneResult& backbone() {
    static const BackboneResult res = solve_heteroclinic(make_nicholson(2.0), 1.0);
    return res;
}
}  // namespace

TEST_CASE("WaveParams identities") {
    for (double c : {4.0, 8.0, 16.0, 50.0}) {
        const auto wp = WaveParams::from_speed(c);
        CHECK_THAT(wp.sigma * wp.sigma, WithinAbs(1.0 + 4.0 * wp.eps * wp.eps, 1e-14));
        CHECK(wp.rate_minus == 2.0 / (1.0 + wp.sigma));
        CHECK(wp.rate_plus == (1.0 + wp.sigma) / (2.0 * wp.eps * wp.eps));
        CHECK_THAT(wp.rate_minus * wp.rate_plus, WithinRel(1.0 / (wp.eps * wp.eps), 1e-13));
    }
    const auto limit = WaveParams::from_eps(0.0);
    CHECK(limit.sigma == 1.0);
    CHECK(limit.rate_minus == 1.0);
    CHECK(std::isinf(limit.rate_plus));
    CHECK_THROWS(WaveParams::from_speed(-1.0));
}

TEST_CASE("apply_I_eps fixes constants") {
    const auto x = make_profile(-40.0, 0.02, 4001, [](double) { return 0.43; }, 0.43, 0.43);
    for (double eps : {0.0, 0.05, 0.2, 0.5}) {
        const auto y = apply_I_eps(x, WaveParams::from_eps(eps), 1.0);
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK_THAT(y.values[i], WithinAbs(0.43, 1e-10));
    }
}

TEST_CASE("apply_I_eps fixes the lambda1 eigenfunction under the linearized map") {
    // with g -> p x, the exponential e^{lambda1 t} is invariant: that identity
    // IS the characteristic equation, so charroots supplies the oracle rate
    const double p = 2.0, h = 1.0;
    for (double eps : {0.0, 0.05, 0.2}) {
        const double l1 = eps > 0 ? real_roots_eps(p, h, eps).lambda1 : kLambda;
        const double t0 = -45.0, t1 = 10.0, dt = 0.005;
        const std::size_t n = static_cast<std::size_t>((t1 - t0) / dt) + 1;
        const auto f = make_profile(
            t0, dt, n, [&](double t) { return p * std::exp(l1 * t); }, 0.0,
            p * std::exp(l1 * t1));
        const auto y = apply_I_eps(f, WaveParams::from_eps(eps), h);
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = y.t(i);
            if (t < t0 + 22.0 || t > t1 - 6.0) continue;  // boundary models excluded
            worst = std::max(worst, std::abs(y.values[i] / std::exp(l1 * t) - 1.0));
        }
        INFO("eps = " << eps);
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("apply_I_eps does not fix non-root exponentials") {
    const double p = 2.0, h = 1.0, eps = 0.0625;
    const double r = 1.5 * real_roots_eps(p, h, eps).lambda1;
    const double t0 = -45.0, t1 = 10.0, dt = 0.005;
    const std::size_t n = static_cast<std::size_t>((t1 - t0) / dt) + 1;
    const auto f = make_profile(t0, dt, n, [&](double t) { return p * std::exp(r * t); }, 0.0,
                                p * std::exp(r * t1));
    const auto y = apply_I_eps(f, WaveParams::from_eps(eps), h);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = y.t(i);
        if (t < t0 + 22.0 || t > t1 - 6.0) continue;
        change = std::max(change, std::abs(y.values[i] / std::exp(r * t) - 1.0));
    }
    CHECK(change >= 1e-3);
}

TEST_CASE("apply_I_eps is linear") {
    std::mt19937 rng(314);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto smooth = [&](double phase) {
        return make_profile(
            -40.0, 0.05, 1601,
            [phase](double t) { return std::sin(0.3 * t + phase) * std::exp(-0.01 * t * t); }, 0.0,
            0.0);
    };
    const auto a = smooth(0.0), b = smooth(1.3);
    const double ca = u(rng), cb = u(rng);
    Profile combo = a;
    for (std::size_t i = 0; i < combo.size(); ++i)
        combo.values[i] = ca * a.values[i] + cb * b.values[i];
    const auto wp = WaveParams::from_eps(0.1);
    const auto ya = apply_I_eps(a, wp, 1.0);
    const auto yb = apply_I_eps(b, wp, 1.0);
    const auto yc = apply_I_eps(combo, wp, 1.0);
    for (std::size_t i = 0; i < yc.size(); ++i)
        CHECK_THAT(yc.values[i], WithinAbs(ca * ya.values[i] + cb * yb.values[i], 1e-13));
}

TEST_CASE("I_eps approaches I as eps -> 0") {
    const auto x = make_profile(
        -40.0, 0.01, 8001, [](double t) { return kKappa / (1.0 + std::exp(-t)); }, 0.0, kKappa);
    const auto ref = apply_I_eps(x, WaveParams::from_eps(0.0), 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
        const auto y = apply_I_eps(x, WaveParams::from_eps(eps), 1.0);
        double sup = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            sup = std::max(sup, std::abs(y.values[i] - ref.values[i]));
        CHECK(sup <= prev);
        prev = sup;
    }
    CHECK(prev < 1e-4);  // at eps = 0.0125 the gap is ~eps^2
}

TEST_CASE("apply_I_eps flags grids that truncate the profile") {
    const auto x = make_profile(
        -2.0, 0.01, 401, [](double t) { return kKappa / (1.0 + std::exp(-t)); }, 0.0, kKappa);
    CHECK_THROWS_WITH(apply_I_eps(x, WaveParams::from_eps(0.1), 1.0),
                      Catch::Matchers::ContainsSubstring("grid too short"));
}

TEST_CASE("residual_ode vanishes on equilibria") {
    const auto g = make_nicholson(2.0);
    const auto x = make_profile(-20.0, 0.01, 4001, [](double) { return kKappa; }, kKappa, kKappa);
    CHECK(residual_ode(x, g, 1.0, 1.0 / 16.0) <= 1e-12);
    // conditioning guard: eps^2/dt^2 must stay reasonable
    const auto coarse = make_profile(-20.0, 1e-6, 32, [](double) { return kKappa; }, kKappa, kKappa);
    CHECK_THROWS(residual_ode(coarse, g, 1.0, 10.0));
}

TEST_CASE("solve_front at c = 16 satisfies every certification") {
    const auto g = make_nicholson(2.0);
    FrontOptions opts;
    opts.t_min = -60.0;
    opts.t_max = 50.0;
    opts.dt = 0.005;
    const auto rep = solve_front(g, 1.0, 16.0, backbone().psi, opts);

    REQUIRE(rep.converged);
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.iterations < 200);
    CHECK(rep.contraction_factor < 1.0);
    CHECK(rep.residual_fix <= 1e-8);
    CHECK(rep.residual_ode <= 1e-5 * kKappa);
    CHECK(rep.positivity_ok);
    REQUIRE(rep.tau.has_value());
    CHECK(rep.monotone_tail_ok);

    const double l1 = real_roots_eps(2.0, 1.0, 1.0 / 16.0).lambda1;
    CHECK(rep.tail.ok);
    CHECK(std::abs(rep.tail.fit.exponent - l1) <= 0.02 * l1);
    CHECK_THAT(rep.tail.lambda1_ref, WithinAbs(l1, 1e-12));

    SECTION("profile crosses zeta1/2 at the origin and A uniquely at tau") {
        CHECK_THAT(rep.profile.eval(0.0), WithinAbs(rep.constants.zeta1 / 2.0, 1e-9));
        const double A = rep.constants.A;
        int crossings = 0;
        for (std::size_t i = 1; i < rep.profile.size(); ++i)
            if (rep.profile.values[i - 1] < A && rep.profile.values[i] >= A) ++crossings;
        CHECK(crossings == 1);
        CHECK_THAT(rep.profile.eval(*rep.tau), WithinAbs(A, 1e-9));
    }

    SECTION("translation of the seed does not move the front") {
        Profile shifted = backbone().psi;
        shifted.t0 += 2.0;  // seed translated right by 2
        const auto rep2 = solve_front(g, 1.0, 16.0, shifted, opts);
        REQUIRE(rep2.converged);
        CHECK(profile_distance(rep.profile, rep2.profile, 0.0) <= 1e-6);
    }

    SECTION("verify_asymptotics report overload") {
        const auto tail = verify_asymptotics(rep, 2.0, 1.0);
        CHECK(tail.ok);
        CHECK(tail.remainder_rate >= 1.99 * kLambda * 0.95);
    }
}

TEST_CASE("solve_front converges across the speed range") {
    const auto g = make_nicholson(2.0);
    FrontOptions opts;
    opts.t_min = -60.0;
    opts.t_max = 50.0;
    opts.dt = 0.005;
    double prev_dist = std::numeric_limits<double>::infinity();
    const double mu = kLambda - 0.1 * kLambda;
    for (double c : {8.0, 16.0, 32.0, 64.0}) {
        const auto rep = solve_front(g, 1.0, c, backbone().psi, opts);
        REQUIRE(rep.converged);
        CHECK(rep.residual_fix <= 1e-8);
        CHECK(rep.positivity_ok);
        CHECK(rep.monotone_tail_ok);
        // fronts approach the backbone in the weighted norm as c grows
        const double dist = profile_distance(rep.profile, backbone().psi, mu);
        CHECK(dist < prev_dist);
        prev_dist = dist;
        // at the largest speed the tail exponent has essentially reached lambda
        if (c == 64.0) CHECK(std::abs(rep.tail.fit.exponent - kLambda) <= 0.01 * kLambda);
    }
}

TEST_CASE("solve_front degenerate and gated cases") {
    const auto g = make_nicholson(2.0);
    SECTION("constant seed is a fixed point, not a front") {
        const auto seed =
            make_profile(-30.0, 0.5, 161, [](double) { return kKappa; }, kKappa, kKappa);
        FrontOptions opts;
        opts.t_min = -40.0;
        opts.t_max = 40.0;
        opts.dt = 0.01;
        const auto rep = solve_front(g, 1.0, 16.0, seed, opts);
        CHECK(rep.degenerate);
        CHECK_FALSE(rep.tau.has_value());
        bool mentioned = false;
        for (const auto& w : rep.warnings)
            if (w.find("no crossing") != std::string::npos) mentioned = true;
        CHECK(mentioned);
    }
    SECTION("speed below c_min is rejected") {
        CHECK_THROWS_WITH(solve_front(g, 1.0, 2.0, backbone().psi),
                          Catch::Matchers::ContainsSubstring("c_min"));
    }
    SECTION("(H) gate") {
        const auto bad = make_nicholson(std::exp(3.0));
        CHECK_THROWS_WITH(solve_front(bad, 1.5, 16.0, backbone().psi),
                          Catch::Matchers::ContainsSubstring("(H)"));
    }
}

TEST_CASE("verify_asymptotics accepts exact synthetic data") {
    const double l1 = real_roots_eps(2.0, 1.0, 1.0 / 16.0).lambda1;
    const double t1 = 40.0;
    const std::size_t n = static_cast<std::size_t>((t1 + 60.0) / 0.005) + 1;
    auto x = make_profile(
        -60.0, 0.005, n,
        [&](double t) { return std::min(kKappa, 2.0 * std::exp(l1 * t)); }, 0.0, kKappa);
    const auto tail = verify_asymptotics(x, kKappa, 2.0, 1.0, 1.0 / 16.0);
    CHECK(tail.ok);
    CHECK_THAT(tail.fit.B, WithinRel(2.0, 1e-9));
    CHECK_THAT(tail.fit.exponent, WithinAbs(l1, 1e-10));
    CHECK(std::isinf(tail.remainder_rate));
}

TEST_CASE("grid refinement changes the front at second order or better") {
    const auto g = make_nicholson(2.0);
    FrontOptions opts;
    opts.t_min = -60.0;
    opts.t_max = 50.0;
    opts.tol = 1e-11;
    auto solve_at = [&](double dt) {
        opts.dt = dt;
        return solve_front(g, 1.0, 16.0, backbone().psi, opts).profile;
    };
    const auto x1 = solve_at(0.02);
    const auto x2 = solve_at(0.01);
    const auto x3 = solve_at(0.005);
    const double d1 = profile_distance(x1, x2, 0.0);
    const double d2 = profile_distance(x2, x3, 0.0);
    CHECK(d1 <= 0.01 * 0.02 * 0.02);  // C dt^2 with C = 0.01
    CHECK(d2 < d1);
    CHECK(std::log2(d1 / d2) >= 2.0);
}

TEST_CASE("solve_front generalizes beyond the flagship parameters") {
    SECTION("overshoot regime: nicholson p = e^3 at h = 0.5 (Gamma = -2)") {
        // the saturated-plateau iteration multiplier is Gamma = -2, so the
        // default damping 0.7 leaves |1 - w(1 - Gamma)| > 1; w = 0.45 contracts
        const auto g = make_nicholson(std::exp(3.0));
        const auto bb = solve_heteroclinic(g, 0.5);
        CHECK(bb.constants.zeta2 > bb.constants.kappa);  // band reaches above kappa
        FrontOptions o;
        o.damping = 0.45;
        o.max_iter = 3000;
        const auto rep = solve_front(g, 0.5, 16.0, bb.psi, o);
        CHECK(rep.converged);
        CHECK(rep.residual_fix <= 1e-8);
        CHECK(rep.positivity_ok);
        CHECK(rep.monotone_tail_ok);
        CHECK(rep.tail.ok);
    }
    SECTION("nicholson p = e at h = 2 (Gamma = 0)") {
        const auto g = make_nicholson(std::exp(1.0));
        const auto bb = solve_heteroclinic(g, 2.0);
        const auto rep = solve_front(g, 2.0, 12.0, bb.psi, FrontOptions{});
        CHECK(rep.converged);
        CHECK(rep.monotone_tail_ok);
        CHECK(rep.tail.ok);
    }
    SECTION("mackey-glass p = 2, n = 2") {
        const auto g = make_mackey_glass(2.0, 2.0);
        const auto bb = solve_heteroclinic(g, 1.0);
        const auto rep = solve_front(g, 1.0, 10.0, bb.psi, FrontOptions{});
        CHECK(rep.converged);
        CHECK(rep.monotone_tail_ok);
        CHECK(rep.tail.ok);
    }
}

TEST_CASE("uniqueness probe at c = 16") {
    const auto g = make_nicholson(2.0);
    FrontOptions opts;
    opts.t_min = -60.0;
    opts.t_max = 50.0;
    opts.dt = 0.005;
    opts.tol = 1e-10;
    Profile shifted = backbone().psi;
    shifted.t0 += 2.0;
    const auto step = make_profile(-80.0, 0.01, 13001,
                                   [](double t) { return kKappa / (1.0 + std::exp(-t)); }, 0.0,
                                   kKappa);
    const auto rep = uniqueness_probe(g, 1.0, 16.0, {backbone().psi, shifted, step}, opts);
    CHECK(rep.converged_count == 3);
    CHECK(rep.max_distance_sup <= 1e-5);
    CHECK(rep.max_distance_weighted <= 1e-4);
    CHECK_THAT(rep.mu_weighted, WithinAbs(0.9 * kLambda, 1e-12));

    // identical seeds collapse to identical fronts
    const auto same = uniqueness_probe(g, 1.0, 16.0, {backbone().psi, backbone().psi}, opts);
    CHECK(same.max_distance_sup == 0.0);

    CHECK_THROWS(uniqueness_probe(g, 1.0, 16.0, {backbone().psi}, opts));
}
