#include <doctest.h>

#include <cmath>

#include "toruslab/kam.hpp"

using namespace toruslab;

TEST_SUITE("kam")
{
    TEST_CASE("Diophantine margin")
    {
        const double phi = 0.5 * (1 + std::sqrt(5.0));
        CHECK(diophantine_margin(Vec2(1, 1), 1, 100).gamma_est == 0.0);
        const auto g = diophantine_margin(Vec2(1, phi), 1, 10000);
        CHECK(g.gamma_est > 0.38);
        // brute force over a small box
        const Vec2 w(1, std::sqrt(2.0));
        double best = 1e9;
        for (int k1 = -30; k1 <= 30; ++k1)
            for (int k2 = -30; k2 <= 30; ++k2)
                if (k1 || k2)
                    best = std::min(best, std::abs(k1 * w[0] + k2 * w[1]) * std::max(std::abs(k1), std::abs(k2)));
        CHECK(diophantine_margin(w, 1, 30).gamma_est == doctest::Approx(best).epsilon(1e-12));
        CHECK_THROWS_AS(diophantine_margin(Vec2(0, 0), 1, 10), DomainError);
        CHECK_THROWS_AS(diophantine_margin(Vec2(1, 2), 1, 0), DomainError);
    }

    TEST_CASE("resonance module")
    {
        const auto m = resonance_module(Vec2(1, 2), 3, 1e-12);
        // k multiples of +-(2, -1) with sup norm <= 3
        REQUIRE(m.size() == 2);
        CHECK(m[0] == IntVec2{-2, 1});
        CHECK(m[1] == IntVec2{2, -1});
        CHECK(resonance_module(Vec2(1, std::sqrt(2.0)), 20, 1e-12).empty());
    }

    TEST_CASE("isoenergetic nondegeneracy")
    {
        const auto r = isoenergetic_check(QuadraticForm(1, 1, 0), 1.0);
        CHECK(r.ok);
        // omega = 2 r is radial, the transversality is |omega| = 2
        CHECK(r.min_transversality == doctest::Approx(2.0).epsilon(1e-9));
        CHECK_THROWS_AS(isoenergetic_check(QuadraticForm(1, 1, 0), 0.0), DomainError);
    }

    TEST_CASE("domain tags")
    {
        const QuadraticForm h(1, 1, 0.5);
        CHECK(domain_tag(h, Vec2(1, 1)).label() == "D++");
        CHECK(domain_tag(h, Vec2(-1, 0.1)).label() == "D--");
        CHECK(domain_tag(h, Vec2(1, -1)).label() == "D+-");
        // 2a r1 + c r2 vanishes on r2 = -4 r1
        CHECK(domain_tag(h, Vec2(0.25, -1)).boundary());
        CHECK(domain_tag(h, Vec2(0.25, -1)).label() == "boundary");
    }

    TEST_CASE("torus action has the requested frequency direction")
    {
        const QuadraticForm h(1.2, 0.8, 0.3);
        const Vec2 d(1, 0.618);
        const Vec2 r = torus_action(h, d, 2.0);
        CHECK(h(r) == doctest::Approx(2.0));
        const Vec2 w = frequency(h, r);
        CHECK(std::abs(w[0] * d[1] - w[1] * d[0]) < 1e-12);
        CHECK(w.dot(d) > 0);
    }

    TEST_CASE("graph fit of an unperturbed torus")
    {
        const NearIntegrableHamiltonian H(QuadraticForm(1, 1, 0), FourierPerturbation(), 0.0);
        const Vec2 r = torus_action(H.core(), Vec2(1, 0.5 * (1 + std::sqrt(5.0))), 1.0);
        const auto traj = integrate(H, PhaseState(Vec2::Zero(), r), 200, 5e-3);
        const auto fit = fit_invariant_torus(traj, 64, default_graph_tolerance(0.0));
        CHECK(fit.verdict == TorusVerdict::graph);
        CHECK(fit.coverage >= 0.9);
        CHECK(fit.max_residual == 0.0);
        CHECK(fit.lipschitz == 0.0);
        CHECK(to_string(fit.verdict) == "graph");
        // a short orbit does not cover the torus
        const auto short_traj = integrate(H, PhaseState(Vec2::Zero(), r), 5, 5e-3);
        CHECK(fit_invariant_torus(short_traj, 64, 1.0).verdict == TorusVerdict::insufficient);
        // a resonant torus is a closed curve
        const auto res = integrate(H, PhaseState(Vec2::Zero(), Vec2(0.6, 0.8) / 1.0), 200, 5e-3);
        CHECK(fit_invariant_torus(res, 64, 1.0).verdict == TorusVerdict::insufficient);
    }

    TEST_CASE("spread at the tolerance is not a graph")
    {
        Trajectory t;
        for (int i = 0; i < 64 * 64; ++i)
            for (double r : {0.0, 0.5})
                t.samples.push_back({0.0, PhaseState(Vec2((i % 64 + 0.5) / 64, (i / 64 + 0.5) / 64), Vec2(r, 0))});
        CHECK(fit_invariant_torus(t, 64, 0.5).verdict == TorusVerdict::not_graph);
        CHECK(fit_invariant_torus(t, 64, 0.51).verdict == TorusVerdict::graph);
    }

    TEST_CASE("default tolerance")
    {
        CHECK(default_graph_tolerance(1e-4) == doctest::Approx(0.1 + 1e-8));
        CHECK(default_graph_tolerance(0.0) == 1e-8);
    }

    TEST_CASE("survival scan skips resonant directions")
    {
        const NearIntegrableHamiltonian H(QuadraticForm(1, 1, 0),
                                          FourierPerturbation::cosine_product(std::pow(kTwoPi, -5.0)), 0.0);
        KamScanOptions o;
        o.duration = 20;
        o.K = 100;
        const auto scan = kam_survival_scan(H, {Vec2(1, 1), Vec2(1, 0.5 * (1 + std::sqrt(5.0)))}, {1e-4, 1e-3}, o);
        REQUIRE(scan.rows.size() == 4);
        CHECK(scan.rows[0].skipped);
        CHECK(scan.rows[1].skipped);
        CHECK_FALSE(scan.rows[2].skipped);
        CHECK(scan.rows[2].energy_pinned);
        CHECK(scan.delta[0] == 0.0);
        CHECK(scan.delta[1] > 0.0);
        CHECK_THROWS_AS(kam_survival_scan(H, {Vec2(1, 2)}, {-1.0}, o), DomainError);
    }

    TEST_CASE("log-log slope")
    {
        CHECK(loglog_slope({1, 10, 100}, {3, 30, 300}) == doctest::Approx(1.0));
        CHECK(loglog_slope({1, 4, 9}, {1, 2, 3}) == doctest::Approx(0.5));
        CHECK_THROWS_AS(loglog_slope({1}, {1}), DomainError);
    }
}
