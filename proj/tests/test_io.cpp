#include <doctest.h>

#include <cmath>

#include "toruslab/io.hpp"

using namespace toruslab;

TEST_SUITE("io")
{
    TEST_CASE("number formatting round-trips")
    {
        for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 535.4916555247646})
            CHECK(std::stod(format_double(x)) == x);
        CHECK(format_double(0.5) == "0.5");
        CHECK(format_double(NAN) == "nan");
        CHECK(format_double(-INFINITY) == "-inf");
    }

    TEST_CASE("near-integrable systems round-trip through JSON")
    {
        const Json j = Json::parse(R"({"kind": "near-integrable", "h": {"a": 1.5, "b": 1, "c": 0.2},
            "perturbation": {"terms": [{"k": [1, -2], "phase": 0.3, "amplitude": 0.5,
                                        "radial": [{"coeff": 2, "p1": 1, "p2": 0}]}]},
            "epsilon": 0.01})");
        const auto s = system_from_json(j);
        REQUIRE(s.near_integrable.has_value());
        const auto H = s.hamiltonian();
        const auto back = system_from_json(to_json(s));
        const auto H2 = back.hamiltonian();
        for (int i = 0; i < 10; ++i) {
            const Vec2 th(0.1 * i, 0.37 * i), r(0.2 - 0.05 * i, 0.3);
            CHECK(H->value(th, r) == H2->value(th, r));
            const double f = 0.5 * 2 * r[0] * std::cos(kTwoPi * (th[0] - 2 * th[1]) + 0.3);
            CHECK(H->value(th, r) == doctest::Approx(1.5 * r[0] * r[0] + r[1] * r[1] + 0.2 * r[0] * r[1] + 0.01 * f));
        }
    }

    TEST_CASE("presets and metrics")
    {
        const auto s = system_from_json(
            Json::parse(R"({"h": {"a": 1, "b": 1, "c": 0}, "perturbation": {"preset": "cosine-theta1", "kappa": 2}, "epsilon": 1})"));
        CHECK(s.hamiltonian()->value(Vec2(0.5, 0.0), Vec2(0, 0)) == doctest::Approx(-2.0));

        const auto g = system_from_json(Json::parse(R"({"kind": "geodesic", "metric": {"kind": "revolution", "R0": 3, "rho": 1}})"));
        REQUIRE(g.metric.has_value());
        CHECK(g.metric_family()->spec().R0 == 3);
        CHECK(to_json(*g.metric)["kind"] == "revolution");
        const auto c = system_from_json(Json::parse(
            R"({"kind": "geodesic", "metric": {"kind": "conformal", "amplitude": 0.1, "u": [{"k": [1, 0], "cos": 1}]}})"));
        CHECK(c.metric->u.size() == 1);
        CHECK(system_from_json(to_json(c)).metric->amplitude == 0.1);
        const auto k = system_from_json(Json::parse(R"({"kind": "constant", "level": 2})"));
        CHECK(k.hamiltonian()->value(Vec2::Zero(), Vec2::Zero()) == 2.0);
    }

    TEST_CASE("invalid documents")
    {
        CHECK_THROWS_AS(system_from_json(Json::parse(R"({"h": {"a": 1, "b": 1, "d": 0}})")), ConfigError);
        CHECK_THROWS_AS(system_from_json(Json::parse(R"({"h": {"a": 1, "b": 1, "c": 5}})")), ConfigError);
        CHECK_THROWS_AS(system_from_json(Json::parse(R"({"kind": "warp"})")), ConfigError);
        CHECK_THROWS_AS(system_from_json(Json::parse(R"({"epsilon": "big"})")), ConfigError);
        CHECK_THROWS_AS(metric_spec_from_json(Json::parse(R"({"kind": "revolution", "R0": 1, "rho": 2})")), ConfigError);
        CHECK_THROWS_AS(metric_spec_from_json(Json::parse(R"({"kind": "flat", "R0": 1})")), ConfigError);
        CHECK_THROWS_AS(perturbation_from_json(Json::parse(R"({"preset": "nope"})")), ConfigError);
    }

    TEST_CASE("CSV exports")
    {
        const NearIntegrableHamiltonian H(QuadraticForm(1, 1, 0), FourierPerturbation(), 0.0);
        const auto traj = integrate(H, PhaseState(Vec2::Zero(), Vec2(0.6, 0.8)), 0.2, 0.1);
        const auto csv = trajectory_csv(H, traj);
        CHECK(csv.rfind("t,theta1,theta2,r1,r2,H\n", 0) == 0);
        CHECK(csv.find('\r') == std::string::npos);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

        CoverTable t;
        t.times = {10, 20};
        t.epsilons = {0.5, 0.25};
        t.G = {{1, 2}, {3, 4}};
        t.greedy = t.G;
        CHECK(cover_table_csv(t) == "t,eps=0.5,eps=0.25\n10,1,2\n20,3,4\n");

        KamScan scan;
        KamScanRow row;
        row.omega = Vec2(1, 2);
        row.epsilon = 0.01;
        row.fit.coverage = 1;
        row.fit.verdict = TorusVerdict::graph;
        scan.rows.push_back(row);
        row.skipped = true;
        scan.rows.push_back(row);
        CHECK(kam_scan_csv(scan) ==
              "omega1,omega2,epsilon,coverage,max_residual,lipschitz,verdict\n1,2,0.01,1,0,0,graph\n1,2,0.01,,,,skipped\n");
    }

    TEST_CASE("JSON exports")
    {
        HpolEstimate est;
        est.slope = 1.0;
        est.ladder = {{0.1, 0.9, 0.99}, {0.05, 1.0, 0.98}};
        const auto j = to_json(est);
        CHECK(j["ladder"].size() == 2);
        CHECK(j["ladder"][1]["slope"] == 1.0);

        SystemVerdict v;
        v.hpol_class = 2;
        v.notes = {"x"};
        const auto jv = to_json(v);
        CHECK(jv["hpol_class"] == 2);
        CHECK(jv["hyperbolic_orbits"].is_array());
        CHECK(verdict_summary(v).find("hpol class:          2") != std::string::npos);
        CHECK(dump_json(jv).back() == '\n');
    }
}
