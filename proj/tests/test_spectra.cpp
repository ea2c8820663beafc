#include <doctest.h>

#include <cmath>

#include "toruslab/geodesic.hpp"
#include "toruslab/spectra.hpp"

using namespace toruslab;

namespace {

const double kKappa = std::pow(kTwoPi, -5.0);

NearIntegrableHamiltonian pendulum(double eps)
{
    return NearIntegrableHamiltonian(QuadraticForm(1, 1, 0), FourierPerturbation::cosine_theta1(kKappa), eps);
}

// equator of the (R0, rho) torus at theta1 = th1 with H = 1
PhaseState equator(const MetricFamily& fam, double th1, double radius)
{
    (void)fam;
    return PhaseState(Vec2(th1, 0.0), Vec2(0.0, kTwoPi * radius));
}

} // namespace

TEST_SUITE("spectra")
{
    TEST_CASE("saddle orbit of the pendulum resonance")
    {
        const double eps = 1e-2;
        const auto H = pendulum(eps);
        const double r2 = std::sqrt(1.0 - eps * kKappa);
        const double T = 1.0 / (2.0 * r2);
        // perturbed guess, refined back onto the orbit
        const auto orbit = refine_periodic(H, PhaseState(Vec2(0.002, 0.0), Vec2(0.001, r2)), T * 1.01);
        CHECK(orbit.residual <= 1e-9);
        CHECK(orbit.winding[0] == 0.0);
        CHECK(orbit.winding[1] == 1.0);
        const double lambda = kTwoPi * std::sqrt(2.0 * eps * kKappa);
        CHECK(std::abs(orbit.x0.r[0]) < 1e-9);
        const auto rep = floquet(H, orbit);
        CHECK(rep.cls == OrbitClass::hyperbolic);
        CHECK(rep.bott_label == "index 1");
        // the orbit passes at the saddle, so the exact multiplier is exp(lambda T)
        CHECK(rep.lambda1.real() == doctest::Approx(std::exp(lambda * orbit.period)).epsilon(1e-6));
        CHECK(std::abs(rep.lambda1 * rep.lambda2 - 1.0) <= 1e-6);
        CHECK(std::abs(rep.determinant - 1.0) <= 1e-6);
    }

    TEST_CASE("elliptic orbit of the pendulum resonance")
    {
        const double eps = 1e-2;
        const auto H = pendulum(eps);
        const double r2 = std::sqrt(1.0 + eps * kKappa);
        const auto orbit = refine_periodic(H, PhaseState(Vec2(0.5, 0.0), Vec2(0.0, r2)), 1.0 / (2.0 * r2));
        const auto rep = floquet(H, orbit);
        CHECK(rep.cls == OrbitClass::elliptic);
        CHECK(std::abs(std::abs(rep.lambda1) - 1.0) <= 1e-4);
        const double omega = kTwoPi * std::sqrt(2.0 * eps * kKappa);
        REQUIRE(rep.rotation_angle.has_value());
        CHECK(*rep.rotation_angle == doctest::Approx(omega * orbit.period).epsilon(1e-4));
    }

    TEST_CASE("refinement errors")
    {
        const auto H = pendulum(1e-2);
        CHECK_THROWS_AS(refine_periodic(H, PhaseState(Vec2(0, 0), Vec2(0, 1)), -1.0), DomainError);
        // far from closing up after the guessed period
        CHECK_THROWS_AS(refine_periodic(H, PhaseState(Vec2(0, 0), Vec2(0.3, 0.95)), 0.37), NoOrbitError);
    }

    TEST_CASE("equators of a torus of revolution")
    {
        const auto fam = MetricFamily::revolution(2.0, 1.0);
        const GeodesicHamiltonian H(fam.realized());
        const auto inner = refine_periodic(H, equator(fam, 0.5, 1.0), kTwoPi * 1.0 / 2.0);
        const auto ri = floquet(H, inner);
        CHECK(ri.cls == OrbitClass::hyperbolic);
        CHECK(ri.lambda1.real() == doctest::Approx(std::exp(kTwoPi)).epsilon(0.01));

        const auto outer = refine_periodic(H, equator(fam, 0.0, 3.0), kTwoPi * 3.0 / 2.0);
        const auto ro = floquet(H, outer);
        CHECK(ro.cls == OrbitClass::elliptic);
        CHECK(ro.bott_label == "index 0/2");
        REQUIRE(ro.rotation_angle.has_value());
        CHECK(*ro.rotation_angle == doctest::Approx(kTwoPi * std::sqrt(3.0)).epsilon(0.01));
    }

    TEST_CASE("conjugate points")
    {
        const auto fam = MetricFamily::revolution(2.0, 1.0);
        const GeodesicHamiltonian H(fam.realized());
        const auto traj = integrate(H, equator(fam, 0.0, 3.0), 4.0, 1e-3);
        const auto zeros = jacobi_conjugate_scan(fam.realized(), traj, 7.0);
        REQUIRE(zeros.size() == 1);
        // K = 1/3 on the outer equator: zeros at k pi sqrt(3)
        CHECK(zeros[0] == doctest::Approx(std::numbers::pi * std::sqrt(3.0)).epsilon(1e-4));

        const auto flat = MetricFamily::flat(1, 1, 0);
        const GeodesicHamiltonian F(flat.realized());
        const auto line = integrate(F, shell_state(F, Vec2::Zero(), Vec2(1.0, 0.618), 1.0), 101.0, 1e-2);
        CHECK(jacobi_conjugate_scan(flat.realized(), line, 200.0).empty());

        CHECK_THROWS_AS(jacobi_conjugate_scan(fam.realized(), traj, 100.0), InputError);
        Trajectory bad = traj;
        bad.samples[5].x.r *= 1.1;
        CHECK_THROWS_AS(jacobi_conjugate_scan(fam.realized(), bad, 5.0), InputError);
    }

    TEST_CASE("hyperbolic search on the pendulum resonance")
    {
        const auto H = pendulum(1e-2);
        const AxisView view(H, true);
        const auto dom = SectionDomain::create(view, 0.0, 1.0, 0.5, {-0.05, 0.05});
        std::vector<SectionPoint> seeds{{0.0, 0.0}, {0.5, 0.0}, {0.25, 0.01}};
        SearchOptions o;
        o.swap_axes = true;
        o.max_period = 1;
        const auto found = hyperbolic_search(H, dom, seeds, o);
        int hyperbolic = 0, elliptic = 0;
        for (const auto& c : found) {
            if (c.report.cls == OrbitClass::hyperbolic) {
                ++hyperbolic;
                CHECK(std::abs(wrap_centered(c.orbit.x0.theta[0])) < 1e-6);
                CHECK(c.report.lambda1.real() > 1.0 + 1e-3);
            }
            elliptic += c.report.cls == OrbitClass::elliptic;
        }
        CHECK(hyperbolic == 1);
        CHECK(elliptic == 1);
        CHECK_THROWS_AS(hyperbolic_search(H, dom, seeds, SearchOptions{0}), DomainError);
    }
}
