#include <doctest.h>

#include <cmath>

#include "toruslab/flow.hpp"

using namespace toruslab;

namespace {

NearIntegrableHamiltonian pert(double eps)
{
    return NearIntegrableHamiltonian(QuadraticForm(1, 1, 0), FourierPerturbation::cosine_product(std::pow(kTwoPi, -5.0)),
                                     eps);
}

Mat4 J()
{
    Mat4 j = Mat4::Zero();
    j.topRightCorner<2, 2>() = Mat2::Identity();
    j.bottomLeftCorner<2, 2>() = -Mat2::Identity();
    return j;
}

} // namespace

TEST_SUITE("flow")
{
    TEST_CASE("step schedule lands on T")
    {
        const auto s = step_schedule(1.0, 0.3);
        REQUIRE(s.size() == 4);
        double sum = 0;
        for (double h : s)
            sum += h;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(step_schedule(0.0, 0.1).empty());
        CHECK_THROWS_AS(step_schedule(1.0, 0.0), DomainError);
    }

    TEST_CASE("unperturbed flow is the exact linear flow")
    {
        const QuadraticForm h(1.5, 0.7, 0.3);
        const NearIntegrableHamiltonian H(h, FourierPerturbation(), 0.0);
        const PhaseState x0(Vec2(0.1, 0.2), Vec2(0.4, -0.3));
        const Vec4 end = integrate_lifted(H, x0.lifted(), 7.3, 0.01);
        const Vec2 expected = x0.theta + 7.3 * frequency(h, x0.r);
        CHECK((end.head<2>() - expected).norm() < 1e-11);
        CHECK((end.tail<2>() - x0.r).norm() == 0.0);
    }

    TEST_CASE("energy drift over T = 1000")
    {
        const auto H = pert(1e-2);
        const PhaseState x0(Vec2(0.1, 0.3), Vec2(0.6, 0.8));
        const auto traj = integrate(H, x0, 1000.0, 1e-2, 100);
        CHECK(traj.energy_drift <= 1e-8);
        CHECK(traj.samples.back().t == doctest::Approx(1000.0));
    }

    TEST_CASE("tangent flow is symplectic")
    {
        const auto H = pert(0.5);
        const auto res = tangent_flow(H, PhaseState(Vec2(0.2, 0.7), Vec2(0.3, -0.9)), 20.0, 1e-2);
        CHECK(std::abs(res.M.determinant() - 1.0) <= 1e-6);
        CHECK((res.M.transpose() * J() * res.M - J()).cwiseAbs().maxCoeff() < 1e-9);
    }

    TEST_CASE("tangent flow matches finite differences of the flow")
    {
        const auto H = pert(0.3);
        const Vec4 y0(0.2, 0.1, 0.5, 0.6);
        const double T = 3.0, h = 1e-3;
        const auto res = tangent_flow(H, y0, T, h);
        for (int i = 0; i < 4; ++i) {
            Vec4 a = y0, b = y0;
            a[i] += 1e-6;
            b[i] -= 1e-6;
            const Vec4 col = (integrate_lifted(H, a, T, h) - integrate_lifted(H, b, T, h)) / 2e-6;
            CHECK((col - res.M.col(i)).cwiseAbs().maxCoeff() < 1e-5);
        }
    }

    TEST_CASE("section crossings of the linear flow")
    {
        const NearIntegrableHamiltonian H(QuadraticForm(1, 1, 0), FourierPerturbation(), 0.0);
        // theta1 advances at rate 2 r1 = 1: crossings of theta1 = 0.5 at t = 0.4, 1.4, 2.4
        const PhaseState x0(Vec2(0.1, 0.0), Vec2(0.5, 0.2));
        const auto cr = section_crossings(H, x0, 0.5, 3.0, +1);
        REQUIRE(cr.size() == 3);
        for (int k = 0; k < 3; ++k)
            CHECK(cr[k].t == doctest::Approx(0.4 + k).epsilon(1e-12));
        CHECK(section_crossings(H, x0, 0.5, 3.0, -1).empty());
        CrossingOptions o;
        o.max_crossings = 1;
        CHECK(section_crossings(H, x0, 0.5, 3.0, +1, o).size() == 1);
    }

    TEST_CASE("reversibility")
    {
        const auto H = pert(0.2);
        const Vec4 y0(0.3, 0.4, 0.7, -0.2);
        const Vec4 y1 = integrate_lifted(H, y0, 5.0, 1e-2);
        Vec4 back = y1;
        const MidpointStepper stepper(H);
        for (int i = 0; i < 500; ++i)
            back = stepper.step(back, -1e-2);
        CHECK((back - y0).norm() < 1e-10);
    }
}
