#include <doctest.h>

#include <cmath>
#include <random>

#include "toruslab/phase.hpp"

using namespace toruslab;

namespace {

NearIntegrableHamiltonian sample_system(double eps)
{
    FourierTerm t1{{1, 0}, 0.3, Polynomial({Monomial{1.0, 0, 0}, Monomial{0.5, 1, 1}}), 0.7};
    FourierTerm t2{{2, -1}, -1.1, Polynomial({Monomial{0.2, 2, 0}, Monomial{1.0, 0, 1}}), 0.4};
    return NearIntegrableHamiltonian(QuadraticForm(1.3, 0.8, 0.4), FourierPerturbation({t1, t2}), eps);
}

Vec4 fd_gradient(const Hamiltonian& H, const Vec4& y, double d = 1e-6)
{
    Vec4 g;
    for (int i = 0; i < 4; ++i) {
        Vec4 a = y, b = y;
        a[i] += d;
        b[i] -= d;
        g[i] = (H.value(a) - H.value(b)) / (2 * d);
    }
    return g;
}

} // namespace

TEST_SUITE("phase")
{
    TEST_CASE("angle wrapping")
    {
        CHECK(wrap_unit(1.25) == doctest::Approx(0.25));
        CHECK(wrap_unit(-0.25) == doctest::Approx(0.75));
        CHECK(wrap_unit(3.0) == 0.0);
        CHECK(wrap_centered(0.75) == doctest::Approx(-0.25));
        CHECK(wrap_centered(-0.5) == doctest::Approx(-0.5));
        CHECK(wrap_centered(0.4) == doctest::Approx(0.4));
    }

    TEST_CASE("quadratic form invariants")
    {
        CHECK_THROWS_AS(QuadraticForm(1, 1, 2), ConstructionError);
        CHECK_THROWS_AS(QuadraticForm(-1, -1, 0), ConstructionError);
        const QuadraticForm h(2, 3, 1);
        CHECK(h.det_combination() == doctest::Approx(23));
        const Vec2 r(0.3, -0.7);
        CHECK(h(r) == doctest::Approx(2 * 0.09 + 3 * 0.49 - 0.21));
        const double d = 1e-6;
        for (int i = 0; i < 2; ++i) {
            Vec2 a = r, b = r;
            a[i] += d;
            b[i] -= d;
            CHECK(std::abs(frequency(h, r)[i] - (h(a) - h(b)) / (2 * d)) < 1e-8);
        }
    }

    TEST_CASE("exact derivatives agree with finite differences")
    {
        const auto H = sample_system(0.3);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int n = 0; n < 20; ++n) {
            const Vec4 y(u(rng), u(rng), u(rng), u(rng));
            CHECK((H.gradient(y) - fd_gradient(H, y)).cwiseAbs().maxCoeff() < 1e-7);
            Mat4 fd;
            for (int i = 0; i < 4; ++i) {
                Vec4 a = y, b = y;
                a[i] += 1e-6;
                b[i] -= 1e-6;
                fd.col(i) = (H.gradient(a) - H.gradient(b)) / 2e-6;
            }
            CHECK((H.hessian(y) - fd).cwiseAbs().maxCoeff() < 1e-6);
        }
    }

    TEST_CASE("energy invariance of the vector field")
    {
        const auto H = sample_system(0.5);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-1.5, 1.5);
        double worst = 0.0;
        for (int n = 0; n < 1000; ++n) {
            const PhaseState x(Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)));
            const Tangent v = vector_field(H, x);
            const Vec4 g = H.gradient(x.lifted());
            worst = std::max(worst, std::abs(g.head<2>().dot(v.dtheta) + g.tail<2>().dot(v.dr)));
        }
        CHECK(worst <= 1e-10);
    }

    TEST_CASE("unperturbed actions are frozen")
    {
        const auto H = sample_system(0.0);
        for (int i = 0; i < 50; ++i) {
            const PhaseState x(Vec2(0.13 * i, 0.29 * i), Vec2(std::sin(i), std::cos(3.0 * i)));
            const Tangent v = vector_field(H, x);
            CHECK(v.dr[0] == 0.0);
            CHECK(v.dr[1] == 0.0);
            CHECK((v.dtheta - frequency(H.core(), x.r)).norm() < 1e-15);
        }
    }

    TEST_CASE("non-finite input is rejected")
    {
        const auto H = sample_system(0.1);
        const PhaseState bad(Vec2(NAN, 0), Vec2(0, 0));
        CHECK_THROWS_AS(energy(H, bad), DomainError);
        CHECK_THROWS_AS(vector_field(H, bad), DomainError);
    }

    TEST_CASE("cosine product split")
    {
        const auto f = FourierPerturbation::cosine_product(0.8);
        for (int i = 0; i < 10; ++i) {
            const Vec2 th(0.07 * i, 0.31 * i + 0.1);
            CHECK(f.value(th, Vec2(0.2, 0.4)) ==
                  doctest::Approx(0.8 * std::cos(kTwoPi * th[0]) * std::cos(kTwoPi * th[1])));
        }
    }

    TEST_CASE("C5 normalization")
    {
        const auto f = FourierPerturbation::cosine_theta1(1.0);
        const auto g = c5_normalize(f);
        CHECK(g.value(Vec2::Zero(), Vec2::Zero()) == doctest::Approx(std::pow(kTwoPi, -5.0)).epsilon(0.01));
        const auto again = c5_normalize(g);
        CHECK(again.value(Vec2::Zero(), Vec2::Zero()) == doctest::Approx(g.value(Vec2::Zero(), Vec2::Zero())).epsilon(0.01));
        const FourierPerturbation c({FourierTerm{{0, 0}, 0.0, Polynomial::constant(1.0), 3.0}});
        CHECK(c5_normalize(c).value(Vec2(0.2, 0.3), Vec2(0.1, 0.1)) == doctest::Approx(1.0).epsilon(0.01));
        CHECK_THROWS(c5_normalize(FourierPerturbation()));
    }

    TEST_CASE("flat geodesic Hamiltonian is theta independent")
    {
        const MetricField g(ScalarField::constant(1.0), ScalarField::constant(0.0), ScalarField::constant(1.0));
        const GeodesicHamiltonian H(g);
        double worst = 0.0;
        for (int i = 0; i < 16; ++i)
            for (int j = 0; j < 16; ++j)
                for (const Vec2& p : {Vec2(1, 0), Vec2(0.3, -2)})
                    worst = std::max(worst, std::abs(H.value(Vec2(i / 16.0, j / 16.0), p) - H.value(Vec2::Zero(), p)));
        CHECK(worst == 0.0);
        CHECK(H.value(Vec2::Zero(), Vec2(0.6, 0.8)) == doctest::Approx(1.0));
    }

    TEST_CASE("Gaussian curvature of a torus of revolution")
    {
        const double R0 = 2, rho = 1, s = kTwoPi * kTwoPi;
        const MetricField g(ScalarField::constant(s * rho * rho), ScalarField::constant(0.0),
                            ScalarField::fourier({FourierMode{{0, 0}, s * (R0 * R0 + 0.5), 0},
                                                  FourierMode{{1, 0}, s * 2 * R0 * rho, 0},
                                                  FourierMode{{2, 0}, s * 0.5, 0}}));
        for (double t : {0.0, 0.1, 0.25, 0.5, 0.8}) {
            const double v = kTwoPi * t;
            const double K = std::cos(v) / (rho * (R0 + rho * std::cos(v)));
            CHECK(gaussian_curvature(g, Vec2(t, 0.37)) == doctest::Approx(K).epsilon(1e-9));
        }
        const MetricField flat(ScalarField::constant(2.0), ScalarField::constant(0.5), ScalarField::constant(1.0));
        CHECK(std::abs(gaussian_curvature(flat, Vec2(0.3, 0.2))) < 1e-14);
    }

    TEST_CASE("indefinite metric is rejected")
    {
        CHECK_THROWS_AS(MetricField(ScalarField::constant(1.0), ScalarField::constant(2.0), ScalarField::constant(1.0)),
                        ConstructionError);
    }

    TEST_CASE("axis view swaps and reflects symplectically")
    {
        const auto H = sample_system(0.2);
        const AxisView V(H, true, true, false);
        const Vec4 y(0.1, 0.2, 0.3, -0.4);
        CHECK(V.value(y) == doctest::Approx(H.value(V.to_base(y))));
        CHECK((V.from_base(V.to_base(y)) - y).norm() < 1e-15);
        // pulled-back field equals the field of the pulled-back Hamiltonian
        const Vec4 lhs = V.to_base(V.field(y));
        const Vec4 rhs = H.field(V.to_base(y));
        CHECK((lhs - rhs).norm() < 1e-12);
    }
}
