#include <cmath>

#include "toruslab/phase.hpp"

namespace toruslab {

ScalarField ScalarField::constant(double c)
{
    return fourier({FourierMode{{0, 0}, c, 0.0}});
}

ScalarField ScalarField::fourier(std::vector<FourierMode> modes)
{
    for (const auto& m : modes)
        if (!std::isfinite(m.cos_coeff) || !std::isfinite(m.sin_coeff))
            throw ConstructionError("ScalarField: non-finite Fourier coefficient");
    ScalarField f;
    f.modes_ = std::move(modes);
    return f;
}

ScalarField ScalarField::exponential(std::vector<FourierMode> modes, double scale)
{
    if (!std::isfinite(scale))
        throw ConstructionError("ScalarField: non-finite exponential scale");
    ScalarField f = fourier(std::move(modes));
    f.exponential_ = true;
    f.scale_ = scale;
    return f;
}

FieldJet ScalarField::jet(const Vec2& theta) const
{
    FieldJet u;
    for (const auto& m : modes_) {
        const Vec2 k(kTwoPi * m.k[0], kTwoPi * m.k[1]);
        const double arg = k.dot(theta);
        const double c = std::cos(arg), s = std::sin(arg);
        u.v += m.cos_coeff * c + m.sin_coeff * s;
        u.d += (-m.cos_coeff * s + m.sin_coeff * c) * k;
        u.dd -= (m.cos_coeff * c + m.sin_coeff * s) * (k * k.transpose());
    }
    if (!exponential_)
        return u;
    // e^{s u}: first and second derivatives by the chain rule
    FieldJet e;
    e.v = std::exp(scale_ * u.v);
    e.d = scale_ * e.v * u.d;
    e.dd = e.v * (scale_ * u.dd + scale_ * scale_ * (u.d * u.d.transpose()));
    return e;
}

MetricField::MetricField(ScalarField g11, ScalarField g12, ScalarField g22)
    : g11_(std::move(g11)), g12_(std::move(g12)), g22_(std::move(g22))
{
    constexpr int n = 64;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 th(double(i) / n, double(j) / n);
            const double a = g11_.value(th), b = g12_.value(th), c = g22_.value(th);
            if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !(a > 0.0) ||
                !(a * c - b * b > 0.0))
                throw ConstructionError("MetricField: not positive definite on the verification grid");
        }
}

MetricField::Jet MetricField::jet(const Vec2& theta) const
{
    return {g11_.jet(theta), g12_.jet(theta), g22_.jet(theta)};
}

Mat2 MetricField::matrix(const Vec2& theta) const
{
    const double b = g12_.value(theta);
    Mat2 m;
    m << g11_.value(theta), b, b, g22_.value(theta);
    return m;
}

GeodesicHamiltonian::GeodesicHamiltonian(MetricField g) : g_(std::move(g)) {}

GeodesicHamiltonian geodesic_hamiltonian(const MetricField& g)
{
    return GeodesicHamiltonian(g);
}

// H = N / D with N = g22 p1^2 - 2 g12 p1 p2 + g11 p2^2 and D = det G.
double GeodesicHamiltonian::value(const Vec2& theta, const Vec2& p) const
{
    const double a = g_.g11().value(theta), b = g_.g12().value(theta), c = g_.g22().value(theta);
    const double num = c * p[0] * p[0] - 2.0 * b * p[0] * p[1] + a * p[1] * p[1];
    return num / (a * c - b * b);
}

namespace {

struct GeodesicParts {
    double H, D;
    Vec2 Hth, Dth, Np;
    Mat2 Nth_p; // row i: d/dtheta_i of N_p
    Mat2 Nthth, Dthth;
};

GeodesicParts geodesic_parts(const MetricField& g, const Vec2& theta, const Vec2& p)
{
    const auto j = g.jet(theta);
    const FieldJet &E = j.g11, &F = j.g12, &G = j.g22;
    const double p11 = p[0] * p[0], p12 = p[0] * p[1], p22 = p[1] * p[1];

    GeodesicParts out;
    const double N = G.v * p11 - 2.0 * F.v * p12 + E.v * p22;
    out.D = E.v * G.v - F.v * F.v;
    out.H = N / out.D;

    const Vec2 Nth = G.d * p11 - 2.0 * F.d * p12 + E.d * p22;
    out.Dth = E.d * G.v + E.v * G.d - 2.0 * F.v * F.d;
    out.Hth = (Nth - out.H * out.Dth) / out.D;

    out.Np = Vec2(2.0 * G.v * p[0] - 2.0 * F.v * p[1], -2.0 * F.v * p[0] + 2.0 * E.v * p[1]);
    for (int i = 0; i < 2; ++i)
        out.Nth_p.row(i) = Vec2(2.0 * G.d[i] * p[0] - 2.0 * F.d[i] * p[1],
                                -2.0 * F.d[i] * p[0] + 2.0 * E.d[i] * p[1])
                               .transpose();

    out.Nthth = G.dd * p11 - 2.0 * F.dd * p12 + E.dd * p22;
    out.Dthth = E.dd * G.v + E.d * G.d.transpose() + G.d * E.d.transpose() + E.v * G.dd -
                2.0 * (F.d * F.d.transpose() + F.v * F.dd);
    return out;
}

} // namespace

Vec4 GeodesicHamiltonian::gradient(const Vec2& theta, const Vec2& p) const
{
    const auto q = geodesic_parts(g_, theta, p);
    Vec4 out;
    out << q.Hth, q.Np / q.D;
    return out;
}

Mat4 GeodesicHamiltonian::hessian(const Vec2& theta, const Vec2& p) const
{
    const auto q = geodesic_parts(g_, theta, p);
    const auto j = g_.jet(theta);
    Mat4 m;
    // N = H D differentiated twice
    m.topLeftCorner<2, 2>() = (q.Nthth - q.Hth * q.Dth.transpose() - q.Dth * q.Hth.transpose() -
                               q.H * q.Dthth) /
                              q.D;
    const Vec2 Hp = q.Np / q.D;
    const Mat2 mixed = (q.Nth_p - q.Dth * Hp.transpose()) / q.D; // (i, k) = d2H / dtheta_i dp_k
    m.topRightCorner<2, 2>() = mixed;
    m.bottomLeftCorner<2, 2>() = mixed.transpose();
    Mat2 Npp;
    Npp << 2.0 * j.g22.v, -2.0 * j.g12.v, -2.0 * j.g12.v, 2.0 * j.g11.v;
    m.bottomRightCorner<2, 2>() = Npp / q.D;
    return m;
}

double gaussian_curvature(const MetricField& g, const Vec2& theta)
{
    const auto j = g.jet(theta);
    const double E = j.g11.v, F = j.g12.v, G = j.g22.v;
    const double Eu = j.g11.d[0], Ev = j.g11.d[1];
    const double Fu = j.g12.d[0], Fv = j.g12.d[1];
    const double Gu = j.g22.d[0], Gv = j.g22.d[1];
    const double Evv = j.g11.dd(1, 1), Fuv = j.g12.dd(0, 1), Guu = j.g22.dd(0, 0);

    Eigen::Matrix3d A;
    A << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,
        Fv - 0.5 * Gu, E, F,
        0.5 * Gv, F, G;
    Eigen::Matrix3d B;
    B << 0.0, 0.5 * Ev, 0.5 * Gu,
        0.5 * Ev, E, F,
        0.5 * Gu, F, G;
    const double det = E * G - F * F;
    return (A.determinant() - B.determinant()) / (det * det);
}

} // namespace toruslab
