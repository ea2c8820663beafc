#include <algorithm>
#include <cmath>

#include "toruslab/phase.hpp"

namespace toruslab {

namespace {

// n p (n-1) ... (n-d+1), zero when d > n
double falling(int n, int d)
{
    if (d > n)
        return 0.0;
    double f = 1.0;
    for (int i = 0; i < d; ++i)
        f *= n - i;
    return f;
}

// n-th derivative of cos evaluated through its argument
double cos_derivative(int n, double c, double s)
{
    switch (n & 3) {
    case 0: return c;
    case 1: return -s;
    case 2: return -c;
    default: return s;
    }
}

double ipow(double x, int n)
{
    double p = 1.0;
    for (int i = 0; i < n; ++i)
        p *= x;
    return p;
}

} // namespace

Polynomial::Polynomial(std::vector<Monomial> terms) : terms_(std::move(terms))
{
    for (const auto& m : terms_)
        if (m.p1 < 0 || m.p2 < 0 || !std::isfinite(m.coeff))
            throw ConstructionError("Polynomial: negative power or non-finite coefficient");
}

Polynomial Polynomial::constant(double c)
{
    return Polynomial({Monomial{c, 0, 0}});
}

int Polynomial::degree() const
{
    int d = 0;
    for (const auto& m : terms_)
        if (m.coeff != 0.0)
            d = std::max(d, m.p1 + m.p2);
    return d;
}

double Polynomial::derivative(int d1, int d2, const Vec2& r) const
{
    double sum = 0.0;
    for (const auto& m : terms_) {
        const double f = falling(m.p1, d1) * falling(m.p2, d2);
        if (f == 0.0)
            continue;
        sum += m.coeff * f * ipow(r[0], m.p1 - d1) * ipow(r[1], m.p2 - d2);
    }
    return sum;
}

FourierPerturbation::FourierPerturbation(std::vector<FourierTerm> terms, double normalization)
    : terms_(std::move(terms)), normalization_(normalization)
{
    if (!std::isfinite(normalization))
        throw ConstructionError("FourierPerturbation: non-finite normalization");
    for (const auto& t : terms_)
        if (!std::isfinite(t.amplitude) || !std::isfinite(t.phase))
            throw ConstructionError("FourierPerturbation: non-finite term");
}

FourierPerturbation FourierPerturbation::cosine_product(double kappa)
{
    FourierTerm sum{{1, 1}, 0.0, Polynomial::constant(1.0), 0.5 * kappa};
    FourierTerm diff{{1, -1}, 0.0, Polynomial::constant(1.0), 0.5 * kappa};
    return FourierPerturbation({sum, diff});
}

FourierPerturbation FourierPerturbation::cosine_theta1(double kappa)
{
    return FourierPerturbation({FourierTerm{{1, 0}, 0.0, Polynomial::constant(1.0), kappa}});
}

int FourierPerturbation::radial_degree() const
{
    int d = 0;
    for (const auto& t : terms_)
        d = std::max(d, t.radial.degree());
    return d;
}

FourierPerturbation FourierPerturbation::scaled(double factor) const
{
    return FourierPerturbation(terms_, normalization_ * factor);
}

double FourierPerturbation::value(const Vec2& theta, const Vec2& r) const
{
    double sum = 0.0;
    for (const auto& t : terms_) {
        const double arg = kTwoPi * (t.k[0] * theta[0] + t.k[1] * theta[1]) + t.phase;
        sum += t.amplitude * t.radial.value(r) * std::cos(arg);
    }
    return normalization_ * sum;
}

Vec4 FourierPerturbation::gradient(const Vec2& theta, const Vec2& r) const
{
    Vec4 g = Vec4::Zero();
    for (const auto& t : terms_) {
        const double arg = kTwoPi * (t.k[0] * theta[0] + t.k[1] * theta[1]) + t.phase;
        const double c = std::cos(arg), s = std::sin(arg);
        const double p = t.radial.value(r);
        g[0] -= t.amplitude * p * s * kTwoPi * t.k[0];
        g[1] -= t.amplitude * p * s * kTwoPi * t.k[1];
        g[2] += t.amplitude * t.radial.derivative(1, 0, r) * c;
        g[3] += t.amplitude * t.radial.derivative(0, 1, r) * c;
    }
    return normalization_ * g;
}

Mat4 FourierPerturbation::hessian(const Vec2& theta, const Vec2& r) const
{
    Mat4 m = Mat4::Zero();
    for (const auto& t : terms_) {
        const double arg = kTwoPi * (t.k[0] * theta[0] + t.k[1] * theta[1]) + t.phase;
        const double c = std::cos(arg), s = std::sin(arg);
        const double p = t.radial.value(r);
        const Vec2 dp(t.radial.derivative(1, 0, r), t.radial.derivative(0, 1, r));
        Mat2 ddp;
        ddp << t.radial.derivative(2, 0, r), t.radial.derivative(1, 1, r),
            t.radial.derivative(1, 1, r), t.radial.derivative(0, 2, r);
        const Vec2 k(kTwoPi * t.k[0], kTwoPi * t.k[1]);
        m.topLeftCorner<2, 2>() -= t.amplitude * p * c * (k * k.transpose());
        m.topRightCorner<2, 2>() -= t.amplitude * s * (k * dp.transpose());
        m.bottomRightCorner<2, 2>() += t.amplitude * c * ddp;
    }
    m.bottomLeftCorner<2, 2>() = m.topRightCorner<2, 2>().transpose();
    return normalization_ * m;
}

double FourierPerturbation::derivative(std::array<int, 2> alpha, std::array<int, 2> beta,
                                       const Vec2& theta, const Vec2& r) const
{
    const int order = alpha[0] + alpha[1];
    double sum = 0.0;
    for (const auto& t : terms_) {
        const double arg = kTwoPi * (t.k[0] * theta[0] + t.k[1] * theta[1]) + t.phase;
        const double freq = ipow(kTwoPi * t.k[0], alpha[0]) * ipow(kTwoPi * t.k[1], alpha[1]);
        if (freq == 0.0)
            continue;
        sum += t.amplitude * freq * cos_derivative(order, std::cos(arg), std::sin(arg)) *
               t.radial.derivative(beta[0], beta[1], r);
    }
    return normalization_ * sum;
}

double FourierPerturbation::c5_norm(const ActionBox& box) const
{
    constexpr int kAngleGrid = 64;
    constexpr int kActionGrid = 33;
    constexpr int kMaxOrder = 5;

    const int degree = radial_degree();
    std::vector<Vec2> angles;
    angles.reserve(kAngleGrid * kAngleGrid);
    for (int i = 0; i < kAngleGrid; ++i)
        for (int j = 0; j < kAngleGrid; ++j)
            angles.emplace_back(double(i) / kAngleGrid, double(j) / kAngleGrid);

    // r-independent perturbations need a single action sample
    std::vector<Vec2> actions;
    if (degree == 0) {
        actions.push_back(0.5 * (box.lo + box.hi));
    } else {
        for (int i = 0; i < kActionGrid; ++i)
            for (int j = 0; j < kActionGrid; ++j)
                actions.emplace_back(box.lo[0] + (box.hi[0] - box.lo[0]) * i / (kActionGrid - 1),
                                     box.lo[1] + (box.hi[1] - box.lo[1]) * j / (kActionGrid - 1));
    }

    const auto nt = static_cast<Eigen::Index>(terms_.size());
    Eigen::MatrixXd angular(angles.size(), nt);
    Eigen::MatrixXd radial(actions.size(), nt);
    double sup = 0.0;
    for (int a1 = 0; a1 <= kMaxOrder; ++a1)
        for (int a2 = 0; a1 + a2 <= kMaxOrder; ++a2)
            for (int b1 = 0; a1 + a2 + b1 <= kMaxOrder; ++b1)
                for (int b2 = 0; a1 + a2 + b1 + b2 <= kMaxOrder; ++b2) {
                    if (b1 + b2 > degree)
                        continue;
                    for (Eigen::Index j = 0; j < nt; ++j) {
                        const auto& t = terms_[j];
                        const double freq =
                            ipow(kTwoPi * t.k[0], a1) * ipow(kTwoPi * t.k[1], a2) * t.amplitude;
                        for (std::size_t i = 0; i < angles.size(); ++i) {
                            const double arg =
                                kTwoPi * (t.k[0] * angles[i][0] + t.k[1] * angles[i][1]) + t.phase;
                            angular(i, j) =
                                freq * cos_derivative(a1 + a2, std::cos(arg), std::sin(arg));
                        }
                        for (std::size_t i = 0; i < actions.size(); ++i)
                            radial(i, j) = t.radial.derivative(b1, b2, actions[i]);
                    }
                    const Eigen::MatrixXd values = angular * radial.transpose();
                    sup = std::max(sup, values.cwiseAbs().maxCoeff());
                }
    return std::abs(normalization_) * sup;
}

FourierPerturbation c5_normalize(const FourierPerturbation& f, const ActionBox& box)
{
    const double norm = f.empty() ? 0.0 : f.c5_norm(box);
    if (!(norm > 0.0))
        throw DomainError("c5_normalize: zero perturbation");
    return f.scaled(1.0 / norm);
}

} // namespace toruslab
