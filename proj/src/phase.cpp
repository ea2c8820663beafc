#include "toruslab/phase.hpp"

#include <cmath>

namespace toruslab {

double wrap_unit(double x)
{
    double w = x - std::floor(x);
    // x slightly below an integer can round up to exactly 1
    return w >= 1.0 ? 0.0 : w;
}

double wrap_centered(double x)
{
    return x - std::floor(x + 0.5);
}

PhaseState::PhaseState(const Vec2& th, const Vec2& rr)
    : theta(wrap_unit(th[0]), wrap_unit(th[1])), r(rr)
{
}

PhaseState PhaseState::from_lifted(const Vec4& y)
{
    return PhaseState(y.head<2>(), y.tail<2>());
}

Vec4 PhaseState::lifted() const
{
    Vec4 y;
    y << theta, r;
    return y;
}

QuadraticForm::QuadraticForm(double a, double b, double c) : a_(a), b_(b), c_(c)
{
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
        throw ConstructionError("QuadraticForm: non-finite coefficient");
    if (!(a > 0.0) || !(4.0 * a * b - c * c > 0.0))
        throw ConstructionError("QuadraticForm: not positive definite (need a > 0 and 4ab - c^2 > 0)");
}

double QuadraticForm::operator()(const Vec2& r) const
{
    return a_ * r[0] * r[0] + b_ * r[1] * r[1] + c_ * r[0] * r[1];
}

Vec2 QuadraticForm::gradient(const Vec2& r) const
{
    return {2.0 * a_ * r[0] + c_ * r[1], c_ * r[0] + 2.0 * b_ * r[1]};
}

Mat2 QuadraticForm::hessian() const
{
    Mat2 m;
    m << 2.0 * a_, c_, c_, 2.0 * b_;
    return m;
}

Vec2 frequency(const QuadraticForm& h, const Vec2& r)
{
    return h.gradient(r);
}

Vec4 Hamiltonian::field(const Vec4& y) const
{
    Vec4 g = gradient(y);
    return {g[2], g[3], -g[0], -g[1]};
}

Mat4 Hamiltonian::field_jacobian(const Vec4& y) const
{
    Mat4 hess = hessian(y);
    Mat4 a;
    a.topRows<2>() = hess.bottomRows<2>();
    a.bottomRows<2>() = -hess.topRows<2>();
    return a;
}

NearIntegrableHamiltonian::NearIntegrableHamiltonian(QuadraticForm h, FourierPerturbation f,
                                                     double epsilon)
    : h_(h), f_(std::move(f)), epsilon_(epsilon)
{
    if (!std::isfinite(epsilon) || epsilon < 0.0)
        throw ConstructionError("NearIntegrableHamiltonian: epsilon must be finite and >= 0");
}

NearIntegrableHamiltonian NearIntegrableHamiltonian::with_epsilon(double epsilon) const
{
    return NearIntegrableHamiltonian(h_, f_, epsilon);
}

double NearIntegrableHamiltonian::value(const Vec2& theta, const Vec2& r) const
{
    if (epsilon_ == 0.0)
        return h_(r);
    return h_(r) + epsilon_ * f_.value(theta, r);
}

Vec4 NearIntegrableHamiltonian::gradient(const Vec2& theta, const Vec2& r) const
{
    Vec4 g;
    g << 0.0, 0.0, h_.gradient(r);
    if (epsilon_ != 0.0)
        g += epsilon_ * f_.gradient(theta, r);
    return g;
}

Mat4 NearIntegrableHamiltonian::hessian(const Vec2& theta, const Vec2& r) const
{
    Mat4 m = Mat4::Zero();
    m.bottomRightCorner<2, 2>() = h_.hessian();
    if (epsilon_ != 0.0)
        m += epsilon_ * f_.hessian(theta, r);
    return m;
}

AxisView::AxisView(const Hamiltonian& base, bool swap, bool reflect1, bool reflect2)
    : base_(&base), s_(Mat4::Zero())
{
    // view coordinate i maps to base coordinate perm[i]
    const int perm[4] = {swap ? 1 : 0, swap ? 0 : 1, swap ? 3 : 2, swap ? 2 : 3};
    // reflections act on view axes
    const double sign[2] = {reflect1 ? -1.0 : 1.0, reflect2 ? -1.0 : 1.0};
    for (int i = 0; i < 4; ++i)
        s_(perm[i], i) = sign[i % 2];
}

double AxisView::value(const Vec2& theta, const Vec2& r) const
{
    Vec4 y;
    y << theta, r;
    return base_->value(to_base(y));
}

Vec4 AxisView::gradient(const Vec2& theta, const Vec2& r) const
{
    Vec4 y;
    y << theta, r;
    return s_.transpose() * base_->gradient(to_base(y));
}

Mat4 AxisView::hessian(const Vec2& theta, const Vec2& r) const
{
    Vec4 y;
    y << theta, r;
    return s_.transpose() * base_->hessian(to_base(y)) * s_;
}

namespace {

void require_finite(const PhaseState& x)
{
    if (!x.theta.allFinite() || !x.r.allFinite())
        throw DomainError("non-finite phase state");
}

} // namespace

double energy(const Hamiltonian& H, const PhaseState& x)
{
    require_finite(x);
    return H.value(x.theta, x.r);
}

Tangent vector_field(const Hamiltonian& H, const PhaseState& x)
{
    require_finite(x);
    Vec4 g = H.gradient(x.theta, x.r);
    return {g.tail<2>(), -g.head<2>()};
}

} // namespace toruslab
