#pragma once

// Phase space T^2 x R^2, Hamiltonians and their exact derivatives.
//
// Angles live on T^2 = R^2 / Z^2 (period 1), so every trigonometric term
// carries an explicit 2*pi. Internally, states are handled as lifted 4-vectors
// ordered (theta1, theta2, r1, r2); PhaseState is the reduced public form.

#include <array>
#include <memory>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "toruslab/errors.hpp"

namespace toruslab {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle to [0, 1).
double wrap_unit(double x);
/// Reduce an angle difference to [-1/2, 1/2).
double wrap_centered(double x);

struct PhaseState {
    Vec2 theta = Vec2::Zero();
    Vec2 r = Vec2::Zero();

    PhaseState() = default;
    PhaseState(const Vec2& theta, const Vec2& r);

    static PhaseState from_lifted(const Vec4& y);
    Vec4 lifted() const;
};

struct Tangent {
    Vec2 dtheta = Vec2::Zero();
    Vec2 dr = Vec2::Zero();
};

/// h(r) = a r1^2 + b r2^2 + c r1 r2, required positive definite.
class QuadraticForm {
public:
    QuadraticForm(double a, double b, double c);

    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }
    /// 4ab - c^2 = 4 det of the coefficient matrix.
    double det_combination() const { return 4.0 * a_ * b_ - c_ * c_; }

    double operator()(const Vec2& r) const;
    Vec2 gradient(const Vec2& r) const;
    Mat2 hessian() const;

private:
    double a_, b_, c_;
};

/// Frequency map omega(r) = grad h(r).
Vec2 frequency(const QuadraticForm& h, const Vec2& r);

struct Monomial {
    double coeff = 0.0;
    int p1 = 0;
    int p2 = 0;
};

/// Polynomial in (r1, r2) given as a sum of monomials.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Monomial> terms);
    static Polynomial constant(double c);

    const std::vector<Monomial>& terms() const { return terms_; }
    int degree() const;
    double value(const Vec2& r) const { return derivative(0, 0, r); }
    double derivative(int d1, int d2, const Vec2& r) const;

private:
    std::vector<Monomial> terms_;
};

/// amplitude * radial(r) * cos(2 pi <k, theta> + phase)
struct FourierTerm {
    std::array<int, 2> k{0, 0};
    double phase = 0.0;
    Polynomial radial = Polynomial::constant(1.0);
    double amplitude = 1.0;
};

/// Action box sampled by the C^5 norm estimate.
struct ActionBox {
    Vec2 lo{-1.5, -1.5};
    Vec2 hi{1.5, 1.5};
};

/// Finite Fourier perturbation f(theta, r) = normalization * sum of FourierTerm.
class FourierPerturbation {
public:
    FourierPerturbation() = default;
    FourierPerturbation(std::vector<FourierTerm> terms, double normalization = 1.0);

    /// kappa cos(2 pi theta1) cos(2 pi theta2), split into two cosine terms.
    static FourierPerturbation cosine_product(double kappa);
    /// kappa cos(2 pi theta1), the pendulum-type resonance term.
    static FourierPerturbation cosine_theta1(double kappa);

    const std::vector<FourierTerm>& terms() const { return terms_; }
    double normalization() const { return normalization_; }
    bool empty() const { return terms_.empty(); }
    int radial_degree() const;

    double value(const Vec2& theta, const Vec2& r) const;
    /// (df/dtheta, df/dr)
    Vec4 gradient(const Vec2& theta, const Vec2& r) const;
    Mat4 hessian(const Vec2& theta, const Vec2& r) const;
    /// Mixed partial d^(a1+a2+b1+b2) f / dtheta1^a1 dtheta2^a2 dr1^b1 dr2^b2.
    double derivative(std::array<int, 2> alpha, std::array<int, 2> beta, const Vec2& theta,
                      const Vec2& r) const;

    /// Grid estimate of the C^5 norm: sup over a 64x64 theta grid times a 33x33
    /// action grid of every partial derivative up to order 5.
    double c5_norm(const ActionBox& box = {}) const;

    FourierPerturbation scaled(double factor) const;

private:
    std::vector<FourierTerm> terms_;
    double normalization_ = 1.0;
};

/// Rescale f so that its grid C^5 norm is 1.
FourierPerturbation c5_normalize(const FourierPerturbation& f, const ActionBox& box = {});

/// Autonomous Hamiltonian on T^2 x R^2 with exact first and second derivatives.
/// Implementations are immutable and safe for concurrent evaluation.
class Hamiltonian {
public:
    virtual ~Hamiltonian() = default;

    virtual double value(const Vec2& theta, const Vec2& r) const = 0;
    /// (dH/dtheta1, dH/dtheta2, dH/dr1, dH/dr2)
    virtual Vec4 gradient(const Vec2& theta, const Vec2& r) const = 0;
    virtual Mat4 hessian(const Vec2& theta, const Vec2& r) const = 0;

    double value(const Vec4& y) const { return value(y.head<2>(), y.tail<2>()); }
    Vec4 gradient(const Vec4& y) const { return gradient(y.head<2>(), y.tail<2>()); }
    Mat4 hessian(const Vec4& y) const { return hessian(y.head<2>(), y.tail<2>()); }

    /// Hamilton's equations: (dH/dr, -dH/dtheta).
    Vec4 field(const Vec4& y) const;
    /// Jacobian of field(): J * Hess H.
    Mat4 field_jacobian(const Vec4& y) const;
};

/// H_eps(theta, r) = h(r) + eps f(theta, r)
class NearIntegrableHamiltonian final : public Hamiltonian {
public:
    using Hamiltonian::gradient;
    using Hamiltonian::hessian;
    using Hamiltonian::value;

    NearIntegrableHamiltonian(QuadraticForm h, FourierPerturbation f, double epsilon);

    const QuadraticForm& core() const { return h_; }
    const FourierPerturbation& perturbation() const { return f_; }
    double epsilon() const { return epsilon_; }
    NearIntegrableHamiltonian with_epsilon(double epsilon) const;

    double value(const Vec2& theta, const Vec2& r) const override;
    Vec4 gradient(const Vec2& theta, const Vec2& r) const override;
    Mat4 hessian(const Vec2& theta, const Vec2& r) const override;

private:
    QuadraticForm h_;
    FourierPerturbation f_;
    double epsilon_;
};

/// H = const: the frozen flow.
class ConstantHamiltonian final : public Hamiltonian {
public:
    using Hamiltonian::gradient;
    using Hamiltonian::hessian;
    using Hamiltonian::value;

    explicit ConstantHamiltonian(double level) : level_(level) {}

    double value(const Vec2&, const Vec2&) const override { return level_; }
    Vec4 gradient(const Vec2&, const Vec2&) const override { return Vec4::Zero(); }
    Mat4 hessian(const Vec2&, const Vec2&) const override { return Mat4::Zero(); }

private:
    double level_;
};

struct FourierMode {
    std::array<int, 2> k{0, 0};
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

/// Value with first and second derivatives in theta.
struct FieldJet {
    double v = 0.0;
    Vec2 d = Vec2::Zero();
    Mat2 dd = Mat2::Zero();
};

/// Scalar field on T^2: a finite Fourier series u, or exp(scale * u).
class ScalarField {
public:
    ScalarField() = default;
    static ScalarField constant(double c);
    static ScalarField fourier(std::vector<FourierMode> modes);
    static ScalarField exponential(std::vector<FourierMode> modes, double scale);

    const std::vector<FourierMode>& modes() const { return modes_; }
    bool is_exponential() const { return exponential_; }
    double scale() const { return scale_; }

    FieldJet jet(const Vec2& theta) const;
    double value(const Vec2& theta) const { return jet(theta).v; }

private:
    std::vector<FourierMode> modes_;
    bool exponential_ = false;
    double scale_ = 1.0;
};

/// Riemannian metric on T^2 with components g11, g12, g22.
class MetricField {
public:
    /// Throws ConstructionError unless positive definite on a 64x64 verification grid.
    MetricField(ScalarField g11, ScalarField g12, ScalarField g22);

    const ScalarField& g11() const { return g11_; }
    const ScalarField& g12() const { return g12_; }
    const ScalarField& g22() const { return g22_; }

    struct Jet {
        FieldJet g11, g12, g22;
    };
    Jet jet(const Vec2& theta) const;
    Mat2 matrix(const Vec2& theta) const;

private:
    ScalarField g11_, g12_, g22_;
};

/// H(theta, p) = g*_theta(p, p) = p . G(theta)^-1 p, no factor 1/2.
class GeodesicHamiltonian final : public Hamiltonian {
public:
    using Hamiltonian::gradient;
    using Hamiltonian::hessian;
    using Hamiltonian::value;

    explicit GeodesicHamiltonian(MetricField g);

    const MetricField& metric() const { return g_; }

    double value(const Vec2& theta, const Vec2& p) const override;
    Vec4 gradient(const Vec2& theta, const Vec2& p) const override;
    Mat4 hessian(const Vec2& theta, const Vec2& p) const override;

private:
    MetricField g_;
};

GeodesicHamiltonian geodesic_hamiltonian(const MetricField& g);

/// Gaussian curvature from the Brioschi formula with analytic derivatives.
double gaussian_curvature(const MetricField& g, const Vec2& theta);

/// Symplectic change of coordinates used to reduce the four domains of the
/// energy shell to the positive-theta1 one: optionally swap the two degrees of
/// freedom, then optionally reflect (theta_i, r_i) -> (-theta_i, -r_i).
/// The view references `base`, which must outlive it.
class AxisView final : public Hamiltonian {
public:
    using Hamiltonian::gradient;
    using Hamiltonian::hessian;
    using Hamiltonian::value;

    AxisView(const Hamiltonian& base, bool swap, bool reflect1 = false, bool reflect2 = false);

    const Hamiltonian& base() const { return *base_; }
    /// Base-frame coordinates of a view-frame lifted state.
    Vec4 to_base(const Vec4& y) const { return s_ * y; }
    Vec4 from_base(const Vec4& y) const { return s_.transpose() * y; }

    double value(const Vec2& theta, const Vec2& r) const override;
    Vec4 gradient(const Vec2& theta, const Vec2& r) const override;
    Mat4 hessian(const Vec2& theta, const Vec2& r) const override;

private:
    const Hamiltonian* base_;
    Mat4 s_;
};

/// H(x); throws DomainError on non-finite input.
double energy(const Hamiltonian& H, const PhaseState& x);
/// X^H(x); throws DomainError on non-finite input.
Tangent vector_field(const Hamiltonian& H, const PhaseState& x);

} // namespace toruslab
