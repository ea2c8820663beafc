#include "toruslab/flow.hpp"

#include <cmath>
#include <sstream>

namespace toruslab {

MidpointStepper::MidpointStepper(const Hamiltonian& H, double tolerance, int max_iter)
    : H_(&H), tol_(tolerance), max_iter_(max_iter)
{
}

Vec4 MidpointStepper::solve_increment(const Vec4& y, double h, double t) const
{
    Vec4 d = h * H_->field(y);
    for (int it = 0; it < max_iter_; ++it) {
        const Vec4 next = h * H_->field(y + 0.5 * d);
        const double change = (next - d).cwiseAbs().maxCoeff();
        d = next;
        if (change <= tol_ * std::max(1.0, d.cwiseAbs().maxCoeff()))
            return d;
        if (!std::isfinite(change))
            break;
    }
    std::ostringstream msg;
    msg << "implicit midpoint fixed point did not converge at t = " << t << " (step " << h << ")";
    throw IntegrationError(msg.str(), t);
}

Vec4 MidpointStepper::step(const Vec4& y, double h, double t) const
{
    return y + solve_increment(y, h, t);
}

Vec4 MidpointStepper::step(const Vec4& y, Mat4& M, double h, double t) const
{
    const Vec4 d = solve_increment(y, h, t);
    const Mat4 A = 0.5 * h * H_->field_jacobian(y + 0.5 * d);
    const Mat4 I = Mat4::Identity();
    M = (I - A).partialPivLu().solve((I + A) * M);
    return y + d;
}

std::vector<double> step_schedule(double T, double step)
{
    if (!(step > 0.0) || !(T >= 0.0) || !std::isfinite(T))
        throw DomainError("integration needs step > 0 and finite T >= 0");
    std::vector<double> hs;
    if (T == 0.0)
        return hs;
    const double n = std::ceil(T / step * (1.0 - 1e-12));
    const auto count = static_cast<std::size_t>(std::max(1.0, n));
    hs.assign(count, step);
    hs.back() = T - step * double(count - 1);
    return hs;
}

Vec4 integrate_lifted(const Hamiltonian& H, const Vec4& y0, double T, double step,
                      const LiftedVisitor& visit)
{
    MidpointStepper stepper(H);
    Vec4 y = y0;
    double t = 0.0;
    const auto hs = step_schedule(T, step);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        y = stepper.step(y, hs[i], t);
        t = (i + 1 == hs.size()) ? T : t + hs[i];
        if (visit && !visit(t, y))
            break;
    }
    return y;
}

Trajectory integrate(const Hamiltonian& H, const PhaseState& x0, double T, double step, int stride)
{
    if (!x0.theta.allFinite() || !x0.r.allFinite())
        throw DomainError("integrate: non-finite initial state");
    if (stride < 1)
        throw DomainError("integrate: stride must be >= 1");
    Trajectory traj;
    traj.step = step;
    const double e0 = H.value(x0.theta, x0.r);
    traj.samples.push_back({0.0, x0});
    const auto hs = step_schedule(T, step);
    traj.samples.reserve(hs.size() / stride + 2);
    std::size_t count = 0;
    integrate_lifted(H, x0.lifted(), T, step, [&](double t, const Vec4& y) {
        ++count;
        if (count % stride == 0 || count == hs.size()) {
            const PhaseState x = PhaseState::from_lifted(y);
            traj.energy_drift = std::max(traj.energy_drift, std::abs(H.value(x.theta, x.r) - e0));
            traj.samples.push_back({t, x});
        }
        return true;
    });
    return traj;
}

TangentFlowResult tangent_flow(const Hamiltonian& H, const Vec4& y0, double T, double step)
{
    MidpointStepper stepper(H);
    TangentFlowResult out;
    Vec4 y = y0;
    double t = 0.0;
    for (double h : step_schedule(T, step)) {
        y = stepper.step(y, out.M, h, t);
        t += h;
    }
    out.end = y;
    return out;
}

TangentFlowResult tangent_flow(const Hamiltonian& H, const PhaseState& x0, double T, double step)
{
    if (!x0.theta.allFinite() || !x0.r.allFinite())
        throw DomainError("tangent_flow: non-finite initial state");
    return tangent_flow(H, x0.lifted(), T, step);
}

namespace {

int sign_of(double v)
{
    return (v > 0.0) - (v < 0.0);
}

// Time tau in (0, h] at which the midpoint interpolant from y reaches
// theta1 = target; g(0) and g(h) bracket the root.
double refine_crossing(const MidpointStepper& stepper, const Vec4& y, double h, double target,
                       int direction, double t)
{
    auto g = [&](double tau, Vec4* state) {
        const Vec4 z = stepper.step(y, tau, t);
        if (state)
            *state = z;
        return direction * (z[0] - target);
    };
    double lo = 0.0, hi = h;
    const double g0 = direction * (y[0] - target);
    Vec4 yh;
    const double gh = g(h, &yh);
    double tau = h * (-g0) / (gh - g0);
    if (!(tau > lo && tau < hi))
        tau = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        Vec4 z;
        const double gv = g(tau, &z);
        if (gv < 0.0)
            lo = tau;
        else
            hi = tau;
        if (gv == 0.0)
            return tau;
        const double speed = direction * stepper.hamiltonian().field(z)[0];
        double next = speed > 0.0 ? tau - gv / speed : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - tau) <= 1e-12 || hi - lo <= 1e-12)
            return next;
        tau = next;
    }
    return tau;
}

} // namespace

std::vector<SectionCrossing> section_crossings_lifted(const Hamiltonian& H, const Vec4& y0,
                                                      double theta10, double T, int direction,
                                                      const CrossingOptions& options)
{
    if (direction != 1 && direction != -1)
        throw DomainError("section_crossings: direction must be +1 or -1");
    if (!y0.allFinite())
        throw DomainError("section_crossings: non-finite initial state");

    MidpointStepper stepper(H);
    std::vector<SectionCrossing> out;
    const int sign0 = sign_of(H.field(y0)[0]);
    auto check_speed = [&](const Vec4& y, double t) {
        const double v = H.field(y)[0];
        const bool exited = options.min_speed > 0.0 ? !(direction * v > options.min_speed)
                                                    : sign_of(v) != sign0;
        if (exited) {
            std::ostringstream msg;
            msg << "orbit left the section domain at t = " << t << " (dtheta1/dt = " << v << ")";
            throw DomainExitError(msg.str(), t);
        }
    };
    check_speed(y0, 0.0);

    Vec4 y = y0;
    double t = 0.0;
    const auto hs = step_schedule(T, options.step);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double h = hs[i];
        const Vec4 next = stepper.step(y, h, t);
        const double t_next = (i + 1 == hs.size()) ? T : t + h;
        check_speed(next, t_next);
        const double a = y[0] - theta10, b = next[0] - theta10;
        // crossings of theta10 + n strictly after the current sample
        const bool moving = direction > 0 ? b > a : b < a;
        if (moving) {
            const double n = direction > 0 ? std::floor(b) : std::ceil(b);
            if (direction * (n - a) > 0.0) {
                const double target = theta10 + n;
                const double tau = refine_crossing(stepper, y, h, target, direction, t);
                Vec4 z = stepper.step(y, tau, t);
                out.push_back({t + tau, PhaseState::from_lifted(z), z});
                if (options.max_crossings && out.size() >= options.max_crossings)
                    return out;
            }
        }
        y = next;
        t = t_next;
    }
    return out;
}

std::vector<SectionCrossing> section_crossings(const Hamiltonian& H, const PhaseState& x0,
                                               double theta10, double T, int direction,
                                               const CrossingOptions& options)
{
    return section_crossings_lifted(H, x0.lifted(), theta10, T, direction, options);
}

} // namespace toruslab
