#pragma once

// Implicit-midpoint integration of Hamiltonian flows, their tangent flows,
// and section-crossing detection on the lifted angle.

#include <functional>
#include <optional>
#include <vector>

#include "toruslab/phase.hpp"

namespace toruslab {

struct TrajectorySample {
    double t = 0.0;
    PhaseState x;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    double step = 0.0;
    /// max |H(x(t)) - H(x(0))| over samples
    double energy_drift = 0.0;
};

struct TangentFlowResult {
    /// Fundamental solution of the variational equations, (theta, r) block order.
    Mat4 M = Mat4::Identity();
    /// End point of the base orbit (lifted).
    Vec4 end = Vec4::Zero();
};

/// One step of the implicit midpoint rule,
/// y1 = y0 + h X((y0 + y1) / 2), solved by fixed-point iteration on the
/// increment to 1e-13.
class MidpointStepper {
public:
    explicit MidpointStepper(const Hamiltonian& H, double tolerance = 1e-13, int max_iter = 100);

    /// Throws IntegrationError (reporting `t`) if the iteration stalls.
    Vec4 step(const Vec4& y, double h, double t = 0.0) const;
    /// Same step, also advancing a tangent matrix with the Cayley map of the
    /// midpoint Jacobian (exactly symplectic).
    Vec4 step(const Vec4& y, Mat4& M, double h, double t = 0.0) const;

    const Hamiltonian& hamiltonian() const { return *H_; }

private:
    Vec4 solve_increment(const Vec4& y, double h, double t) const;

    const Hamiltonian* H_;
    double tol_;
    int max_iter_;
};

/// Step sizes that cover [0, T] with `step`, the last one shortened to land on T.
std::vector<double> step_schedule(double T, double step);

/// Visitor over lifted states; return false to stop early.
using LiftedVisitor = std::function<bool(double t, const Vec4& y)>;

/// Integrate lifted coordinates over [0, T]; the visitor sees every step.
Vec4 integrate_lifted(const Hamiltonian& H, const Vec4& y0, double T, double step,
                      const LiftedVisitor& visit = {});

/// Integrate over [0, T]; samples every `stride` steps plus the end point.
Trajectory integrate(const Hamiltonian& H, const PhaseState& x0, double T, double step,
                     int stride = 1);

TangentFlowResult tangent_flow(const Hamiltonian& H, const Vec4& y0, double T, double step);
TangentFlowResult tangent_flow(const Hamiltonian& H, const PhaseState& x0, double T, double step);

struct SectionCrossing {
    double t = 0.0;
    PhaseState x;
    Vec4 lifted = Vec4::Zero();
};

struct CrossingOptions {
    double step = 1e-3;
    /// Domain exit when direction * dtheta1/dt drops to this value or below
    /// (0: any sign change of dtheta1/dt).
    double min_speed = 0.0;
    /// Stop after this many crossings (0: unlimited).
    std::size_t max_crossings = 0;
};

/// Crossings of theta1 = theta10 (mod 1) along the orbit of x0 on [0, T] with
/// sign(dtheta1/dt) = direction, located to 1e-12 in time by Newton on the
/// midpoint interpolant with a bisection fallback.
std::vector<SectionCrossing> section_crossings(const Hamiltonian& H, const PhaseState& x0,
                                               double theta10, double T, int direction,
                                               const CrossingOptions& options = {});

/// Lifted-state variant; crossings are reported with lifted states.
std::vector<SectionCrossing> section_crossings_lifted(const Hamiltonian& H, const Vec4& y0,
                                                      double theta10, double T, int direction,
                                                      const CrossingOptions& options = {});

} // namespace toruslab
