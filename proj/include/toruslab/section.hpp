#pragma once

// Poincare sections {theta1 = theta10} of an energy shell, the return map
// they carry, its twist, and a graph test for invariant circles.
//
// Sections always sit in the positive-frequency domain (dtheta1/dt > 0);
// the other domains are reached through AxisView.

#include <optional>
#include <vector>

#include "toruslab/flow.hpp"
#include "toruslab/phase.hpp"

namespace toruslab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Section theta1 = theta10 of the level H = energy, parametrized by
/// (theta2, r2) with r2 in `window`, inside the region dtheta1/dt > alpha.
class SectionDomain {
public:
    /// Validates alpha > 0 and dtheta1/dt > alpha on the shell over a 9x33
    /// (theta2, r2) grid; throws ConstructionError otherwise.
    static SectionDomain create(const Hamiltonian& H, double theta10, double energy, double alpha,
                                Interval window);
    /// Unchecked construction.
    SectionDomain(double theta10, double energy, double alpha, Interval window);

    double theta10() const { return theta10_; }
    double energy() const { return energy_; }
    double alpha() const { return alpha_; }
    const Interval& window() const { return window_; }

private:
    double theta10_, energy_, alpha_;
    Interval window_;
};

struct SectionPoint {
    double theta2 = 0.0;
    double r2 = 0.0;

    SectionPoint() = default;
    SectionPoint(double theta2_, double r2_) : theta2(wrap_unit(theta2_)), r2(r2_) {}
};

struct ReturnSample {
    SectionPoint point;
    SectionPoint image;
    double return_time = 0.0;
    /// Lifted theta2 advance over one return.
    double angle_advance = 0.0;
    /// Lifted states at departure and at return.
    Vec4 start = Vec4::Zero();
    Vec4 end = Vec4::Zero();
};

/// Solve H(theta, r1, r2) = e for r1 on the branch dH/dr1 > alpha / 2.
/// Residual <= 1e-12, otherwise ShellSolveError.
double r1_on_shell(const Hamiltonian& H, const Vec2& theta, double r2, double e, double alpha = 0.0);

/// Closed-form unperturbed return map
/// (theta2, r2) -> (theta2 + (cR + 2 b r2) / (2aR + c r2), r2), R = R1(r2).
SectionPoint analytic_return_map(const QuadraticForm& h, const SectionPoint& p, double e = 1.0);
/// One unit revolution of theta1 takes 1 / (2aR + c r2).
double analytic_return_time(const QuadraticForm& h, double r2, double e = 1.0);

/// dwp1/dr2 = (4ab - c^2)(R - R' r2) / (2aR + c r2)^2 with R' = -(2b r2 + cR)/(2aR + c r2).
double twist_derivative_closed(const QuadraticForm& h, double r2, double e = 1.0);

struct ReturnOptions {
    double step = 1e-3;
};

/// Lift p onto the shell, follow the flow through one full revolution of
/// theta1 and project back. DomainExitError if dtheta1/dt <= alpha / 2.
ReturnSample numeric_return_map(const Hamiltonian& H, const SectionDomain& dom,
                                const SectionPoint& p, const ReturnOptions& options = {});

/// Lifted state of a section point on the shell.
Vec4 lift_to_shell(const Hamiltonian& H, const SectionDomain& dom, const SectionPoint& p);

struct TwistEntry {
    SectionPoint point;
    /// Richardson-extrapolated central difference of the image angle in r2.
    double twist_fd = 0.0;
    /// |difference between the delta and delta/2 central differences|
    double richardson_gap = 0.0;
    /// Unperturbed closed form, when H is a near-integrable Hamiltonian.
    std::optional<double> twist_closed;
};

struct TwistReport {
    std::vector<TwistEntry> grid;
    double min_twist = 0.0;
};

TwistReport twist_report(const Hamiltonian& H, const SectionDomain& dom,
                         const std::vector<SectionPoint>& grid, double delta = 1e-4,
                         const ReturnOptions& options = {});

/// n1 x n2 grid of section points: theta2 = i / n1, r2 spanning the window
/// with `inset` removed at both ends.
std::vector<SectionPoint> section_grid(const SectionDomain& dom, int n_theta, int n_r,
                                       double inset = 0.0);

/// Iterate the numeric return map.
std::vector<ReturnSample> iterate_return_map(const Hamiltonian& H, const SectionDomain& dom,
                                             const SectionPoint& p, std::size_t count,
                                             const ReturnOptions& options = {});

struct GraphTestOptions {
    int bins = 128;
    double min_coverage = 0.9;
    /// Spread tolerance as a fraction of `window_width`.
    double relative_tolerance = 1e-3;
    double window_width = 1.0;
};

struct GraphTestResult {
    bool essential = false;
    bool graph = false;
    double lipschitz = 0.0;
    double max_residual = 0.0;
    int winding = 0;
    double coverage = 0.0;
};

/// Birkhoff-style graph test for a sampled invariant circle of the section.
GraphTestResult birkhoff_graph_test(const std::vector<SectionPoint>& circle,
                                    const GraphTestOptions& options = {});

/// Shoelace area of the polygon with the given (lifted) corners.
double shoelace_area(const std::vector<Vec2>& corners);

} // namespace toruslab
