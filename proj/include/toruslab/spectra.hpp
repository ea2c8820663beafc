#pragma once

// Periodic orbits: Newton refinement, monodromy and Floquet multipliers,
// elliptic/hyperbolic classification, Jacobi-field conjugate points, and a
// section-map driven search for nondegenerate orbits.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "toruslab/flow.hpp"
#include "toruslab/phase.hpp"
#include "toruslab/section.hpp"

namespace toruslab {

struct PeriodicOrbit {
    PhaseState x0;
    double period = 0.0;
    /// |phi_T(x0) - x0| in phase distance (max of torus and action distance).
    double residual = 0.0;
    /// Integer angle shift phi_T(x0) - x0 of the lifted orbit.
    Vec2 winding = Vec2::Zero();
    /// Step used during refinement; floquet() integrates with the same one.
    double step = 1e-3;
};

enum class OrbitClass { elliptic, hyperbolic, parabolic };

std::string to_string(OrbitClass c);

struct FloquetReport {
    std::complex<double> lambda1, lambda2;
    /// max |lambda - 1| over the two 4x4 eigenvalues closest to 1.
    double trivial_pair_error = 0.0;
    OrbitClass cls = OrbitClass::parabolic;
    /// Unwrapped rotation angle of the transverse linearization (elliptic only).
    std::optional<double> rotation_angle;
    double determinant = 1.0;
    /// "index 0/2", "index 1" or "degenerate".
    std::string bott_label;
    Mat4 monodromy = Mat4::Identity();
    /// Monodromy restricted to the symplectic complement of the flow plane.
    Mat2 reduced = Mat2::Identity();
};

struct RefineOptions {
    double step = 1e-3;
    int max_iter = 50;
    double tolerance = 1e-9;
    /// Guesses with a larger initial residual are rejected.
    double basin = 0.1;
};

/// Gauss-Newton on (x, T) for phi_T(x) - x = winding, with a phase condition
/// along the flow and the energy of the guess held fixed.
/// NoOrbitError on divergence or a guess outside the basin.
PeriodicOrbit refine_periodic(const Hamiltonian& H, const PhaseState& guess_x0, double guess_T,
                              const RefineOptions& options = {});

/// Classification tolerance for |lambda| against 1.
inline constexpr double kFloquetTolerance = 1e-4;

/// DegenerateMonodromyError when the trivial pair is off by more than 1e-2.
FloquetReport floquet(const Hamiltonian& H, const PeriodicOrbit& orbit);

struct JacobiOptions {
    double ds = 1e-3;
    /// Relative energy variation tolerated along the input trajectory.
    double energy_tolerance = 1e-6;
};

/// Zeros in (0, L] of the solution of y'' + K(gamma(s)) y = 0, y(0) = 0,
/// y'(0) = 1 along an arclength-resampled geodesic.
std::vector<double> jacobi_conjugate_scan(const MetricField& g, const Trajectory& geodesic, double L,
                                          const JacobiOptions& options = {});

struct SearchOptions {
    int max_period = 4;
    /// Step of the section-map evaluations inside the search.
    double map_step = 1e-3;
    int newton_iterations = 30;
    double newton_tolerance = 1e-10;
    double dedupe_distance = 1e-6;
    /// Run the search on the view that swaps the two degrees of freedom; orbits
    /// are reported in the original coordinates.
    bool swap_axes = false;
    RefineOptions refine;
    unsigned workers = 1;
};

struct ClassifiedOrbit {
    PeriodicOrbit orbit;
    FloquetReport report;
    int section_period = 1;
    SectionPoint section_point;
};

/// Fixed points of iterates 1..max_period of the numeric return map, refined
/// to periodic orbits, deduplicated and classified. Ordered by section period,
/// then by seed index.
std::vector<ClassifiedOrbit> hyperbolic_search(const Hamiltonian& H, const SectionDomain& dom,
                                               const std::vector<SectionPoint>& seeds,
                                               const SearchOptions& options = {});

} // namespace toruslab
