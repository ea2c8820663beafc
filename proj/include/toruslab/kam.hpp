#pragma once

// Frequency arithmetic, isoenergetic nondegeneracy, domain tags and
// invariant-torus graph fits.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "toruslab/flow.hpp"
#include "toruslab/phase.hpp"

namespace toruslab {

using IntVec2 = std::array<std::int64_t, 2>;

struct DiophantineReport {
    double tau = 1.0;
    std::int64_t K = 1;
    /// min over 0 < |k|_inf <= K of |<k, omega>| * |k|_inf^tau
    double gamma_est = 0.0;
    IntVec2 argmin_k{0, 0};
};

/// Exhaustive scan over one representative of each pair {k, -k}
/// (k1 > 0, or k1 = 0 and k2 > 0), in increasing k1 then k2.
DiophantineReport diophantine_margin(const Vec2& omega, double tau, std::int64_t K);

/// Every k (both signs) with 0 < |k|_inf <= K and |<k, omega>| <= tol, sorted.
std::vector<IntVec2> resonance_module(const Vec2& omega, std::int64_t K, double tol);

struct IsoenergeticResult {
    bool ok = false;
    double min_transversality = 0.0;
};

/// Transversality of radial lines to the frequency curve omega(h^-1(e)),
/// sampled at 720 points. DomainError for e <= 0.
IsoenergeticResult isoenergetic_check(const QuadraticForm& h, double e);

/// Signs of (2a r1 + c r2, c r1 + 2b r2); a component below 1e-10 in
/// magnitude is a boundary.
struct DomainTag {
    int sign1 = 0;
    int sign2 = 0;

    bool boundary() const { return sign1 == 0 || sign2 == 0; }
    /// "D++", "D+-", "D-+", "D--" or "boundary"
    std::string label() const;
    bool operator==(const DomainTag&) const = default;
};

DomainTag domain_tag(const QuadraticForm& h, const Vec2& r);

enum class TorusVerdict { graph, not_graph, insufficient };

std::string to_string(TorusVerdict v);

struct TorusFit {
    int bins = 64;
    /// Per-cell median of (r1, r2), row-major in (theta1, theta2); NaN when empty.
    std::vector<Vec2> median;
    std::vector<std::uint32_t> counts;
    double coverage = 0.0;
    /// Largest within-cell spread of r1 or r2.
    double max_residual = 0.0;
    /// Largest |median difference| / cell width between adjacent occupied cells.
    double lipschitz = 0.0;
    double tolerance = 0.0;
    TorusVerdict verdict = TorusVerdict::insufficient;
};

/// 10 sqrt(eps) + 1e-8
double default_graph_tolerance(double epsilon);

/// Bins the samples of an orbit over a bins x bins grid of T^2.
/// graph iff coverage >= 0.9 and max_residual < tolerance.
TorusFit fit_invariant_torus(const Trajectory& orbit, int bins, double tolerance);

struct KamScanOptions {
    double energy = 1.0;
    double duration = 200.0;
    double step = 5e-3;
    int bins = 64;
    double tau = 1.0;
    std::int64_t K = 1000;
    /// Directions with a smaller Diophantine margin are skipped.
    double min_margin = 1e-3;
    /// Tolerated |H(x(t)) - H(x(0))| along each orbit.
    double drift_bound = 1e-8;
    unsigned workers = 1;
};

struct KamScanRow {
    Vec2 direction = Vec2::Zero();
    /// Frequency of the seeded unperturbed torus.
    Vec2 omega = Vec2::Zero();
    double epsilon = 0.0;
    bool skipped = false;
    TorusFit fit;
    /// max |r(t) - r0| over the orbit, r0 the unperturbed torus.
    double max_deviation = 0.0;
    /// max over components of (max r - min r) along the orbit.
    double r_range = 0.0;
    double energy_drift = 0.0;
    bool energy_pinned = false;
};

struct KamScan {
    std::vector<KamScanRow> rows;
    /// Per direction: delta = max r_range / sqrt(eps) over the ladder (eps > 0),
    /// and whether every r_range is at least delta sqrt(eps) / 2.
    std::vector<double> delta;
    std::vector<bool> confined_within_factor2;
};

/// Unperturbed torus on h = e whose frequency points along `direction`.
Vec2 torus_action(const QuadraticForm& h, const Vec2& direction, double e);

/// For each direction and eps: seed the unperturbed torus on the H_eps = e
/// shell, integrate, fit a graph and record deviation, range and drift.
KamScan kam_survival_scan(const NearIntegrableHamiltonian& H, const std::vector<Vec2>& directions,
                          const std::vector<double>& epsilons, const KamScanOptions& options = {});

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace toruslab
