#pragma once

// Dynamical metrics, covering numbers G_t(eps) and polynomial-entropy slopes.

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "toruslab/phase.hpp"

namespace toruslab {

/// max(Euclidean distance on the flat torus, Euclidean distance of actions)
double phase_distance(const PhaseState& x, const PhaseState& y);

/// Dynamical distance: max of phase_distance(phi_s x, phi_s y) over
/// s in {0, Delta, 2 Delta, ..., t} (t itself is always included).
double dyn_dist(const Hamiltonian& H, const PhaseState& x, const PhaseState& y, double t,
                double Delta, double step = 1e-2);

/// Grid net on an energy level: theta1 x theta2 x section parameter psi.
/// Actions are r = s (cos psi, sin psi) with s solved from H = energy when
/// project_to_shell is set, and s = radius otherwise.
/// An angle window of width >= 1 is the whole circle (n samples at i / n);
/// a narrower window is sampled at both ends, centered on theta_center.
struct NetSpec {
    int n1 = 100;
    int n2 = 100;
    int n_param = 40;
    double theta1_center = 0.0;
    double theta1_width = 1.0;
    double theta2_center = 0.0;
    double theta2_width = 1.0;
    double psi_center = std::numbers::pi / 2;
    double psi_width = 0.006;
    double energy = 1.0;
    bool project_to_shell = true;
    double radius = 1.0;
    /// Only "max-torus-action" is supported.
    std::string distance = "max-torus-action";
    std::size_t budget = 20000;

    /// Angle of sample i along axis (0 or 1).
    double theta_value(int axis, int i) const;
    /// Spacing of the angle grid along axis.
    double theta_spacing(int axis) const;
    bool theta_periodic(int axis) const { return (axis == 0 ? theta1_width : theta2_width) >= 1.0; }

    std::size_t cardinality() const
    {
        return std::size_t(n1) * std::size_t(n2) * std::size_t(n_param);
    }
    /// Validates the fields; DomainError on bad values, ResourceError over budget.
    void validate() const;
};

/// Net points, index order (theta1, theta2, psi) with psi fastest.
std::vector<PhaseState> net_points(const Hamiltonian& H, const NetSpec& net);

/// Diameter of the net in the phase distance.
double net_diameter(const Hamiltonian& H, const NetSpec& net);

struct CoverOptions {
    /// Integration step for the snapshots (a divisor of Delta is used).
    double step = 0.05;
    unsigned workers = 1;
    /// Upper bound on snapshot storage.
    std::size_t memory_limit = std::size_t(4) << 30;
};

/// Orbits of the whole net sampled on the Delta-grid of [0, t_max].
class NetSnapshots {
public:
    NetSnapshots(const Hamiltonian& H, const NetSpec& net, double t_max, double Delta,
                 const CoverOptions& options = {});

    std::size_t size() const { return n_points_; }
    std::size_t snapshot_count() const { return n_snap_; }
    double Delta() const { return Delta_; }
    const NetSpec& net() const { return net_; }
    /// True when every orbit is a theta2-translate of a stored base orbit.
    bool translation_reduced() const { return reduced_; }

    /// Greedy cover count at time t (rounded to the Delta-grid) and radius eps.
    std::size_t greedy_cover(double t, double eps) const;

private:
    bool within(std::size_t a, std::size_t b, std::size_t s, double eps2) const;

    NetSpec net_;
    double Delta_;
    std::size_t n_points_, n_snap_, n_base_;
    bool reduced_;
    std::vector<float> data_; // (base, snapshot, 4)
    std::vector<double> r_at0_;
};

/// Greedy covering number of the net at (t, eps).
std::size_t covering_count(const Hamiltonian& H, const NetSpec& net, double t, double eps,
                           double Delta, const CoverOptions& options = {});

struct CoverTable {
    std::vector<double> epsilons; // decreasing
    std::vector<double> times;    // increasing
    /// G[i][j] for times[i], epsilons[j].
    std::vector<std::vector<std::uint64_t>> G;
    /// Greedy counts before taking the minimum over covers valid for a cell.
    std::vector<std::vector<std::uint64_t>> greedy;
};

/// `count` times log-spaced on [t_min, t_max], rounded to the Delta-grid.
std::vector<double> log_times(double t_min, double t_max, int count, double Delta);

/// Covering table. Each entry is the smallest greedy cover found among covers
/// valid for that cell (those computed at a later time or a smaller radius).
CoverTable cover_table(const Hamiltonian& H, const NetSpec& net, const std::vector<double>& times,
                       const std::vector<double>& epsilons, double Delta,
                       const CoverOptions& options = {});

/// The ladder {0.2, 0.1, 0.05, 0.025} * diameter.
std::vector<double> epsilon_ladder(double diameter);

struct SlopeFit {
    double epsilon = 0.0;
    double slope = 0.0;
    double r2 = 1.0;
};

struct HpolEstimate {
    double slope = 0.0;
    double t_min = 0.0, t_max = 0.0;
    double epsilon_used = 0.0;
    double r2_fit = 1.0;
    std::vector<SlopeFit> ladder;
};

/// Least-squares slope of log G against log t inside [t_min, t_max] per eps;
/// picks the smallest eps whose slope is within 0.1 of the next larger eps.
/// InstabilityError (with the slopes) when no eps qualifies.
HpolEstimate hpol_estimate(const CoverTable& table, double t_min, double t_max);

/// Maximal rank of the second fundamental form of the level curve h = e
/// (1 for every positive-definite quadratic). DomainError for e <= 0.
int hpol_action_angle(const QuadraticForm& h, double e);

/// Single-action analogue: the level set is a point, value 0 by convention.
int hpol_action_angle_single(double a, double e);

} // namespace toruslab
