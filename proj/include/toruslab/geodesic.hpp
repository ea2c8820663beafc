#pragma once

// Metric families on T^2 and the classification pipeline
// (graph evidence, conjugate points, hyperbolic orbits).

#include <string>
#include <vector>

#include "toruslab/phase.hpp"
#include "toruslab/section.hpp"
#include "toruslab/spectra.hpp"

namespace toruslab {

enum class MetricKind { flat, conformal, revolution };

std::string to_string(MetricKind k);

struct MetricSpec {
    MetricKind kind = MetricKind::flat;
    /// flat: g11 = a, g12 = c / 2, g22 = b
    double a = 1.0, b = 1.0, c = 0.0;
    /// conformal: g = exp(2 amplitude u) I with u a finite Fourier series
    std::vector<FourierMode> u;
    double amplitude = 0.0;
    /// revolution: g11 = (2 pi rho)^2, g22 = (2 pi)^2 (R0 + rho cos 2 pi theta1)^2
    double R0 = 2.0, rho = 1.0;
};

class MetricFamily {
public:
    static MetricFamily flat(double a, double b, double c);
    static MetricFamily conformal(std::vector<FourierMode> u, double amplitude);
    static MetricFamily revolution(double R0, double rho);

    const MetricSpec& spec() const { return spec_; }
    MetricKind kind() const { return spec_.kind; }
    const MetricField& realized() const { return field_; }

private:
    MetricFamily(MetricSpec spec, MetricField field);

    MetricSpec spec_;
    MetricField field_;
};

/// ConstructionError on invalid parameters or a non-positive realized metric.
MetricFamily build_metric(const MetricSpec& spec);

/// Angular momentum p2 of a revolution metric; TypeError for other kinds.
double clairaut_integral(const MetricFamily& family, const PhaseState& x);

/// Initial state on {H = e} heading along `direction`: for geodesic flows the
/// velocity is parallel to `direction`; otherwise r is a multiple of it.
PhaseState shell_state(const Hamiltonian& H, const Vec2& theta, const Vec2& direction, double e);

/// Directions with badly approximable slopes, used by the graph ensemble.
std::vector<Vec2> diophantine_directions(int count);

struct AssessOptions {
    double energy = 1.0;
    double step = 5e-3;

    int graph_orbits = 8;
    double graph_duration = 200.0;
    int bins = 64;
    double graph_tolerance = 1e-3;

    int jacobi_geodesics = 8;
    double jacobi_length = 200.0;
    double jacobi_ds = 1e-2;

    /// Section {theta_s = section_angle} where theta_s is theta2 when
    /// swap_axes is set, theta1 otherwise; window bounds the other action.
    bool swap_axes = true;
    double section_angle = 0.0;
    Interval window{-0.5, 0.5};
    double alpha = 0.05;
    int seed_theta = 4;
    int seed_r = 3;
    SearchOptions search;

    unsigned workers = 1;
};

struct SystemVerdict {
    double graph_fraction = 0.0;
    bool has_graph_foliation_evidence = false;
    bool has_conjugate_points = false;
    /// First conjugate arclength per scanned geodesic (empty entries omitted).
    std::vector<double> conjugate_points;
    std::vector<ClassifiedOrbit> hyperbolic_orbits;
    std::size_t periodic_orbits_found = 0;
    int hpol_class = 1;
    std::vector<std::string> notes;
};

/// Runs (i) the graph ensemble, (ii) the Jacobi scan when `metric` is given
/// and (iii) hyperbolic_search, then applies the classification rule:
/// 2 iff a hyperbolic orbit was found, 0 iff the flow is frozen, else 1.
SystemVerdict assess_system(const Hamiltonian& H, const AssessOptions& options,
                            const MetricField* metric = nullptr);

/// Section window and transversality bound adapted to a metric: the window
/// covers |p1| <= 0.5 sqrt(min g11) on the section theta2 = const.
void adapt_section(const MetricField& g, AssessOptions& options);

SystemVerdict theorem_a_pipeline(const MetricFamily& family, AssessOptions budget = {});

} // namespace toruslab
