#include "toruslab/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "toruslab/kam.hpp"
#include "toruslab/parallel.hpp"

namespace toruslab {

std::string to_string(MetricKind k)
{
    switch (k) {
    case MetricKind::flat:
        return "flat";
    case MetricKind::conformal:
        return "conformal";
    case MetricKind::revolution:
        return "revolution";
    }
    return "flat";
}

MetricFamily::MetricFamily(MetricSpec spec, MetricField field)
    : spec_(std::move(spec)), field_(std::move(field))
{
}

MetricFamily MetricFamily::flat(double a, double b, double c)
{
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
        throw ConstructionError("flat metric: non-finite coefficient");
    if (!(a > 0.0) || !(4.0 * a * b - c * c > 0.0))
        throw ConstructionError("flat metric: coefficients are not positive definite");
    MetricSpec spec;
    spec.kind = MetricKind::flat;
    spec.a = a;
    spec.b = b;
    spec.c = c;
    return MetricFamily(spec, MetricField(ScalarField::constant(a), ScalarField::constant(0.5 * c),
                                          ScalarField::constant(b)));
}

MetricFamily MetricFamily::conformal(std::vector<FourierMode> u, double amplitude)
{
    if (!std::isfinite(amplitude))
        throw ConstructionError("conformal metric: non-finite amplitude");
    MetricSpec spec;
    spec.kind = MetricKind::conformal;
    spec.u = u;
    spec.amplitude = amplitude;
    if (amplitude == 0.0) {
        // exactly the identity metric, field for field
        return MetricFamily(spec, MetricField(ScalarField::constant(1.0), ScalarField::constant(0.0),
                                              ScalarField::constant(1.0)));
    }
    const auto factor = ScalarField::exponential(u, 2.0 * amplitude);
    return MetricFamily(spec, MetricField(factor, ScalarField::constant(0.0), factor));
}

MetricFamily MetricFamily::revolution(double R0, double rho)
{
    if (!std::isfinite(R0) || !std::isfinite(rho) || !(rho > 0.0) || !(rho < R0))
        throw ConstructionError("revolution metric: need 0 < rho < R0");
    MetricSpec spec;
    spec.kind = MetricKind::revolution;
    spec.R0 = R0;
    spec.rho = rho;
    const double s = kTwoPi * kTwoPi;
    // (R0 + rho cos x)^2 = R0^2 + rho^2 / 2 + 2 R0 rho cos x + rho^2 / 2 cos 2x
    auto g22 = ScalarField::fourier({FourierMode{{0, 0}, s * (R0 * R0 + 0.5 * rho * rho), 0.0},
                                     FourierMode{{1, 0}, s * 2.0 * R0 * rho, 0.0},
                                     FourierMode{{2, 0}, s * 0.5 * rho * rho, 0.0}});
    return MetricFamily(spec, MetricField(ScalarField::constant(s * rho * rho),
                                          ScalarField::constant(0.0), std::move(g22)));
}

MetricFamily build_metric(const MetricSpec& spec)
{
    switch (spec.kind) {
    case MetricKind::flat:
        return MetricFamily::flat(spec.a, spec.b, spec.c);
    case MetricKind::conformal:
        return MetricFamily::conformal(spec.u, spec.amplitude);
    case MetricKind::revolution:
        return MetricFamily::revolution(spec.R0, spec.rho);
    }
    throw ConstructionError("build_metric: unknown kind");
}

double clairaut_integral(const MetricFamily& family, const PhaseState& x)
{
    if (family.kind() != MetricKind::revolution)
        throw TypeError("clairaut_integral: needs a revolution metric, got " + to_string(family.kind()));
    if (!x.r.allFinite())
        throw DomainError("clairaut_integral: non-finite state");
    return x.r[1];
}

PhaseState shell_state(const Hamiltonian& H, const Vec2& theta, const Vec2& direction, double e)
{
    if (!(e > 0.0))
        throw DomainError("shell_state: energy must be positive");
    if (direction.isZero(0.0) || !direction.allFinite())
        throw DomainError("shell_state: direction must be finite and nonzero");
    Vec2 ray = direction;
    if (const auto* geo = dynamic_cast<const GeodesicHamiltonian*>(&H))
        ray = geo->metric().matrix(theta) * direction;
    double s = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double f = H.value(theta, s * ray) - e;
        const double df = H.gradient(theta, s * ray).tail<2>().dot(ray);
        if (!(df > 0.0))
            throw ShellSolveError("shell_state: energy level not reached along the direction");
        const double ds = f / df;
        s = std::max(0.5 * s, s - ds);
        if (std::abs(ds) <= 1e-15 * std::max(1.0, s))
            return PhaseState(theta, s * ray);
    }
    throw ShellSolveError("shell_state: Newton iteration did not converge");
}

std::vector<Vec2> diophantine_directions(int count)
{
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    const double s2 = std::sqrt(2.0), s3 = 1.0 + std::sqrt(3.0);
    const std::vector<Vec2> base{{1.0, phi}, {-1.0, phi}, {phi, 1.0}, {phi, -1.0},
                                 {1.0, s2},  {-1.0, s2},  {s2, 1.0},  {s2, -1.0},
                                 {1.0, s3},  {-1.0, s3},  {s3, 1.0},  {s3, -1.0}};
    std::vector<Vec2> out;
    for (int i = 0; i < count; ++i)
        out.push_back(base[i % base.size()] * (1.0 + i / int(base.size())));
    return out;
}

namespace {

bool frozen(const Hamiltonian& H)
{
    if (dynamic_cast<const ConstantHamiltonian*>(&H))
        return true;
    for (int i = 0; i < 64; ++i) {
        const Vec2 th(std::fmod(0.618034 * i, 1.0), std::fmod(0.754878 * i + 0.3, 1.0));
        const Vec2 r(std::fmod(0.569840 * i, 1.0) * 2.0 - 1.0, std::fmod(0.324718 * i + 0.5, 1.0) * 2.0 - 1.0);
        if (!H.gradient(th, r).isZero(0.0))
            return false;
    }
    return true;
}

} // namespace

SystemVerdict assess_system(const Hamiltonian& H, const AssessOptions& options, const MetricField* metric)
{
    SystemVerdict v;
    if (frozen(H)) {
        v.hpol_class = 0;
        v.notes.push_back("frozen flow: the Hamiltonian is constant, every orbit is an equilibrium");
        return v;
    }

    // (i) graph ensemble along badly approximable directions
    const auto dirs = diophantine_directions(options.graph_orbits);
    std::vector<int> graph_ok(dirs.size(), 0);
    std::vector<std::string> graph_notes(dirs.size());
    parallel_for(dirs.size(), options.workers, [&](std::size_t i) {
        try {
            const auto x0 = shell_state(H, Vec2::Zero(), dirs[i], options.energy);
            const auto traj = integrate(H, x0, options.graph_duration, options.step);
            const auto fit = fit_invariant_torus(traj, options.bins, options.graph_tolerance);
            graph_ok[i] = fit.verdict == TorusVerdict::graph;
            if (fit.verdict != TorusVerdict::graph) {
                std::ostringstream msg;
                msg << "graph ensemble orbit " << i << ": " << to_string(fit.verdict)
                    << " (coverage " << fit.coverage << ", spread " << fit.max_residual << ")";
                graph_notes[i] = msg.str();
            }
        } catch (const Error& e) {
            graph_notes[i] = std::string("graph ensemble orbit inconclusive: ") + e.what();
        }
    });
    int passed = 0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        passed += graph_ok[i];
        if (!graph_notes[i].empty())
            v.notes.push_back(graph_notes[i]);
    }
    v.graph_fraction = dirs.empty() ? 0.0 : double(passed) / dirs.size();
    v.has_graph_foliation_evidence = !dirs.empty() && passed == int(dirs.size());

    // (ii) Jacobi fields along geodesics in evenly spaced directions
    if (metric) {
        const GeodesicHamiltonian G(*metric);
        const int n = options.jacobi_geodesics;
        std::vector<std::vector<double>> zeros(n);
        std::vector<std::string> jac_notes(n);
        parallel_for(std::size_t(n), options.workers, [&](std::size_t i) {
            try {
                const double psi = kTwoPi * double(i) / n;
                const Vec2 d(std::cos(psi), std::sin(psi));
                const auto x0 = shell_state(G, Vec2::Zero(), d, options.energy);
                const double T = options.jacobi_length / (2.0 * std::sqrt(options.energy));
                const auto traj = integrate(G, x0, T * (1.0 + 1e-9) + options.step, options.step);
                JacobiOptions jo;
                jo.ds = options.jacobi_ds;
                zeros[i] = jacobi_conjugate_scan(*metric, traj, options.jacobi_length, jo);
            } catch (const Error& e) {
                jac_notes[i] = std::string("Jacobi scan inconclusive: ") + e.what();
            }
        });
        for (int i = 0; i < n; ++i) {
            if (!zeros[i].empty())
                v.conjugate_points.push_back(zeros[i].front());
            if (!jac_notes[i].empty())
                v.notes.push_back(jac_notes[i]);
        }
        v.has_conjugate_points = !v.conjugate_points.empty();
    } else {
        v.notes.push_back("not a geodesic flow: conjugate-point scan skipped");
    }

    // (iii) nondegenerate periodic orbits from section fixed points
    try {
        const AxisView view(H, options.swap_axes);
        const Hamiltonian& V = options.swap_axes ? static_cast<const Hamiltonian&>(view) : H;
        const auto dom = SectionDomain::create(V, options.section_angle, options.energy, options.alpha,
                                               options.window);
        std::vector<SectionPoint> seeds;
        for (int i = 0; i < options.seed_theta; ++i)
            for (int j = 0; j < options.seed_r; ++j) {
                const double mid = 0.5 * (options.window.lo + options.window.hi);
                const double r = options.seed_r == 1
                                     ? mid
                                     : mid + 0.5 * options.window.width() * (double(j) / (options.seed_r - 1) - 0.5);
                seeds.emplace_back(double(i) / options.seed_theta, r);
            }
        SearchOptions so = options.search;
        so.swap_axes = options.swap_axes;
        so.workers = options.workers;
        const auto orbits = hyperbolic_search(H, dom, seeds, so);
        v.periodic_orbits_found = orbits.size();
        for (const auto& o : orbits)
            if (o.report.cls == OrbitClass::hyperbolic)
                v.hyperbolic_orbits.push_back(o);
    } catch (const Error& e) {
        v.notes.push_back(std::string("hyperbolic search inconclusive: ") + e.what());
    }

    v.hpol_class = v.hyperbolic_orbits.empty() ? 1 : 2;
    return v;
}

void adapt_section(const MetricField& g, AssessOptions& options)
{
    double g11_min = std::numeric_limits<double>::infinity();
    constexpr int n = 64;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g11_min = std::min(g11_min, g.g11().value(Vec2(double(i) / n, double(j) / n)));
    const double w = 0.5 * std::sqrt(options.energy * g11_min);
    options.swap_axes = true;
    options.window = Interval{-w, w};

    // half the slowest theta2 speed over the window edges and center
    const GeodesicHamiltonian G(g);
    const AxisView view(G, true);
    double slowest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 33; ++i)
        for (double p1 : {-w, 0.0, w}) {
            const Vec2 th(options.section_angle, double(i) / 33);
            const double r1 = r1_on_shell(view, th, p1, options.energy);
            slowest = std::min(slowest, view.gradient(th, Vec2(r1, p1))[2]);
        }
    options.alpha = 0.5 * slowest;
}

SystemVerdict theorem_a_pipeline(const MetricFamily& family, AssessOptions budget)
{
    const GeodesicHamiltonian H(family.realized());
    adapt_section(family.realized(), budget);
    auto verdict = assess_system(H, budget, &family.realized());
    verdict.notes.insert(verdict.notes.begin(), "metric family: " + to_string(family.kind()));
    return verdict;
}

} // namespace toruslab
