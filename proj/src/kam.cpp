#include "toruslab/kam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "toruslab/parallel.hpp"

namespace toruslab {

DiophantineReport diophantine_margin(const Vec2& omega, double tau, std::int64_t K)
{
    if (!omega.allFinite() || omega.isZero(0.0))
        throw DomainError("diophantine_margin: omega must be finite and nonzero");
    if (K < 1)
        throw DomainError("diophantine_margin: K must be >= 1");
    if (!(tau >= 0.0))
        throw DomainError("diophantine_margin: tau must be >= 0");

    std::vector<double> weight(static_cast<std::size_t>(K) + 1);
    for (std::int64_t m = 0; m <= K; ++m)
        weight[m] = std::pow(double(m), tau);

    DiophantineReport rep;
    rep.tau = tau;
    rep.K = K;
    rep.gamma_est = std::numeric_limits<double>::infinity();
    const double w1 = omega[0], w2 = omega[1];
    for (std::int64_t k1 = 0; k1 <= K; ++k1) {
        const double base = double(k1) * w1;
        for (std::int64_t k2 = (k1 == 0 ? 1 : -K); k2 <= K; ++k2) {
            const std::int64_t norm = std::max(k1, k2 < 0 ? -k2 : k2);
            const double v = std::abs(base + double(k2) * w2) * weight[norm];
            if (v < rep.gamma_est) {
                rep.gamma_est = v;
                rep.argmin_k = {k1, k2};
            }
        }
    }
    return rep;
}

std::vector<IntVec2> resonance_module(const Vec2& omega, std::int64_t K, double tol)
{
    if (!omega.allFinite() || omega.isZero(0.0))
        throw DomainError("resonance_module: omega must be finite and nonzero");
    if (K < 1)
        throw DomainError("resonance_module: K must be >= 1");
    std::vector<IntVec2> out;
    for (std::int64_t k1 = -K; k1 <= K; ++k1)
        for (std::int64_t k2 = -K; k2 <= K; ++k2) {
            if (k1 == 0 && k2 == 0)
                continue;
            if (std::abs(double(k1) * omega[0] + double(k2) * omega[1]) <= tol)
                out.push_back({k1, k2});
        }
    return out;
}

IsoenergeticResult isoenergetic_check(const QuadraticForm& h, double e)
{
    if (!(e > 0.0))
        throw DomainError("isoenergetic_check: e must be positive");
    const Mat2 Q = h.hessian();
    IsoenergeticResult res;
    res.min_transversality = std::numeric_limits<double>::infinity();
    bool nonzero = true;
    constexpr int samples = 720;
    for (int i = 0; i < samples; ++i) {
        const double phi = kTwoPi * i / samples;
        const Vec2 u(std::cos(phi), std::sin(phi));
        const double s = std::sqrt(e / h(u));
        const Vec2 r = s * u;
        const Vec2 omega = Q * r;
        // tangent of the level curve at r, pushed forward by the frequency map
        const Vec2 g = h.gradient(r);
        const Vec2 dw = Q * Vec2(-g[1], g[0]);
        const double n = dw.norm();
        if (omega.norm() == 0.0 || n == 0.0) {
            nonzero = false;
            res.min_transversality = 0.0;
            continue;
        }
        const double det = omega[0] * dw[1] - omega[1] * dw[0];
        res.min_transversality = std::min(res.min_transversality, std::abs(det) / n);
    }
    res.ok = nonzero && res.min_transversality > 1e-8;
    return res;
}

std::string DomainTag::label() const
{
    if (boundary())
        return "boundary";
    std::string s = "D";
    s += sign1 > 0 ? '+' : '-';
    s += sign2 > 0 ? '+' : '-';
    return s;
}

DomainTag domain_tag(const QuadraticForm& h, const Vec2& r)
{
    if (!r.allFinite())
        throw DomainError("domain_tag: non-finite action");
    const Vec2 g = h.gradient(r);
    auto sign = [](double v) { return std::abs(v) < 1e-10 ? 0 : (v > 0.0 ? 1 : -1); };
    return {sign(g[0]), sign(g[1])};
}

std::string to_string(TorusVerdict v)
{
    switch (v) {
    case TorusVerdict::graph:
        return "graph";
    case TorusVerdict::not_graph:
        return "not-graph";
    case TorusVerdict::insufficient:
        return "insufficient";
    }
    return "insufficient";
}

double default_graph_tolerance(double epsilon)
{
    return 10.0 * std::sqrt(std::max(0.0, epsilon)) + 1e-8;
}

TorusFit fit_invariant_torus(const Trajectory& orbit, int bins, double tolerance)
{
    if (bins < 1)
        throw DomainError("fit_invariant_torus: bins must be >= 1");
    if (!(tolerance >= 0.0))
        throw DomainError("fit_invariant_torus: tolerance must be >= 0");
    const std::size_t cells = std::size_t(bins) * bins;
    std::vector<std::vector<double>> r1(cells), r2(cells);
    auto cell_of = [&](double x) {
        return std::clamp(static_cast<int>(std::floor(wrap_unit(x) * bins)), 0, bins - 1);
    };
    for (const auto& s : orbit.samples) {
        const std::size_t c = std::size_t(cell_of(s.x.theta[0])) * bins + cell_of(s.x.theta[1]);
        r1[c].push_back(s.x.r[0]);
        r2[c].push_back(s.x.r[1]);
    }

    TorusFit fit;
    fit.bins = bins;
    fit.tolerance = tolerance;
    fit.median.assign(cells, Vec2::Constant(std::numeric_limits<double>::quiet_NaN()));
    fit.counts.assign(cells, 0);
    std::size_t occupied = 0;
    for (std::size_t c = 0; c < cells; ++c) {
        if (r1[c].empty())
            continue;
        ++occupied;
        fit.counts[c] = static_cast<std::uint32_t>(r1[c].size());
        auto med = [](std::vector<double>& v) {
            std::sort(v.begin(), v.end());
            return std::pair<double, double>(v[v.size() / 2], v.back() - v.front());
        };
        const auto [m1, s1] = med(r1[c]);
        const auto [m2, s2] = med(r2[c]);
        fit.median[c] = Vec2(m1, m2);
        fit.max_residual = std::max({fit.max_residual, s1, s2});
    }
    fit.coverage = double(occupied) / double(cells);

    const double width = 1.0 / bins;
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j) {
            const Vec2& a = fit.median[std::size_t(i) * bins + j];
            if (std::isnan(a[0]))
                continue;
            const Vec2& b = fit.median[std::size_t((i + 1) % bins) * bins + j];
            const Vec2& c = fit.median[std::size_t(i) * bins + (j + 1) % bins];
            if (!std::isnan(b[0]))
                fit.lipschitz = std::max(fit.lipschitz, (a - b).cwiseAbs().maxCoeff() / width);
            if (!std::isnan(c[0]))
                fit.lipschitz = std::max(fit.lipschitz, (a - c).cwiseAbs().maxCoeff() / width);
        }

    if (fit.coverage < 0.9)
        fit.verdict = TorusVerdict::insufficient;
    else
        fit.verdict = fit.max_residual < tolerance ? TorusVerdict::graph : TorusVerdict::not_graph;
    return fit;
}

Vec2 torus_action(const QuadraticForm& h, const Vec2& direction, double e)
{
    if (!(e > 0.0))
        throw DomainError("torus_action: e must be positive");
    if (!direction.allFinite() || direction.isZero(0.0))
        throw DomainError("torus_action: direction must be finite and nonzero");
    const Vec2 v = h.hessian().inverse() * direction;
    return std::sqrt(e / h(v)) * v;
}

namespace {

// r0 rescaled so that H(theta, lambda r0) = e.
Vec2 seed_on_shell(const Hamiltonian& H, const Vec2& theta, const Vec2& r0, double e)
{
    double lambda = 1.0;
    for (int it = 0; it < 100; ++it) {
        const Vec2 r = lambda * r0;
        const double f = H.value(theta, r) - e;
        const double df = H.gradient(theta, r).tail<2>().dot(r0);
        if (!(df > 0.0))
            throw ShellSolveError("kam_survival_scan: cannot seed on the energy shell");
        const double d = f / df;
        lambda -= d;
        if (std::abs(d) <= 1e-16)
            break;
    }
    const Vec2 r = lambda * r0;
    if (std::abs(H.value(theta, r) - e) > 1e-12 * std::max(1.0, e))
        throw ShellSolveError("kam_survival_scan: shell seeding did not converge");
    return r;
}

} // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw DomainError("loglog_slope: need two or more paired values");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw DomainError("loglog_slope: values must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

KamScan kam_survival_scan(const NearIntegrableHamiltonian& H, const std::vector<Vec2>& directions,
                          const std::vector<double>& epsilons, const KamScanOptions& options)
{
    for (double e : epsilons)
        if (!(e >= 0.0) || !std::isfinite(e))
            throw DomainError("kam_survival_scan: epsilons must be finite and >= 0");
    const std::size_t ne = epsilons.size();
    KamScan scan;
    scan.rows.resize(directions.size() * ne);

    std::vector<bool> certified(directions.size());
    for (std::size_t d = 0; d < directions.size(); ++d)
        certified[d] = diophantine_margin(directions[d], options.tau, options.K).gamma_est >= options.min_margin;

    parallel_for(scan.rows.size(), options.workers, [&](std::size_t idx) {
        const std::size_t d = idx / ne;
        KamScanRow& row = scan.rows[idx];
        row.direction = directions[d];
        row.epsilon = epsilons[idx % ne];
        const Vec2 r0 = torus_action(H.core(), directions[d], options.energy);
        row.omega = frequency(H.core(), r0);
        if (!certified[d]) {
            row.skipped = true;
            return;
        }
        const auto He = H.with_epsilon(row.epsilon);
        const PhaseState x0(Vec2::Zero(), seed_on_shell(He, Vec2::Zero(), r0, options.energy));
        const Trajectory traj = integrate(He, x0, options.duration, options.step);
        row.fit = fit_invariant_torus(traj, options.bins, default_graph_tolerance(row.epsilon));
        Vec2 lo = x0.r, hi = x0.r;
        for (const auto& s : traj.samples) {
            row.max_deviation = std::max(row.max_deviation, (s.x.r - r0).cwiseAbs().maxCoeff());
            lo = lo.cwiseMin(s.x.r);
            hi = hi.cwiseMax(s.x.r);
        }
        row.r_range = (hi - lo).maxCoeff();
        row.energy_drift = traj.energy_drift;
        row.energy_pinned = row.energy_drift <= options.drift_bound;
    });

    for (std::size_t d = 0; d < directions.size(); ++d) {
        double delta = 0.0, low = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < ne; ++j) {
            const auto& row = scan.rows[d * ne + j];
            if (row.skipped || !(row.epsilon > 0.0))
                continue;
            const double dj = row.r_range / std::sqrt(row.epsilon);
            delta = std::max(delta, dj);
            low = std::min(low, dj);
        }
        scan.delta.push_back(delta);
        scan.confined_within_factor2.push_back(delta > 0.0 && low >= 0.5 * delta);
    }
    return scan;
}

} // namespace toruslab
