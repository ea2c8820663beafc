#include "toruslab/section.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace toruslab {

SectionDomain::SectionDomain(double theta10, double energy, double alpha, Interval window)
    : theta10_(theta10), energy_(energy), alpha_(alpha), window_(window)
{
}

SectionDomain SectionDomain::create(const Hamiltonian& H, double theta10, double energy,
                                    double alpha, Interval window)
{
    if (!(alpha > 0.0))
        throw ConstructionError("SectionDomain: alpha must be positive");
    if (!(window.hi > window.lo))
        throw ConstructionError("SectionDomain: empty r2 window");
    constexpr int n_theta = 9, n_r = 33;
    for (int i = 0; i < n_theta; ++i)
        for (int j = 0; j < n_r; ++j) {
            const Vec2 theta(theta10, double(i) / n_theta);
            const double r2 = window.lo + window.width() * j / (n_r - 1);
            double r1 = 0.0;
            try {
                r1 = r1_on_shell(H, theta, r2, energy, alpha);
            } catch (const ShellSolveError& e) {
                throw ConstructionError(std::string("SectionDomain: window leaves the shell: ") +
                                        e.what());
            }
            const double speed = H.gradient(theta, Vec2(r1, r2))[2];
            if (!(speed > alpha)) {
                std::ostringstream msg;
                msg << "SectionDomain: dtheta1/dt = " << speed << " <= alpha at r2 = " << r2;
                throw ConstructionError(msg.str());
            }
        }
    return SectionDomain(theta10, energy, alpha, window);
}

double r1_on_shell(const Hamiltonian& H, const Vec2& theta, double r2, double e, double alpha)
{
    if (!theta.allFinite() || !std::isfinite(r2) || !std::isfinite(e))
        throw ShellSolveError("r1_on_shell: non-finite input");
    auto eval = [&](double r1, double& d1, double& d2) {
        const Vec2 r(r1, r2);
        d1 = H.gradient(theta, r)[2];
        d2 = H.hessian(theta, r)(2, 2);
        return H.value(theta, r) - e;
    };

    // Quadratic model in r1 around 0, exact for Hamiltonians quadratic in r.
    double d1 = 0.0, d2 = 0.0;
    const double f0 = eval(0.0, d1, d2);
    double r1 = 0.0;
    if (d2 > 0.0) {
        const double disc = d1 * d1 - 2.0 * d2 * f0;
        if (disc < 0.0)
            throw ShellSolveError("r1_on_shell: energy level not reached on this line");
        r1 = (-d1 + std::sqrt(disc)) / d2;
    } else if (d1 > 0.0) {
        r1 = -f0 / d1;
    } else {
        throw ShellSolveError("r1_on_shell: no increasing branch in r1");
    }

    const double tol = 1e-12 * std::max(1.0, std::abs(e));
    for (int it = 0; it < 60; ++it) {
        const double f = eval(r1, d1, d2);
        if (!(d1 > 0.5 * alpha) || !(d1 > 0.0))
            throw ShellSolveError("r1_on_shell: iterate left the positive-frequency branch");
        const double dr = f / d1;
        r1 -= dr;
        if (std::abs(f) <= tol || std::abs(dr) <= 1e-15 * std::max(1.0, std::abs(r1))) {
            const double res = eval(r1, d1, d2);
            if (std::abs(res) > tol)
                break;
            if (!(d1 > 0.5 * alpha) || !(d1 > 0.0))
                throw ShellSolveError("r1_on_shell: root lies on the wrong branch");
            return r1;
        }
    }
    throw ShellSolveError("r1_on_shell: Newton iteration did not reach residual 1e-12");
}

namespace {

// positive-branch root of a R^2 + c r2 R + b r2^2 = e
double unperturbed_r1(const QuadraticForm& h, double r2, double e)
{
    const double disc = h.c() * h.c() * r2 * r2 - 4.0 * h.a() * (h.b() * r2 * r2 - e);
    if (disc < 0.0)
        throw ShellSolveError("unperturbed shell does not reach this r2");
    const double R = (-h.c() * r2 + std::sqrt(disc)) / (2.0 * h.a());
    if (!(2.0 * h.a() * R + h.c() * r2 > 0.0))
        throw ShellSolveError("r2 lies on the boundary of the positive-frequency domain");
    return R;
}

} // namespace

SectionPoint analytic_return_map(const QuadraticForm& h, const SectionPoint& p, double e)
{
    const double R = unperturbed_r1(h, p.r2, e);
    const double advance = (h.c() * R + 2.0 * h.b() * p.r2) / (2.0 * h.a() * R + h.c() * p.r2);
    return SectionPoint(p.theta2 + advance, p.r2);
}

double analytic_return_time(const QuadraticForm& h, double r2, double e)
{
    const double R = unperturbed_r1(h, r2, e);
    return 1.0 / (2.0 * h.a() * R + h.c() * r2);
}

double twist_derivative_closed(const QuadraticForm& h, double r2, double e)
{
    const double a = h.a(), b = h.b(), c = h.c();
    const double R = unperturbed_r1(h, r2, e);
    const double speed = 2.0 * a * R + c * r2;
    const double dR = -(2.0 * b * r2 + c * R) / speed;
    return h.det_combination() * (R - dR * r2) / (speed * speed);
}

Vec4 lift_to_shell(const Hamiltonian& H, const SectionDomain& dom, const SectionPoint& p)
{
    const Vec2 theta(dom.theta10(), p.theta2);
    const double r1 = r1_on_shell(H, theta, p.r2, dom.energy(), dom.alpha());
    Vec4 y;
    y << theta, r1, p.r2;
    return y;
}

ReturnSample numeric_return_map(const Hamiltonian& H, const SectionDomain& dom,
                                const SectionPoint& p, const ReturnOptions& options)
{
    const Vec4 y0 = lift_to_shell(H, dom, p);
    CrossingOptions co;
    co.step = options.step;
    co.min_speed = 0.5 * dom.alpha();
    co.max_crossings = 1;
    // dtheta1/dt > alpha/2 bounds the return time by 2/alpha
    const double horizon = 2.0 / dom.alpha() * 1.01 + options.step;
    const auto crossings = section_crossings_lifted(H, y0, dom.theta10(), horizon, 1, co);
    if (crossings.empty())
        throw DomainExitError("numeric_return_map: no return within the transversality bound",
                              horizon);
    const auto& c = crossings.front();
    ReturnSample s;
    s.point = p;
    s.image = SectionPoint(c.lifted[1], c.lifted[3]);
    s.return_time = c.t;
    s.angle_advance = c.lifted[1] - y0[1];
    s.start = y0;
    s.end = c.lifted;
    return s;
}

std::vector<ReturnSample> iterate_return_map(const Hamiltonian& H, const SectionDomain& dom,
                                             const SectionPoint& p, std::size_t count,
                                             const ReturnOptions& options)
{
    std::vector<ReturnSample> out;
    out.reserve(count);
    SectionPoint q = p;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(numeric_return_map(H, dom, q, options));
        q = out.back().image;
    }
    return out;
}

TwistReport twist_report(const Hamiltonian& H, const SectionDomain& dom,
                         const std::vector<SectionPoint>& grid, double delta,
                         const ReturnOptions& options)
{
    if (!(delta > 0.0))
        throw DomainError("twist_report: delta must be positive");
    const auto* near = dynamic_cast<const NearIntegrableHamiltonian*>(&H);
    auto advance = [&](const SectionPoint& p, double dr) {
        return numeric_return_map(H, dom, SectionPoint(p.theta2, p.r2 + dr), options).angle_advance;
    };

    TwistReport report;
    report.min_twist = std::numeric_limits<double>::infinity();
    for (const auto& p : grid) {
        const double coarse = (advance(p, delta) - advance(p, -delta)) / (2.0 * delta);
        const double fine = (advance(p, 0.5 * delta) - advance(p, -0.5 * delta)) / delta;
        TwistEntry entry;
        entry.point = p;
        entry.twist_fd = (4.0 * fine - coarse) / 3.0;
        entry.richardson_gap = std::abs(fine - coarse);
        if (near)
            entry.twist_closed = twist_derivative_closed(near->core(), p.r2, dom.energy());
        report.min_twist = std::min(report.min_twist, entry.twist_fd);
        report.grid.push_back(entry);
    }
    return report;
}

std::vector<SectionPoint> section_grid(const SectionDomain& dom, int n_theta, int n_r, double inset)
{
    std::vector<SectionPoint> out;
    const double lo = dom.window().lo + inset, hi = dom.window().hi - inset;
    for (int i = 0; i < n_theta; ++i)
        for (int j = 0; j < n_r; ++j) {
            const double r2 = n_r == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * j / (n_r - 1);
            out.emplace_back(double(i) / n_theta, r2);
        }
    return out;
}

double shoelace_area(const std::vector<Vec2>& corners)
{
    double area = 0.0;
    for (std::size_t i = 0; i < corners.size(); ++i) {
        const Vec2& a = corners[i];
        const Vec2& b = corners[(i + 1) % corners.size()];
        area += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * area;
}

namespace {

// Winding in theta2 of the closed nearest-neighbour chain through the points,
// with r2 rescaled to the unit interval.
int chain_winding(const std::vector<SectionPoint>& pts)
{
    double rmin = pts.front().r2, rmax = rmin;
    for (const auto& p : pts) {
        rmin = std::min(rmin, p.r2);
        rmax = std::max(rmax, p.r2);
    }
    const double scale = rmax - rmin > 1e-300 ? 1.0 / (rmax - rmin) : 0.0;

    const std::size_t n = pts.size();
    std::vector<bool> used(n, false);
    std::size_t cur = 0;
    used[0] = true;
    double total = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        std::size_t best = n;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j])
                continue;
            const double dt = wrap_centered(pts[j].theta2 - pts[cur].theta2);
            const double dr = (pts[j].r2 - pts[cur].r2) * scale;
            const double d = dt * dt + dr * dr;
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        total += wrap_centered(pts[best].theta2 - pts[cur].theta2);
        used[best] = true;
        cur = best;
    }
    total += wrap_centered(pts[0].theta2 - pts[cur].theta2);
    return static_cast<int>(std::lround(total));
}

} // namespace

GraphTestResult birkhoff_graph_test(const std::vector<SectionPoint>& circle,
                                    const GraphTestOptions& options)
{
    if (circle.size() < 256)
        throw InsufficientSamplingError("birkhoff_graph_test: need at least 256 points");
    const int nb = options.bins;
    std::vector<std::vector<double>> bins(nb);
    for (const auto& p : circle) {
        int b = static_cast<int>(std::floor(wrap_unit(p.theta2) * nb));
        bins[std::clamp(b, 0, nb - 1)].push_back(p.r2);
    }
    int occupied = 0;
    for (const auto& b : bins)
        occupied += !b.empty();

    GraphTestResult res;
    res.coverage = double(occupied) / nb;
    if (res.coverage < options.min_coverage) {
        std::ostringstream msg;
        msg << "birkhoff_graph_test: bin coverage " << res.coverage << " below "
            << options.min_coverage;
        throw InsufficientSamplingError(msg.str());
    }

    res.winding = chain_winding(circle);
    res.essential = std::abs(res.winding) == 1;

    std::vector<double> median(nb, 0.0);
    for (int i = 0; i < nb; ++i) {
        auto& b = bins[i];
        if (b.empty())
            continue;
        std::sort(b.begin(), b.end());
        median[i] = b[b.size() / 2];
        res.max_residual = std::max(res.max_residual, b.back() - b.front());
    }
    // slopes between consecutive occupied bins, cyclically
    std::vector<int> occ;
    for (int i = 0; i < nb; ++i)
        if (!bins[i].empty())
            occ.push_back(i);
    for (std::size_t k = 0; k < occ.size(); ++k) {
        const int i = occ[k], j = occ[(k + 1) % occ.size()];
        int gap = j - i;
        if (gap <= 0)
            gap += nb;
        if (gap == nb)
            continue;
        res.lipschitz = std::max(res.lipschitz, std::abs(median[j] - median[i]) / (double(gap) / nb));
    }
    const double tol = options.relative_tolerance * options.window_width;
    res.graph = res.max_residual <= tol;
    return res;
}

} // namespace toruslab
