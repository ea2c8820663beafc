#include "toruslab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "toruslab/parallel.hpp"

namespace toruslab {

std::string to_string(OrbitClass c)
{
    switch (c) {
    case OrbitClass::elliptic:
        return "elliptic";
    case OrbitClass::hyperbolic:
        return "hyperbolic";
    case OrbitClass::parabolic:
        return "parabolic";
    }
    return "parabolic";
}

namespace {

Vec4 apply_J(const Vec4& v)
{
    return Vec4(v[2], v[3], -v[0], -v[1]);
}

Vec4 shift(const Vec2& winding)
{
    return Vec4(winding[0], winding[1], 0.0, 0.0);
}

double phase_residual(const Vec4& diff)
{
    const double dth = std::max(std::abs(wrap_centered(diff[0])), std::abs(wrap_centered(diff[1])));
    return std::max(dth, std::max(std::abs(diff[2]), std::abs(diff[3])));
}

int step_count(double T, double step)
{
    return std::max(1, static_cast<int>(std::ceil(T / step - 1e-9)));
}

struct OrbitPath {
    std::vector<Vec4> y;
    std::vector<Mat4> M;
};

// n equal steps of T / n, keeping every state and tangent matrix.
OrbitPath sample_orbit(const Hamiltonian& H, const Vec4& y0, double T, int n, bool keep_all)
{
    MidpointStepper stepper(H);
    OrbitPath path;
    Vec4 y = y0;
    Mat4 M = Mat4::Identity();
    const double h = T / n;
    if (keep_all) {
        path.y.reserve(n + 1);
        path.M.reserve(n + 1);
        path.y.push_back(y);
        path.M.push_back(M);
    }
    for (int i = 0; i < n; ++i) {
        y = stepper.step(y, M, h, i * h);
        if (keep_all) {
            path.y.push_back(y);
            path.M.push_back(M);
        }
    }
    if (!keep_all) {
        path.y.push_back(y);
        path.M.push_back(M);
    }
    return path;
}

} // namespace

PeriodicOrbit refine_periodic(const Hamiltonian& H, const PhaseState& guess_x0, double guess_T,
                              const RefineOptions& options)
{
    if (!(guess_T > 0.0) || !std::isfinite(guess_T))
        throw DomainError("refine_periodic: period guess must be positive");
    Vec4 y = guess_x0.lifted();
    if (!y.allFinite())
        throw DomainError("refine_periodic: non-finite guess");
    double T = guess_T;
    const int n = step_count(guess_T, options.step);
    const double e = H.value(y);
    const Vec4 yref = y;
    const Vec4 Xref = H.field(y);

    auto first = sample_orbit(H, y, T, n, false);
    Vec2 winding = (first.y.back().head<2>() - y.head<2>()).array().round().matrix();
    const double r0 = phase_residual(first.y.back() - y - shift(winding));
    if (!(r0 <= options.basin)) {
        std::ostringstream msg;
        msg << "refine_periodic: guess residual " << r0 << " outside the Newton basin";
        throw NoOrbitError(msg.str());
    }

    for (int it = 0; it <= options.max_iter; ++it) {
        const auto path = sample_orbit(H, y, T, n, false);
        const Vec4& end = path.y.back();
        const Vec4 diff = end - y - shift(winding);
        const double energy_gap = H.value(y) - e;
        const double residual = phase_residual(diff);
        if (!std::isfinite(residual))
            break;
        if (residual <= options.tolerance && std::abs(energy_gap) <= options.tolerance) {
            PeriodicOrbit orbit;
            orbit.x0 = PhaseState::from_lifted(y);
            orbit.period = T;
            orbit.residual = residual;
            orbit.winding = winding;
            orbit.step = T / n;
            return orbit;
        }
        if (it == options.max_iter)
            break;

        Eigen::Matrix<double, 6, 5> J = Eigen::Matrix<double, 6, 5>::Zero();
        Eigen::Matrix<double, 6, 1> F;
        J.topLeftCorner<4, 4>() = path.M.back() - Mat4::Identity();
        J.block<4, 1>(0, 4) = H.field(end);
        J.block<1, 4>(4, 0) = Xref.transpose();
        J.block<1, 4>(5, 0) = H.gradient(y).transpose();
        F.head<4>() = diff;
        F[4] = Xref.dot(y - yref);
        F[5] = energy_gap;
        const Eigen::Matrix<double, 5, 1> dz = J.completeOrthogonalDecomposition().solve(-F);
        y += dz.head<4>();
        T += dz[4];
        if (!(T > 0.0) || !y.allFinite())
            break;
    }
    throw NoOrbitError("refine_periodic: Newton iteration did not converge");
}

FloquetReport floquet(const Hamiltonian& H, const PeriodicOrbit& orbit)
{
    const Vec4 y0 = orbit.x0.lifted();
    const int n = step_count(orbit.period, orbit.step);
    const auto path = sample_orbit(H, y0, orbit.period, n, true);

    FloquetReport rep;
    rep.monodromy = path.M.back();
    rep.determinant = rep.monodromy.determinant();

    Eigen::EigenSolver<Mat4> es(rep.monodromy, false);
    std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a - 1.0) < std::abs(b - 1.0); });
    rep.trivial_pair_error = std::max(std::abs(ev[0] - 1.0), std::abs(ev[1] - 1.0));
    if (rep.trivial_pair_error > 1e-2) {
        std::ostringstream msg;
        msg << "floquet: trivial multiplier pair off by " << rep.trivial_pair_error;
        throw DegenerateMonodromyError(msg.str());
    }

    // Orthonormal frame (e1, J e1) of the complement of span{grad H, X} along the orbit.
    auto frame_residual = [&](const Vec4& y, const Vec4& a) {
        const Vec4 g = H.gradient(y);
        const double gn = g.norm();
        if (!(gn > 0.0))
            throw DegenerateMonodromyError("floquet: orbit passes through an equilibrium");
        const Vec4 u = g / gn, v = apply_J(u);
        return Vec4(a - a.dot(u) * u - a.dot(v) * v);
    };
    int best_axis = 0;
    double best_norm = -1.0;
    for (int k = 0; k < 4; ++k) {
        const Vec4 a = Vec4::Unit(k);
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& y : path.y)
            worst = std::min(worst, frame_residual(y, a).norm());
        if (worst > best_norm) {
            best_norm = worst;
            best_axis = k;
        }
    }
    const Vec4 axis = Vec4::Unit(best_axis);
    auto frame = [&](const Vec4& y) {
        Eigen::Matrix<double, 4, 2> E;
        const Vec4 e1 = frame_residual(y, axis).normalized();
        E.col(0) = e1;
        E.col(1) = apply_J(e1);
        return E;
    };

    const Eigen::Matrix<double, 4, 2> E0 = frame(y0);
    std::vector<Mat2> B(path.y.size());
    for (std::size_t i = 0; i < path.y.size(); ++i)
        B[i] = frame(path.y[i]).transpose() * path.M[i] * E0;
    rep.reduced = B.back();

    const double tr = rep.reduced.trace(), det = rep.reduced.determinant();
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det));
    rep.lambda1 = 0.5 * (tr + disc);
    rep.lambda2 = 0.5 * (tr - disc);
    if (std::abs(rep.lambda1) < std::abs(rep.lambda2))
        std::swap(rep.lambda1, rep.lambda2);

    const double tol = kFloquetTolerance;
    const bool real = std::abs(rep.lambda1.imag()) <= tol;
    if (real && std::abs(rep.lambda1) > 1.0 + tol) {
        rep.cls = OrbitClass::hyperbolic;
        rep.bott_label = "index 1";
    } else if (!real && std::abs(std::abs(rep.lambda1) - 1.0) <= tol &&
               std::abs(std::abs(rep.lambda2) - 1.0) <= tol) {
        rep.cls = OrbitClass::elliptic;
        rep.bott_label = "index 0/2";
    } else {
        rep.cls = OrbitClass::parabolic;
        rep.bott_label = "degenerate";
    }

    if (rep.cls == OrbitClass::elliptic) {
        // Mean winding of a transported vector over many periods, snapped to
        // the nearest angle compatible with the multiplier.
        constexpr int periods = 64;
        Vec2 v(1.0, 0.0);
        double total = 0.0;
        for (int j = 0; j < periods; ++j) {
            double prev = std::atan2(v[1], v[0]);
            for (std::size_t i = 1; i < B.size(); ++i) {
                const Vec2 w = B[i] * v;
                const double ang = std::atan2(w[1], w[0]);
                total += std::remainder(ang - prev, kTwoPi);
                prev = ang;
            }
            v = (B.back() * v).normalized();
        }
        const double mean = std::abs(total) / periods;
        const double phi0 = std::abs(std::arg(rep.lambda1));
        double best = phi0, gap = std::numeric_limits<double>::infinity();
        const double m0 = std::round(mean / kTwoPi);
        for (double m = m0 - 1.0; m <= m0 + 1.0; m += 1.0)
            for (double s : {-1.0, 1.0}) {
                const double cand = kTwoPi * m + s * phi0;
                if (cand >= 0.0 && std::abs(cand - mean) < gap) {
                    gap = std::abs(cand - mean);
                    best = cand;
                }
            }
        rep.rotation_angle = best;
    }
    return rep;
}

namespace {

// Cubic Hermite interpolation of lifted angles along the trajectory.
struct AnglePath {
    std::vector<double> t;
    std::vector<Vec2> theta, rate;

    Vec2 at(double time, std::size_t& cursor) const
    {
        while (cursor + 2 < t.size() && t[cursor + 1] < time)
            ++cursor;
        const double t0 = t[cursor], t1 = t[cursor + 1];
        const double h = t1 - t0;
        const double u = (time - t0) / h;
        const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
        const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
        return h00 * theta[cursor] + h10 * h * rate[cursor] + h01 * theta[cursor + 1] +
               h11 * h * rate[cursor + 1];
    }
};

} // namespace

std::vector<double> jacobi_conjugate_scan(const MetricField& g, const Trajectory& geodesic, double L,
                                          const JacobiOptions& options)
{
    if (!(L > 0.0))
        throw DomainError("jacobi_conjugate_scan: L must be positive");
    if (geodesic.samples.size() < 2)
        throw InputError("jacobi_conjugate_scan: trajectory needs at least two samples");
    const GeodesicHamiltonian H(g);
    const auto& s0 = geodesic.samples.front();
    const double e = H.value(s0.x.theta, s0.x.r);
    if (!(e > 0.0))
        throw InputError("jacobi_conjugate_scan: geodesic has zero speed");

    AnglePath path;
    Vec2 lifted = s0.x.theta;
    for (std::size_t i = 0; i < geodesic.samples.size(); ++i) {
        const auto& smp = geodesic.samples[i];
        const double ei = H.value(smp.x.theta, smp.x.r);
        if (std::abs(ei - e) > options.energy_tolerance * std::max(1.0, e)) {
            std::ostringstream msg;
            msg << "jacobi_conjugate_scan: energy varies along the input (" << e << " vs " << ei
                << " at t = " << smp.t << "); not a geodesic of this metric";
            throw InputError(msg.str());
        }
        if (i > 0) {
            const Vec2 d = smp.x.theta - geodesic.samples[i - 1].x.theta;
            lifted += Vec2(wrap_centered(d[0]), wrap_centered(d[1]));
        }
        path.t.push_back(smp.t);
        path.theta.push_back(lifted);
        path.rate.push_back(H.gradient(smp.x.theta, smp.x.r).tail<2>());
    }
    const double speed = 2.0 * std::sqrt(e);
    if (path.t.back() * speed < L * (1.0 - 1e-12))
        throw InputError("jacobi_conjugate_scan: trajectory shorter than L");

    std::size_t cursor = 0;
    auto K = [&](double s) { return gaussian_curvature(g, path.at(s / speed, cursor)); };
    // One RK4 step of y'' = -K y from (y, dy) at s.
    auto rk4 = [&](double s, const Vec2& z, double h) {
        auto f = [&](double ss, const Vec2& w) { return Vec2(w[1], -K(ss) * w[0]); };
        const Vec2 k1 = f(s, z);
        const Vec2 k2 = f(s + 0.5 * h, z + 0.5 * h * k1);
        const Vec2 k3 = f(s + 0.5 * h, z + 0.5 * h * k2);
        const Vec2 k4 = f(s + h, z + h * k3);
        return Vec2(z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    };

    std::vector<double> zeros;
    const int n = static_cast<int>(std::ceil(L / options.ds));
    const double h = L / n;
    Vec2 z(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        const double s = i * h;
        const std::size_t saved = cursor;
        const Vec2 next = rk4(s, z, h);
        // y leaves 0 upwards, so the reference sign on the first step is +
        const double sign = i == 0 ? 1.0 : (z[0] > 0.0 ? 1.0 : -1.0);
        if (sign * next[0] <= 0.0) {
            double lo = 0.0, hi = h;
            for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
                const double mid = 0.5 * (lo + hi);
                cursor = saved;
                if (sign * rk4(s, z, mid)[0] > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            zeros.push_back(s + 0.5 * (lo + hi));
        }
        z = next;
    }
    return zeros;
}

namespace {

struct SeedResult {
    std::vector<ClassifiedOrbit> found; // indexed by period - 1, possibly empty
};

// Newton on P^k(p) - p - (m, 0) with a finite-difference Jacobian.
std::optional<SectionPoint> section_fixed_point(const Hamiltonian& H, const SectionDomain& dom,
                                                SectionPoint p, int k, const SearchOptions& opt,
                                                double& return_time, double& advance)
{
    const ReturnOptions ro{opt.map_step};
    // image of the lifted point (th, r): (th + total advance, r after k returns)
    auto image = [&](double th, double r, double* time) {
        double adv = 0.0, tt = 0.0;
        SectionPoint cur(th, r);
        for (int j = 0; j < k; ++j) {
            const auto s = numeric_return_map(H, dom, cur, ro);
            adv += s.angle_advance;
            tt += s.return_time;
            cur = s.image;
        }
        if (time)
            *time = tt;
        return Vec2(th + adv, cur.r2);
    };
    try {
        double tt = 0.0;
        Vec2 img = image(p.theta2, p.r2, &tt);
        const double m = std::round(img[0] - p.theta2);
        for (int it = 0; it < opt.newton_iterations; ++it) {
            const Vec2 F(img[0] - p.theta2 - m, img[1] - p.r2);
            if (F.cwiseAbs().maxCoeff() <= opt.newton_tolerance) {
                return_time = tt;
                advance = img[0] - p.theta2;
                return p;
            }
            constexpr double d = 1e-7;
            Mat2 J;
            const Vec2 ft = image(p.theta2 + d, p.r2, nullptr);
            const Vec2 fr = image(p.theta2, p.r2 + d, nullptr);
            J.col(0) = (Vec2(ft[0] - (p.theta2 + d) - m, ft[1] - p.r2) - F) / d;
            J.col(1) = (Vec2(fr[0] - p.theta2 - m, fr[1] - (p.r2 + d)) - F) / d;
            Eigen::JacobiSVD<Mat2> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
            svd.setThreshold(1e-8);
            Vec2 dz = svd.solve(-F);
            const double len = dz.cwiseAbs().maxCoeff();
            if (len > 0.05)
                dz *= 0.05 / len;
            // theta2 is kept unwrapped so the winding target m stays consistent
            p.theta2 += dz[0];
            p.r2 += dz[1];
            if (!dom.window().contains(p.r2))
                return std::nullopt;
            img = image(p.theta2, p.r2, &tt);
        }
    } catch (const Error&) {
        return std::nullopt;
    }
    return std::nullopt;
}

double torus_point_distance(const SectionPoint& a, const SectionPoint& b)
{
    return std::max(std::abs(wrap_centered(a.theta2 - b.theta2)), std::abs(a.r2 - b.r2));
}

} // namespace

std::vector<ClassifiedOrbit> hyperbolic_search(const Hamiltonian& H, const SectionDomain& dom,
                                               const std::vector<SectionPoint>& seeds,
                                               const SearchOptions& options)
{
    if (options.max_period < 1)
        throw DomainError("hyperbolic_search: max_period must be >= 1");
    const AxisView view(H, options.swap_axes);
    const Hamiltonian& V = options.swap_axes ? static_cast<const Hamiltonian&>(view) : H;

    const std::size_t periods = static_cast<std::size_t>(options.max_period);
    std::vector<std::optional<ClassifiedOrbit>> slots(seeds.size() * periods);
    parallel_for(slots.size(), options.workers, [&](std::size_t idx) {
        const std::size_t seed = idx / periods;
        const int k = static_cast<int>(idx % periods) + 1;
        double T = 0.0, advance = 0.0;
        const SectionPoint start(seeds[seed].theta2, seeds[seed].r2);
        const auto fp = section_fixed_point(V, dom, start, k, options, T, advance);
        if (!fp)
            return;
        try {
            const Vec4 y0 = lift_to_shell(V, dom, *fp);
            const auto orbit = refine_periodic(V, PhaseState::from_lifted(y0), T, options.refine);
            const auto report = floquet(V, orbit);
            ClassifiedOrbit co;
            co.orbit = orbit;
            co.report = report;
            co.section_period = k;
            co.section_point = SectionPoint(fp->theta2, fp->r2);
            if (options.swap_axes) {
                co.orbit.x0 = PhaseState::from_lifted(view.to_base(orbit.x0.lifted()));
                co.orbit.winding = view.to_base(shift(orbit.winding)).head<2>();
            }
            slots[idx] = co;
        } catch (const Error&) {
        }
    });

    // sequential, deterministic reduction: by period, then by seed
    std::vector<ClassifiedOrbit> out;
    std::vector<std::vector<SectionPoint>> visited;
    for (std::size_t k = 0; k < periods; ++k)
        for (std::size_t seed = 0; seed < seeds.size(); ++seed) {
            auto& slot = slots[seed * periods + k];
            if (!slot)
                continue;
            bool duplicate = false;
            for (const auto& pts : visited) {
                for (const auto& q : pts)
                    if (torus_point_distance(q, slot->section_point) <= options.dedupe_distance) {
                        duplicate = true;
                        break;
                    }
                if (duplicate)
                    break;
            }
            if (duplicate)
                continue;
            // every crossing of the orbit with the section identifies it
            std::vector<SectionPoint> pts{slot->section_point};
            try {
                auto iterates = iterate_return_map(V, dom, slot->section_point,
                                                   static_cast<std::size_t>(slot->section_period),
                                                   ReturnOptions{options.map_step});
                for (const auto& s : iterates)
                    pts.push_back(s.image);
            } catch (const Error&) {
            }
            visited.push_back(std::move(pts));
            out.push_back(std::move(*slot));
        }
    return out;
}

} // namespace toruslab
