#include "toruslab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "toruslab/flow.hpp"
#include "toruslab/parallel.hpp"

namespace toruslab {

double phase_distance(const PhaseState& x, const PhaseState& y)
{
    const double d1 = wrap_centered(x.theta[0] - y.theta[0]);
    const double d2 = wrap_centered(x.theta[1] - y.theta[1]);
    return std::max(std::hypot(d1, d2), (x.r - y.r).norm());
}

double dyn_dist(const Hamiltonian& H, const PhaseState& x, const PhaseState& y, double t,
                double Delta, double step)
{
    if (!(Delta > 0.0))
        throw DomainError("dyn_dist: Delta must be positive");
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError("dyn_dist: t must be finite and >= 0");
    MidpointStepper stepper(H);
    Vec4 a = x.lifted(), b = y.lifted();
    double best = phase_distance(x, y);
    double now = 0.0;
    while (now < t) {
        const double next = std::min(t, now + Delta);
        for (double h : step_schedule(next - now, step)) {
            a = stepper.step(a, h, now);
            b = stepper.step(b, h, now);
        }
        now = next;
        best = std::max(best, phase_distance(PhaseState::from_lifted(a), PhaseState::from_lifted(b)));
    }
    return best;
}

double NetSpec::theta_value(int axis, int i) const
{
    const int n = axis == 0 ? n1 : n2;
    const double center = axis == 0 ? theta1_center : theta2_center;
    if (theta_periodic(axis))
        return wrap_unit(center + double(i) / n);
    const double width = axis == 0 ? theta1_width : theta2_width;
    return n == 1 ? center : center + width * (double(i) / (n - 1) - 0.5);
}

double NetSpec::theta_spacing(int axis) const
{
    const int n = axis == 0 ? n1 : n2;
    if (theta_periodic(axis))
        return 1.0 / n;
    const double width = axis == 0 ? theta1_width : theta2_width;
    return n == 1 ? 1.0 : width / (n - 1);
}

void NetSpec::validate() const
{
    if (n1 < 1 || n2 < 1 || n_param < 1)
        throw DomainError("NetSpec: sample counts must be >= 1");
    if (!(theta1_width > 0.0) || !(theta2_width > 0.0) || !std::isfinite(theta1_center) ||
        !std::isfinite(theta2_center))
        throw DomainError("NetSpec: invalid angle window");
    if (!(psi_width >= 0.0) || !std::isfinite(psi_center))
        throw DomainError("NetSpec: invalid section-parameter window");
    if (!project_to_shell && !(radius > 0.0))
        throw DomainError("NetSpec: radius must be positive");
    if (distance != "max-torus-action")
        throw DomainError("NetSpec: unknown distance '" + distance + "'");
    if (cardinality() > budget) {
        std::ostringstream msg;
        msg << "NetSpec: net of " << cardinality() << " points exceeds the budget of " << budget;
        throw ResourceError(msg.str());
    }
}

namespace {

double psi_value(const NetSpec& net, int k)
{
    if (net.n_param == 1)
        return net.psi_center;
    return net.psi_center + net.psi_width * (double(k) / (net.n_param - 1) - 0.5);
}

Vec2 net_action(const Hamiltonian& H, const NetSpec& net, const Vec2& theta, int k)
{
    const double psi = psi_value(net, k);
    const Vec2 u(std::cos(psi), std::sin(psi));
    if (!net.project_to_shell)
        return net.radius * u;
    double s = 1.0;
    for (int it = 0; it < 100; ++it) {
        const Vec2 r = s * u;
        const double f = H.value(theta, r) - net.energy;
        const double df = H.gradient(theta, r).tail<2>().dot(u);
        if (!(df > 0.0))
            throw ShellSolveError("net: energy level not reached along the action ray");
        const double ds = f / df;
        s = std::max(0.5 * s, s - ds);
        if (std::abs(ds) <= 1e-15 * std::max(1.0, s))
            return s * u;
    }
    throw ShellSolveError("net: shell projection did not converge");
}

// dH/dtheta2 vanishes identically (checked on scattered points): orbits of
// net points that differ only in theta2 are translates of each other.
bool theta2_invariant(const Hamiltonian& H)
{
    for (int i = 0; i < 97; ++i) {
        const Vec2 th(std::fmod(0.6180339887 * i, 1.0), std::fmod(0.7548776662 * i + 0.1, 1.0));
        const Vec2 r(std::fmod(0.5698402910 * i, 1.0) * 3.0 - 1.5, std::fmod(0.3247179572 * i, 1.0) * 3.0 - 1.5);
        const Vec4 g = H.gradient(th, r);
        const Mat4 hs = H.hessian(th, r);
        if (g[1] != 0.0 || hs.row(1).cwiseAbs().maxCoeff() != 0.0)
            return false;
    }
    return true;
}

} // namespace

std::vector<PhaseState> net_points(const Hamiltonian& H, const NetSpec& net)
{
    net.validate();
    std::vector<PhaseState> out;
    out.reserve(net.cardinality());
    for (int i = 0; i < net.n1; ++i)
        for (int j = 0; j < net.n2; ++j)
            for (int k = 0; k < net.n_param; ++k) {
                const Vec2 th(net.theta_value(0, i), net.theta_value(1, j));
                out.emplace_back(th, net_action(H, net, th, k));
            }
    return out;
}

double net_diameter(const Hamiltonian& H, const NetSpec& net)
{
    net.validate();
    auto extent = [&](int axis) {
        const int n = axis == 0 ? net.n1 : net.n2;
        if (net.theta_periodic(axis))
            return std::floor(n / 2.0) / n;
        return std::min(0.5, net.theta_spacing(axis) * (n - 1));
    };
    const double m1 = extent(0), m2 = extent(1);
    double r_diam = 0.0;
    for (int i = 0; i < net.n1; ++i) {
        const Vec2 th(net.theta_value(0, i), net.theta_value(1, 0));
        const Vec2 a = net_action(H, net, th, 0), b = net_action(H, net, th, net.n_param - 1);
        r_diam = std::max(r_diam, (a - b).norm());
        if (!net.project_to_shell)
            break;
    }
    return std::max(std::hypot(m1, m2), r_diam);
}

NetSnapshots::NetSnapshots(const Hamiltonian& H, const NetSpec& net, double t_max, double Delta,
                           const CoverOptions& options)
    : net_(net), Delta_(Delta)
{
    net.validate();
    if (!(Delta > 0.0) || !(t_max >= 0.0) || !std::isfinite(t_max))
        throw DomainError("NetSnapshots: need Delta > 0 and finite t_max >= 0");
    n_points_ = net.cardinality();
    n_snap_ = static_cast<std::size_t>(std::llround(t_max / Delta)) + 1;
    reduced_ = theta2_invariant(H);
    n_base_ = reduced_ ? std::size_t(net.n1) * net.n_param : n_points_;
    const std::size_t bytes = n_base_ * n_snap_ * 4 * sizeof(float);
    if (bytes > options.memory_limit) {
        std::ostringstream msg;
        msg << "NetSnapshots: " << bytes << " bytes of snapshots exceed the limit of "
            << options.memory_limit;
        throw ResourceError(msg.str());
    }
    data_.assign(n_base_ * n_snap_ * 4, 0.0f);
    r_at0_.assign(n_base_ * 2, 0.0);

    const int sub = std::max(1, static_cast<int>(std::ceil(Delta / options.step - 1e-9)));
    const double h = Delta / sub;
    parallel_for(n_base_, options.workers, [&](std::size_t b) {
        int i, j, k;
        if (reduced_) {
            i = static_cast<int>(b / net.n_param);
            j = 0;
            k = static_cast<int>(b % net.n_param);
        } else {
            i = static_cast<int>(b / (std::size_t(net.n2) * net.n_param));
            j = static_cast<int>((b / net.n_param) % net.n2);
            k = static_cast<int>(b % net.n_param);
        }
        const Vec2 th(net.theta_value(0, i), net.theta_value(1, j));
        const Vec2 r = net_action(H, net, th, k);
        r_at0_[2 * b] = r[0];
        r_at0_[2 * b + 1] = r[1];
        Vec4 y;
        y << th, r;
        MidpointStepper stepper(H);
        float* out = &data_[b * n_snap_ * 4];
        for (std::size_t s = 0; s < n_snap_; ++s) {
            if (s > 0)
                for (int m = 0; m < sub; ++m)
                    y = stepper.step(y, h, (s - 1) * Delta + m * h);
            out[4 * s + 0] = static_cast<float>(wrap_unit(y[0]));
            out[4 * s + 1] = static_cast<float>(wrap_unit(y[1]));
            out[4 * s + 2] = static_cast<float>(y[2]);
            out[4 * s + 3] = static_cast<float>(y[3]);
        }
    });
}

bool NetSnapshots::within(std::size_t a, std::size_t b, std::size_t s, double eps2) const
{
    const std::size_t np = net_.n_param, n2 = net_.n2;
    std::size_t ba = a, bb = b;
    double offset = 0.0;
    if (reduced_) {
        ba = (a / (n2 * np)) * np + a % np;
        bb = (b / (n2 * np)) * np + b % np;
        const int ja = int((a / np) % n2), jb = int((b / np) % n2);
        offset = net_.theta_value(1, ja) - net_.theta_value(1, jb);
    }
    const float* p = &data_[(ba * n_snap_ + s) * 4];
    const float* q = &data_[(bb * n_snap_ + s) * 4];
    const double dr1 = double(p[2]) - double(q[2]), dr2 = double(p[3]) - double(q[3]);
    if (dr1 * dr1 + dr2 * dr2 > eps2)
        return false;
    const double d1 = wrap_centered(double(p[0]) - double(q[0]));
    const double d2 = wrap_centered(double(p[1]) - double(q[1]) + offset);
    return d1 * d1 + d2 * d2 <= eps2;
}

std::size_t NetSnapshots::greedy_cover(double t, double eps) const
{
    if (!(eps > 0.0))
        throw DomainError("greedy_cover: eps must be positive");
    if (!(t >= 0.0))
        throw DomainError("greedy_cover: t must be >= 0");
    const std::size_t last = static_cast<std::size_t>(std::llround(t / Delta_));
    if (last >= n_snap_)
        throw DomainError("greedy_cover: t beyond the precomputed horizon");
    const double eps2 = eps * eps;
    const int n1 = net_.n1, n2 = net_.n2, np = net_.n_param;

    // index offsets whose grid spacing at t = 0 can be within eps
    auto offsets = [&](int axis) {
        const int n = axis == 0 ? n1 : n2;
        const int R = static_cast<int>(std::min<double>(n, std::floor(eps / net_.theta_spacing(axis) + 1e-9)));
        std::vector<int> d;
        if (!net_.theta_periodic(axis)) {
            for (int x = -R; x <= R; ++x)
                d.push_back(x);
        } else if (2 * R + 1 >= n) {
            for (int x = 0; x < n; ++x)
                d.push_back(x);
        } else {
            for (int x = -R; x <= R; ++x)
                d.push_back(x);
        }
        return d;
    };
    const auto off1 = offsets(0), off2 = offsets(1);
    const bool per1 = net_.theta_periodic(0), per2 = net_.theta_periodic(1);
    const bool full1 = per1 && int(off1.size()) == n1, full2 = per2 && int(off2.size()) == n2;

    std::vector<char> covered(n_points_, 0);
    std::size_t count = 0;
    for (std::size_t c = 0; c < n_points_; ++c) {
        if (covered[c])
            continue;
        ++count;
        covered[c] = 1;
        const int i = static_cast<int>(c / (std::size_t(n2) * np));
        const int j = static_cast<int>((c / np) % n2);
        for (int d1 : off1) {
            const int i2 = full1 ? d1 : per1 ? ((i + d1) % n1 + n1) % n1 : i + d1;
            if (i2 < 0 || i2 >= n1)
                continue;
            for (int d2 : off2) {
                const int j2 = full2 ? d2 : per2 ? ((j + d2) % n2 + n2) % n2 : j + d2;
                if (j2 < 0 || j2 >= n2)
                    continue;
                const std::size_t row = (std::size_t(i2) * n2 + j2) * np;
                for (int k = 0; k < np; ++k) {
                    const std::size_t y = row + k;
                    if (covered[y])
                        continue;
                    if (!within(c, y, last, eps2) || !within(c, y, 0, eps2))
                        continue;
                    bool ok = true;
                    for (std::size_t s = 1; s < last && ok; ++s)
                        ok = within(c, y, s, eps2);
                    if (ok)
                        covered[y] = 1;
                }
            }
        }
    }
    return count;
}

std::size_t covering_count(const Hamiltonian& H, const NetSpec& net, double t, double eps,
                           double Delta, const CoverOptions& options)
{
    if (!(eps > 0.0) || !(t >= 0.0))
        throw DomainError("covering_count: need t >= 0 and eps > 0");
    const NetSnapshots snaps(H, net, Delta * std::round(t / Delta), Delta, options);
    return snaps.greedy_cover(t, eps);
}

std::vector<double> log_times(double t_min, double t_max, int count, double Delta)
{
    if (!(t_min > 0.0) || !(t_max > t_min) || count < 2 || !(Delta > 0.0))
        throw DomainError("log_times: need 0 < t_min < t_max, count >= 2, Delta > 0");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double t = std::exp(std::log(t_min) + (std::log(t_max) - std::log(t_min)) * i / (count - 1));
        const double snapped = std::max(Delta, Delta * std::round(t / Delta));
        if (out.empty() || snapped > out.back())
            out.push_back(snapped);
    }
    return out;
}

CoverTable cover_table(const Hamiltonian& H, const NetSpec& net, const std::vector<double>& times,
                       const std::vector<double>& epsilons, double Delta, const CoverOptions& options)
{
    if (times.empty() || epsilons.empty())
        throw DomainError("cover_table: need at least one time and one epsilon");
    CoverTable table;
    table.times = times;
    table.epsilons = epsilons;
    std::sort(table.times.begin(), table.times.end());
    std::sort(table.epsilons.begin(), table.epsilons.end(), std::greater<>());
    for (double e : table.epsilons)
        if (!(e > 0.0))
            throw DomainError("cover_table: epsilons must be positive");

    const NetSnapshots snaps(H, net, table.times.back(), Delta, options);
    const std::size_t nt = table.times.size(), ne = table.epsilons.size();
    table.greedy.assign(nt, std::vector<std::uint64_t>(ne, 0));
    parallel_for(nt * ne, options.workers, [&](std::size_t idx) {
        const std::size_t i = idx / ne, j = idx % ne;
        table.greedy[i][j] = snaps.greedy_cover(table.times[i], table.epsilons[j]);
    });

    // a cover at a later time or a smaller radius is also a cover of the cell
    table.G = table.greedy;
    for (std::size_t i = nt; i-- > 0;)
        for (std::size_t j = ne; j-- > 0;) {
            auto& g = table.G[i][j];
            if (i + 1 < nt)
                g = std::min(g, table.G[i + 1][j]);
            if (j + 1 < ne)
                g = std::min(g, table.G[i][j + 1]);
        }
    return table;
}

std::vector<double> epsilon_ladder(double diameter)
{
    if (!(diameter > 0.0))
        throw DomainError("epsilon_ladder: diameter must be positive");
    return {0.2 * diameter, 0.1 * diameter, 0.05 * diameter, 0.025 * diameter};
}

HpolEstimate hpol_estimate(const CoverTable& table, double t_min, double t_max)
{
    const double tol = 1e-9 * std::max(1.0, t_max);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < table.times.size(); ++i)
        if (table.times[i] >= t_min - tol && table.times[i] <= t_max + tol)
            rows.push_back(i);
    if (rows.size() < 5)
        throw DomainError("hpol_estimate: fewer than 5 time samples in the window");

    HpolEstimate est;
    est.t_min = t_min;
    est.t_max = t_max;
    for (std::size_t j = 0; j < table.epsilons.size(); ++j) {
        std::vector<double> xs, ys;
        for (std::size_t i : rows) {
            const auto g = table.G[i][j];
            if (g == 0)
                throw DomainError("hpol_estimate: covering counts must be >= 1");
            xs.push_back(std::log(table.times[i]));
            ys.push_back(std::log(double(g)));
        }
        const double n = double(xs.size());
        double mx = 0, my = 0;
        for (std::size_t m = 0; m < xs.size(); ++m) {
            mx += xs[m] / n;
            my += ys[m] / n;
        }
        double sxx = 0, sxy = 0;
        for (std::size_t m = 0; m < xs.size(); ++m) {
            sxx += (xs[m] - mx) * (xs[m] - mx);
            sxy += (xs[m] - mx) * (ys[m] - my);
        }
        const double slope = sxy / sxx;
        double ss_res = 0, ss_tot = 0;
        for (std::size_t m = 0; m < xs.size(); ++m) {
            ss_res += std::pow(ys[m] - my - slope * (xs[m] - mx), 2);
            ss_tot += std::pow(ys[m] - my, 2);
        }
        const double r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
        est.ladder.push_back({table.epsilons[j], slope, r2});
    }

    std::optional<std::size_t> chosen;
    if (est.ladder.size() == 1)
        chosen = 0;
    for (std::size_t j = est.ladder.size(); j-- > 1 && !chosen;)
        if (std::abs(est.ladder[j].slope - est.ladder[j - 1].slope) < 0.1)
            chosen = j;
    if (!chosen) {
        std::vector<double> slopes;
        std::ostringstream msg;
        msg << "hpol_estimate: no stable epsilon; slopes";
        for (const auto& f : est.ladder) {
            slopes.push_back(f.slope);
            msg << ' ' << f.slope;
        }
        throw InstabilityError(msg.str(), std::move(slopes));
    }
    est.slope = est.ladder[*chosen].slope;
    est.epsilon_used = est.ladder[*chosen].epsilon;
    est.r2_fit = est.ladder[*chosen].r2;
    return est;
}

int hpol_action_angle(const QuadraticForm& h, double e)
{
    if (!(e > 0.0))
        throw DomainError("hpol_action_angle: e must be a positive regular value");
    const Mat2 hess = h.hessian();
    int rank = 0;
    constexpr int samples = 720;
    for (int i = 0; i < samples; ++i) {
        const double phi = kTwoPi * i / samples;
        const Vec2 u(std::cos(phi), std::sin(phi));
        const Vec2 r = std::sqrt(e / h(u)) * u;
        const Vec2 g = h.gradient(r);
        const Vec2 tangent(-g[1], g[0]);
        const double curvature = tangent.dot(hess * tangent) / std::pow(g.norm(), 3);
        rank = std::max(rank, std::abs(curvature) > 1e-12 ? 1 : 0);
    }
    return rank;
}

int hpol_action_angle_single(double a, double e)
{
    if (!(e > 0.0) || !(a > 0.0))
        throw DomainError("hpol_action_angle_single: need a > 0 and e > 0");
    return 0;
}

} // namespace toruslab
