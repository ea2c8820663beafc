// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "toruslab/entropy.hpp"
#include "toruslab/geodesic.hpp"
#include "toruslab/io.hpp"
#include "toruslab/kam.hpp"
#include "toruslab/scenario.hpp"
#include "toruslab/section.hpp"
#include "toruslab/spectra.hpp"

#ifndef TORUSLAB_CLI_PATH
#define TORUSLAB_CLI_PATH "toruslab"
#endif

using namespace toruslab;

namespace {

const double kKappa = std::pow(kTwoPi, -5.0);
const double kPhi = 0.5 * (1.0 + std::sqrt(5.0));

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

NearIntegrableHamiltonian product_system(double eps)
{
    return NearIntegrableHamiltonian(QuadraticForm(1, 1, 0), FourierPerturbation::cosine_product(kKappa), eps);
}

NearIntegrableHamiltonian pendulum(double eps)
{
    return NearIntegrableHamiltonian(QuadraticForm(1, 1, 0), FourierPerturbation::cosine_theta1(kKappa), eps);
}

Outcome criterion1()
{
    const QuadraticForm h(1, 1, 0);
    auto image = [&](double r2) { return analytic_return_map(h, SectionPoint(0.0, r2)).theta2; };
    double worst = 0.0;
    for (int i = -6; i <= 6; ++i) {
        const double r2 = 0.1 * i, d = 1e-3, base = image(r2);
        auto rel = [&](double x) { return wrap_centered(image(x) - base); };
        const double coarse = (rel(r2 + d) - rel(r2 - d)) / (2 * d);
        const double fine = (rel(r2 + d / 2) - rel(r2 - d / 2)) / d;
        worst = std::max(worst, std::abs(twist_derivative_closed(h, r2) - (4 * fine - coarse) / 3));
    }
    const double at0 = std::abs(twist_derivative_closed(h, 0.0) - 1.0);
    const double at05 = std::abs(twist_derivative_closed(h, 0.5) - std::pow(0.75, -1.5));
    return {worst <= 1e-8 && at0 <= 1e-9 && at05 <= 1e-9,
            "max |closed - fd| " + fmt(worst) + ", |tw(0) - 1| " + fmt(at0) + ", |tw(0.5) - 0.75^-1.5| " + fmt(at05)};
}

double sup_distance(const NearIntegrableHamiltonian& H, const SectionDomain& dom)
{
    double worst = 0.0;
    for (const auto& p : section_grid(dom, 16, 16)) {
        const auto s = numeric_return_map(H, dom, p);
        const auto a = analytic_return_map(H.core(), p, dom.energy());
        worst = std::max({worst, std::abs(wrap_centered(s.image.theta2 - a.theta2)), std::abs(s.image.r2 - a.r2)});
    }
    return worst;
}

Outcome criterion2()
{
    const Interval window{-0.6, 0.6};
    const auto H0 = product_system(0.0);
    const double d0 = sup_distance(H0, SectionDomain::create(H0, 0.0, 1.0, 0.5, window));
    std::vector<double> eps{1e-5, 1e-4, 1e-3, 1e-2}, dist;
    for (double e : eps) {
        const auto H = product_system(e);
        dist.push_back(sup_distance(H, SectionDomain::create(H, 0.0, 1.0, 0.5, window)));
    }
    const double slope = loglog_slope(eps, dist);
    std::string d = "eps = 0 sup distance " + fmt(d0) + "; sup distances";
    for (double x : dist)
        d += " " + fmt(x);
    d += "; log-log slope " + fmt(slope) + " (required 0.5 +- 0.1)";
    return {d0 <= 1e-9 && std::abs(slope - 0.5) <= 0.1, d};
}

Outcome criterion3()
{
    const auto fam = MetricFamily::revolution(2, 1);
    const GeodesicHamiltonian H(fam.realized());
    const auto inner = floquet(H, refine_periodic(H, PhaseState(Vec2(0.5, 0), Vec2(0, kTwoPi)), kTwoPi / 2));
    const auto outer = floquet(H, refine_periodic(H, PhaseState(Vec2(0, 0), Vec2(0, 3 * kTwoPi)), 3 * kTwoPi / 2));
    const double lead = inner.lambda1.real();
    const bool ok_inner = inner.cls == OrbitClass::hyperbolic && std::abs(lead / std::exp(kTwoPi) - 1) <= 0.01;
    const double rot = outer.rotation_angle.value_or(NAN);
    const bool ok_outer = outer.cls == OrbitClass::elliptic && std::abs(std::abs(outer.lambda1) - 1) <= 1e-4 &&
                          std::abs(rot / (kTwoPi * std::sqrt(3.0)) - 1) <= 0.01;
    const double p_in = std::abs(inner.lambda1 * inner.lambda2 - 1.0), p_out = std::abs(outer.lambda1 * outer.lambda2 - 1.0);
    return {ok_inner && ok_outer && p_in <= 1e-6 && p_out <= 1e-6,
            "inner " + to_string(inner.cls) + " lambda " + fmt(lead) + "; outer " + to_string(outer.cls) + " |lambda| " +
                fmt(std::abs(outer.lambda1)) + " rotation " + fmt(rot) + "; |l1 l2 - 1| " + fmt(p_in) + ", " + fmt(p_out)};
}

Outcome criterion4()
{
    const auto fam = MetricFamily::revolution(2, 1);
    const GeodesicHamiltonian H(fam.realized());
    const auto traj = integrate(H, PhaseState(Vec2(0, 0), Vec2(0, 3 * kTwoPi)), 3.5, 1e-3);
    JacobiOptions jo;
    jo.ds = 1e-3;
    const auto zeros = jacobi_conjugate_scan(fam.realized(), traj, 6.5, jo);
    const double first = zeros.empty() ? NAN : zeros.front();
    const auto flat = MetricFamily::flat(1, 1, 0);
    const GeodesicHamiltonian F(flat.realized());
    std::size_t flat_zeros = 0;
    for (const Vec2& d : {Vec2(1, kPhi), Vec2(1, 0), Vec2(-0.3, 1)}) {
        const auto line = integrate(F, shell_state(F, Vec2::Zero(), d, 1.0), 100.5, 1e-2);
        flat_zeros += jacobi_conjugate_scan(flat.realized(), line, 200.0).size();
    }
    const double target = std::numbers::pi * std::sqrt(3.0);
    return {std::abs(first - target) <= 1e-3 && flat_zeros == 0,
            "outer equator first conjugate point " + fmt(first) + " (target " + fmt(target) + "); flat zeros " +
                std::to_string(flat_zeros)};
}

Outcome criterion5()
{
    const auto H = product_system(0.0);
    const std::vector<double> eps{1e-5, 1e-4, 1e-3, 1e-2};
    KamScanOptions o;
    const auto scan = kam_survival_scan(H, {Vec2(1, kPhi)}, eps, o);
    bool all_graph = true;
    std::vector<double> dev;
    std::string d = "verdicts";
    for (const auto& r : scan.rows) {
        all_graph = all_graph && !r.skipped && r.fit.verdict == TorusVerdict::graph;
        dev.push_back(r.max_deviation);
        d += " " + to_string(r.fit.verdict);
    }
    const double slope = loglog_slope(eps, dev);
    d += "; max deviations";
    for (double x : dev)
        d += " " + fmt(x);
    d += "; slope " + fmt(slope) + " (required 0.5 +- 0.1); delta " + fmt(scan.delta[0]) + ", confined within factor 2: " +
         (scan.confined_within_factor2[0] ? "yes" : "no");
    return {all_graph && std::abs(slope - 0.5) <= 0.1 && scan.confined_within_factor2[0], d};
}

HpolEstimate entropy_run(const Hamiltonian& H)
{
    NetSpec net;
    net.n1 = 100;
    net.n2 = 100;
    net.n_param = 200;
    net.budget = 2000000;
    const auto times = log_times(10, 300, 6, 5);
    CoverOptions co;
    co.step = 0.25;
    const auto table = cover_table(H, net, times, epsilon_ladder(net_diameter(H, net)), 5, co);
    return hpol_estimate(table, 10, 300);
}

Outcome criterion6()
{
    const auto flat = entropy_run(NearIntegrableHamiltonian(QuadraticForm(1, 1, 0), FourierPerturbation(), 0.0));

    CoverTable synth;
    synth.epsilons = {0.2, 0.1, 0.05, 0.025};
    synth.times = log_times(10, 300, 6, 5);
    for (double t : synth.times)
        synth.G.push_back(std::vector<std::uint64_t>(4, static_cast<std::uint64_t>(std::ceil(t * t))));
    synth.greedy = synth.G;
    const auto quad = hpol_estimate(synth, 10, 300);

    const ConstantHamiltonian frozen_H(1.0);
    NetSpec small;
    small.n1 = 20;
    small.n2 = 20;
    small.n_param = 5;
    small.project_to_shell = false;
    const auto ftimes = log_times(10, 300, 6, 5);
    const auto frozen = hpol_estimate(
        cover_table(frozen_H, small, ftimes, epsilon_ladder(net_diameter(frozen_H, small)), 5), 10, 300);

    const auto pend = entropy_run(pendulum(1e-2));
    const double gap = pend.slope - flat.slope;
    const bool ok = flat.slope >= 0.8 && flat.slope <= 1.2 && std::abs(quad.slope - 2.0) <= 0.01 && frozen.slope == 0.0 &&
                    gap >= 0.3;
    return {ok, "flat slope " + fmt(flat.slope) + " (eps " + fmt(flat.epsilon_used) + "); synthetic " + fmt(quad.slope) +
                    "; frozen " + fmt(frozen.slope) + "; pendulum " + fmt(pend.slope) + ", excess " + fmt(gap) +
                    " (required >= 0.3)"};
}

Outcome criterion7()
{
    const auto H = pendulum(1e-2);
    const AxisView view(H, true);
    const auto dom = SectionDomain::create(view, 0.0, 1.0, 0.5, {-0.05, 0.05});
    std::vector<SectionPoint> seeds;
    for (int i = 0; i < 4; ++i)
        for (double r : {-0.02, 0.0, 0.02})
            seeds.emplace_back(i / 4.0, r);
    SearchOptions so;
    so.swap_axes = true;
    so.max_period = 1;
    const auto found = hyperbolic_search(H, dom, seeds, so);
    double best = 0.0, th1 = NAN, r1 = NAN;
    for (const auto& c : found)
        if (c.report.cls == OrbitClass::hyperbolic && c.report.lambda1.real() > best) {
            best = c.report.lambda1.real();
            th1 = c.orbit.x0.theta[0];
            r1 = c.orbit.x0.r[0];
        }

    AssessOptions o;
    o.window = {-0.05, 0.05};
    o.alpha = 0.5;
    o.graph_orbits = 4;
    o.graph_duration = 100;
    o.seed_theta = 4;
    o.seed_r = 3;
    o.search.max_period = 1;
    const auto v = assess_system(H, o);
    return {best > 1 + 1e-3 && std::abs(wrap_centered(th1)) < 1e-6 && std::abs(r1) < 0.05 && v.hpol_class == 2 && !v.hyperbolic_orbits.empty(),
            std::to_string(found.size()) + " orbits; leading hyperbolic multiplier " + fmt(best) + " at theta1 = " + fmt(th1) + ", r1 = " + fmt(r1) +
                "; verdict hpol_class " + std::to_string(v.hpol_class)};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool cli_outputs_match(std::string& detail)
{
    const auto base = std::filesystem::temp_directory_path() / "toruslab_acceptance";
    std::filesystem::remove_all(base);
    const std::string common = std::string(TORUSLAB_CLI_PATH) +
                               " run --scenario pipeline --set params.graph_orbits=4 --set params.graph_duration=50"
                               " --set params.max_period=1 --out ";
    for (int w : {1, 3}) {
        const auto dir = base / ("w" + std::to_string(w));
        const std::string cmd = common + dir.string() + " --workers " + std::to_string(w) + " > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
            detail = "CLI run failed";
            return false;
        }
    }
    std::size_t compared = 0;
    for (const auto& entry : std::filesystem::directory_iterator(base / "w1")) {
        const auto name = entry.path().filename();
        std::string a = slurp(entry.path()), b = slurp(base / "w3" / name);
        if (name == "manifest.json") {
            auto ja = Json::parse(a), jb = Json::parse(b);
            ja.erase("runtime");
            jb.erase("runtime");
            a = ja.dump();
            b = jb.dump();
        }
        if (a != b) {
            detail = name.string() + " differs between worker counts";
            return false;
        }
        ++compared;
    }
    std::filesystem::remove_all(base);
    detail = std::to_string(compared) + " files identical across 1 and 3 workers";
    return compared > 1;
}

Outcome criterion8()
{
    const auto H = product_system(1e-2);
    const auto traj = integrate(H, PhaseState(Vec2(0.1, 0.2), Vec2(0.6, 0.8)), 1000.0, 1e-2, 100);
    const auto tf = tangent_flow(H, PhaseState(Vec2(0.1, 0.2), Vec2(0.6, 0.8)), 100.0, 1e-2);
    const double det = std::abs(tf.M.determinant() - 1.0);

    const auto dom = SectionDomain::create(H, 0.0, 1.0, 0.5, {-0.6, 0.6});
    double area = 0.0;
    for (const SectionPoint& c : {SectionPoint(0.1, 0.0), SectionPoint(0.6, 0.4), SectionPoint(0.3, -0.5)}) {
        std::vector<Vec2> before, after;
        const double d = 1e-3;
        for (const Vec2& o : {Vec2(0, 0), Vec2(d, 0), Vec2(d, d), Vec2(0, d)}) {
            const auto s = numeric_return_map(H, dom, SectionPoint(c.theta2 + o[0], c.r2 + o[1]));
            before.emplace_back(c.theta2 + o[0], c.r2 + o[1]);
            after.emplace_back(c.theta2 + o[0] + s.angle_advance, s.image.r2);
        }
        area = std::max(area, std::abs(shoelace_area(after) / shoelace_area(before) - 1.0));
    }
    const double g11 = diophantine_margin(Vec2(1, 1), 1, 10000).gamma_est;
    const double ggold = diophantine_margin(Vec2(1, kPhi), 1, 10000).gamma_est;
    std::string cli;
    const bool det_ok = cli_outputs_match(cli);
    return {traj.energy_drift <= 1e-8 && det <= 1e-6 && area <= 1e-5 && g11 == 0.0 && ggold > 0.38 && det_ok,
            "energy drift " + fmt(traj.energy_drift) + "; |det M - 1| " + fmt(det) + "; area error " + fmt(area) +
                "; margins " + fmt(g11) + ", " + fmt(ggold) + "; " + cli};
}

} // namespace

int main()
{
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                         criterion5, criterion6, criterion7, criterion8};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i]();
        } catch (const std::exception& e) {
            out = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !out.pass;
        std::cout << "Criterion " << i + 1 << ": " << (out.pass ? "PASS" : "FAIL") << " - " << out.detail << " ["
                  << fmt(secs) << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
