#include "toruslab/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

#include <Eigen/Core>

namespace toruslab {

const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names{"flat-baseline", "kam-sweep",      "twist-check",
                                                "revolution-torus", "entropy-table", "pipeline"};
    return names;
}

namespace {

Json flat_system()
{
    return Json{{"kind", "near-integrable"}, {"h", {{"a", 1.0}, {"b", 1.0}, {"c", 0.0}}}, {"epsilon", 0.0}};
}

Json pendulum_system()
{
    return Json{{"kind", "near-integrable"},
                {"h", {{"a", 1.0}, {"b", 1.0}, {"c", 0.0}}},
                {"perturbation", {{"preset", "cosine-theta1"}, {"kappa", std::pow(kTwoPi, -5.0)}}},
                {"epsilon", 1e-2}};
}

Json entropy_params()
{
    return Json{{"n1", 100},          {"n2", 100},         {"n_param", 200},      {"psi_center", std::numbers::pi / 2},
                {"psi_width", 0.006}, {"theta1_center", 0.0}, {"theta1_width", 1.0}, {"theta2_center", 0.0},
                {"theta2_width", 1.0}, {"energy", 1.0},     {"budget", 2000000},   {"t_min", 10.0},
                {"t_max", 300.0},     {"n_times", 6},      {"Delta", 5.0},        {"step", 0.25},
                {"epsilons", nullptr}};
}

Json assess_params()
{
    return Json{{"energy", 1.0},          {"step", 5e-3},        {"graph_orbits", 8},     {"graph_duration", 200.0},
                {"bins", 64},             {"graph_tolerance", 1e-3}, {"jacobi_geodesics", 8}, {"jacobi_length", 200.0},
                {"jacobi_ds", 1e-2},      {"swap_axes", true},   {"section_angle", 0.0},  {"window", {-0.05, 0.05}},
                {"alpha", 0.5},           {"adapt_section", true}, {"seed_theta", 4},     {"seed_r", 3},
                {"seed_jitter", 0.0},     {"max_period", 2},     {"map_step", 1e-3}};
}

} // namespace

Json scenario_defaults(const std::string& scenario)
{
    if (scenario == "flat-baseline") {
        Json p = entropy_params();
        p["verdict_graph_orbits"] = 8;
        p["verdict_graph_duration"] = 200.0;
        p["verdict_seed_theta"] = 2;
        p["verdict_seed_r"] = 1;
        p["verdict_max_period"] = 1;
        return Json{{"system", flat_system()}, {"params", p}};
    }
    if (scenario == "entropy-table")
        return Json{{"system", flat_system()}, {"params", entropy_params()}};
    if (scenario == "kam-sweep") {
        Json sys = flat_system();
        sys["perturbation"] = Json{{"preset", "cosine-product"}, {"kappa", std::pow(kTwoPi, -5.0)}};
        const double phi = 0.5 * (1.0 + std::sqrt(5.0));
        return Json{{"system", sys},
                    {"params",
                     {{"directions", Json::array({Json::array({1.0, phi})})},
                      {"epsilons", {1e-5, 1e-4, 1e-3, 1e-2}},
                      {"energy", 1.0},
                      {"duration", 200.0},
                      {"step", 5e-3},
                      {"bins", 64},
                      {"tau", 1.0},
                      {"K", 1000},
                      {"min_margin", 1e-3}}}};
    }
    if (scenario == "twist-check") {
        Json sys = flat_system();
        sys["perturbation"] = Json{{"preset", "cosine-product"}, {"kappa", std::pow(kTwoPi, -5.0)}};
        return Json{{"system", sys},
                    {"params",
                     {{"energy", 1.0},
                      {"theta10", 0.0},
                      {"window", {-0.6, 0.6}},
                      {"alpha", 0.5},
                      {"n_theta", 4},
                      {"n_r", 13},
                      {"delta", 1e-4},
                      {"step", 1e-3}}}};
    }
    if (scenario == "revolution-torus") {
        return Json{{"system", {{"kind", "geodesic"}, {"metric", {{"kind", "revolution"}, {"R0", 2.0}, {"rho", 1.0}}}}},
                    {"params",
                     {{"energy", 1.0},
                      {"step", 1e-3},
                      {"jacobi_length", 20.0},
                      {"jacobi_ds", 1e-3},
                      {"clairaut_duration", 1000.0},
                      {"clairaut_step", 1e-2},
                      {"trajectory_stride", 10}}}};
    }
    if (scenario == "pipeline")
        return Json{{"system", pendulum_system()}, {"params", assess_params()}};
    throw ConfigError("unknown scenario '" + scenario + "'");
}

namespace {

bool same_kind(const Json& def, const Json& v)
{
    if (def.is_null())
        return v.is_null() || v.is_number() || v.is_array();
    if (def.is_boolean())
        return v.is_boolean();
    if (def.is_number_integer() || def.is_number_unsigned())
        return v.is_number_integer() || v.is_number_unsigned();
    if (def.is_number())
        return v.is_number();
    if (def.is_array())
        return v.is_array();
    if (def.is_string())
        return v.is_string();
    return def.type() == v.type();
}

Json merge_params(const Json& defaults, const Json& user)
{
    if (!user.is_object())
        throw ConfigError("params: expected an object");
    Json out = defaults;
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (!defaults.contains(it.key()))
            throw ConfigError("params: unknown key '" + it.key() + "'");
        if (!same_kind(defaults.at(it.key()), it.value()))
            throw ConfigError("params." + it.key() + ": wrong type");
        out[it.key()] = it.value();
    }
    return out;
}

double num(const Json& p, const char* key)
{
    return p.at(key).get<double>();
}

int integer(const Json& p, const char* key)
{
    return p.at(key).get<int>();
}

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw ConfigError(what);
}

std::vector<double> number_list(const Json& j, const std::string& what)
{
    std::vector<double> out;
    for (const auto& v : j) {
        require(v.is_number() && std::isfinite(v.get<double>()), what + ": expected finite numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Interval interval(const Json& j, const std::string& what)
{
    const auto v = number_list(j, what);
    require(v.size() == 2 && v[1] > v[0], what + ": expected [lo, hi] with lo < hi");
    return {v[0], v[1]};
}

NetSpec net_from(const Json& p)
{
    NetSpec net;
    net.n1 = integer(p, "n1");
    net.n2 = integer(p, "n2");
    net.n_param = integer(p, "n_param");
    net.psi_center = num(p, "psi_center");
    net.psi_width = num(p, "psi_width");
    net.theta1_center = num(p, "theta1_center");
    net.theta1_width = num(p, "theta1_width");
    net.theta2_center = num(p, "theta2_center");
    net.theta2_width = num(p, "theta2_width");
    net.energy = num(p, "energy");
    net.budget = p.at("budget").get<std::size_t>();
    return net;
}

void validate_entropy(const Json& p)
{
    try {
        net_from(p).validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }
    require(num(p, "t_min") > 0 && num(p, "t_max") > num(p, "t_min"), "params: need 0 < t_min < t_max");
    require(integer(p, "n_times") >= 2, "params.n_times: need at least 2");
    require(num(p, "Delta") > 0 && num(p, "step") > 0, "params: Delta and step must be positive");
    if (!p.at("epsilons").is_null()) {
        const auto eps = number_list(p.at("epsilons"), "params.epsilons");
        require(eps.size() >= 2, "params.epsilons: need at least 2 radii");
        for (double e : eps)
            require(e > 0, "params.epsilons: radii must be positive");
    }
}

void validate_assess(const Json& p)
{
    require(num(p, "energy") > 0 && num(p, "step") > 0, "params: energy and step must be positive");
    require(integer(p, "graph_orbits") >= 0 && integer(p, "jacobi_geodesics") >= 0,
            "params: ensemble sizes must be >= 0");
    require(integer(p, "bins") >= 1, "params.bins: need >= 1");
    require(num(p, "graph_duration") > 0 && num(p, "jacobi_length") > 0 && num(p, "jacobi_ds") > 0,
            "params: durations must be positive");
    interval(p.at("window"), "params.window");
    require(num(p, "alpha") > 0, "params.alpha: must be positive");
    require(integer(p, "seed_theta") >= 1 && integer(p, "seed_r") >= 1, "params: seed grid must be non-empty");
    require(num(p, "seed_jitter") >= 0 && num(p, "seed_jitter") <= 1, "params.seed_jitter: must lie in [0, 1]");
    require(integer(p, "max_period") >= 1, "params.max_period: need >= 1");
    require(num(p, "map_step") > 0, "params.map_step: must be positive");
}

void validate_params(const std::string& scenario, const Json& p, const SystemSpec& sys)
{
    if (scenario == "flat-baseline" || scenario == "entropy-table") {
        validate_entropy(p);
        if (scenario == "flat-baseline") {
            require(integer(p, "verdict_graph_orbits") >= 0, "params.verdict_graph_orbits: need >= 0");
            require(num(p, "verdict_graph_duration") > 0, "params.verdict_graph_duration: must be positive");
            require(integer(p, "verdict_seed_theta") >= 1 && integer(p, "verdict_seed_r") >= 1,
                    "params: verdict seed grid must be non-empty");
            require(integer(p, "verdict_max_period") >= 1, "params.verdict_max_period: need >= 1");
        }
    } else if (scenario == "kam-sweep") {
        require(sys.near_integrable.has_value(), "kam-sweep needs a near-integrable system");
        require(p.at("directions").is_array() && !p.at("directions").empty(), "params.directions: non-empty array");
        for (const auto& d : p.at("directions")) {
            const auto v = number_list(d, "params.directions[]");
            require(v.size() == 2 && (v[0] != 0 || v[1] != 0), "params.directions[]: nonzero pair");
        }
        for (double e : number_list(p.at("epsilons"), "params.epsilons"))
            require(e >= 0, "params.epsilons: must be >= 0");
        require(num(p, "energy") > 0 && num(p, "duration") > 0 && num(p, "step") > 0,
                "params: energy, duration and step must be positive");
        require(integer(p, "bins") >= 1 && integer(p, "K") >= 1 && num(p, "tau") >= 0,
                "params: bins, K >= 1 and tau >= 0");
    } else if (scenario == "twist-check") {
        require(!sys.metric.has_value() && sys.kind != "constant", "twist-check needs a near-integrable system");
        interval(p.at("window"), "params.window");
        require(num(p, "alpha") > 0 && num(p, "energy") > 0 && num(p, "delta") > 0 && num(p, "step") > 0,
                "params: alpha, energy, delta and step must be positive");
        require(integer(p, "n_theta") >= 1 && integer(p, "n_r") >= 1, "params: grid must be non-empty");
    } else if (scenario == "revolution-torus") {
        require(sys.metric && sys.metric->kind == MetricKind::revolution,
                "revolution-torus needs a geodesic system with a revolution metric");
        for (const char* k : {"energy", "step", "jacobi_length", "jacobi_ds", "clairaut_duration", "clairaut_step"})
            require(num(p, k) > 0, std::string("params.") + k + ": must be positive");
        require(integer(p, "trajectory_stride") >= 1, "params.trajectory_stride: need >= 1");
    } else if (scenario == "pipeline") {
        validate_assess(p);
    }
}

} // namespace

ScenarioConfig parse_config(const Json& raw)
{
    if (!raw.is_object())
        throw ConfigError("config: expected a JSON object");
    for (auto it = raw.begin(); it != raw.end(); ++it) {
        static const std::vector<std::string> keys{"scenario", "system", "params", "seed", "workers", "output"};
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
            throw ConfigError("config: unknown key '" + it.key() + "'");
    }
    if (!raw.contains("scenario") || !raw.at("scenario").is_string())
        throw ConfigError("config: 'scenario' (string) is required");
    ScenarioConfig cfg;
    cfg.scenario = raw.at("scenario").get<std::string>();
    const Json defaults = scenario_defaults(cfg.scenario);

    cfg.system = system_from_json(raw.contains("system") ? raw.at("system") : defaults.at("system"));
    cfg.params = merge_params(defaults.at("params"), raw.contains("params") ? raw.at("params") : Json::object());

    if (raw.contains("seed")) {
        const auto& s = raw.at("seed");
        require(s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0),
                "config.seed: expected a non-negative 64-bit integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    if (raw.contains("workers")) {
        const auto& w = raw.at("workers");
        require(w.is_number_integer() && w.get<std::int64_t>() >= 0 && w.get<std::int64_t>() <= 4096,
                "config.workers: expected an integer in [0, 4096]");
        cfg.workers = w.get<unsigned>();
    }
    if (raw.contains("output")) {
        require(raw.at("output").is_string(), "config.output: expected a string");
        cfg.output = raw.at("output").get<std::string>();
    }
    validate_params(cfg.scenario, cfg.params, cfg.system);
    return cfg;
}

Json ScenarioConfig::echo() const
{
    return Json{{"scenario", scenario}, {"system", to_json(system)}, {"params", params}, {"seed", seed}};
}

void apply_override(Json& raw, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;
    if (!raw.is_object())
        raw = Json::object();
    Json* node = &raw;
    std::size_t pos = 0;
    while (true) {
        const auto dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty())
            throw ConfigError("--set: malformed key '" + key + "'");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        Json& child = (*node)[part];
        if (child.is_null())
            child = Json::object();
        if (!child.is_object())
            throw ConfigError("--set: '" + key.substr(0, dot) + "' is not an object");
        node = &child;
        pos = dot + 1;
    }
}

namespace {

struct EntropyOutcome {
    CoverTable table;
    HpolEstimate estimate;
};

EntropyOutcome run_entropy(const Hamiltonian& H, const Json& p, unsigned workers)
{
    const NetSpec net = net_from(p);
    const double Delta = num(p, "Delta");
    const auto times = log_times(num(p, "t_min"), num(p, "t_max"), integer(p, "n_times"), Delta);
    const auto eps = p.at("epsilons").is_null() ? epsilon_ladder(net_diameter(H, net))
                                                : number_list(p.at("epsilons"), "params.epsilons");
    CoverOptions co;
    co.step = num(p, "step");
    co.workers = workers;
    EntropyOutcome out;
    out.table = cover_table(H, net, times, eps, Delta, co);
    out.estimate = hpol_estimate(out.table, times.front(), times.back());
    return out;
}

std::string cover_greedy_csv(const CoverTable& t)
{
    CoverTable raw = t;
    raw.G = t.greedy;
    return cover_table_csv(raw);
}

AssessOptions assess_from(const Json& p, std::uint64_t seed, unsigned workers)
{
    AssessOptions o;
    o.energy = num(p, "energy");
    o.step = num(p, "step");
    o.graph_orbits = integer(p, "graph_orbits");
    o.graph_duration = num(p, "graph_duration");
    o.bins = integer(p, "bins");
    o.graph_tolerance = num(p, "graph_tolerance");
    o.jacobi_geodesics = integer(p, "jacobi_geodesics");
    o.jacobi_length = num(p, "jacobi_length");
    o.jacobi_ds = num(p, "jacobi_ds");
    o.swap_axes = p.at("swap_axes").get<bool>();
    o.section_angle = num(p, "section_angle");
    o.window = interval(p.at("window"), "params.window");
    o.alpha = num(p, "alpha");
    o.seed_theta = integer(p, "seed_theta");
    o.seed_r = integer(p, "seed_r");
    o.search.max_period = integer(p, "max_period");
    o.search.map_step = num(p, "map_step");
    o.workers = workers;
    const double jitter = num(p, "seed_jitter");
    if (jitter > 0.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        o.section_angle += jitter * u(rng);
    }
    return o;
}

Artifacts entropy_scenario(const ScenarioConfig& cfg, bool with_verdict)
{
    const auto H = cfg.system.hamiltonian();
    const auto& p = cfg.params;
    const auto ent = run_entropy(*H, p, cfg.workers);
    Artifacts a;
    a.files["cover_table.csv"] = cover_table_csv(ent.table);
    a.files["cover_table_greedy.csv"] = cover_greedy_csv(ent.table);
    a.files["hpol.json"] = dump_json(to_json(ent.estimate));
    std::ostringstream s;
    s << "h_pol slope " << format_double(ent.estimate.slope) << " at eps " << format_double(ent.estimate.epsilon_used)
      << " over t in [" << format_double(ent.estimate.t_min) << ", " << format_double(ent.estimate.t_max) << "]\n";
    if (with_verdict) {
        AssessOptions o;
        o.energy = num(p, "energy");
        o.graph_orbits = integer(p, "verdict_graph_orbits");
        o.graph_duration = num(p, "verdict_graph_duration");
        o.seed_theta = integer(p, "verdict_seed_theta");
        o.seed_r = integer(p, "verdict_seed_r");
        o.search.max_period = integer(p, "verdict_max_period");
        o.workers = cfg.workers;
        const auto verdict = cfg.system.metric ? theorem_a_pipeline(*cfg.system.metric_family(), o)
                                               : assess_system(*H, o);
        a.files["verdict.json"] = dump_json(to_json(verdict));
        s << verdict_summary(verdict);
    }
    a.summary = s.str();
    return a;
}

Artifacts kam_scenario(const ScenarioConfig& cfg)
{
    const auto& p = cfg.params;
    std::vector<Vec2> dirs;
    for (const auto& d : p.at("directions"))
        dirs.emplace_back(d[0].get<double>(), d[1].get<double>());
    const auto eps = number_list(p.at("epsilons"), "params.epsilons");
    KamScanOptions o;
    o.energy = num(p, "energy");
    o.duration = num(p, "duration");
    o.step = num(p, "step");
    o.bins = integer(p, "bins");
    o.tau = num(p, "tau");
    o.K = p.at("K").get<std::int64_t>();
    o.min_margin = num(p, "min_margin");
    o.workers = cfg.workers;
    const auto scan = kam_survival_scan(*cfg.system.near_integrable, dirs, eps, o);

    Json per_dir = Json::array();
    std::ostringstream s;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        std::vector<double> xs, dev;
        bool all_graph = true, skipped = false;
        for (std::size_t j = 0; j < eps.size(); ++j) {
            const auto& row = scan.rows[d * eps.size() + j];
            skipped = skipped || row.skipped;
            if (row.skipped)
                continue;
            all_graph = all_graph && row.fit.verdict == TorusVerdict::graph;
            if (row.epsilon > 0 && row.max_deviation > 0) {
                xs.push_back(row.epsilon);
                dev.push_back(row.max_deviation);
            }
        }
        Json e{{"direction", Json::array({dirs[d][0], dirs[d][1]})},
               {"skipped", skipped},
               {"all_graph", !skipped && all_graph},
               {"delta", scan.delta[d]},
               {"confined_within_factor2", bool(scan.confined_within_factor2[d])}};
        e["deviation_slope"] = xs.size() >= 2 ? Json(loglog_slope(xs, dev)) : Json(nullptr);
        per_dir.push_back(e);
        s << "direction (" << format_double(dirs[d][0]) << ", " << format_double(dirs[d][1]) << "): "
          << (skipped ? "skipped" : (all_graph ? "all graph" : "not all graph"));
        if (xs.size() >= 2)
            s << ", deviation slope " << format_double(loglog_slope(xs, dev));
        s << '\n';
    }
    Artifacts a;
    a.files["kam_scan.csv"] = kam_scan_csv(scan);
    a.files["kam_summary.json"] = dump_json(Json{{"directions", per_dir}});
    a.summary = s.str();
    return a;
}

Artifacts twist_scenario(const ScenarioConfig& cfg)
{
    const auto H = cfg.system.hamiltonian();
    const auto& p = cfg.params;
    const auto dom = SectionDomain::create(*H, num(p, "theta10"), num(p, "energy"), num(p, "alpha"),
                                           interval(p.at("window"), "params.window"));
    const auto grid = section_grid(dom, integer(p, "n_theta"), integer(p, "n_r"));
    ReturnOptions ro;
    ro.step = num(p, "step");
    const auto report = twist_report(*H, dom, grid, num(p, "delta"), ro);
    std::vector<ReturnSample> samples;
    for (const auto& pt : grid)
        samples.push_back(numeric_return_map(*H, dom, pt, ro));
    Artifacts a;
    const Json tj = to_json(report);
    a.files["twist.json"] = dump_json(tj);
    a.files["section.csv"] = section_csv(samples);
    std::ostringstream s;
    s << "min twist " << format_double(report.min_twist);
    if (!tj.at("max_abs_fd_minus_closed").is_null())
        s << ", max |fd - closed| " << format_double(tj.at("max_abs_fd_minus_closed").get<double>());
    s << '\n';
    a.summary = s.str();
    return a;
}

Artifacts revolution_scenario(const ScenarioConfig& cfg)
{
    const auto family = *cfg.system.metric_family();
    const GeodesicHamiltonian H(family.realized());
    const auto& p = cfg.params;
    const double e = num(p, "energy"), step = num(p, "step");
    const double R0 = family.spec().R0, rho = family.spec().rho;

    Json orbits = Json::array();
    std::ostringstream s;
    std::vector<double> conjugate;
    for (const auto& [name, th1, radius] : {std::tuple{"outer", 0.0, R0 + rho}, std::tuple{"inner", 0.5, R0 - rho}}) {
        const double p2 = kTwoPi * radius * std::sqrt(e);
        const PhaseState x0(Vec2(th1, 0.0), Vec2(0.0, p2));
        const double T = p2 / (2.0 * e);
        RefineOptions ro;
        ro.step = step;
        const auto orbit = refine_periodic(H, x0, T, ro);
        const auto rep = floquet(H, orbit);
        ClassifiedOrbit co{orbit, rep, 1, SectionPoint(0.0, 0.0)};
        Json entry = orbit_catalog_json({co})[0];
        entry["name"] = name;
        entry["rotation_angle"] = rep.rotation_angle ? Json(*rep.rotation_angle) : Json(nullptr);
        orbits.push_back(entry);
        s << name << " equator: " << to_string(rep.cls) << ", multiplier |lambda| "
          << format_double(std::abs(rep.lambda1)) << '\n';
        if (std::string(name) == "outer") {
            const double L = num(p, "jacobi_length");
            const auto traj = integrate(H, x0, L / (2.0 * std::sqrt(e)) + step, step);
            JacobiOptions jo;
            jo.ds = num(p, "jacobi_ds");
            conjugate = jacobi_conjugate_scan(family.realized(), traj, L, jo);
        }
    }

    const double T = num(p, "clairaut_duration"), h = num(p, "clairaut_step");
    const auto x0 = shell_state(H, Vec2(0.1, 0.0), Vec2(1.0, 0.37), e);
    const auto traj = integrate(H, x0, T, h);
    const double c0 = clairaut_integral(family, x0);
    double drift = 0.0;
    for (const auto& smp : traj.samples)
        drift = std::max(drift, std::abs(clairaut_integral(family, smp.x) - c0));
    Trajectory thin;
    thin.step = traj.step;
    thin.energy_drift = traj.energy_drift;
    const int stride = integer(p, "trajectory_stride");
    for (std::size_t i = 0; i < traj.samples.size(); i += stride)
        thin.samples.push_back(traj.samples[i]);

    Artifacts a;
    a.files["orbits.json"] = dump_json(orbits);
    a.files["conjugate_points.json"] =
        dump_json(Json{{"geodesic", "outer equator"}, {"length", num(p, "jacobi_length")}, {"arclengths", conjugate}});
    a.files["clairaut.json"] = dump_json(Json{{"initial", c0}, {"max_drift", drift}, {"energy_drift", traj.energy_drift}});
    a.files["trajectory.csv"] = trajectory_csv(H, thin);
    if (!conjugate.empty())
        s << "first conjugate point on the outer equator at s = " << format_double(conjugate.front()) << '\n';
    s << "Clairaut integral drift " << format_double(drift) << '\n';
    a.summary = s.str();
    return a;
}

Artifacts pipeline_scenario(const ScenarioConfig& cfg)
{
    const auto& p = cfg.params;
    AssessOptions o = assess_from(p, cfg.seed, cfg.workers);
    SystemVerdict verdict;
    if (cfg.system.metric) {
        const auto family = *cfg.system.metric_family();
        if (p.at("adapt_section").get<bool>()) {
            verdict = theorem_a_pipeline(family, o);
        } else {
            const GeodesicHamiltonian H(family.realized());
            verdict = assess_system(H, o, &family.realized());
        }
    } else {
        verdict = assess_system(*cfg.system.hamiltonian(), o);
    }
    Artifacts a;
    a.files["verdict.json"] = dump_json(to_json(verdict));
    a.files["orbits.json"] = dump_json(orbit_catalog_json(verdict.hyperbolic_orbits));
    a.summary = verdict_summary(verdict);
    return a;
}

} // namespace

Artifacts execute(const ScenarioConfig& cfg)
{
    if (cfg.scenario == "flat-baseline")
        return entropy_scenario(cfg, true);
    if (cfg.scenario == "entropy-table")
        return entropy_scenario(cfg, false);
    if (cfg.scenario == "kam-sweep")
        return kam_scenario(cfg);
    if (cfg.scenario == "twist-check")
        return twist_scenario(cfg);
    if (cfg.scenario == "revolution-torus")
        return revolution_scenario(cfg);
    if (cfg.scenario == "pipeline")
        return pipeline_scenario(cfg);
    throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

RunOutcome run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir)
{
    RunOutcome out;
    const auto start = std::chrono::steady_clock::now();
    Artifacts art;
    try {
        art = execute(cfg);
    } catch (const ConfigError& e) {
        out.exit_code = 2;
        out.message = e.what();
        return out;
    } catch (const std::exception& e) {
        out.exit_code = 3;
        out.message = e.what();
        return out;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Json files = Json::array();
    for (const auto& [name, _] : art.files)
        files.push_back(name);
    files.push_back("manifest.json");
    Json manifest;
    manifest["config"] = cfg.echo();
    manifest["versions"] = Json{{"toruslab", kVersion},
                                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                              "." + std::to_string(EIGEN_MINOR_VERSION)},
                                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    manifest["outputs"] = files;
    manifest["runtime"] = Json{{"workers", cfg.workers}, {"wall_time_seconds", wall}};
    art.files["manifest.json"] = dump_json(manifest);

    try {
        std::filesystem::create_directories(out_dir);
        for (const auto& [name, content] : art.files) {
            write_text_file(out_dir / name, content);
            out.written.push_back(name);
        }
    } catch (const std::exception& e) {
        out.exit_code = 3;
        out.message = e.what();
        return out;
    }
    out.message = art.summary;
    return out;
}

} // namespace toruslab
