#include "toruslab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace toruslab {

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

void require_object(const Json& j, const std::string& what, std::initializer_list<const char*> allowed)
{
    if (!j.is_object())
        throw ConfigError(what + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key()))
            throw ConfigError(what + ": unknown key '" + it.key() + "'");
}

double number(const Json& j, const std::string& key, const std::string& what, double fallback)
{
    if (!j.contains(key))
        return fallback;
    const auto& v = j.at(key);
    if (!v.is_number())
        throw ConfigError(what + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        throw ConfigError(what + "." + key + ": must be finite");
    return x;
}

int integer(const Json& j, const std::string& key, const std::string& what, int fallback)
{
    if (!j.contains(key))
        return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer())
        throw ConfigError(what + "." + key + ": expected an integer");
    return v.get<int>();
}

std::array<int, 2> int_pair(const Json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ConfigError(what + ": expected a pair of integers");
    return {j[0].get<int>(), j[1].get<int>()};
}

Json vec_json(const Vec2& v)
{
    return Json::array({v[0], v[1]});
}

Json finite_or_null(double x)
{
    return std::isfinite(x) ? Json(x) : Json(nullptr);
}

template <class F>
auto wrap_construction(const std::string& what, F&& f)
{
    try {
        return f();
    } catch (const ConstructionError& e) {
        throw ConfigError(what + ": " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

} // namespace

QuadraticForm quadratic_from_json(const Json& j)
{
    require_object(j, "h", {"a", "b", "c"});
    const double a = number(j, "a", "h", 1.0), b = number(j, "b", "h", 1.0), c = number(j, "c", "h", 0.0);
    return wrap_construction("h", [&] { return QuadraticForm(a, b, c); });
}

FourierPerturbation perturbation_from_json(const Json& j)
{
    require_object(j, "perturbation", {"preset", "kappa", "terms", "normalization"});
    if (j.contains("preset")) {
        if (j.contains("terms"))
            throw ConfigError("perturbation: 'preset' and 'terms' are exclusive");
        if (!j.at("preset").is_string())
            throw ConfigError("perturbation.preset: expected a string");
        const auto preset = j.at("preset").get<std::string>();
        const double kappa = number(j, "kappa", "perturbation", std::pow(kTwoPi, -5.0));
        if (preset == "cosine-product")
            return FourierPerturbation::cosine_product(kappa);
        if (preset == "cosine-theta1")
            return FourierPerturbation::cosine_theta1(kappa);
        throw ConfigError("perturbation.preset: unknown preset '" + preset + "'");
    }
    std::vector<FourierTerm> terms;
    if (j.contains("terms")) {
        if (!j.at("terms").is_array())
            throw ConfigError("perturbation.terms: expected an array");
        for (const auto& t : j.at("terms")) {
            require_object(t, "perturbation.terms[]", {"k", "phase", "amplitude", "radial"});
            FourierTerm term;
            if (!t.contains("k"))
                throw ConfigError("perturbation.terms[]: missing 'k'");
            term.k = int_pair(t.at("k"), "perturbation.terms[].k");
            term.phase = number(t, "phase", "perturbation.terms[]", 0.0);
            term.amplitude = number(t, "amplitude", "perturbation.terms[]", 1.0);
            if (t.contains("radial")) {
                if (!t.at("radial").is_array())
                    throw ConfigError("perturbation.terms[].radial: expected an array");
                std::vector<Monomial> mons;
                for (const auto& m : t.at("radial")) {
                    require_object(m, "radial[]", {"coeff", "p1", "p2"});
                    Monomial mon{number(m, "coeff", "radial[]", 1.0), integer(m, "p1", "radial[]", 0),
                                 integer(m, "p2", "radial[]", 0)};
                    if (mon.p1 < 0 || mon.p2 < 0)
                        throw ConfigError("radial[]: exponents must be >= 0");
                    mons.push_back(mon);
                }
                term.radial = Polynomial(std::move(mons));
            }
            terms.push_back(std::move(term));
        }
    }
    const double norm = number(j, "normalization", "perturbation", 1.0);
    return wrap_construction("perturbation", [&] { return FourierPerturbation(terms, norm); });
}

NearIntegrableHamiltonian near_integrable_from_json(const Json& j)
{
    require_object(j, "system", {"kind", "h", "perturbation", "epsilon"});
    const auto h = quadratic_from_json(j.contains("h") ? j.at("h") : Json::object());
    const auto f = j.contains("perturbation") ? perturbation_from_json(j.at("perturbation")) : FourierPerturbation();
    const double eps = number(j, "epsilon", "system", 0.0);
    return wrap_construction("system", [&] { return NearIntegrableHamiltonian(h, f, eps); });
}

MetricSpec metric_spec_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("metric: expected an object with a string 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    MetricSpec m;
    if (kind == "flat") {
        require_object(j, "metric", {"kind", "a", "b", "c"});
        m.kind = MetricKind::flat;
        m.a = number(j, "a", "metric", 1.0);
        m.b = number(j, "b", "metric", 1.0);
        m.c = number(j, "c", "metric", 0.0);
    } else if (kind == "conformal") {
        require_object(j, "metric", {"kind", "u", "amplitude"});
        m.kind = MetricKind::conformal;
        m.amplitude = number(j, "amplitude", "metric", 0.0);
        if (j.contains("u")) {
            if (!j.at("u").is_array())
                throw ConfigError("metric.u: expected an array");
            for (const auto& mode : j.at("u")) {
                require_object(mode, "metric.u[]", {"k", "cos", "sin"});
                if (!mode.contains("k"))
                    throw ConfigError("metric.u[]: missing 'k'");
                m.u.push_back(FourierMode{int_pair(mode.at("k"), "metric.u[].k"), number(mode, "cos", "metric.u[]", 0.0),
                                          number(mode, "sin", "metric.u[]", 0.0)});
            }
        }
    } else if (kind == "revolution") {
        require_object(j, "metric", {"kind", "R0", "rho"});
        m.kind = MetricKind::revolution;
        m.R0 = number(j, "R0", "metric", 2.0);
        m.rho = number(j, "rho", "metric", 1.0);
    } else {
        throw ConfigError("metric.kind: unknown kind '" + kind + "'");
    }
    wrap_construction("metric", [&] { return build_metric(m); });
    return m;
}

SystemSpec system_from_json(const Json& j)
{
    if (!j.is_object())
        throw ConfigError("system: expected an object");
    SystemSpec s;
    if (j.contains("kind")) {
        if (!j.at("kind").is_string())
            throw ConfigError("system.kind: expected a string");
        s.kind = j.at("kind").get<std::string>();
    }
    if (s.kind == "near-integrable") {
        s.near_integrable = near_integrable_from_json(j);
    } else if (s.kind == "geodesic") {
        require_object(j, "system", {"kind", "metric"});
        if (!j.contains("metric"))
            throw ConfigError("system: geodesic systems need a 'metric'");
        s.metric = metric_spec_from_json(j.at("metric"));
    } else if (s.kind == "constant") {
        require_object(j, "system", {"kind", "level"});
        s.level = number(j, "level", "system", 0.0);
    } else {
        throw ConfigError("system.kind: unknown kind '" + s.kind + "'");
    }
    return s;
}

std::shared_ptr<const Hamiltonian> SystemSpec::hamiltonian() const
{
    if (near_integrable)
        return std::make_shared<NearIntegrableHamiltonian>(*near_integrable);
    if (metric)
        return std::make_shared<GeodesicHamiltonian>(build_metric(*metric).realized());
    return std::make_shared<ConstantHamiltonian>(level);
}

std::optional<MetricFamily> SystemSpec::metric_family() const
{
    if (!metric)
        return std::nullopt;
    return build_metric(*metric);
}

Json to_json(const QuadraticForm& h)
{
    Json j;
    j["a"] = h.a();
    j["b"] = h.b();
    j["c"] = h.c();
    return j;
}

Json to_json(const FourierPerturbation& f)
{
    Json terms = Json::array();
    for (const auto& t : f.terms()) {
        Json radial = Json::array();
        for (const auto& m : t.radial.terms())
            radial.push_back(Json{{"coeff", m.coeff}, {"p1", m.p1}, {"p2", m.p2}});
        terms.push_back(Json{{"k", Json::array({t.k[0], t.k[1]})},
                             {"phase", t.phase},
                             {"amplitude", t.amplitude},
                             {"radial", radial}});
    }
    Json j;
    j["terms"] = terms;
    j["normalization"] = f.normalization();
    return j;
}

Json to_json(const NearIntegrableHamiltonian& H)
{
    Json j;
    j["kind"] = "near-integrable";
    j["h"] = to_json(H.core());
    j["perturbation"] = to_json(H.perturbation());
    j["epsilon"] = H.epsilon();
    return j;
}

Json to_json(const MetricSpec& m)
{
    Json j;
    j["kind"] = to_string(m.kind);
    switch (m.kind) {
    case MetricKind::flat:
        j["a"] = m.a;
        j["b"] = m.b;
        j["c"] = m.c;
        break;
    case MetricKind::conformal: {
        Json u = Json::array();
        for (const auto& mode : m.u)
            u.push_back(Json{{"k", Json::array({mode.k[0], mode.k[1]})}, {"cos", mode.cos_coeff}, {"sin", mode.sin_coeff}});
        j["u"] = u;
        j["amplitude"] = m.amplitude;
        break;
    }
    case MetricKind::revolution:
        j["R0"] = m.R0;
        j["rho"] = m.rho;
        break;
    }
    return j;
}

Json to_json(const SystemSpec& s)
{
    if (s.near_integrable)
        return to_json(*s.near_integrable);
    if (s.metric)
        return Json{{"kind", "geodesic"}, {"metric", to_json(*s.metric)}};
    return Json{{"kind", "constant"}, {"level", s.level}};
}

std::string trajectory_csv(const Hamiltonian& H, const Trajectory& traj)
{
    std::string out = "t,theta1,theta2,r1,r2,H\n";
    for (const auto& s : traj.samples) {
        out += format_double(s.t);
        for (double v : {s.x.theta[0], s.x.theta[1], s.x.r[0], s.x.r[1], H.value(s.x.theta, s.x.r)}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string section_csv(const std::vector<ReturnSample>& samples)
{
    std::string out = "theta2,r2,theta2_image,r2_image,return_time\n";
    for (const auto& s : samples) {
        out += format_double(s.point.theta2) + ',' + format_double(s.point.r2) + ',' +
               format_double(s.image.theta2) + ',' + format_double(s.image.r2) + ',' +
               format_double(s.return_time) + '\n';
    }
    return out;
}

Json to_json(const TwistReport& report)
{
    Json grid = Json::array();
    double worst = 0.0;
    bool any_closed = false;
    for (const auto& e : report.grid) {
        Json row{{"theta2", e.point.theta2},
                 {"r2", e.point.r2},
                 {"twist_fd", e.twist_fd},
                 {"richardson_gap", e.richardson_gap}};
        if (e.twist_closed) {
            row["twist_closed"] = *e.twist_closed;
            worst = std::max(worst, std::abs(e.twist_fd - *e.twist_closed));
            any_closed = true;
        } else {
            row["twist_closed"] = nullptr;
        }
        grid.push_back(row);
    }
    Json j;
    j["min_twist"] = report.min_twist;
    j["max_abs_fd_minus_closed"] = any_closed ? Json(worst) : Json(nullptr);
    j["grid"] = grid;
    return j;
}

Json to_json(const FloquetReport& r)
{
    Json j;
    j["class"] = to_string(r.cls);
    j["bott_label"] = r.bott_label;
    j["multipliers"] = Json::array({Json{{"re", r.lambda1.real()}, {"im", r.lambda1.imag()}},
                                    Json{{"re", r.lambda2.real()}, {"im", r.lambda2.imag()}}});
    j["trivial_pair_error"] = r.trivial_pair_error;
    j["determinant"] = r.determinant;
    j["rotation_angle"] = r.rotation_angle ? Json(*r.rotation_angle) : Json(nullptr);
    return j;
}

Json orbit_catalog_json(const std::vector<ClassifiedOrbit>& orbits)
{
    Json arr = Json::array();
    for (const auto& o : orbits) {
        Json e;
        e["x0"] = Json{{"theta", vec_json(o.orbit.x0.theta)}, {"r", vec_json(o.orbit.x0.r)}};
        e["period"] = o.orbit.period;
        e["winding"] = vec_json(o.orbit.winding);
        e["residual"] = o.orbit.residual;
        e["section_period"] = o.section_period;
        e["section_point"] = Json::array({o.section_point.theta2, o.section_point.r2});
        e["multipliers"] = Json::array({Json{{"re", o.report.lambda1.real()}, {"im", o.report.lambda1.imag()}},
                                        Json{{"re", o.report.lambda2.real()}, {"im", o.report.lambda2.imag()}}});
        e["class"] = to_string(o.report.cls);
        e["bott_label"] = o.report.bott_label;
        arr.push_back(e);
    }
    return arr;
}

std::string cover_table_csv(const CoverTable& table)
{
    std::string out = "t";
    for (double e : table.epsilons)
        out += ",eps=" + format_double(e);
    out += '\n';
    for (std::size_t i = 0; i < table.times.size(); ++i) {
        out += format_double(table.times[i]);
        for (std::size_t j = 0; j < table.epsilons.size(); ++j)
            out += ',' + std::to_string(table.G[i][j]);
        out += '\n';
    }
    return out;
}

Json to_json(const HpolEstimate& est)
{
    Json ladder = Json::array();
    for (const auto& s : est.ladder)
        ladder.push_back(Json{{"epsilon", s.epsilon}, {"slope", s.slope}, {"r2", s.r2}});
    Json j;
    j["slope"] = est.slope;
    j["t_min"] = est.t_min;
    j["t_max"] = est.t_max;
    j["epsilon_used"] = est.epsilon_used;
    j["r2_fit"] = est.r2_fit;
    j["ladder"] = ladder;
    return j;
}

std::string kam_scan_csv(const KamScan& scan)
{
    std::string out = "omega1,omega2,epsilon,coverage,max_residual,lipschitz,verdict\n";
    for (const auto& r : scan.rows) {
        out += format_double(r.omega[0]) + ',' + format_double(r.omega[1]) + ',' + format_double(r.epsilon) + ',';
        if (r.skipped) {
            out += ",,,skipped\n";
            continue;
        }
        out += format_double(r.fit.coverage) + ',' + format_double(r.fit.max_residual) + ',' +
               format_double(r.fit.lipschitz) + ',' + to_string(r.fit.verdict) + '\n';
    }
    return out;
}

Json to_json(const SystemVerdict& v)
{
    Json j;
    j["hpol_class"] = v.hpol_class;
    j["graph_fraction"] = v.graph_fraction;
    j["has_graph_foliation_evidence"] = v.has_graph_foliation_evidence;
    j["has_conjugate_points"] = v.has_conjugate_points;
    Json cp = Json::array();
    for (double s : v.conjugate_points)
        cp.push_back(finite_or_null(s));
    j["conjugate_points"] = cp;
    j["periodic_orbits_found"] = v.periodic_orbits_found;
    j["hyperbolic_orbits"] = orbit_catalog_json(v.hyperbolic_orbits);
    j["notes"] = v.notes;
    return j;
}

std::string verdict_summary(const SystemVerdict& v)
{
    std::ostringstream os;
    os << "hpol class:          " << v.hpol_class << '\n'
       << "graph evidence:      " << (v.has_graph_foliation_evidence ? "yes" : "no") << " (fraction "
       << format_double(v.graph_fraction) << ")\n"
       << "conjugate points:    " << (v.has_conjugate_points ? "yes" : "no");
    if (!v.conjugate_points.empty())
        os << " (first at s = " << format_double(v.conjugate_points.front()) << ")";
    os << '\n'
       << "periodic orbits:     " << v.periodic_orbits_found << '\n'
       << "hyperbolic orbits:   " << v.hyperbolic_orbits.size() << '\n';
    for (const auto& o : v.hyperbolic_orbits)
        os << "  period " << format_double(o.orbit.period) << ", multiplier "
           << format_double(o.report.lambda1.real()) << '\n';
    for (const auto& n : v.notes)
        os << "note: " << n << '\n';
    return os.str();
}

std::string dump_json(const Json& j)
{
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw Error("failed writing " + path.string());
}

} // namespace toruslab
