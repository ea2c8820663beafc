#pragma once

// JSON descriptions of systems and CSV/JSON exports of results.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "toruslab/entropy.hpp"
#include "toruslab/flow.hpp"
#include "toruslab/geodesic.hpp"
#include "toruslab/kam.hpp"
#include "toruslab/phase.hpp"
#include "toruslab/section.hpp"
#include "toruslab/spectra.hpp"

namespace toruslab {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double x);

/// System description as used by scenario configs. Exactly one of
/// `near_integrable`, `metric` is set unless kind is "constant".
struct SystemSpec {
    /// "near-integrable", "geodesic" or "constant"
    std::string kind = "near-integrable";
    std::optional<NearIntegrableHamiltonian> near_integrable;
    std::optional<MetricSpec> metric;
    double level = 0.0;

    std::shared_ptr<const Hamiltonian> hamiltonian() const;
    /// Realized metric for geodesic systems.
    std::optional<MetricFamily> metric_family() const;
};

// Parsers throw ConfigError on unknown keys, wrong types or invalid values.
QuadraticForm quadratic_from_json(const Json& j);
FourierPerturbation perturbation_from_json(const Json& j);
NearIntegrableHamiltonian near_integrable_from_json(const Json& j);
MetricSpec metric_spec_from_json(const Json& j);
SystemSpec system_from_json(const Json& j);

Json to_json(const QuadraticForm& h);
Json to_json(const FourierPerturbation& f);
Json to_json(const NearIntegrableHamiltonian& H);
Json to_json(const MetricSpec& m);
Json to_json(const SystemSpec& s);

/// Columns t, theta1, theta2, r1, r2, H.
std::string trajectory_csv(const Hamiltonian& H, const Trajectory& traj);
/// Columns theta2, r2, theta2_image, r2_image, return_time.
std::string section_csv(const std::vector<ReturnSample>& samples);
Json to_json(const TwistReport& report);
/// Catalog entries: x0, period, multipliers (re, im), class.
Json orbit_catalog_json(const std::vector<ClassifiedOrbit>& orbits);
Json to_json(const FloquetReport& report);
/// Rows are times, one column per epsilon.
std::string cover_table_csv(const CoverTable& table);
Json to_json(const HpolEstimate& est);
/// Columns omega1, omega2, epsilon, coverage, max_residual, lipschitz, verdict.
std::string kam_scan_csv(const KamScan& scan);
Json to_json(const SystemVerdict& v);
/// Multi-line plain-text summary of a verdict.
std::string verdict_summary(const SystemVerdict& v);

/// Pretty JSON with a trailing newline.
std::string dump_json(const Json& j);
/// Writes bytes verbatim (no newline translation).
void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace toruslab
