#ifndef RNLS_MANIFEST_HPP
#define RNLS_MANIFEST_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rnls/evolution.hpp"
#include "rnls/params.hpp"

namespace rnls {

inline constexpr const char* kToolVersion = "rnls 0.1.0";

// Flat key=value configuration: '#' comments, dotted section keys
// (grid.n=1024), later duplicates override earlier ones.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

double cfg_double(const ConfigMap& c, const std::string& key, double fallback);
int cfg_int(const ConfigMap& c, const std::string& key, int fallback);
bool cfg_bool(const ConfigMap& c, const std::string& key, bool fallback);
std::string cfg_string(const ConfigMap& c, const std::string& key,
                       const std::string& fallback);

// Everything that determines the numbers a run produces. The run id is a
// content hash of the canonical serialization of these fields.
struct RunInputs {
    std::string command;
    double kappa = 0.0;
    double gamma = 1.0;
    double omega = 1.0;
    int dim = 1;
    int n = 1024;
    double extent = 80.0;
    EvolutionConfig evo;
    double delta = 1e-3;
    std::string direction = "random_even";  // probe direction
    std::string state = "auto";  // semitrivial | plus_minus | minus_plus | auto
    std::uint64_t seed = 0;

    Grid make_grid() const;
    CouplingParams coupling() const { return CouplingParams{kappa, gamma}; }
};

RunInputs inputs_from_config(const ConfigMap& c, const std::string& command);

std::string run_id(const RunInputs& in);

struct RunManifest {
    RunInputs inputs;
    std::string verdicts_json = "{}";  // structured results, JSON object
    std::vector<std::string> artifact_paths;
    double wall_time = 0.0;

    std::string id() const { return run_id(inputs); }
    std::string to_json() const;
};

// Selects the stationary state named by in.state ("auto" picks semitrivial
// when no coupled branch exists, otherwise the plus_minus point).
BranchPoint select_state(const RunInputs& in);

enum class SweepExperiment { regions, branch, spectrum, probe, ground_state };
SweepExperiment sweep_experiment_from(const std::string& name);
const char* to_string(SweepExperiment e);

struct SweepSpec {
    double kappa_lo = 0.0, kappa_hi = 0.0;
    int kappa_count = 1;
    double gamma_lo = 1.0, gamma_hi = 1.0;
    int gamma_count = 1;
    double omega = 1.0;
    SweepExperiment experiment = SweepExperiment::regions;
    int parallelism = 1;

    void validate() const;
};

// CSV builders (deterministic, 17 significant digits for floats).
std::string regions_csv(const SweepSpec& spec);
std::string branch_csv(const CouplingParams& p);
std::string diagram_csv(double kappa, double gamma_lo, double gamma_hi, int count,
                        double omega);

// Parameter sweep over the spec's grid; each cell runs the experiment with a
// seed derived from (seed, cell index). Failures are recorded in-band in the
// status column. Rows are sorted by (kappa, gamma) regardless of parallelism.
std::string sweep_csv(const SweepSpec& spec, const RunInputs& base, std::uint64_t seed);

// Single-point experiment drivers. Those taking out_dir persist
// out_dir/runs/<run_id>/{manifest.json, ...artifacts}.
RunManifest run_ground_state(const RunInputs& in);
std::string spectrum_report(const RunInputs& in);  // JSON
RunManifest run_evolve(const RunInputs& in, const std::string& out_dir);
RunManifest run_probe(const RunInputs& in, const std::string& out_dir);

}  // namespace rnls

#endif
