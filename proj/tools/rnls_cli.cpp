#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rnls/manifest.hpp"
#include "rnls/model_core.hpp"

using namespace rnls;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;
    bool json_out = false;
};

void write_text(const std::string& path, const std::string& content) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << content;
}

void emit(const GlobalOpts& g, const nlohmann::json& machine, const std::string& human) {
    if (g.json_out)
        std::cout << machine.dump(2) << "\n";
    else
        std::cout << human << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the two-component quadratic NLS system"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "key=value configuration file");
    app.add_option("--out", g.out_dir, "output directory (env RNLS_OUT overrides)");
    auto* seed_opt = app.add_option("--seed", g.seed, "master RNG seed");
    app.add_option("--threads", g.threads, "worker parallelism for sweeps");
    app.add_flag("--json", g.json_out, "machine-readable stdout");

    // point / range options shared by subcommands, applied over the config file
    double kappa = 0.0, gamma = 1.0, omega = 1.0;
    double klo = 0.0, khi = 0.0, glo = 1.0, ghi = 1.0;
    int kcount = 1, gcount = 1;
    std::string experiment = "regions", state, direction;

    auto* regions = app.add_subcommand("regions", "J/K region map over a parameter grid");
    auto* branch = app.add_subcommand("branch", "branch points at one (kappa, gamma)");
    auto* ground = app.add_subcommand("ground-state", "Nehari ground-state classification");
    auto* spectrum = app.add_subcommand("spectrum", "linearized block spectra at a state");
    auto* evolvec = app.add_subcommand("evolve", "time evolution of a stationary state");
    auto* probe = app.add_subcommand("probe", "orbital stability probe");
    auto* sweep = app.add_subcommand("sweep", "parameter sweep over an experiment");
    auto* diagram = app.add_subcommand("diagram", "bifurcation diagram along gamma");
    for (auto* sub : {regions, branch, ground, spectrum, evolvec, probe, sweep, diagram})
        sub->fallthrough();

    for (auto* sub : {branch, ground, spectrum, evolvec, probe, diagram}) {
        sub->add_option("--kappa", kappa, "coupling kappa");
        sub->add_option("--gamma", gamma, "coupling gamma");
        sub->add_option("--omega", omega, "frequency omega");
    }
    for (auto* sub : {spectrum, evolvec, probe}) {
        sub->add_option("--state", state, "semitrivial | plus_minus | minus_plus | auto");
    }
    probe->add_option("--direction", direction,
                      "random_even | psi_first_component | phase_kick");
    for (auto* sub : {regions, sweep}) {
        sub->add_option("--kappa-lo", klo);
        sub->add_option("--kappa-hi", khi);
        sub->add_option("--kappa-count", kcount);
        sub->add_option("--gamma-lo", glo);
        sub->add_option("--gamma-hi", ghi);
        sub->add_option("--gamma-count", gcount);
        sub->add_option("--omega", omega);
    }
    sweep->add_option("--experiment", experiment,
                      "regions | branch | spectrum | probe | ground_state");
    diagram->add_option("--gamma-lo", glo);
    diagram->add_option("--gamma-hi", ghi);
    diagram->add_option("--gamma-count", gcount);

    CLI11_PARSE(app, argc, argv);

    try {
        if (const char* env = std::getenv("RNLS_OUT"); env && *env) g.out_dir = env;
        ConfigMap cfg;
        if (!g.config_path.empty()) cfg = parse_config_file(g.config_path);
        CLI::App* sub = app.get_subcommands().front();
        auto given = [&](const std::string& name) {
            auto* o = sub->get_option_no_throw(name);
            return o && o->count() > 0;
        };
        auto fmtd = [](double v) {
            char b[40];
            std::snprintf(b, sizeof(b), "%.17g", v);
            return std::string(b);
        };
        if (given("--kappa")) cfg["kappa"] = fmtd(kappa);
        if (given("--gamma")) cfg["gamma"] = fmtd(gamma);
        if (given("--omega")) cfg["omega"] = fmtd(omega);
        if (given("--state")) cfg["state"] = state;
        if (given("--direction")) cfg["probe.direction"] = direction;
        RunInputs in = inputs_from_config(cfg, sub->get_name());
        if (seed_opt->count() > 0) in.seed = g.seed;

        SweepSpec spec;
        spec.kappa_lo = klo;
        spec.kappa_hi = khi;
        spec.kappa_count = kcount;
        spec.gamma_lo = glo;
        spec.gamma_hi = ghi;
        spec.gamma_count = gcount;
        spec.omega = cfg_double(cfg, "omega", omega);
        spec.parallelism = g.threads;

        if (sub == regions) {
            const std::string csv = regions_csv(spec);
            const std::string path = g.out_dir + "/regions.csv";
            write_text(path, csv);
            emit(g, {{"file", path}}, "wrote " + path);
        } else if (sub == branch) {
            std::cout << branch_csv(in.coupling());
        } else if (sub == ground) {
            RunManifest m = run_ground_state(in);
            emit(g, nlohmann::json::parse(m.to_json()),
                 "run " + m.id() + ": " + m.verdicts_json);
        } else if (sub == spectrum) {
            std::cout << spectrum_report(in);
        } else if (sub == evolvec) {
            RunManifest m = run_evolve(in, g.out_dir);
            emit(g, nlohmann::json::parse(m.to_json()),
                 "run " + m.id() + ": " + m.verdicts_json);
        } else if (sub == probe) {
            RunManifest m = run_probe(in, g.out_dir);
            emit(g, nlohmann::json::parse(m.to_json()),
                 "run " + m.id() + ": " + m.verdicts_json);
        } else if (sub == sweep) {
            spec.experiment = sweep_experiment_from(experiment);
            const std::string csv = sweep_csv(spec, in, in.seed);
            const std::string path =
                g.out_dir + "/sweep_" + to_string(spec.experiment) + ".csv";
            write_text(path, csv);
            emit(g, {{"file", path}}, "wrote " + path);
        } else if (sub == diagram) {
            const std::string csv =
                diagram_csv(cfg_double(cfg, "kappa", kappa), glo, ghi, gcount, spec.omega);
            const std::string path = g.out_dir + "/diagram.csv";
            write_text(path, csv);
            emit(g, {{"file", path}}, "wrote " + path);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
