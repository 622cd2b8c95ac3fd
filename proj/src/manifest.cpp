#include "rnls/manifest.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "rnls/ground_state.hpp"
#include "rnls/model_core.hpp"
#include "rnls/rng.hpp"
#include "rnls/spectra.hpp"

namespace rnls {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    return out;
}

json inputs_json(const RunInputs& in) {
    return json{{"command", in.command},
                {"kappa", in.kappa},
                {"gamma", in.gamma},
                {"omega", in.omega},
                {"grid", {{"dim", in.dim}, {"n", in.n}, {"L", in.extent}}},
                {"evolve",
                 {{"dt", in.evo.dt},
                  {"t_final", in.evo.t_final},
                  {"nonlinear_substeps", in.evo.nonlinear_substeps},
                  {"monitor_stride", in.evo.monitor_stride},
                  {"dealias", in.evo.dealias}}},
                {"delta", in.delta},
                {"direction", in.direction},
                {"state", in.state},
                {"seed", in.seed}};
}

ProbeDirection direction_from(const std::string& name) {
    if (name == "random_even") return ProbeDirection::random_even;
    if (name == "psi_first_component") return ProbeDirection::psi_first_component;
    if (name == "phase_kick") return ProbeDirection::phase_kick;
    throw std::invalid_argument("unknown probe direction: " + name);
}

ScalarProfile profile_for(const RunInputs& in, const Grid& g) {
    return g.dim == 1 ? phi_closed_form_1d(in.omega, g) : phi_radial(in.omega, g.dim, g);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::filesystem::path run_dir(const std::string& out_dir, const RunManifest& m) {
    return std::filesystem::path(out_dir) / "runs" / m.id();
}

double drift(const std::vector<double>& v) {
    double worst = 0.0;
    for (double x : v) worst = std::max(worst, std::abs(x - v[0]));
    return v.empty() ? 0.0 : worst / std::max(1e-300, std::abs(v[0]));
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

double cfg_double(const ConfigMap& c, const std::string& key, double fallback) {
    auto it = c.find(key);
    if (it == c.end()) return fallback;
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size())
        throw std::invalid_argument("config key " + key + ": bad number '" + it->second + "'");
    return v;
}

int cfg_int(const ConfigMap& c, const std::string& key, int fallback) {
    auto it = c.find(key);
    if (it == c.end()) return fallback;
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size())
        throw std::invalid_argument("config key " + key + ": bad integer '" + it->second +
                                    "'");
    return v;
}

bool cfg_bool(const ConfigMap& c, const std::string& key, bool fallback) {
    auto it = c.find(key);
    if (it == c.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::invalid_argument("config key " + key + ": bad bool '" + it->second + "'");
}

std::string cfg_string(const ConfigMap& c, const std::string& key,
                       const std::string& fallback) {
    auto it = c.find(key);
    return it == c.end() ? fallback : it->second;
}

Grid RunInputs::make_grid() const { return Grid::make(dim, extent, n); }

RunInputs inputs_from_config(const ConfigMap& c, const std::string& command) {
    RunInputs in;
    in.command = command;
    in.kappa = cfg_double(c, "kappa", in.kappa);
    in.gamma = cfg_double(c, "gamma", in.gamma);
    in.omega = cfg_double(c, "omega", in.omega);
    in.dim = cfg_int(c, "grid.dim", in.dim);
    in.n = cfg_int(c, "grid.n", in.n);
    in.extent = cfg_double(c, "grid.L", in.extent);
    in.evo.dt = cfg_double(c, "evolve.dt", in.evo.dt);
    in.evo.t_final = cfg_double(c, "evolve.t_final", in.evo.t_final);
    in.evo.nonlinear_substeps = cfg_int(c, "evolve.substeps", in.evo.nonlinear_substeps);
    in.evo.monitor_stride = cfg_int(c, "evolve.stride", in.evo.monitor_stride);
    in.evo.dealias = cfg_bool(c, "evolve.dealias", in.evo.dealias);
    in.delta = cfg_double(c, "probe.delta", in.delta);
    in.direction = cfg_string(c, "probe.direction", in.direction);
    in.state = cfg_string(c, "state", in.state);
    in.seed = static_cast<std::uint64_t>(cfg_int(c, "seed", static_cast<int>(in.seed)));
    return in;
}

std::string run_id(const RunInputs& in) {
    const std::string canon = inputs_json(in).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunManifest::to_json() const {
    json j;
    j["run_id"] = id();
    j["command"] = inputs.command;
    j["inputs"] = inputs_json(inputs);
    j["verdicts"] = json::parse(verdicts_json);
    j["artifact_paths"] = artifact_paths;
    j["tool_version"] = kToolVersion;
    j["wall_time"] = wall_time;
    return j.dump(2) + "\n";
}

BranchPoint select_state(const RunInputs& in) {
    if (in.state == "semitrivial")
        return BranchPoint{0.0, 1.0, BranchKind::semitrivial, 0.0, 0.0};
    auto pts = branch_points(in.coupling());
    if (in.state == "auto")
        return pts.empty() ? BranchPoint{0.0, 1.0, BranchKind::semitrivial, 0.0, 0.0}
                           : pts.back();
    for (const BranchPoint& bp : pts)
        if (in.state == to_string(bp.kind)) return bp;
    throw std::invalid_argument("state '" + in.state + "' does not exist at (kappa, gamma) = (" +
                                fmt(in.kappa) + ", " + fmt(in.gamma) + ")");
}

SweepExperiment sweep_experiment_from(const std::string& name) {
    if (name == "regions") return SweepExperiment::regions;
    if (name == "branch") return SweepExperiment::branch;
    if (name == "spectrum") return SweepExperiment::spectrum;
    if (name == "probe") return SweepExperiment::probe;
    if (name == "ground_state") return SweepExperiment::ground_state;
    throw std::invalid_argument("unknown sweep experiment: " + name);
}

const char* to_string(SweepExperiment e) {
    switch (e) {
        case SweepExperiment::regions: return "regions";
        case SweepExperiment::branch: return "branch";
        case SweepExperiment::spectrum: return "spectrum";
        case SweepExperiment::probe: return "probe";
        case SweepExperiment::ground_state: return "ground_state";
    }
    return "?";
}

void SweepSpec::validate() const {
    if (kappa_count < 1 || gamma_count < 1)
        throw std::invalid_argument("SweepSpec: counts must be >= 1");
    if (!std::isfinite(kappa_lo) || !std::isfinite(kappa_hi) || !std::isfinite(gamma_lo) ||
        !std::isfinite(gamma_hi))
        throw std::invalid_argument("SweepSpec: ranges must be finite");
    if (!(gamma_lo > 0.0)) throw std::invalid_argument("SweepSpec: gamma range must be > 0");
    if (!(omega > 0.0)) throw std::invalid_argument("SweepSpec: omega must be > 0");
    if (parallelism < 1) throw std::invalid_argument("SweepSpec: parallelism must be >= 1");
}

std::string regions_csv(const SweepSpec& spec) {
    spec.validate();
    std::string out =
        "kappa,gamma,J,K,alpha_plus,beta_minus,alpha_minus,beta_plus\n";
    for (double k : linspace(spec.kappa_lo, spec.kappa_hi, spec.kappa_count)) {
        for (double g : linspace(spec.gamma_lo, spec.gamma_hi, spec.gamma_count)) {
            CouplingParams p{k, g};
            std::string ap, bm, am, bp2;
            for (const BranchPoint& bp : branch_points(p)) {
                if (bp.kind == BranchKind::plus_minus || bp.kind == BranchKind::degenerate) {
                    ap = fmt(bp.alpha);
                    bm = fmt(bp.beta);
                }
                if (bp.kind == BranchKind::minus_plus || bp.kind == BranchKind::degenerate) {
                    am = fmt(bp.alpha);
                    bp2 = fmt(bp.beta);
                }
            }
            out += fmt(k) + "," + fmt(g) + "," + to_string(classify_J(p)) + "," +
                   to_string(classify_K(p)) + "," + ap + "," + bm + "," + am + "," + bp2 +
                   "\n";
        }
    }
    return out;
}

std::string branch_csv(const CouplingParams& p) {
    p.validate();
    std::string out = "kappa,gamma,kind,alpha,beta,residual_line,residual_ellipse\n";
    for (const BranchPoint& bp : branch_points(p))
        out += fmt(p.kappa) + "," + fmt(p.gamma) + "," + to_string(bp.kind) + "," +
               fmt(bp.alpha) + "," + fmt(bp.beta) + "," + fmt(bp.residual_line) + "," +
               fmt(bp.residual_ellipse) + "\n";
    return out;
}

std::string diagram_csv(double kappa, double gamma_lo, double gamma_hi, int count,
                        double omega) {
    if (count < 1 || !(gamma_lo > 0.0) || !(gamma_hi >= gamma_lo) || !(omega > 0.0))
        throw std::invalid_argument("diagram: invalid gamma range");
    std::string out =
        "gamma,alpha_plus,beta_minus,alpha_minus,beta_plus,alpha_0,beta_0,stability\n";
    for (double g : linspace(gamma_lo, gamma_hi, count)) {
        CouplingParams p{kappa, g};
        std::string ap, bm, am, bp2, a0, b0, tag;
        for (const BranchPoint& bp : branch_points(p)) {
            switch (bp.kind) {
                case BranchKind::plus_minus:
                    ap = fmt(bp.alpha);
                    bm = fmt(bp.beta);
                    break;
                case BranchKind::minus_plus:
                    am = fmt(bp.alpha);
                    bp2 = fmt(bp.beta);
                    break;
                case BranchKind::degenerate:
                    a0 = fmt(bp.alpha);
                    b0 = fmt(bp.beta);
                    break;
                case BranchKind::semitrivial: break;
            }
        }
        switch (classify_J(p)) {
            case JRegion::J0: tag = "no_branch"; break;
            case JRegion::J1: tag = "plus_stable"; break;
            case JRegion::J2: tag = "plus_stable;minus_unstable"; break;
            case JRegion::J3: tag = "degenerate_open"; break;
        }
        out += fmt(g) + "," + ap + "," + bm + "," + am + "," + bp2 + "," + a0 + "," + b0 +
               "," + tag + "\n";
    }
    return out;
}

std::string sweep_csv(const SweepSpec& spec, const RunInputs& base, std::uint64_t seed) {
    spec.validate();
    std::string header;
    switch (spec.experiment) {
        case SweepExperiment::regions: header = "kappa,gamma,J,K,status"; break;
        case SweepExperiment::branch:
            header = "kappa,gamma,n_points,alpha_plus,beta_minus,alpha_minus,beta_plus,status";
            break;
        case SweepExperiment::spectrum:
            header = "kappa,gamma,kind,neg_R,ker_R,neg_I,ker_I,status";
            break;
        case SweepExperiment::probe:
            header = "kappa,gamma,verdict,max_dist,growth_time,status";
            break;
        case SweepExperiment::ground_state:
            header = "kappa,gamma,family,action,match_error,status";
            break;
    }

    const auto kappas = linspace(spec.kappa_lo, spec.kappa_hi, spec.kappa_count);
    const auto gammas = linspace(spec.gamma_lo, spec.gamma_hi, spec.gamma_count);
    struct Cell {
        double kappa, gamma;
        std::uint64_t cell_seed;
    };
    std::vector<Cell> cells;
    for (double k : kappas)
        for (double g : gammas)
            cells.push_back({k, g, derive_seed(seed, 9100, cells.size())});
    std::vector<std::string> rows(cells.size());

    // the heavyweight experiments share one immutable profile
    Grid grid = base.make_grid();
    ScalarProfile phi;
    if (spec.experiment == SweepExperiment::spectrum) {
        RunInputs pin = base;
        pin.omega = spec.omega;
        phi = profile_for(pin, grid);
    }

    auto run_cell = [&](std::size_t idx) {
        const Cell& c = cells[idx];
        CouplingParams p{c.kappa, c.gamma};
        std::string row = fmt(c.kappa) + "," + fmt(c.gamma) + ",";
        try {
            switch (spec.experiment) {
                case SweepExperiment::regions:
                    row += std::string(to_string(classify_J(p))) + "," +
                           to_string(classify_K(p)) + ",ok";
                    break;
                case SweepExperiment::branch: {
                    auto pts = branch_points(p);
                    std::string ap, bm, am, bp2;
                    for (const BranchPoint& bp : pts) {
                        if (bp.kind == BranchKind::plus_minus ||
                            bp.kind == BranchKind::degenerate) {
                            ap = fmt(bp.alpha);
                            bm = fmt(bp.beta);
                        }
                        if (bp.kind == BranchKind::minus_plus ||
                            bp.kind == BranchKind::degenerate) {
                            am = fmt(bp.alpha);
                            bp2 = fmt(bp.beta);
                        }
                    }
                    row += std::to_string(pts.size()) + "," + ap + "," + bm + "," + am +
                           "," + bp2 + ",ok";
                    break;
                }
                case SweepExperiment::spectrum: {
                    RunInputs in = base;
                    in.kappa = c.kappa;
                    in.gamma = c.gamma;
                    in.omega = spec.omega;
                    BranchPoint bp = select_state(in);
                    auto [lr, li] = assemble_blocks(bp, p, phi);
                    auto sr = eig_low(lr, 1);
                    auto si = eig_low(li, 1);
                    row += std::string(to_string(bp.kind)) + "," +
                           std::to_string(sr.negative_count) + "," +
                           std::to_string(sr.kernel_dim) + "," +
                           std::to_string(si.negative_count) + "," +
                           std::to_string(si.kernel_dim) + ",ok";
                    break;
                }
                case SweepExperiment::probe: {
                    RunInputs in = base;
                    in.kappa = c.kappa;
                    in.gamma = c.gamma;
                    in.omega = spec.omega;
                    BranchPoint bp = select_state(in);
                    StabilityVerdict v =
                        stability_probe(bp, p, spec.omega, in.delta,
                                        direction_from(in.direction), in.evo, grid,
                                        c.cell_seed);
                    row += std::string(to_string(v.verdict)) + "," + fmt(v.max_dist) + "," +
                           fmt(v.growth_time) + ",ok";
                    break;
                }
                case SweepExperiment::ground_state: {
                    auto v = nehari_minimize(p, spec.omega, grid, c.cell_seed);
                    row += std::string(to_string(v.family)) + "," + fmt(v.action_value) +
                           "," + fmt(v.match_error) + ",ok";
                    break;
                }
            }
        } catch (const std::exception& e) {
            std::string msg = e.what();
            for (char& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            row += "error:" + msg;
        }
        rows[idx] = row;
    };

    const int workers = std::min<int>(spec.parallelism, static_cast<int>(cells.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size();
                     i = next.fetch_add(1))
                    run_cell(i);
            });
        for (auto& t : pool) t.join();
    }

    std::string out = header + "\n";
    for (const std::string& r : rows) out += r + "\n";
    return out;
}

RunManifest run_ground_state(const RunInputs& in) {
    const auto t0 = std::chrono::steady_clock::now();
    Grid grid = in.make_grid();
    GroundStateVerdict v = nehari_minimize(in.coupling(), in.omega, grid, in.seed);
    RunManifest m;
    m.inputs = in;
    json verdicts{{"family", to_string(v.family)},
                  {"action_value", v.action_value},
                  {"match_error", v.match_error},
                  {"iterations", v.iterations},
                  {"projected_gradient", v.projected_gradient},
                  {"K_region", to_string(classify_K(in.coupling()))}};
    m.verdicts_json = verdicts.dump();
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
}

std::string spectrum_report(const RunInputs& in) {
    Grid grid = in.make_grid();
    ScalarProfile phi = profile_for(in, grid);
    BranchPoint bp = select_state(in);
    auto [lr, li] = assemble_blocks(bp, in.coupling(), phi);
    auto block = [&](const BlockOperator& op) {
        auto s = eig_low(op, 10);
        return json{{"eigenvalues", s.eigenvalues},
                    {"negative_count", s.negative_count},
                    {"kernel_dim", s.kernel_dim},
                    {"residuals", s.residuals}};
    };
    json j;
    j["params"] = {{"kappa", in.kappa},
                   {"gamma", in.gamma},
                   {"omega", in.omega},
                   {"alpha", bp.alpha},
                   {"beta", bp.beta},
                   {"state", to_string(bp.kind)}};
    j["grid"] = {{"dim", grid.dim}, {"n", grid.n}, {"L", grid.extent}};
    j["LR"] = block(lr);
    j["LI"] = block(li);
    return j.dump(2) + "\n";
}

namespace {

void check_tail(const Field2& ref) {
    const double tf = tail_mass_fraction(ref);
    if (!(tf < 1e-12))
        throw std::runtime_error("initial state tail mass fraction " + fmt(tf) +
                                 " exceeds 1e-12; enlarge the box");
}

RunManifest persist_run(const RunInputs& in, const std::string& out_dir,
                        const std::string& verdicts, const TrajectorySeries& series,
                        double wall) {
    RunManifest m;
    m.inputs = in;
    m.verdicts_json = verdicts;
    m.wall_time = wall;
    const auto dir = run_dir(out_dir, m);
    std::filesystem::create_directories(dir / "fields");
    write_file(dir / "series.csv", series_csv(series));
    SnapshotMeta meta{in.omega, in.kappa, in.gamma,
                      series.times.empty() ? 0.0 : series.times.back()};
    save_snapshot((dir / "fields" / "final.dat").string(), series.final_state, meta);
    m.artifact_paths = {"series.csv", "fields/final.dat"};
    write_file(dir / "manifest.json", m.to_json());
    return m;
}

}  // namespace

RunManifest run_evolve(const RunInputs& in, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    Grid grid = in.make_grid();
    ScalarProfile phi = profile_for(in, grid);
    Field2 f0 = branch_state(select_state(in), phi);
    check_tail(f0);
    TrajectorySeries s = evolve(f0, in.coupling(), in.evo, &f0);
    json verdicts{{"aborted", s.aborted},
                  {"energy_drift", drift(s.energy)},
                  {"charge_drift", drift(s.charge)},
                  {"samples", s.times.size()}};
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return persist_run(in, out_dir, verdicts.dump(), s, wall);
}

RunManifest run_probe(const RunInputs& in, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    Grid grid = in.make_grid();
    BranchPoint bp = select_state(in);
    check_tail(branch_state(bp, profile_for(in, grid)));
    TrajectorySeries s;
    StabilityVerdict v = stability_probe(bp, in.coupling(), in.omega, in.delta,
                                         direction_from(in.direction), in.evo, grid,
                                         in.seed, &s);
    json verdicts{{"verdict", to_string(v.verdict)},
                  {"max_dist", v.max_dist},
                  {"growth_time", v.growth_time},
                  {"perturbation_size", v.perturbation_size},
                  {"direction", in.direction},
                  {"state", to_string(bp.kind)},
                  {"thresholds", {{"unstable", 10.0}, {"stable", 3.0}}}};
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return persist_run(in, out_dir, verdicts.dump(), s, wall);
}

}  // namespace rnls
