#ifndef RNLS_EVOLUTION_HPP
#define RNLS_EVOLUTION_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rnls/field.hpp"
#include "rnls/ground_state.hpp"
#include "rnls/params.hpp"

namespace rnls {

// Strang-split pseudospectral stepper: exact linear flow in Fourier space
// (dispersion 1 for u1, 2 for u2), pointwise RK4 for the nonlinear flow.
struct EvolutionConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    int nonlinear_substeps = 1;
    int monitor_stride = 100;  // steps between functional samples
    bool dealias = false;

    void validate() const;
};

struct TrajectorySeries {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> charge;
    std::vector<double> mass1;
    std::vector<double> mass2;
    std::vector<double> orbital_dist;  // zero when no reference given
    std::vector<double> theta_track;
    bool aborted = false;       // NaN detected; series holds the last good samples
    double abort_time = 0.0;
    Field2 final_state;         // last computed field (pre-abort if aborted)
};

enum class Stability { stable_bounded, unstable_growth, inconclusive };
const char* to_string(Stability s);

enum class ProbeDirection { random_even, psi_first_component, phase_kick };
const char* to_string(ProbeDirection d);

struct StabilityVerdict {
    Stability verdict = Stability::inconclusive;
    double max_dist = 0.0;
    double growth_time = -1.0;  // negative when the growth threshold was never hit
    double perturbation_size = 0.0;
};

Field2 step(const Field2& f, const CouplingParams& p, const EvolutionConfig& cfg);

TrajectorySeries evolve(const Field2& f, const CouplingParams& p, const EvolutionConfig& cfg,
                        const Field2* reference = nullptr);

// Perturbs the standing wave of bp by delta along the chosen direction
// (X-normalized), evolves, and tracks the orbital distance to the orbit of
// the unperturbed state. unstable_growth needs max_dist >= 10*delta before
// t_final; stable_bounded needs max_dist <= 3*delta throughout.
StabilityVerdict stability_probe(const BranchPoint& bp, const CouplingParams& p, double omega,
                                 double delta, ProbeDirection dir, const EvolutionConfig& cfg,
                                 const Grid& grid, std::uint64_t seed,
                                 TrajectorySeries* series = nullptr);

// Gauge angle minimizing the X-distance to the orbit of phi, per snapshot.
std::pair<std::vector<double>, std::vector<double>> phase_track(
    const std::vector<Field2>& snapshots, const Field2& phi);

// CSV with header time,energy,charge,mass1,mass2,orbital_dist,theta_track
// and 17-significant-digit values.
std::string series_csv(const TrajectorySeries& s);

}  // namespace rnls

#endif
