#pragma once

// Perturbation models for the three error channels: emission into non-guided
// modes (gamma' = eps*gamma0), systematic spacing error (gap scaled by 1+eps,
// first emitter fixed), and Gaussian positional disorder (sigma = eps*lambda0,
// seeded counter-based stream, one draw per realization).

#include "mirrorqed/gates.hpp"
#include "mirrorqed/geometry.hpp"
#include "mirrorqed/photon.hpp"

#include <cstdint>
#include <string>

namespace mirrorqed {

enum class PerturbationMode { GammaPrime, Spacing, Disorder };

std::string to_string(PerturbationMode mode);
PerturbationMode perturbation_mode_from_string(const std::string& name);

struct Perturbation {
    PerturbationMode mode = PerturbationMode::GammaPrime;
    double epsilon = 0.0;
    std::uint64_t seed = 0; // Disorder only
    int realizations = 1;

    void validate() const;
};

// Perturbed copy of the base array; positions that would land at x <= 0 are
// resampled deterministically (count reported via resampled, when given).
EmitterArray perturbed_array(const EmitterArray& base, const Perturbation& p, int realization,
                             int* resampled = nullptr);

struct SweepStats {
    double mean = 0.0;
    double stderr_mean = 0.0;
    int realizations = 0;
};

// Mean Y-gate (or any gate) infidelity over perturbation realizations, with
// controls tuned to the nominal configuration.
SweepStats gate_infidelity_under(const Perturbation& p, const GateSpec& gate,
                                 const EmitterArray& base,
                                 const SimulateGateOptions& opts = {});

// Emission fidelity F = |int psi_target^* psi_out dt|^2 under the nominal
// optimal coupling sequence, evolved in the perturbed single-excitation
// sector. Uses the paper's gauge where the target is unit-normalized.
SweepStats emission_infidelity_under(const Perturbation& p, const Wavepacket& target,
                                     const EmitterArray& base);

// Single-realization emission run, exposed for tests and the CLI.
double emission_infidelity_single(const EmitterArray& array, const Wavepacket& target,
                                  const CouplingSequence& seq);

} // namespace mirrorqed
