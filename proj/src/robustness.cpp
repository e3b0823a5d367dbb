#include "mirrorqed/robustness.hpp"

#include "mirrorqed/errors.hpp"
#include "mirrorqed/rng.hpp"

#include <cmath>

namespace mirrorqed {

std::string to_string(PerturbationMode mode) {
    switch (mode) {
        case PerturbationMode::GammaPrime: return "gamma_prime";
        case PerturbationMode::Spacing: return "spacing";
        case PerturbationMode::Disorder: return "disorder";
    }
    return "?";
}

PerturbationMode perturbation_mode_from_string(const std::string& name) {
    if (name == "gamma_prime") return PerturbationMode::GammaPrime;
    if (name == "spacing") return PerturbationMode::Spacing;
    if (name == "disorder") return PerturbationMode::Disorder;
    throw ConfigError("unknown perturbation mode: " + name);
}

void Perturbation::validate() const {
    if (epsilon < 0.0) throw ConfigError("perturbation epsilon must be non-negative");
    if (realizations < 1) throw ConfigError("perturbation requires at least one realization");
}

EmitterArray perturbed_array(const EmitterArray& base, const Perturbation& p, int realization,
                             int* resampled) {
    base.validate();
    p.validate();
    EmitterArray out = base;
    if (resampled) *resampled = 0;
    switch (p.mode) {
        case PerturbationMode::GammaPrime:
            out.gamma_prime = p.epsilon * base.gamma0;
            break;
        case PerturbationMode::Spacing: {
            const double x1 = base.positions.front();
            for (size_t n = 1; n < out.positions.size(); ++n)
                out.positions[n] = x1 + (base.positions[n] - x1) * (1.0 + p.epsilon);
            break;
        }
        case PerturbationMode::Disorder: {
            for (size_t n = 0; n < out.positions.size(); ++n) {
                const CounterRng rng(p.seed, static_cast<std::uint64_t>(realization), n);
                std::uint64_t attempt = 0;
                double x;
                do {
                    x = base.positions[n] + p.epsilon * rng.gaussian(attempt);
                    if (x > 0.0) break;
                    if (resampled) ++(*resampled);
                } while (++attempt < 1000);
                if (!(x > 0.0))
                    throw RegimeError("disorder perturbation could not produce a valid position");
                out.positions[n] = x;
            }
            break;
        }
    }
    return out;
}

namespace {

SweepStats accumulate(const std::vector<double>& values) {
    SweepStats s;
    s.realizations = static_cast<int>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= s.realizations;
    if (s.realizations > 1) {
        double var = 0.0;
        for (double v : values) var += (v - s.mean) * (v - s.mean);
        var /= (s.realizations - 1);
        s.stderr_mean = std::sqrt(var / s.realizations);
    }
    return s;
}

} // namespace

SweepStats gate_infidelity_under(const Perturbation& p, const GateSpec& gate,
                                 const EmitterArray& base, const SimulateGateOptions& opts) {
    p.validate();
    const int reps = (p.mode == PerturbationMode::Disorder) ? p.realizations : 1;
    SimulateGateOptions sweep_opts = opts;
    sweep_opts.leakage_guard = false; // large perturbations are the point here
    std::vector<double> infidelities;
    infidelities.reserve(reps);
    for (int r = 0; r < reps; ++r) {
        const EmitterArray arr = perturbed_array(base, p, r);
        const GateResult res = simulate_gate(gate, arr, sweep_opts);
        infidelities.push_back(1.0 - res.fidelity);
    }
    return accumulate(infidelities);
}

namespace {

using Matrix3 = Eigen::Matrix3cd;
using Vector3 = Eigen::Vector3cd;

Vector3 rk4_block(const Matrix3& m, const Vector3& y, double dt) {
    const Vector3 k1 = m * y;
    const Vector3 k2 = m * (y + (0.5 * dt) * k1);
    const Vector3 k3 = m * (y + (0.5 * dt) * k2);
    const Vector3 k4 = m * (y + dt * k3);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

double emission_infidelity_single(const EmitterArray& array, const Wavepacket& target,
                                  const CouplingSequence& seq) {
    array.validate();
    if (array.size() != 3) throw ConfigError("emission robustness run requires three emitters");
    const CouplingMatrices geo = coupling_matrices(array);

    // Single-excitation non-Hermitian block split as H0 + J(t) H1 for the
    // emission control Delta = -4J, delta = 8J, exchange J.
    Matrix3 h0 = Matrix3::Zero(), h1 = Matrix3::Zero();
    for (int i = 0; i < 3; ++i) {
        h0(i, i) = -IMU * 0.5 * (geo.Gamma(i, i) + array.gamma_prime);
        h1(i, i) = (i == 1) ? 4.0 : -4.0;
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            h0(i, j) = geo.J(i, j) - IMU * 0.5 * geo.Gamma(i, j);
            if (std::abs(i - j) == 1) h1(i, j) = 1.0;
        }
    }

    // Initial state: the nominal auxiliary dark state, phase -i (emission
    // convention), written in the emitter basis.
    const double s6 = 1.0 / std::sqrt(6.0);
    Vector3 c{-IMU * s6, IMU * 2.0 * s6, -IMU * s6};

    std::vector<Vector> rows;
    rows.reserve(seq.J.size() + 1);
    rows.push_back(c);
    for (double J : seq.J) {
        const Matrix3 m = -IMU * (h0 + J * h1);
        c = rk4_block(m, c, seq.dt);
        rows.push_back(c);
    }

    const auto field = emitted_field(rows, array);
    Wavepacket out;
    out.t0 = seq.t0;
    out.dt = seq.dt;
    out.samples = field;
    const Complex ov = target.overlap(out);
    return 1.0 - std::norm(ov) / target.norm2();
}

SweepStats emission_infidelity_under(const Perturbation& p, const Wavepacket& target,
                                     const EmitterArray& base) {
    p.validate();
    const CouplingSequence seq = optimal_coupling_sequence(target, base.gamma0);
    const int reps = (p.mode == PerturbationMode::Disorder) ? p.realizations : 1;
    std::vector<double> infidelities;
    infidelities.reserve(reps);
    for (int r = 0; r < reps; ++r) {
        const EmitterArray arr = perturbed_array(base, p, r);
        infidelities.push_back(emission_infidelity_single(arr, target, seq));
    }
    return accumulate(infidelities);
}

} // namespace mirrorqed
