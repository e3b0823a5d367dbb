#include "mirrorqed/gates.hpp"

#include "mirrorqed/errors.hpp"
#include "mirrorqed/operators.hpp"

#include <algorithm>
#include <cmath>

namespace mirrorqed {

std::string to_string(GateKind kind) {
    switch (kind) {
        case GateKind::RotateDG: return "R_DG";
        case GateKind::RotateGA: return "R_GA";
        case GateKind::PhaseA: return "P_A";
        case GateKind::PhaseD: return "P_D";
        case GateKind::PhaseG: return "P_G";
    }
    return "?";
}

double GateSpec::duration() const {
    switch (kind) {
        case GateKind::RotateDG:
        case GateKind::RotateGA:
            return theta / Omega;
        case GateKind::PhaseA:
            return phi / (2.0 * J);
        case GateKind::PhaseD:
            return phi / Delta;
        case GateKind::PhaseG:
            return phi * delta_omega / (Omega * Omega);
    }
    return 0.0;
}

void GateSpec::validate() const {
    switch (kind) {
        case GateKind::RotateDG:
        case GateKind::RotateGA:
            if (!(Omega > 0.0)) throw ConfigError("rotation gates require Omega > 0");
            if (theta < 0.0) throw ConfigError("rotation gates require theta >= 0");
            break;
        case GateKind::PhaseA:
            if (phi * J <= 0.0) throw ConfigError("P_A requires phi and J of equal sign");
            break;
        case GateKind::PhaseD:
            if (phi * Delta <= 0.0) throw ConfigError("P_D requires phi and Delta of equal sign");
            break;
        case GateKind::PhaseG:
            if (!(Omega > 0.0)) throw ConfigError("P_G requires Omega > 0");
            if (phi * delta_omega <= 0.0)
                throw ConfigError("P_G requires phi and delta_omega of equal sign");
            break;
    }
    if (duration() < 0.0 || !std::isfinite(duration()))
        throw ConfigError("gate duration must be non-negative and finite");
}

GateSpec GateSpec::rotate_dg(double theta, double phi, double Omega, double J) {
    return GateSpec{GateKind::RotateDG, theta, phi, Omega, J, 0.0, 0.0};
}
GateSpec GateSpec::rotate_ga(double theta, double phi, double Omega, double J) {
    return GateSpec{GateKind::RotateGA, theta, phi, Omega, J, 0.0, 0.0};
}
GateSpec GateSpec::phase_a(double phi, double J) {
    return GateSpec{GateKind::PhaseA, 0.0, phi, 0.0, J, 0.0, 0.0};
}
GateSpec GateSpec::phase_d(double phi, double Delta) {
    return GateSpec{GateKind::PhaseD, 0.0, phi, 0.0, 0.0, Delta, 0.0};
}
GateSpec GateSpec::phase_g(double phi, double Omega, double delta_omega) {
    return GateSpec{GateKind::PhaseG, 0.0, phi, Omega, 0.0, 0.0, delta_omega};
}

std::array<Complex, 3> drive_profile(CollectiveTarget target, double Omega, double phi) {
    if (Omega < 0.0) throw ConfigError("drive amplitude must be non-negative");
    const Complex amp = Omega * std::exp(IMU * phi);
    switch (target) {
        case CollectiveTarget::D: {
            const Complex a = amp / std::sqrt(2.0);
            return {a, Complex{0.0}, -a};
        }
        case CollectiveTarget::A: {
            const Complex a = amp / std::sqrt(6.0);
            return {a, -2.0 * a, a};
        }
        case CollectiveTarget::B: {
            const Complex a = amp / std::sqrt(3.0);
            return {a, a, a};
        }
    }
    return {};
}

Matrix ideal_gate(const GateSpec& spec) {
    spec.validate();
    Matrix u = Matrix::Identity(3, 3);
    const double T = spec.duration();
    switch (spec.kind) {
        case GateKind::RotateDG: {
            const double c = std::cos(spec.theta), s = std::sin(spec.theta);
            u(0, 0) = c;
            u(0, 1) = -IMU * std::exp(IMU * spec.phi) * s;
            u(1, 0) = -IMU * std::exp(-IMU * spec.phi) * s;
            u(1, 1) = c;
            u(2, 2) = std::exp(IMU * (2.0 * spec.J * T)); // chi = +2JT
            break;
        }
        case GateKind::RotateGA: {
            const double c = std::cos(spec.theta), s = std::sin(spec.theta);
            u(0, 0) = std::exp(IMU * (-2.0 * spec.J * T)); // chi = -2JT
            u(1, 1) = c;
            u(1, 2) = -IMU * std::exp(IMU * spec.phi) * s;
            u(2, 1) = -IMU * std::exp(-IMU * spec.phi) * s;
            u(2, 2) = c;
            break;
        }
        case GateKind::PhaseA:
            u(2, 2) = std::exp(IMU * spec.phi);
            break;
        case GateKind::PhaseD:
            u(0, 0) = std::exp(-IMU * spec.phi);
            u(2, 2) = std::exp(-IMU * spec.phi);
            break;
        case GateKind::PhaseG:
            u(0, 0) = std::exp(-IMU * spec.phi / 3.0);
            u(1, 1) = std::exp(-IMU * spec.phi);
            u(2, 2) = std::exp(-IMU * spec.phi / 3.0);
            break;
    }
    return u;
}

double avg_gate_fidelity(const Matrix& U, const Matrix& Utilde, int d) {
    if (U.rows() != d || U.cols() != d || Utilde.rows() != d || Utilde.cols() != d)
        throw ConfigError("avg_gate_fidelity dimension mismatch");
    const Complex tr = (U.adjoint() * Utilde).trace();
    return (1.0 + std::norm(tr) / d) / (d + 1.0);
}

ErrorModel predicted_error_model(double Omega, double J, double gamma0) {
    if (!(Omega > 0.0)) throw ConfigError("predicted_error_model requires Omega > 0");
    const EmitterArray mirror = EmitterArray::mirror_configuration(3, gamma0);
    const CollectiveBasis basis = collective_basis(mirror, J);
    const double xi1 = std::norm(basis.xi1);
    const double xi2 = std::norm(basis.xi2);
    const double g2 = gamma0 * gamma0;
    ErrorModel m{};
    m.gamma_d = Omega * Omega * gamma0 *
                (xi1 / (4.0 * J * J + g2 / 4.0) + 4.0 * xi2 / (J * J + 4.0 * g2));
    m.delta_d = Omega * Omega * J *
                (2.0 * xi1 / (4.0 * J * J + g2 / 4.0) - xi2 / (J * J + 4.0 * g2));
    m.F_leading = 1.0 - PI * m.gamma_d / (12.0 * Omega);
    return m;
}

namespace {

// Drive-induced Stark shift of |A> during R_GA at nominal Delta = 2J, from
// the couplings of |A> to the two-excitation eigenstates.
double stark_shift_A(double Omega, double J, double gamma0) {
    const EmitterArray mirror = EmitterArray::mirror_configuration(3, gamma0);
    const CollectiveBasis basis = collective_basis(mirror, J);
    const Vector a = state_A();
    Matrix sigmaA_dag = Matrix::Zero(8, 8);
    sigmaA_dag += sigma_plus(3, 1) / std::sqrt(6.0);
    sigmaA_dag -= 2.0 * sigma_plus(3, 2) / std::sqrt(6.0);
    sigmaA_dag += sigma_plus(3, 3) / std::sqrt(6.0);
    const Vector target = sigmaA_dag * a;
    double shift = 0.0;
    for (const auto& e : basis.two_excitation) {
        const double z2 = std::norm(e.state.dot(target));
        if (z2 < 1e-18) continue;
        // E at Delta = 2J relative to the resonant |A>: e.shift + Delta + 2J.
        const double det = e.shift + 4.0 * J;
        const double hw = e.decay / 2.0;
        shift += -Omega * Omega * z2 * det / (det * det + hw * hw);
    }
    return shift;
}

} // namespace

Segment gate_segment(const GateSpec& spec, const EmitterArray& array, bool stark_compensation) {
    spec.validate();
    Segment seg;
    seg.duration = spec.duration();
    switch (spec.kind) {
        case GateKind::RotateDG: {
            seg.J = spec.J;
            seg.delta2 = -spec.J;
            seg.Omega = drive_profile(CollectiveTarget::D, spec.Omega, spec.phi);
            if (stark_compensation)
                seg.Delta = -predicted_error_model(spec.Omega, spec.J, array.gamma0).delta_d;
            break;
        }
        case GateKind::RotateGA: {
            seg.J = spec.J;
            seg.delta2 = -spec.J;
            seg.Omega = drive_profile(CollectiveTarget::A, spec.Omega, spec.phi);
            seg.Delta = 2.0 * spec.J;
            if (stark_compensation)
                seg.Delta -= stark_shift_A(spec.Omega, spec.J, array.gamma0);
            break;
        }
        case GateKind::PhaseA:
            seg.J = spec.J;
            seg.delta2 = -spec.J;
            break;
        case GateKind::PhaseD:
            seg.Delta = spec.Delta;
            break;
        case GateKind::PhaseG:
            seg.Omega = drive_profile(CollectiveTarget::B, spec.Omega, 0.0);
            seg.drive_detuning = spec.delta_omega;
            break;
    }
    return seg;
}

GateResult simulate_gate(const GateSpec& spec, const EmitterArray& array,
                         const SimulateGateOptions& opts) {
    spec.validate();
    array.validate();
    if (array.size() != 3) throw ConfigError("simulate_gate requires three emitters");
    if (!(spec.duration() > 0.0)) throw ConfigError("simulated gate needs a positive duration");

    GateResult result;
    result.ideal = ideal_gate(spec);

    if (spec.kind == GateKind::PhaseG &&
        std::abs(spec.delta_omega) < 10.0 * std::max(spec.Omega, array.gamma0))
        throw RegimeError("P_G requires |delta_omega| >= 10 max(Omega, gamma0)");
    if (spec.Omega > 0.0 &&
        spec.Omega * spec.Omega >
            0.1 * (array.gamma0 * array.gamma0 + spec.J * spec.J))
        result.warnings.push_back("drive outside the weak-drive regime Omega^2 << gamma0^2 + J^2");

    const Segment seg = gate_segment(spec, array, opts.stark_compensation);
    result.duration = seg.duration;
    result.delta_compensation = seg.Delta;

    EvolveOptions eopts;
    if (opts.dt > 0.0) {
        eopts.dt = opts.dt;
    } else {
        double omega_max = 2.0 * (std::abs(seg.Delta) + std::abs(seg.delta2)) +
                           4.0 * std::abs(seg.J) + 2.0 * std::abs(seg.drive_detuning) +
                           4.0 * array.gamma0 + array.gamma_prime;
        for (const auto& o : seg.Omega) omega_max += std::abs(o);
        eopts.dt = std::min(1e-3 / array.gamma0, 0.02 / omega_max);
    }
    eopts.record = false;

    const ControlSchedule schedule = ControlSchedule::single(seg);
    const Vector basis_states[3] = {state_D(), state_G(), state_A()};

    result.achieved = Matrix::Zero(3, 3);
    double leakage = 0.0;
    for (int col = 0; col < 3; ++col) {
        const Vector psi = evolve_nonhermitian(basis_states[col], array, schedule, eopts).final_state();
        double in_dfs = 0.0;
        for (int row = 0; row < 3; ++row) {
            result.achieved(row, col) = basis_states[row].dot(psi);
            in_dfs += std::norm(result.achieved(row, col));
        }
        leakage += 1.0 - in_dfs;
    }
    result.leakage = leakage / 3.0;
    if (opts.leakage_guard && result.leakage > 0.5)
        throw RegimeError("leakage above 0.5: drive too strong for a DFS gate");

    if (spec.kind == GateKind::RotateDG) {
        // Protocols use R_DG only on the (D, G) qubit with no amplitude in |A>.
        result.fidelity = avg_gate_fidelity(result.ideal.topLeftCorner(2, 2),
                                            result.achieved.topLeftCorner(2, 2), 2);
    } else {
        result.fidelity = avg_gate_fidelity(result.ideal, result.achieved, 3);
    }
    return result;
}

} // namespace mirrorqed
