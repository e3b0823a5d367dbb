#pragma once

// The five single-qutrit gates on the decoherence-free subspace spanned by
// {|D>, |G>, |A>}: rotations R_DG and R_GA plus the three phase gates P_A,
// P_D, P_G. Ideal matrices follow the convention T = theta/Omega (so the
// Y_{pi/2} gate is theta = pi/4) and bystander phases are written as e^{i chi}
// with chi = +2JT for R_DG (acting on |A>) and chi = -2JT for R_GA (on |D>).
// Matrix basis ordering is (|D>, |G>, |A>).

#include "mirrorqed/dynamics.hpp"
#include "mirrorqed/geometry.hpp"
#include "mirrorqed/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace mirrorqed {

enum class GateKind { RotateDG, RotateGA, PhaseA, PhaseD, PhaseG };

enum class CollectiveTarget { D, A, B };

std::string to_string(GateKind kind);

struct GateSpec {
    GateKind kind = GateKind::RotateDG;
    double theta = 0.0;       // rotation angle; T = theta / Omega
    double phi = 0.0;         // drive phase (rotations) or phase-gate angle
    double Omega = 0.0;       // drive amplitude (rotations, PhaseG)
    double J = 0.0;           // exchange held during the gate
    double Delta = 0.0;       // detuning amplitude (PhaseD)
    double delta_omega = 0.0; // drive detuning (PhaseG), |delta_omega| >> Omega, gamma0

    double duration() const;
    void validate() const;

    static GateSpec rotate_dg(double theta, double phi, double Omega, double J);
    static GateSpec rotate_ga(double theta, double phi, double Omega, double J);
    static GateSpec phase_a(double phi, double J);
    static GateSpec phase_d(double phi, double Delta);
    static GateSpec phase_g(double phi, double Omega, double delta_omega);

    // Y_{pi/2} = R_DG(pi/4, -pi/2); Y_pi = R_DG(pi/2, -pi/2).
    static GateSpec y_half(double Omega, double J) { return rotate_dg(PI / 4.0, -PI / 2.0, Omega, J); }
    static GateSpec y_pi(double Omega, double J) { return rotate_dg(PI / 2.0, -PI / 2.0, Omega, J); }
    // CPE transfer stage |G> -> -i|A>.
    static GateSpec transfer_ga(double Omega, double J) { return rotate_ga(PI / 2.0, 0.0, Omega, J); }
};

// Per-emitter Rabi amplitudes whose collective projection is Omega e^{i phi}
// on the requested collective mode and zero on the other two.
std::array<Complex, 3> drive_profile(CollectiveTarget target, double Omega, double phi);

Matrix ideal_gate(const GateSpec& spec); // 3x3 unitary on (D, G, A)

// F = (1 + |tr(U^dag Utilde)|^2 / d) / (d + 1) for trace-nonincreasing maps.
double avg_gate_fidelity(const Matrix& U, const Matrix& Utilde, int d);

struct ErrorModel {
    double gamma_d;   // drive-induced decay of |D>
    double delta_d;   // drive-induced energy shift of |D>
    double F_leading; // 1 - pi gamma_d / (12 Omega)
};

// Adiabatic-elimination error model of the D<->G rotation, with the
// two-excitation overlaps xi taken from the numerically diagonalized sector.
ErrorModel predicted_error_model(double Omega, double J, double gamma0);

struct GateResult {
    Matrix ideal;    // 3x3
    Matrix achieved; // 3x3, columns from evolved basis states projected on DFS
    double fidelity;
    double leakage;  // mean population outside the DFS at T
    double duration;
    double delta_compensation; // global detuning applied to cancel Stark shifts
    std::vector<std::string> warnings;
};

struct SimulateGateOptions {
    double dt = 0.0;                // 0 = automatic from the segment frequencies
    bool stark_compensation = true; // apply Delta = -delta_d (R_DG) / analogue (R_GA)
    bool leakage_guard = true;      // error out above 0.5 leakage; sweeps disable
                                    // this to chart the breakdown regime
};

// Evolves each DFS basis state under the full 8-dim non-Hermitian dynamics
// (gamma' included via the array) and compares the projected map with the
// ideal gate: d = 2 on the (D, G) block for R_DG, d = 3 otherwise.
GateResult simulate_gate(const GateSpec& spec, const EmitterArray& array,
                         const SimulateGateOptions& opts = {});

// Control segment realizing a gate spec (drive profile, detunings, exchange).
Segment gate_segment(const GateSpec& spec, const EmitterArray& array,
                     bool stark_compensation = true);

} // namespace mirrorqed
