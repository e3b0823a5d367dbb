#pragma once

// Emitters along a half-waveguide (mirror at x = 0). Positions map to the
// waveguide-mediated coherent/dissipative coupling matrices, the collective
// jump operator, the collective eigenbasis and the emitted-field functional.
//
// Canonical units throughout: gamma0 = 1, positions in lambda0, times in
// 1/gamma0, rates in gamma0, k0 = 2*pi/lambda0.

#include "mirrorqed/types.hpp"

#include <vector>

namespace mirrorqed {

struct EmitterArray {
    std::vector<double> positions; // units of lambda0, all > 0
    double gamma0 = 1.0;           // radiative rate into the waveguide
    double gamma_prime = 0.0;      // per-emitter loss into non-guided modes

    int size() const { return static_cast<int>(positions.size()); }
    void validate() const; // throws ConfigError on violated invariants

    // The x_n = (n + 1/4) lambda0 working configuration (J = 0, Gamma = gamma0).
    static EmitterArray mirror_configuration(int n = 3, double gamma0 = 1.0,
                                             double gamma_prime = 0.0);
};

struct CouplingMatrices {
    RealMatrix J;     // coherent couplings, symmetric
    RealMatrix Gamma; // dissipative couplings, symmetric PSD (rank 1 here)
};

// J_nm - i Gamma_nm / 2 = -i (gamma0/4) (e^{i k0 |x_n - x_m|} - e^{i k0 (x_n + x_m)}).
CouplingMatrices coupling_matrices(const EmitterArray& array);

struct JumpOperator {
    Matrix op;           // S = sqrt(gamma0/Gamma_B) sum_n sin(k0 x_n) sigma_n
    double gamma_B;      // collective decay rate gamma0 sum_n sin^2(k0 x_n)
    RealVector weights;  // sin(k0 x_n)
    bool fully_dark;     // Gamma_B = 0 (all emitters at field nodes)
};

JumpOperator jump_operator(const EmitterArray& array);

struct NonHermitianEigenstate {
    Vector state;  // 8-dim
    double shift;  // real part of eigenvalue, relative to Delta = 0
    double decay;  // -2 Im(eigenvalue)
};

// Collective basis of the three-emitter mirror configuration at exchange J
// (DFS condition delta = -J). The two-excitation eigenstates come from
// numerically diagonalizing the non-Hermitian Hamiltonian in that sector,
// ordered by ascending decay rate (ties by ascending shift). Shifts are
// reported at Delta = 0; a global detuning adds 2*Delta in this sector.
struct CollectiveBasis {
    Vector G, D, A, B;
    std::vector<NonHermitianEigenstate> two_excitation; // S_D-like first by decay
    Complex xi1, xi2;   // <lambda_{1,2}| sigma_D^dag |D>, lambda ordered as above
                        // excluding the exact S_D eigenstate
    Complex eps1, eps2; // S_B / S_A content of the lower-decay mixed state
};

CollectiveBasis collective_basis(const EmitterArray& array, double J);

// Single-photon amplitude emitted into the waveguide,
// psi_out(t) = sqrt(gamma0) sum_n sin(k0 x_n) c_n(t),
// from a trajectory of single-excitation amplitudes c_n (one row per time).
// Returned on the same grid as the input.
std::vector<Complex> emitted_field(const std::vector<Vector>& amplitudes,
                                   const EmitterArray& array);

} // namespace mirrorqed
