#pragma once

// Composition of matter rotations, conditional photon emission and photon
// re-scattering into GHZ and 1D/2D cluster states, with brute-force reference
// states and stabilizer verification.
//
// Photonic time bins are qubits (vacuum = |0>, one photon = |1>), bin k held
// in bit k-1 (little-endian by emission order). The matter index is ordered
// (D, G, A); |A> is transient inside the CPE and must carry no amplitude at
// protocol checkpoints.

#include "mirrorqed/photon.hpp"
#include "mirrorqed/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mirrorqed {

enum class ProtocolKind { GHZ, Cluster1D, Cluster2D };

struct NoiseParams {
    double J = 10.0;
    double Omega = 0.05;
    double gamma_prime = 0.0;
    PacketKind packet = PacketKind::Gaussian;
    double packet_param = 1.75; // tau (Gaussian) or Jtilde (ConstantJ)
    bool carry_distorted_packet = false; // feed the emitted packet into the CZ overlaps
};

struct ProtocolSpec {
    ProtocolKind kind = ProtocolKind::GHZ;
    int m = 2;        // photon count (GHZ, 1D)
    int rows = 2;     // 2D lattice M x N; m = rows * cols
    int cols = 2;
    bool noisy = false;
    NoiseParams noise;

    int photon_count() const { return kind == ProtocolKind::Cluster2D ? rows * cols : m; }
    void validate() const;
};

struct ProtocolOp {
    enum class Type { RotateInit, ClusterStep, Cpe, CpeDisentangle, Cz };
    Type type;
    int bin = 0; // 1-based photon bin for Cpe/Cz
};

std::string to_string(ProtocolOp::Type t);

// Gate list realizing the protocol. The initial rotation maps
// |G> -> (|G> + |D>)/sqrt(2); cluster steps apply the matter Hadamard
// (P_D(pi) followed by Y_{pi/2}); the 2D scheme scatters photon k between the
// emissions of photons k+N-1 and k+N.
std::vector<ProtocolOp> build_sequence(const ProtocolSpec& spec);

struct JointState {
    int m = 0;    // photon bins
    Vector amps;  // size 3 * 2^m, index = matter * 2^m + bits

    static JointState ground(int m);
    double norm2() const { return amps.squaredNorm(); }
    double matter_population(int matter_index) const; // 0 = D, 1 = G, 2 = A
    Matrix matter_density() const;                    // 3x3 reduced state (normalized)
    double matter_purity() const;
    Vector photon_state_given_G() const; // G-row amplitudes (2^m)
};

// Pauli product prod X_sites prod Z_sites on disjoint 1-based bins.
struct Stabilizer {
    std::vector<int> x_sites;
    std::vector<int> z_sites;
    std::string label() const;
};

struct IdealReference {
    Vector photonic;                   // 2^m amplitudes
    std::vector<Stabilizer> stabilizers;
    std::vector<std::pair<int, int>> edges; // CZ graph edges (1-based bins)
};

// GHZ: (|0..0> + |1..1>)/sqrt(2). Clusters: |+>^m with CZ on the graph edges;
// the 2D graph is the emission backbone (k, k+1) plus the column links
// (k, k+N). Dense construction, m <= 12.
IdealReference ideal_reference(const ProtocolSpec& spec);

struct GateLedgerEntry {
    std::string op;
    double amplitude_deficit; // 1 - mean branch amplitude magnitude
    double leakage;
};

struct ProtocolResult {
    JointState state;
    double fidelity;          // vs ideal_reference, matter traced
    std::vector<double> stabilizer_expectations;
    double matter_purity;
    std::vector<GateLedgerEntry> ledger; // noisy mode only
};

ProtocolResult apply_sequence(const ProtocolSpec& spec);

// |<a|b>|^2 between joint states of the same shape.
double state_fidelity(const JointState& a, const JointState& b);

// sum_matter |<reference|row>|^2: fidelity against a pure photonic reference
// with the (disentangled) matter index traced out.
double state_fidelity(const JointState& a, const Vector& photonic_reference);

std::vector<double> stabilizer_check(const JointState& state,
                                     const std::vector<Stabilizer>& stabilizers);

} // namespace mirrorqed
