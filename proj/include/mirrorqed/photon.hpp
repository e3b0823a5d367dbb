#pragma once

// Conditional single-photon emission from the auxiliary dark state, inverse
// control of the exchange coupling J(t) for arbitrary target wavepackets,
// and the frequency-domain CZ scattering gate with closed-form references.
//
// Emission works in the reduced three-amplitude system (d, a, b) of the
// single-excitation manifold at Delta = -4J, delta = 8J:
//   d' = i 4J d,  a' = i 3*sqrt(2) J b,  b' = -(3 gamma0/2) b + i 3*sqrt(2) J a,
// with the emitted amplitude psi(t) = sqrt(3 gamma0) b(t). Wavepackets are
// real in this convention (initial a purely imaginary).

#include "mirrorqed/gates.hpp"
#include "mirrorqed/geometry.hpp"
#include "mirrorqed/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mirrorqed {

struct Wavepacket {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<Complex> samples;

    int size() const { return static_cast<int>(samples.size()); }
    double time(int k) const { return t0 + k * dt; }
    double duration() const { return (size() - 1) * dt; }

    double norm2() const;                        // trapezoidal integral of |psi|^2
    Complex overlap(const Wavepacket& other) const; // trapezoidal int conj(a) b dt
    double mean_time() const;                    // first moment of |psi|^2 (normalized)
    double width() const;                        // rms width about the mean
    bool is_real(double tol = 1e-9) const;
};

// Fourier decomposition Psi(w) = (2 pi)^{-1/2} int psi(t) e^{i w t} dt on the
// zero-padded FFT grid, frequencies ascending and centered on the |G><->|B>
// resonance. Parseval: spectral norm equals the temporal norm.
struct SpectralWavepacket {
    std::vector<double> omega;
    std::vector<Complex> amplitudes;
    double domega = 0.0;

    double norm2() const;
};

SpectralWavepacket spectrum(const Wavepacket& packet, int pad_factor = 8);

// CSV interchange: rows "t,re[,im]"; lines starting with '#' and a header row
// are skipped on read.
Wavepacket read_wavepacket_csv(const std::string& path);
void write_wavepacket_csv(const Wavepacket& packet, const std::string& path);

// Normalized Gaussian psi(t) = exp(-(t-center)^2 / (2 tau^2)) / (tau^{1/2} pi^{1/4})
// sampled on [0, t_end].
Wavepacket gaussian_packet(double tau, double center, double t_end, double dt);

// Closed-form packet for constant coupling (sin branch for J^2 > gamma0^2/32,
// sinh branch below), sampled on [0, t_end].
Wavepacket constant_j_packet(double J, double gamma0, double t_end, double dt);

struct CouplingSequence {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> J; // J[k] held on [t0 + k dt, t0 + (k+1) dt)

    double integral() const;
    double duration() const { return J.size() * dt; }
};

struct EmissionResult {
    Complex d = 0.0, a = 0.0, b = 0.0; // final matter amplitudes
    Wavepacket photon;                 // sqrt(3 gamma0) b(t) on the control grid
    double xi = 0.0;                   // 4 int J dt accumulated on |D>
};

EmissionResult emit_with_sequence(Complex d0, Complex a0, const CouplingSequence& seq,
                                  double gamma0 = 1.0, double gamma_prime = 0.0);

// Constant-J emission; a0 must be purely imaginary (convention error otherwise).
EmissionResult emit_constant_J(Complex d0, Complex a0, double J, double T_em, double dt,
                               double gamma0 = 1.0, double gamma_prime = 0.0);

// Discretized inversion of the emission equations: the J(t) sequence whose
// forward simulation reproduces the (real, psi(0) = 0) target packet.
CouplingSequence optimal_coupling_sequence(const Wavepacket& target, double gamma0 = 1.0);

// Analytic effective decay rate reproducing a Gaussian packet adiabatically,
// gamma_eff = 2 e^{-(t-t0)^2/tau^2} / (tau sqrt(pi) erfc((t-t0)/tau)),
// with a series branch guarding the large-argument tail.
double gamma_eff_gaussian(double t, double tau, double t0);

// J(t) = sqrt(gamma0 gamma_eff / 24).
double coupling_for_rate(double gamma_eff, double gamma0);

CouplingSequence gaussian_adiabatic_sequence(double tau, double center, double t_end,
                                             double dt, double gamma0 = 1.0);

// Scaled complementary error function e^{z^2} erfc(z); used by the
// closed-form overlaps and exposed for tests.
double erfcx(double x);
Complex erfcx(Complex z);

// --- CZ scattering gate ---------------------------------------------------

// Unit-modulus reflection coefficients at detuning omega from the |G><->|B>
// resonance (drive condition Delta = -J, frequency dependence Delta -> w - J).
Complex reflection_G(double omega, double J, double gamma0 = 1.0);
Complex reflection_D(double omega, double J, double gamma0 = 1.0);

enum class MatterBranch { G, D };

// FFT scattering with >= 8x zero padding; same grid convention on return.
// Requires dt <= 0.05/gamma0.
Wavepacket scatter(const Wavepacket& incoming, MatterBranch branch, double J,
                   double gamma0 = 1.0);

double cz_fidelity_from_overlaps(Complex O_G, Complex O_D); // 1/5 + |2-O_G+O_D|^2/20

// Closed-form overlaps for the two packet families.
Complex overlap_G_gaussian(double tau, double gamma0 = 1.0);
Complex overlap_D_gaussian(double tau, double J, double gamma0 = 1.0);
Complex overlap_G_constJ(double Jtilde, double gamma0 = 1.0);
Complex overlap_D_constJ(double Jtilde, double J, double gamma0 = 1.0);

// Exact zero-bandwidth CZ infidelity from the reflection coefficients,
// 1 - F(O_G = -1, O_D = r_D(0)) = (3/5) gamma0^2 / (gamma0^2 + 16 J^2).
double cz_zero_bandwidth_infidelity(double J, double gamma0 = 1.0);

// Leading-order small-bandwidth infidelity references,
// (4/5) gamma0^2/(gamma0^2+16J^2) + (8/45) B^2/gamma0^2  (Gaussian) and
// + (16/5) Jtilde^2/gamma0^2 (constant coupling).
double cz_infidelity_smallB_gaussian(double bandwidth, double J, double gamma0 = 1.0);
double cz_infidelity_smallB_constJ(double Jtilde, double J, double gamma0 = 1.0);

enum class PacketKind { Generic, Gaussian, ConstantJ };

struct CzResult {
    Complex O_G, O_D;        // numerical overlaps via scatter
    double fidelity;         // from the numerical overlaps
    std::optional<Complex> O_G_closed, O_D_closed; // when the packet kind is known
    std::optional<double> fidelity_closed;
};

// kind_param: tau for Gaussian, Jtilde for ConstantJ.
CzResult cz_fidelity(const Wavepacket& incoming, double J, PacketKind kind = PacketKind::Generic,
                     double kind_param = 0.0, double gamma0 = 1.0);

struct ConstJStats {
    double t_av;  // 2/(3 gamma0) + gamma0/(24 J~^2), exact
    double tau;   // gamma0/(24 J~^2): leading-order second-moment width of
                  // the sinh packet (exact integral of the moment definition)
    Complex O_G, O_D;
};

// Requires the damped regime Jtilde < gamma0/sqrt(32).
ConstJStats constJ_packet_stats(double Jtilde, double gamma0, double J_cz);

// --- CPE gate ---------------------------------------------------------------

struct CpeOptions {
    bool disentangle = false;    // insert Y_pi so the matter ends in |G> on both branches
    bool simulated_stages = true; // false: compose ideal stage matrices
    double phase_gate_detuning = 50.0; // |Delta| (P_D) and J (P_A) magnitude for corrections
    double dt_gate = 0.0;        // rotation-stage integrator step (0 = auto)
};

struct CpeResult {
    // Linear action on the matter branches with the photon bin attached:
    // rows are the output channels (D x 0_k), (G x 0_k), (G x 1_k); columns
    // are the matter inputs (D, G). The ideal gate is rows {(1,0),(0,0),(0,1)}
    // (disentangling: {(0,0),(1,0),(0,1)}).
    Eigen::Matrix<Complex, 3, 2> map;
    Wavepacket photon;     // emitted packet of the unit photon branch
    double target_overlap; // |<target|photon>|^2 / norms
    double xi;             // compensated |D> phase
    double total_duration; // T_GA (+ T_Y) + T_em + phase-gate time
    double leakage;        // mean column norm deficit (decay + residual excitation)
};

// Three-step conditional photon emission: R_GA(pi/2, 0) transfer, shaped
// emission with the optimal coupling for `target`, and the P_D(xi) phase
// correction (P_A-based correction in the disentangling variant). The
// returned branch amplitudes are the linear factors applied to the input
// (d0, g0) decomposition.
CpeResult cpe_gate(const Wavepacket& target, double J_GA, double Omega_GA,
                   const EmitterArray& array, const CpeOptions& opts = {});

// Full 8-dim single-schedule realization of the same composite, used as a
// cross-check of the staged construction.
CpeResult cpe_gate_inlined(const Wavepacket& target, double J_GA, double Omega_GA,
                           const EmitterArray& array, const CpeOptions& opts = {});

} // namespace mirrorqed
