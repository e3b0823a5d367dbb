#include "mirrorqed/protocol.hpp"

#include "mirrorqed/errors.hpp"
#include "mirrorqed/gates.hpp"

#include <bit>
#include <cmath>

namespace mirrorqed {

void ProtocolSpec::validate() const {
    if (kind == ProtocolKind::Cluster2D) {
        if (rows < 2 || cols < 2) throw ConfigError("2D cluster requires rows, cols >= 2");
    } else {
        if (m < 1) throw ConfigError("protocol requires at least one photon");
    }
    if (photon_count() > 12) throw ConfigError("dense protocol state limited to 12 photons");
    if (noisy) {
        if (!(noise.J > 0.0) || !(noise.Omega > 0.0))
            throw ConfigError("noisy mode requires positive J and Omega");
        if (noise.gamma_prime < 0.0) throw ConfigError("gamma_prime must be non-negative");
    }
}

std::string to_string(ProtocolOp::Type t) {
    switch (t) {
        case ProtocolOp::Type::RotateInit: return "rotate_init";
        case ProtocolOp::Type::ClusterStep: return "cluster_step";
        case ProtocolOp::Type::Cpe: return "cpe";
        case ProtocolOp::Type::CpeDisentangle: return "cpe_disentangle";
        case ProtocolOp::Type::Cz: return "cz";
    }
    return "?";
}

std::vector<ProtocolOp> build_sequence(const ProtocolSpec& spec) {
    spec.validate();
    const int m = spec.photon_count();
    std::vector<ProtocolOp> ops;
    ops.push_back({ProtocolOp::Type::RotateInit, 0});
    const bool cluster = spec.kind != ProtocolKind::GHZ;
    const int n_cols = spec.kind == ProtocolKind::Cluster2D ? spec.cols : 0;
    for (int k = 1; k <= m; ++k) {
        if (cluster && k > 1) ops.push_back({ProtocolOp::Type::ClusterStep, 0});
        // Photon k - N returns for its controlled phase right before emission k.
        if (spec.kind == ProtocolKind::Cluster2D && k > n_cols)
            ops.push_back({ProtocolOp::Type::Cz, k - n_cols});
        ops.push_back({k == m ? ProtocolOp::Type::CpeDisentangle : ProtocolOp::Type::Cpe, k});
    }
    return ops;
}

JointState JointState::ground(int m) {
    JointState s;
    s.m = m;
    s.amps = Vector::Zero(3 * (1 << m));
    s.amps(1 << m) = 1.0; // matter G (index 1), all bins empty
    return s;
}

double JointState::matter_population(int matter_index) const {
    const int block = 1 << m;
    return amps.segment(matter_index * block, block).squaredNorm();
}

Matrix JointState::matter_density() const {
    const int block = 1 << m;
    Matrix rho = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            rho(i, j) = amps.segment(i * block, block).dot(amps.segment(j * block, block));
    // dot() conjugates its argument; rho(i,j) = <row_j|row_i> needs the flip.
    rho = rho.conjugate().eval();
    const Complex tr = rho.trace();
    if (std::abs(tr) > 0.0) rho /= tr;
    return rho;
}

double JointState::matter_purity() const {
    const Matrix rho = matter_density();
    return std::real((rho * rho).trace());
}

Vector JointState::photon_state_given_G() const {
    const int block = 1 << m;
    return amps.segment(block, block);
}

std::string Stabilizer::label() const {
    std::string s;
    for (int x : x_sites) s += "X" + std::to_string(x) + " ";
    for (int z : z_sites) s += "Z" + std::to_string(z) + " ";
    if (!s.empty()) s.pop_back();
    return s;
}

namespace {

std::vector<std::pair<int, int>> graph_edges(const ProtocolSpec& spec) {
    std::vector<std::pair<int, int>> edges;
    const int m = spec.photon_count();
    if (spec.kind == ProtocolKind::GHZ) return edges;
    for (int k = 1; k < m; ++k) edges.push_back({k, k + 1});
    if (spec.kind == ProtocolKind::Cluster2D)
        for (int k = 1; k + spec.cols <= m; ++k) edges.push_back({k, k + spec.cols});
    return edges;
}

} // namespace

IdealReference ideal_reference(const ProtocolSpec& spec) {
    spec.validate();
    const int m = spec.photon_count();
    const int dim = 1 << m;
    IdealReference ref;
    if (spec.kind == ProtocolKind::GHZ) {
        ref.photonic = Vector::Zero(dim);
        ref.photonic(0) = 1.0 / std::sqrt(2.0);
        ref.photonic(dim - 1) = 1.0 / std::sqrt(2.0);
        Stabilizer xall;
        for (int k = 1; k <= m; ++k) xall.x_sites.push_back(k);
        ref.stabilizers.push_back(xall);
        for (int k = 1; k < m; ++k) {
            Stabilizer zz;
            zz.z_sites = {k, k + 1};
            ref.stabilizers.push_back(zz);
        }
        return ref;
    }
    ref.edges = graph_edges(spec);
    ref.photonic = Vector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    for (const auto& [a, b] : ref.edges) {
        const int mask = (1 << (a - 1)) | (1 << (b - 1));
        for (int i = 0; i < dim; ++i)
            if ((i & mask) == mask) ref.photonic(i) = -ref.photonic(i);
    }
    for (int k = 1; k <= m; ++k) {
        Stabilizer s;
        s.x_sites = {k};
        for (const auto& [a, b] : ref.edges) {
            if (a == k) s.z_sites.push_back(b);
            if (b == k) s.z_sites.push_back(a);
        }
        ref.stabilizers.push_back(s);
    }
    return ref;
}

namespace {

// Generic Pauli expectation on the photonic register: X on x_mask sites and
// Z on z_mask sites (disjoint), summed over the matter rows.
double pauli_expectation(const JointState& st, unsigned x_mask, unsigned z_mask) {
    const int block = 1 << st.m;
    Complex acc = 0.0;
    for (int mi = 0; mi < 3; ++mi) {
        const auto row = st.amps.segment(mi * block, block);
        for (int b = 0; b < block; ++b) {
            const double sign = std::popcount(static_cast<unsigned>(b) & z_mask) % 2 ? -1.0 : 1.0;
            acc += std::conj(row(static_cast<int>(b ^ x_mask))) * sign * row(b);
        }
    }
    const double n2 = st.norm2();
    return n2 > 0.0 ? std::real(acc) / n2 : 0.0;
}

} // namespace

std::vector<double> stabilizer_check(const JointState& state,
                                     const std::vector<Stabilizer>& stabilizers) {
    std::vector<double> out;
    out.reserve(stabilizers.size());
    for (const auto& s : stabilizers) {
        unsigned x_mask = 0, z_mask = 0;
        for (int x : s.x_sites) x_mask |= 1u << (x - 1);
        for (int z : s.z_sites) z_mask |= 1u << (z - 1);
        out.push_back(pauli_expectation(state, x_mask, z_mask));
    }
    return out;
}

double state_fidelity(const JointState& a, const JointState& b) {
    if (a.m != b.m) throw ConfigError("joint states have different register shapes");
    return std::norm(a.amps.dot(b.amps));
}

double state_fidelity(const JointState& a, const Vector& photonic_reference) {
    const int block = 1 << a.m;
    if (photonic_reference.size() != block)
        throw ConfigError("photonic reference has wrong dimension");
    double acc = 0.0;
    for (int mi = 0; mi < 3; ++mi)
        acc += std::norm(photonic_reference.dot(a.amps.segment(mi * block, block)));
    return acc;
}

// --- sequence application ----------------------------------------------------

namespace {

struct NoisyGateSet {
    Matrix rot_init;   // 3x3 achieved map of R_DG(pi/4, +pi/2)
    Matrix rot_y;      // 3x3 achieved map of Y_{pi/2}
    double t_pd_pi;    // duration of the P_D(pi) step
    CpeResult cpe;
    CpeResult cpe_dis;
    Complex cz_g, cz_d; // scattering factors for |G>x|1>, |D>x|1>
    Wavepacket packet;  // nominal emitted packet
};

Matrix ideal_rot_init() {
    Matrix u = Matrix::Identity(3, 3);
    const double s = 1.0 / std::sqrt(2.0);
    u(0, 0) = s;
    u(0, 1) = s;
    u(1, 0) = -s;
    u(1, 1) = s;
    return u;
}

// Matter Hadamard on (D, G): P_D(pi) then Y_{pi/2}; equal to -H exactly.
Matrix ideal_cluster_step() {
    Matrix u = Matrix::Identity(3, 3);
    const double s = 1.0 / std::sqrt(2.0);
    u(0, 0) = -s;
    u(0, 1) = -s;
    u(1, 0) = -s;
    u(1, 1) = s;
    return u;
}

Wavepacket make_packet(const NoiseParams& p) {
    if (p.packet == PacketKind::ConstantJ) {
        const double geff = 24.0 * p.packet_param * p.packet_param;
        const double t_end = std::max(40.0, 12.0 / geff);
        return constant_j_packet(p.packet_param, 1.0, t_end, 1e-3);
    }
    const double tau = p.packet_param;
    return gaussian_packet(tau, 5.0 * tau, 10.0 * tau, 1e-3);
}

NoisyGateSet build_noisy_gates(const ProtocolSpec& spec) {
    const NoiseParams& p = spec.noise;
    EmitterArray array = EmitterArray::mirror_configuration(3, 1.0, p.gamma_prime);
    NoisyGateSet set;
    SimulateGateOptions gopts;
    set.rot_init =
        simulate_gate(GateSpec::rotate_dg(PI / 4.0, PI / 2.0, p.Omega, p.J), array, gopts).achieved;
    set.rot_y = simulate_gate(GateSpec::y_half(p.Omega, p.J), array, gopts).achieved;
    const double pd_detuning = 50.0;
    set.t_pd_pi = PI / pd_detuning;

    set.packet = make_packet(p);
    CpeOptions copts;
    set.cpe = cpe_gate(set.packet, p.J, p.Omega, array, copts);
    copts.disentangle = true;
    set.cpe_dis = cpe_gate(set.packet, p.J, p.Omega, array, copts);

    const Wavepacket& incoming = p.carry_distorted_packet ? set.cpe.photon : set.packet;
    const CzResult cz = cz_fidelity(incoming, p.J);
    set.cz_g = cz.O_G;
    set.cz_d = cz.O_D;
    return set;
}

void apply_matter(JointState& st, const Matrix& u) {
    const int block = 1 << st.m;
    for (int b = 0; b < block; ++b) {
        Eigen::Vector3cd v{st.amps(b), st.amps(block + b), st.amps(2 * block + b)};
        const Eigen::Vector3cd w = u * v;
        st.amps(b) = w(0);
        st.amps(block + b) = w(1);
        st.amps(2 * block + b) = w(2);
    }
}

// gamma' amplitude decay of the singly excited matter states over `duration`.
void apply_matter_decay(JointState& st, double gamma_prime, double duration) {
    if (gamma_prime <= 0.0) return;
    const int block = 1 << st.m;
    const double f = std::exp(-0.5 * gamma_prime * duration);
    st.amps.segment(0, block) *= f;
    st.amps.segment(2 * block, block) *= f;
}

void apply_cpe_map(JointState& st, const Eigen::Matrix<Complex, 3, 2>& map, int bin) {
    const int block = 1 << st.m;
    const int bit = 1 << (bin - 1);
    for (int b = 0; b < block; ++b) {
        if (b & bit) continue; // CPE always meets an empty bin
        const Complex d_in = st.amps(b);
        const Complex g_in = st.amps(block + b);
        st.amps(b) = map(0, 0) * d_in + map(0, 1) * g_in;              // D x |0>
        st.amps(block + b) = map(1, 0) * d_in + map(1, 1) * g_in;      // G x |0>
        st.amps(block + (b | bit)) = map(2, 0) * d_in + map(2, 1) * g_in; // G x |1>
    }
}

void apply_cz(JointState& st, int bin, Complex factor_g, Complex factor_d) {
    const int block = 1 << st.m;
    const int bit = 1 << (bin - 1);
    for (int b = 0; b < block; ++b) {
        if (!(b & bit)) continue;
        st.amps(b) *= factor_d;          // D x |1>
        st.amps(block + b) *= factor_g;  // G x |1>
    }
}

double mean_branch_amplitude(const Eigen::Matrix<Complex, 3, 2>& map) {
    // Magnitude of the two ideal channels (D->row0 or row1, G->row2).
    const double a0 = std::max(std::abs(map(0, 0)), std::abs(map(1, 0)));
    return (a0 + std::abs(map(2, 1))) / 2.0;
}

} // namespace

ProtocolResult apply_sequence(const ProtocolSpec& spec) {
    spec.validate();
    const int m = spec.photon_count();
    const auto ops = build_sequence(spec);

    std::optional<NoisyGateSet> noisy;
    if (spec.noisy) noisy = build_noisy_gates(spec);

    Eigen::Matrix<Complex, 3, 2> cpe_ideal;
    cpe_ideal << 1, 0, 0, 0, 0, 1;
    Eigen::Matrix<Complex, 3, 2> cpe_dis_ideal;
    cpe_dis_ideal << 0, 0, 1, 0, 0, 1;

    ProtocolResult result;
    JointState st = JointState::ground(m);
    for (const auto& op : ops) {
        GateLedgerEntry entry{to_string(op.type), 0.0, 0.0};
        switch (op.type) {
            case ProtocolOp::Type::RotateInit:
                apply_matter(st, noisy ? noisy->rot_init : ideal_rot_init());
                break;
            case ProtocolOp::Type::ClusterStep: {
                if (noisy) {
                    Matrix pd = Matrix::Identity(3, 3);
                    pd(0, 0) = -1.0;
                    pd(2, 2) = -1.0; // P_D(pi)
                    apply_matter(st, Matrix(noisy->rot_y * pd));
                    apply_matter_decay(st, spec.noise.gamma_prime, noisy->t_pd_pi);
                } else {
                    apply_matter(st, ideal_cluster_step());
                }
                break;
            }
            case ProtocolOp::Type::Cpe: {
                const auto& map = noisy ? noisy->cpe.map : cpe_ideal;
                apply_cpe_map(st, map, op.bin);
                if (noisy) {
                    entry.amplitude_deficit = 1.0 - mean_branch_amplitude(map);
                    entry.leakage = noisy->cpe.leakage;
                }
                break;
            }
            case ProtocolOp::Type::CpeDisentangle: {
                const auto& map = noisy ? noisy->cpe_dis.map : cpe_dis_ideal;
                apply_cpe_map(st, map, op.bin);
                if (noisy) {
                    entry.amplitude_deficit = 1.0 - mean_branch_amplitude(map);
                    entry.leakage = noisy->cpe_dis.leakage;
                }
                break;
            }
            case ProtocolOp::Type::Cz:
                if (noisy)
                    apply_cz(st, op.bin, noisy->cz_g, noisy->cz_d);
                else
                    apply_cz(st, op.bin, -1.0, 1.0);
                break;
        }
        if (spec.noisy) result.ledger.push_back(entry);
        if (st.matter_population(2) > 1e-9 * std::max(st.norm2(), 1e-12))
            throw RegimeError("amplitude left in the auxiliary state |A> at a checkpoint");
    }

    result.state = st;
    const IdealReference ref = ideal_reference(spec);
    result.fidelity = state_fidelity(st, ref.photonic);
    result.stabilizer_expectations = stabilizer_check(st, ref.stabilizers);
    result.matter_purity = st.matter_purity();
    return result;
}

} // namespace mirrorqed
