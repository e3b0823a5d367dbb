#include "mirrorqed/photon.hpp"

#include "mirrorqed/csvio.hpp"
#include "mirrorqed/errors.hpp"
#include "mirrorqed/operators.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace mirrorqed {

namespace {
constexpr double SQRT2 = 1.4142135623730951;
}

// --- Wavepacket --------------------------------------------------------------

namespace {

// Trapezoidal weights: end samples count half.
template <typename F>
Complex trapezoid(int n, double dt, F term) {
    if (n < 2) return 0.0;
    Complex acc = 0.5 * (term(0) + term(n - 1));
    for (int k = 1; k < n - 1; ++k) acc += term(k);
    return acc * dt;
}

} // namespace

double Wavepacket::norm2() const {
    return trapezoid(size(), dt, [&](int k) { return Complex(std::norm(samples[k])); }).real();
}

Complex Wavepacket::overlap(const Wavepacket& other) const {
    if (size() != other.size() || std::abs(dt - other.dt) > 1e-14 ||
        std::abs(t0 - other.t0) > 1e-12)
        throw ConfigError("wavepacket overlap requires matching time grids");
    return trapezoid(size(), dt, [&](int k) { return std::conj(samples[k]) * other.samples[k]; });
}

double Wavepacket::mean_time() const {
    const double n2 = norm2();
    const Complex m =
        trapezoid(size(), dt, [&](int k) { return Complex(std::norm(samples[k]) * time(k)); });
    return m.real() / n2;
}

double Wavepacket::width() const {
    const double n2 = norm2();
    const double mean = mean_time();
    const Complex m2 = trapezoid(size(), dt, [&](int k) {
        const double d = time(k) - mean;
        return Complex(std::norm(samples[k]) * d * d);
    });
    return std::sqrt(m2.real() / n2);
}

bool Wavepacket::is_real(double tol) const {
    double max_abs = 0.0, max_im = 0.0;
    for (const Complex& s : samples) {
        max_abs = std::max(max_abs, std::abs(s));
        max_im = std::max(max_im, std::abs(s.imag()));
    }
    return max_im <= tol * std::max(max_abs, 1e-300);
}

namespace {

// Zero-padded FFT of the samples; bin k of the forward transform represents
// the physical frequency -2 pi k / (npad dt), aliased into (-pi/dt, pi/dt].
std::vector<Complex> padded_fft(const Wavepacket& packet, int pad_factor, int* npad_out) {
    int npad = 1;
    while (npad < pad_factor * packet.size()) npad <<= 1;
    std::vector<Complex> padded(npad, Complex{0.0});
    std::copy(packet.samples.begin(), packet.samples.end(), padded.begin());
    Eigen::FFT<double> fft;
    std::vector<Complex> out;
    fft.fwd(out, padded);
    *npad_out = npad;
    return out;
}

} // namespace

double SpectralWavepacket::norm2() const {
    double acc = 0.0;
    for (const Complex& a : amplitudes) acc += std::norm(a);
    return acc * domega;
}

SpectralWavepacket spectrum(const Wavepacket& packet, int pad_factor) {
    if (packet.size() < 2) throw ConfigError("spectrum requires a sampled packet");
    int npad = 0;
    const auto bins = padded_fft(packet, std::max(1, pad_factor), &npad);
    const double dw = 2.0 * PI / (npad * packet.dt);
    const double scale = packet.dt / std::sqrt(2.0 * PI);

    SpectralWavepacket s;
    s.domega = dw;
    s.omega.resize(npad);
    s.amplitudes.resize(npad);
    for (int k = 0; k < npad; ++k) {
        const int m = (k <= npad / 2) ? k : k - npad;
        const double w = -dw * m;
        const int slot = npad / 2 - m; // ascending frequency order
        s.omega[slot] = w;
        // e^{i w t0} carries the grid origin into the phase convention.
        s.amplitudes[slot] = scale * bins[k] * std::exp(IMU * w * packet.t0);
    }
    return s;
}

Wavepacket read_wavepacket_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open wavepacket file: " + path);
    Wavepacket w;
    std::vector<double> times;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        double t = 0.0, re = 0.0, im = 0.0;
        const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &re, &im);
        if (got < 2) continue; // header row
        times.push_back(t);
        w.samples.push_back(Complex(re, got >= 3 ? im : 0.0));
    }
    if (times.size() < 2) throw ConfigError("wavepacket file has fewer than two samples");
    w.t0 = times.front();
    w.dt = (times.back() - times.front()) / (times.size() - 1);
    for (size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - times[k - 1] - w.dt) > 1e-9 * std::max(1.0, w.dt))
            throw ConfigError("wavepacket file must use a uniform time grid");
    return w;
}

void write_wavepacket_csv(const Wavepacket& packet, const std::string& path) {
    auto out = open_output(path);
    out << "t,re,im\n";
    for (int k = 0; k < packet.size(); ++k)
        out << fmt_g(packet.time(k)) << ',' << fmt_g(packet.samples[k].real()) << ','
            << fmt_g(packet.samples[k].imag()) << '\n';
}

Wavepacket gaussian_packet(double tau, double center, double t_end, double dt) {
    if (!(tau > 0.0) || !(dt > 0.0) || !(t_end > dt))
        throw ConfigError("invalid Gaussian packet parameters");
    Wavepacket w;
    w.t0 = 0.0;
    w.dt = dt;
    const int n = static_cast<int>(std::round(t_end / dt)) + 1;
    w.samples.resize(n);
    const double amp = 1.0 / (std::sqrt(tau) * std::pow(PI, 0.25));
    for (int k = 0; k < n; ++k) {
        const double x = (w.time(k) - center) / tau;
        w.samples[k] = amp * std::exp(-0.5 * x * x);
    }
    return w;
}

Wavepacket constant_j_packet(double J, double gamma0, double t_end, double dt) {
    if (!(J > 0.0) || !(gamma0 > 0.0) || !(dt > 0.0) || !(t_end > dt))
        throw ConfigError("invalid constant-J packet parameters");
    const double crit = gamma0 * gamma0 / 32.0;
    if (std::abs(J * J - crit) < 1e-12 * crit)
        throw ConfigError("constant-J packet at the critically damped point");
    Wavepacket w;
    w.t0 = 0.0;
    w.dt = dt;
    const int n = static_cast<int>(std::round(t_end / dt)) + 1;
    w.samples.resize(n);
    const bool oscillating = J * J > crit;
    const double k2 = 18.0 * J * J - 9.0 * gamma0 * gamma0 / 16.0;
    const double kappa = std::sqrt(std::abs(k2));
    const double amp = J * std::sqrt(3.0 * gamma0) / std::sqrt(std::abs(J * J - crit));
    for (int k = 0; k < n; ++k) {
        const double t = w.time(k);
        const double osc = oscillating ? std::sin(kappa * t) : std::sinh(kappa * t);
        w.samples[k] = amp * osc * std::exp(-0.75 * gamma0 * t);
    }
    return w;
}

double CouplingSequence::integral() const {
    double acc = 0.0;
    for (double j : J) acc += j;
    return acc * dt;
}

// --- Emission ----------------------------------------------------------------

namespace {

struct Amp3 {
    Complex d, a, b;
};

Amp3 deriv(const Amp3& y, double J, double gamma0, double gamma_prime) {
    const double c = 3.0 * SQRT2 * J;
    Amp3 dy;
    dy.d = (IMU * 4.0 * J - 0.5 * gamma_prime) * y.d;
    dy.a = IMU * c * y.b - 0.5 * gamma_prime * y.a;
    dy.b = (-1.5 * gamma0 - 0.5 * gamma_prime) * y.b + IMU * c * y.a;
    return dy;
}

Amp3 rk4_amp(const Amp3& y, double J, double gamma0, double gamma_prime, double dt) {
    auto add = [](const Amp3& u, const Amp3& v, double s) {
        return Amp3{u.d + s * v.d, u.a + s * v.a, u.b + s * v.b};
    };
    const Amp3 k1 = deriv(y, J, gamma0, gamma_prime);
    const Amp3 k2 = deriv(add(y, k1, 0.5 * dt), J, gamma0, gamma_prime);
    const Amp3 k3 = deriv(add(y, k2, 0.5 * dt), J, gamma0, gamma_prime);
    const Amp3 k4 = deriv(add(y, k3, dt), J, gamma0, gamma_prime);
    Amp3 out;
    out.d = y.d + (dt / 6.0) * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d);
    out.a = y.a + (dt / 6.0) * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
    out.b = y.b + (dt / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    return out;
}

} // namespace

EmissionResult emit_with_sequence(Complex d0, Complex a0, const CouplingSequence& seq,
                                  double gamma0, double gamma_prime) {
    if (seq.J.empty() || !(seq.dt > 0.0)) throw ConfigError("empty coupling sequence");
    EmissionResult res;
    res.photon.t0 = seq.t0;
    res.photon.dt = seq.dt;
    res.photon.samples.resize(seq.J.size() + 1);
    const double root = std::sqrt(3.0 * gamma0);
    Amp3 y{d0, a0, 0.0};
    res.photon.samples[0] = root * y.b;
    for (size_t k = 0; k < seq.J.size(); ++k) {
        y = rk4_amp(y, seq.J[k], gamma0, gamma_prime, seq.dt);
        res.photon.samples[k + 1] = root * y.b;
    }
    res.d = y.d;
    res.a = y.a;
    res.b = y.b;
    res.xi = 4.0 * seq.integral();
    return res;
}

EmissionResult emit_constant_J(Complex d0, Complex a0, double J, double T_em, double dt,
                               double gamma0, double gamma_prime) {
    if (std::abs(a0) > 0.0 && std::abs(a0.real()) > 1e-12 * std::abs(a0))
        throw ConfigError("initial |A> amplitude must be purely imaginary in this convention");
    CouplingSequence seq;
    seq.dt = dt;
    seq.J.assign(std::max<size_t>(1, static_cast<size_t>(std::round(T_em / dt))), J);
    return emit_with_sequence(d0, a0, seq, gamma0, gamma_prime);
}

CouplingSequence optimal_coupling_sequence(const Wavepacket& target, double gamma0) {
    if (target.size() < 3) throw ConfigError("target packet too short");
    if (!target.is_real())
        throw ConfigError("target packet must be real in the emission convention");
    double peak = 0.0;
    for (const Complex& s : target.samples) peak = std::max(peak, std::abs(s));
    if (peak <= 0.0) throw ConfigError("target packet is identically zero");
    if (std::abs(target.samples.front()) > 1e-4 * peak)
        throw ConfigError("target packet must vanish at t = 0 (b(0) = 0)");

    const double dt = target.dt;
    const double root = std::sqrt(3.0 * gamma0);
    const int n = target.size();

    // Remaining target energy from sample k on, with the trapezoid convention.
    std::vector<double> tail(n + 1, 0.0);
    for (int k = n - 1; k >= 0; --k) {
        const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
        tail[k] = tail[k + 1] + w * std::norm(target.samples[k]) * dt;
    }

    CouplingSequence seq;
    seq.t0 = target.t0;
    seq.dt = dt;
    seq.J.resize(n - 1);

    double b = 0.0;
    double ima = -1.0; // a(0) = -i
    for (int k = 1; k < n; ++k) {
        const double psi_next = target.samples[k].real();
        // Energy accounting: the excitation still stored in (a, b) bounds what
        // the target may still demand. The 1e-2 slack absorbs the O(dt) bias
        // between the Euler recursion and the trapezoidal tail sum.
        if (tail[k] > ima * ima + b * b + 1e-2)
            throw RegimeError(
                "control singularity: target demands more photon energy than remains");
        if (std::abs(ima) < 1e-12) {
            seq.J[k - 1] = 0.0;
            b *= 1.0 - 1.5 * gamma0 * dt;
            continue;
        }
        const double J = (b * (1.0 - 1.5 * gamma0 * dt) - psi_next / root) /
                         (3.0 * SQRT2 * dt * ima);
        if (!std::isfinite(J) || std::abs(J) * dt > 0.2)
            throw RegimeError("coupling inversion left the validity of the discretization");
        seq.J[k - 1] = J;
        const double b_new = b + dt * (-1.5 * gamma0 * b - 3.0 * SQRT2 * J * ima);
        ima += 3.0 * SQRT2 * dt * J * b;
        b = b_new;
    }
    return seq;
}

double erfcx(double x) {
    if (x < 0.0) {
        if (x < -26.0) return HUGE_VAL;
        return 2.0 * std::exp(x * x) - erfcx(-x);
    }
    if (x < 11.0) return std::exp(x * x) * std::erfc(x);
    // Asymptotic tail, 1/(x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4) - ...).
    const double inv2 = 1.0 / (2.0 * x * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 8; ++k) {
        term *= -(2.0 * k - 1.0) * inv2;
        sum += term;
    }
    return sum / (x * std::sqrt(PI));
}

namespace {

// erfcx = e^{z^2}(1 - erf(z)) via the erf power series. The subtraction is
// only benign away from the real axis or for small |z|; callers gate on that.
Complex erfcx_series(Complex z) {
    Complex term = z, erf = z;
    const Complex z2 = z * z;
    for (int n = 1; n < 220; ++n) {
        term *= -z2 / static_cast<double>(n);
        erf += term / (2.0 * n + 1.0);
        if (std::abs(term) < 1e-18 * std::abs(erf)) break;
    }
    erf *= 2.0 / std::sqrt(PI);
    return std::exp(z2) * (1.0 - erf);
}

// erfcx(z) = w(iz) by trapezoidal quadrature of the Faddeeva integral,
// spectrally accurate for Re z >~ 1 (pole distance from the real line).
Complex erfcx_faddeeva_quadrature(Complex z) {
    const Complex zeta = IMU * z;
    const double h = 0.2;
    Complex acc = 1.0 / zeta;
    for (int n = 1; n <= 36; ++n) {
        const double t = n * h;
        const double w = std::exp(-t * t);
        acc += w * (1.0 / (zeta - t) + 1.0 / (zeta + t));
    }
    return IMU * (h / PI) * acc;
}

Complex erfcx_asymptotic(Complex z) {
    const Complex inv2 = 1.0 / (2.0 * z * z);
    Complex term = 1.0, sum = 1.0;
    double last = 1.0;
    for (int k = 1; k <= 16; ++k) {
        term *= -(2.0 * k - 1.0) * inv2;
        if (std::abs(term) > last) break; // divergent tail; stop at smallest term
        last = std::abs(term);
        sum += term;
        if (last < 1e-18) break;
    }
    return sum / (z * std::sqrt(PI));
}

} // namespace

Complex erfcx(Complex z) {
    if (z.real() < 0.0) return 2.0 * std::exp(z * z) - erfcx(-z);
    const double az = std::abs(z);
    if (az < 2.5) return erfcx_series(z);
    if (z.real() > 1.2 && az < 12.0) return erfcx_faddeeva_quadrature(z);
    if (az >= 8.0) return erfcx_asymptotic(z);
    return erfcx_series(z); // near-imaginary band: no cancellation there
}

double gamma_eff_gaussian(double t, double tau, double t0) {
    if (!(tau > 0.0)) throw ConfigError("gamma_eff_gaussian requires tau > 0");
    const double x = (t - t0) / tau;
    if (x <= -6.0) {
        // erfc(x) -> 2 on the far left; avoids the overflowing reflection.
        return std::exp(-x * x) / (tau * std::sqrt(PI));
    }
    return 2.0 / (tau * std::sqrt(PI) * erfcx(x));
}

double coupling_for_rate(double gamma_eff, double gamma0) {
    return std::sqrt(gamma0 * gamma_eff / 24.0);
}

CouplingSequence gaussian_adiabatic_sequence(double tau, double center, double t_end, double dt,
                                             double gamma0) {
    CouplingSequence seq;
    seq.dt = dt;
    const int n = static_cast<int>(std::round(t_end / dt));
    seq.J.resize(n);
    for (int k = 0; k < n; ++k) {
        const double t = (k + 0.5) * dt;
        seq.J[k] = coupling_for_rate(gamma_eff_gaussian(t, tau, center), gamma0);
    }
    return seq;
}

// --- CZ scattering -----------------------------------------------------------

Complex reflection_G(double omega, double J, double gamma0) {
    (void)J; // resonance condition Delta = -J leaves r_G independent of J
    return 1.0 - 2.0 * (3.0 * gamma0) / (3.0 * gamma0 + 2.0 * IMU * omega);
}

Complex reflection_D(double omega, double J, double gamma0) {
    return 1.0 - 2.0 * gamma0 / (gamma0 + 2.0 * IMU * (omega - 2.0 * J));
}

Wavepacket scatter(const Wavepacket& incoming, MatterBranch branch, double J, double gamma0) {
    if (incoming.size() < 2) throw ConfigError("scatter requires a sampled packet");
    if (incoming.dt > 0.05 / gamma0 + 1e-15)
        throw RegimeError("scatter grid too coarse for spectral accuracy (dt > 0.05/gamma0)");

    int npad = 0;
    auto bins = padded_fft(incoming, 8, &npad);
    const double dw = 2.0 * PI / (npad * incoming.dt);
    for (int k = 0; k < npad; ++k) {
        const int m = (k <= npad / 2) ? k : k - npad;
        const double omega = -dw * m;
        const Complex r = (branch == MatterBranch::G) ? reflection_G(omega, J, gamma0)
                                                      : reflection_D(omega, J, gamma0);
        bins[k] *= r;
    }

    Eigen::FFT<double> fft;
    std::vector<Complex> out;
    fft.inv(out, bins);

    Wavepacket scattered;
    scattered.t0 = incoming.t0;
    scattered.dt = incoming.dt;
    scattered.samples.assign(out.begin(), out.begin() + incoming.size());
    return scattered;
}

double cz_fidelity_from_overlaps(Complex O_G, Complex O_D) {
    return 0.2 + 0.05 * std::norm(2.0 - O_G + O_D);
}

Complex overlap_G_gaussian(double tau, double gamma0) {
    const double x = 1.5 * gamma0 * tau;
    return 1.0 - std::sqrt(PI) * 3.0 * gamma0 * tau * erfcx(x);
}

Complex overlap_D_gaussian(double tau, double J, double gamma0) {
    const Complex z = tau * (gamma0 - 4.0 * IMU * J) / 2.0;
    return 1.0 - std::sqrt(PI) * gamma0 * tau * erfcx(z);
}

Complex overlap_G_constJ(double Jtilde, double gamma0) {
    const double g2 = gamma0 * gamma0, j2 = 4.0 * Jtilde * Jtilde;
    return Complex{-(g2 - j2) / (g2 + j2)};
}

Complex overlap_D_constJ(double Jtilde, double J, double gamma0) {
    const double j18 = 18.0 * Jtilde * Jtilde;
    const Complex num = (gamma0 + 4.0 * IMU * J) * (gamma0 - IMU * J) - j18;
    const Complex den = (gamma0 - 4.0 * IMU * J) * (gamma0 - IMU * J) + j18;
    return -num / den;
}

double cz_zero_bandwidth_infidelity(double J, double gamma0) {
    const Complex rD0 = reflection_D(0.0, J, gamma0);
    return 1.0 - cz_fidelity_from_overlaps(-1.0, rD0);
}

double cz_infidelity_smallB_gaussian(double bandwidth, double J, double gamma0) {
    const double g2 = gamma0 * gamma0;
    return 0.8 * g2 / (g2 + 16.0 * J * J) +
           (8.0 / 45.0) * bandwidth * bandwidth / g2;
}

double cz_infidelity_smallB_constJ(double Jtilde, double J, double gamma0) {
    const double g2 = gamma0 * gamma0;
    return 0.8 * g2 / (g2 + 16.0 * J * J) + 3.2 * Jtilde * Jtilde / g2;
}

CzResult cz_fidelity(const Wavepacket& incoming, double J, PacketKind kind, double kind_param,
                     double gamma0) {
    CzResult res;
    const Wavepacket sg = scatter(incoming, MatterBranch::G, J, gamma0);
    const Wavepacket sd = scatter(incoming, MatterBranch::D, J, gamma0);
    const double n2 = incoming.norm2();
    res.O_G = incoming.overlap(sg) / n2;
    res.O_D = incoming.overlap(sd) / n2;
    res.fidelity = cz_fidelity_from_overlaps(res.O_G, res.O_D);
    if (kind == PacketKind::Gaussian) {
        res.O_G_closed = overlap_G_gaussian(kind_param, gamma0);
        res.O_D_closed = overlap_D_gaussian(kind_param, J, gamma0);
    } else if (kind == PacketKind::ConstantJ) {
        res.O_G_closed = overlap_G_constJ(kind_param, gamma0);
        res.O_D_closed = overlap_D_constJ(kind_param, J, gamma0);
    }
    if (res.O_G_closed)
        res.fidelity_closed = cz_fidelity_from_overlaps(*res.O_G_closed, *res.O_D_closed);
    return res;
}

ConstJStats constJ_packet_stats(double Jtilde, double gamma0, double J_cz) {
    if (!(Jtilde > 0.0) || Jtilde * Jtilde >= gamma0 * gamma0 / 32.0)
        throw RegimeError("constJ stats require the damped regime Jtilde < gamma0/sqrt(32)");
    ConstJStats s;
    s.t_av = 2.0 / (3.0 * gamma0) + gamma0 / (24.0 * Jtilde * Jtilde);
    s.tau = gamma0 / (24.0 * Jtilde * Jtilde);
    s.O_G = overlap_G_constJ(Jtilde, gamma0);
    s.O_D = overlap_D_constJ(Jtilde, J_cz, gamma0);
    return s;
}

// --- CPE gate ----------------------------------------------------------------

namespace {

Matrix stage_matrix(const GateSpec& spec, const EmitterArray& array, const CpeOptions& opts) {
    if (!opts.simulated_stages) return ideal_gate(spec);
    SimulateGateOptions gopts;
    gopts.dt = opts.dt_gate;
    return simulate_gate(spec, array, gopts).achieved;
}

// Amplitude decay of the singly excited DFS states over a phase-gate interval.
Matrix phase_gate_decay(double duration, double gamma_prime) {
    Matrix m = Matrix::Identity(3, 3);
    const double f = std::exp(-0.5 * gamma_prime * duration);
    m(0, 0) = f;
    m(2, 2) = f;
    return m;
}

double mean_column_deficit(const Eigen::Matrix<Complex, 3, 2>& map) {
    double leak = 0.0;
    for (int c = 0; c < 2; ++c) leak += 1.0 - map.col(c).squaredNorm();
    return leak / 2.0;
}

} // namespace

CpeResult cpe_gate(const Wavepacket& target, double J_GA, double Omega_GA,
                   const EmitterArray& array, const CpeOptions& opts) {
    array.validate();
    CpeResult res;

    const GateSpec transfer = GateSpec::transfer_ga(Omega_GA, J_GA);
    const double T_GA = transfer.duration();
    Matrix pre = stage_matrix(transfer, array, opts);
    double pre_duration = T_GA;

    if (opts.disentangle) {
        const GateSpec ypi = GateSpec::y_pi(Omega_GA, J_GA);
        const double T_Y = ypi.duration();
        pre = (stage_matrix(ypi, array, opts) * pre).eval();
        pre_duration += T_Y;
        // P_A correction aligning the photon branch with the bystander phases
        // accumulated on |A> before emission.
        const double phi_pa = -2.0 * J_GA * (T_GA + T_Y);
        const Matrix pa = ideal_gate(GateSpec::phase_a(phi_pa, -opts.phase_gate_detuning));
        const double T_PA = std::abs(phi_pa) / (2.0 * opts.phase_gate_detuning);
        pre = (phase_gate_decay(T_PA, array.gamma_prime) * pa * pre).eval();
        pre_duration += T_PA;
    }

    // Shaped emission; reference run with unit amplitude a = -i, dark run for
    // the |D> phase and decay.
    const CouplingSequence seq = optimal_coupling_sequence(target, array.gamma0);
    const EmissionResult ref =
        emit_with_sequence(0.0, -IMU, seq, array.gamma0, array.gamma_prime);
    const EmissionResult dark =
        emit_with_sequence(1.0, 0.0, seq, array.gamma0, array.gamma_prime);
    const double photon_amp = std::sqrt(ref.photon.norm2());
    res.photon = ref.photon;
    res.xi = -2.0 * J_GA * T_GA + ref.xi;
    res.target_overlap =
        std::norm(target.overlap(res.photon)) / (target.norm2() * res.photon.norm2());

    const Complex emit_from{0.0, -1.0}; // reference a amplitude
    double t_phase = 0.0;
    Complex pd = 1.0;
    if (!opts.disentangle) {
        // P_D(xi) cancels the accumulated |D> phase.
        t_phase = std::abs(res.xi) / opts.phase_gate_detuning;
        pd = std::exp(-IMU * res.xi) * std::exp(-0.5 * array.gamma_prime * t_phase);
    }
    for (int c = 0; c < 2; ++c) {
        res.map(0, c) = pre(0, c) * dark.d * pd;                     // -> D x |0>
        res.map(1, c) = pre(1, c);                                   // -> G x |0>
        res.map(2, c) = (pre(2, c) / emit_from) * photon_amp;        // -> G x |1>
    }
    res.leakage = mean_column_deficit(res.map);
    res.total_duration = pre_duration + seq.duration() + t_phase;
    return res;
}

CpeResult cpe_gate_inlined(const Wavepacket& target, double J_GA, double Omega_GA,
                           const EmitterArray& array, const CpeOptions& opts) {
    array.validate();
    if (array.size() != 3) throw ConfigError("inlined CPE requires three emitters");

    CpeResult res;

    // Pre-emission stages as one schedule on the 8-dim register.
    ControlSchedule pre_sched;
    const GateSpec transfer = GateSpec::transfer_ga(Omega_GA, J_GA);
    pre_sched.segments.push_back(gate_segment(transfer, array, true));
    double pre_duration = transfer.duration();
    double phi_pa = 0.0;
    if (opts.disentangle) {
        const GateSpec ypi = GateSpec::y_pi(Omega_GA, J_GA);
        pre_sched.segments.push_back(gate_segment(ypi, array, true));
        pre_duration += ypi.duration();
        phi_pa = -2.0 * J_GA * (transfer.duration() + ypi.duration());
    }

    const CouplingSequence seq = optimal_coupling_sequence(target, array.gamma0);
    ControlSchedule em_sched;
    for (double j : seq.J) {
        Segment s;
        s.duration = seq.dt;
        s.J = j;
        s.Delta = -4.0 * j;
        s.delta2 = 8.0 * j;
        em_sched.segments.push_back(s);
    }

    EvolveOptions em_opts;
    em_opts.dt = seq.dt;
    em_opts.record = true;
    em_opts.stride = 1;

    EvolveOptions pre_opts;
    pre_opts.dt = opts.dt_gate > 0.0
                      ? opts.dt_gate
                      : std::min(1e-3 / array.gamma0, 0.02 / (8.0 * std::abs(J_GA) + 4.0));
    pre_opts.record = false;

    const Vector inputs[2] = {state_D(), state_G()};
    Complex outD[2], outG[2], photon[2];
    Wavepacket packets[2];
    const auto one_idx = single_excitation_indices(3);
    const Vector a_state = state_A();

    for (int col = 0; col < 2; ++col) {
        Vector psi = evolve_nonhermitian(inputs[col], array, pre_sched, pre_opts).final_state();
        if (opts.disentangle) {
            // P_A on the collective |A> component, plus its gamma' decay.
            const Complex ca = a_state.dot(psi);
            psi += (std::exp(IMU * phi_pa) - 1.0) * ca * a_state;
            const double t_pa = std::abs(phi_pa) / (2.0 * opts.phase_gate_detuning);
            for (int i : one_idx) psi(i) *= std::exp(-0.5 * array.gamma_prime * t_pa);
        }

        const StateTrajectory traj = evolve_nonhermitian(psi, array, em_sched, em_opts);
        std::vector<Vector> rows;
        rows.reserve(traj.states.size());
        for (const auto& st : traj.states) {
            Vector c(3);
            for (int k = 0; k < 3; ++k) c(k) = st(one_idx[k]);
            rows.push_back(c);
        }
        packets[col].t0 = seq.t0;
        packets[col].dt = seq.dt;
        packets[col].samples = emitted_field(rows, array);

        const Vector fin = traj.final_state();
        outD[col] = state_D().dot(fin);
        outG[col] = state_G().dot(fin);
        // Photon-branch amplitude: packet norm with the phase taken relative
        // to the (real, positive) target mode.
        photon[col] = std::sqrt(packets[col].norm2());
        const Complex ov = target.overlap(packets[col]);
        if (std::abs(ov) > 1e-12) photon[col] *= ov / std::abs(ov);
    }

    res.photon = packets[1];
    res.xi = -2.0 * J_GA * transfer.duration() + 4.0 * seq.integral();
    double t_phase = 0.0;
    Complex pd = 1.0;
    if (!opts.disentangle) {
        t_phase = std::abs(res.xi) / opts.phase_gate_detuning;
        pd = std::exp(-IMU * res.xi) * std::exp(-0.5 * array.gamma_prime * t_phase);
    }
    for (int c = 0; c < 2; ++c) {
        res.map(0, c) = outD[c] * pd;
        res.map(1, c) = outG[c];
        res.map(2, c) = photon[c];
    }
    res.leakage = mean_column_deficit(res.map);
    const double n2 = res.photon.norm2();
    res.target_overlap =
        n2 > 0.0 ? std::norm(target.overlap(res.photon)) / (target.norm2() * n2) : 0.0;
    res.total_duration = pre_duration + seq.duration() + t_phase;
    return res;
}

} // namespace mirrorqed
