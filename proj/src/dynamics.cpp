#include "mirrorqed/dynamics.hpp"

#include "mirrorqed/csvio.hpp"
#include "mirrorqed/errors.hpp"
#include "mirrorqed/operators.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace mirrorqed {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Frame rotation applied at the end of a segment integrated in the drive
// frame: amplitudes with n excitations pick up e^{-i n delta_omega T}.
Vector frame_phases(int dim, double drive_detuning, double duration) {
    Vector ph(dim);
    for (int i = 0; i < dim; ++i)
        ph(i) = std::exp(-IMU * (excitation_number(i) * drive_detuning * duration));
    return ph;
}

void check_dt(double dt, double gamma0) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (gamma0 * dt > 1e-2 + 1e-15)
        throw ConfigError("gamma0*dt exceeds 1e-2; reduce the integration step");
}

} // namespace

Matrix build_hamiltonian(const EmitterArray& array, const Segment& seg) {
    array.validate();
    seg.validate();
    const int n = array.size();
    const int dim = hilbert_dim(n);
    Matrix h = Matrix::Zero(dim, dim);

    // Onsite detunings in the frame of the drive.
    for (int i = 0; i < dim; ++i) {
        double e = 0.0;
        for (int k = 0; k < n; ++k) {
            if (i & (1 << k)) {
                e += seg.Delta - seg.drive_detuning;
                if (k == 1) e += seg.delta2;
            }
        }
        h(i, i) = e;
    }

    // Engineered nearest-neighbour exchange plus waveguide-mediated couplings.
    const CouplingMatrices geo = coupling_matrices(array);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            double j = geo.J(a, b);
            if (b == a + 1) j += seg.J;
            if (j != 0.0) {
                const Matrix t = sigma_plus(n, a + 1) * sigma_minus(n, b + 1);
                h += j * (t + t.adjoint());
            }
        }
    }

    for (int k = 0; k < std::min(n, 3); ++k) {
        if (seg.Omega[k] != Complex{0.0}) {
            h += seg.Omega[k] * sigma_plus(n, k + 1);
            h += std::conj(seg.Omega[k]) * sigma_minus(n, k + 1);
        }
    }
    return h;
}

Matrix build_nonhermitian(const EmitterArray& array, const Segment& seg) {
    const int n = array.size();
    Matrix h = build_hamiltonian(array, seg);
    const CouplingMatrices geo = coupling_matrices(array);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (geo.Gamma(a, b) != 0.0)
                h -= IMU * 0.5 * geo.Gamma(a, b) * (sigma_plus(n, a + 1) * sigma_minus(n, b + 1));
    if (array.gamma_prime > 0.0)
        for (int k = 0; k < n; ++k)
            h -= IMU * 0.5 * array.gamma_prime * number_op(n, k + 1);
    return h;
}

Matrix build_liouvillian(const EmitterArray& array, const Segment& seg) {
    const int n = array.size();
    const int dim = hilbert_dim(n);
    const Matrix id = Matrix::Identity(dim, dim);
    const Matrix h = build_hamiltonian(array, seg);

    Matrix L = -IMU * (kron(id, h) - kron(h.transpose(), id));

    const CouplingMatrices geo = coupling_matrices(array);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const double g = geo.Gamma(a, b);
            if (g == 0.0) continue;
            const Matrix sa = sigma_minus(n, a + 1); // appears as sigma_a^dag
            const Matrix sb = sigma_minus(n, b + 1);
            const Matrix sab = sa.adjoint() * sb; // sigma_a^dag sigma_b
            L += (g / 2.0) * (2.0 * kron(sa, sb) - kron(id, sab) - kron(sab.transpose(), id));
        }
    }
    if (array.gamma_prime > 0.0) {
        for (int k = 0; k < n; ++k) {
            const Matrix s = sigma_minus(n, k + 1);
            const Matrix num = s.adjoint() * s;
            L += array.gamma_prime *
                 (kron(s, s) - 0.5 * kron(id, num) - 0.5 * kron(num.transpose(), id));
        }
    }
    return L;
}

namespace {

// One RK4 step of dy/dt = M y for a constant matrix M.
template <typename Vec>
Vec rk4_step(const Matrix& m, const Vec& y, double dt) {
    const Vec k1 = m * y;
    const Vec k2 = m * (y + (0.5 * dt) * k1);
    const Vec k3 = m * (y + (0.5 * dt) * k2);
    const Vec k4 = m * (y + dt * k3);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

namespace {

Matrix rotate_frame(const Matrix& rho, const Vector& ph) {
    return ph.asDiagonal() * rho * ph.conjugate().asDiagonal();
}

} // namespace

MasterTrajectory evolve_master(const Matrix& rho0, const EmitterArray& array,
                               const ControlSchedule& schedule, const EvolveOptions& opts) {
    schedule.validate();
    check_dt(opts.dt, array.gamma0);
    const int dim = hilbert_dim(array.size());
    if (rho0.rows() != dim || rho0.cols() != dim)
        throw ConfigError("rho0 dimension does not match emitter count");

    MasterTrajectory traj;
    Vector v = Eigen::Map<const Vector>(rho0.data(), dim * dim);
    double t = 0.0;
    if (opts.record) {
        traj.times.push_back(t);
        traj.states.push_back(rho0);
    }

    for (const auto& seg : schedule.segments) {
        const Matrix L = build_liouvillian(array, seg);
        const int steps = std::max(1, static_cast<int>(std::ceil(seg.duration / opts.dt)));
        const double dt = seg.duration / steps;
        for (int s = 0; s < steps; ++s) {
            v = rk4_step(L, v, dt);
            t += dt;
            if (opts.record && (s + 1) % opts.stride == 0 && s != steps - 1) {
                Matrix rho = Eigen::Map<const Matrix>(v.data(), dim, dim);
                if (seg.drive_detuning != 0.0)
                    rho = rotate_frame(rho, frame_phases(dim, seg.drive_detuning, (s + 1) * dt));
                traj.times.push_back(t);
                traj.states.push_back(rho);
            }
        }
        Matrix rho = Eigen::Map<const Matrix>(v.data(), dim, dim);
        if (seg.drive_detuning != 0.0) {
            rho = rotate_frame(rho, frame_phases(dim, seg.drive_detuning, seg.duration)).eval();
            v = Eigen::Map<const Vector>(rho.data(), dim * dim);
        }
        if (std::abs(rho.trace() - 1.0) > opts.trace_tol)
            throw RegimeError("master-equation trace drift exceeds tolerance; reduce dt");
        if (opts.record || &seg == &schedule.segments.back()) {
            traj.times.push_back(t);
            traj.states.push_back(rho);
        }
    }
    return traj;
}

StateTrajectory evolve_nonhermitian(const Vector& psi0, const EmitterArray& array,
                                    const ControlSchedule& schedule,
                                    const EvolveOptions& opts) {
    schedule.validate();
    check_dt(opts.dt, array.gamma0);
    const int dim = hilbert_dim(array.size());
    if (psi0.size() != dim) throw ConfigError("psi0 dimension does not match emitter count");

    StateTrajectory traj;
    Vector v = psi0;
    double t = 0.0;
    if (opts.record) {
        traj.times.push_back(t);
        traj.states.push_back(v);
    }

    for (const auto& seg : schedule.segments) {
        const Matrix m = -IMU * build_nonhermitian(array, seg);
        const double norm_in = v.norm();
        const int steps = std::max(1, static_cast<int>(std::ceil(seg.duration / opts.dt)));
        const double dt = seg.duration / steps;
        for (int s = 0; s < steps; ++s) {
            v = rk4_step(m, v, dt);
            t += dt;
            if (opts.record && (s + 1) % opts.stride == 0 && s != steps - 1) {
                Vector sample = v;
                if (seg.drive_detuning != 0.0)
                    sample = frame_phases(dim, seg.drive_detuning, (s + 1) * dt).cwiseProduct(v);
                traj.times.push_back(t);
                traj.states.push_back(sample);
            }
        }
        if (seg.drive_detuning != 0.0)
            v = frame_phases(dim, seg.drive_detuning, seg.duration).cwiseProduct(v).eval();
        if (v.norm() > norm_in * (1.0 + 1e-9) + 1e-12)
            throw RegimeError("non-Hermitian evolution increased the norm; reduce dt");
        if (opts.record || &seg == &schedule.segments.back()) {
            traj.times.push_back(t);
            traj.states.push_back(v);
        }
    }
    return traj;
}

Matrix expm_oracle(const EmitterArray& array, const Segment& seg, double t, const Matrix& rho0) {
    seg.validate();
    const int dim = hilbert_dim(array.size());
    if (rho0.rows() != dim || rho0.cols() != dim)
        throw ConfigError("rho0 dimension does not match emitter count");
    if (dim > 64) throw ConfigError("expm oracle limited to dimension <= 64");
    const Matrix L = build_liouvillian(array, seg);
    const Matrix prop = (L * t).exp();
    const Vector v = prop * Eigen::Map<const Vector>(rho0.data(), dim * dim);
    Matrix rho = Eigen::Map<const Matrix>(v.data(), dim, dim);
    if (seg.drive_detuning != 0.0) {
        const Vector ph = frame_phases(dim, seg.drive_detuning, t);
        rho = (ph.asDiagonal() * rho * ph.conjugate().asDiagonal()).eval();
    }
    return rho;
}

std::vector<PopulationRow> collective_populations(const MasterTrajectory& traj) {
    const Vector g = state_G(), d = state_D(), a = state_A(), b = state_B();
    std::vector<PopulationRow> rows;
    rows.reserve(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i) {
        const Matrix& rho = traj.states[i];
        rows.push_back({traj.times[i],
                        std::real((g.adjoint() * rho * g)(0)),
                        std::real((d.adjoint() * rho * d)(0)),
                        std::real((a.adjoint() * rho * a)(0)),
                        std::real((b.adjoint() * rho * b)(0))});
    }
    return rows;
}

void write_trajectory_csv(const MasterTrajectory& traj, const std::string& path,
                          bool populations_only) {
    auto out = open_output(path);
    out << "# times in 1/gamma0\n";
    if (populations_only) {
        out << "t,pop_G,pop_D,pop_A,pop_B\n";
        for (const auto& r : collective_populations(traj))
            out << fmt_g(r.t) << ',' << fmt_g(r.G) << ',' << fmt_g(r.D) << ',' << fmt_g(r.A)
                << ',' << fmt_g(r.B) << '\n';
        return;
    }
    const int dim = static_cast<int>(traj.states.front().rows());
    out << "t";
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) out << ",re_" << i << '_' << j << ",im_" << i << '_' << j;
    out << '\n';
    for (size_t k = 0; k < traj.states.size(); ++k) {
        out << fmt_g(traj.times[k]);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                out << ',' << fmt_g(traj.states[k](i, j).real()) << ','
                    << fmt_g(traj.states[k](i, j).imag());
        out << '\n';
    }
}

} // namespace mirrorqed
