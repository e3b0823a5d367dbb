#pragma once

// Time evolution of the emitter register: Lindblad master equation for
// density matrices, non-Hermitian Schroedinger equation for state vectors,
// and an exact matrix-exponential oracle on the vectorized Liouvillian.
//
// All evolution is carried out in the frame rotating at omega_0. Segments
// with a nonzero drive detuning are integrated in the frame of the drive and
// the accumulated frame phase is applied at the segment boundary.

#include "mirrorqed/geometry.hpp"
#include "mirrorqed/schedule.hpp"
#include "mirrorqed/types.hpp"

#include <vector>

namespace mirrorqed {

// Hermitian Hamiltonian of a segment in the frame resolving its drive
// (onsite terms get -drive_detuning per excitation, Rabi terms static).
// Geometry-derived J_nm couplings are always included; for the mirror
// configuration they vanish identically.
Matrix build_hamiltonian(const EmitterArray& array, const Segment& seg);

// H - (i/2) sum_nm Gamma_nm sigma_n^dag sigma_m - (i/2) gamma' sum_n n_n.
Matrix build_nonhermitian(const EmitterArray& array, const Segment& seg);

// Column-stacking vectorized Liouvillian of the master equation
// drho/dt = -i[H, rho] + sum_nm (Gamma_nm/2)(2 s_m rho s_n^+ - {s_n^+ s_m, rho})
//           + gamma' sum_n D[s_n] rho.
Matrix build_liouvillian(const EmitterArray& array, const Segment& seg);

struct EvolveOptions {
    double dt = 1e-3;      // RK4 step, units 1/gamma0; gamma0*dt <= 1e-2 required
    int stride = 10;       // trajectory output every `stride` steps
    bool record = true;    // keep sampled states (final state always kept)
    double trace_tol = 1e-6;
};

struct MasterTrajectory {
    std::vector<double> times;
    std::vector<Matrix> states; // sampled at stride and at segment boundaries
    const Matrix& final_state() const { return states.back(); }
};

struct StateTrajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    const Vector& final_state() const { return states.back(); }
};

MasterTrajectory evolve_master(const Matrix& rho0, const EmitterArray& array,
                               const ControlSchedule& schedule,
                               const EvolveOptions& opts = {});

StateTrajectory evolve_nonhermitian(const Vector& psi0, const EmitterArray& array,
                                    const ControlSchedule& schedule,
                                    const EvolveOptions& opts = {});

// Exact propagation of rho0 over a single constant segment for time t,
// exp(L t) applied to vec(rho0). Validation oracle for the RK4 path.
Matrix expm_oracle(const EmitterArray& array, const Segment& seg, double t,
                   const Matrix& rho0);

// Populations of the collective states G/D/A/B along a master trajectory.
struct PopulationRow {
    double t;
    double G, D, A, B;
};
std::vector<PopulationRow> collective_populations(const MasterTrajectory& traj);

// CSV export: "t,re_00,im_00,..." (full) or "t,pop_G,pop_D,pop_A,pop_B".
void write_trajectory_csv(const MasterTrajectory& traj, const std::string& path,
                          bool populations_only = true);

} // namespace mirrorqed
