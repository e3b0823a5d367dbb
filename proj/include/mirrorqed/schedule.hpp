#pragma once

// Piecewise-constant control program for the three-emitter Hamiltonian:
// global detuning Delta, extra detuning delta on emitter 2, nearest-neighbour
// exchange J, per-emitter Rabi amplitudes Omega_n, and the drive detuning
// omega_L - omega_0. Times in 1/gamma0, rates in gamma0.

#include "mirrorqed/errors.hpp"
#include "mirrorqed/types.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace mirrorqed {

struct Segment {
    double duration = 0.0;
    double Delta = 0.0;
    double delta2 = 0.0; // detuning of emitter 2 relative to Delta
    double J = 0.0;      // engineered nearest-neighbour exchange
    std::array<Complex, 3> Omega{Complex{0}, Complex{0}, Complex{0}};
    double drive_detuning = 0.0; // omega_L - omega_0

    void validate() const {
        if (!(duration > 0.0) || !std::isfinite(duration))
            throw ConfigError("segment duration must be positive and finite");
        for (double v : {Delta, delta2, J, drive_detuning})
            if (!std::isfinite(v)) throw ConfigError("segment parameter not finite");
        for (const Complex& o : Omega)
            if (!std::isfinite(o.real()) || !std::isfinite(o.imag()))
                throw ConfigError("Rabi amplitude not finite");
    }
};

struct ControlSchedule {
    std::vector<Segment> segments;

    void validate() const {
        if (segments.empty()) throw ConfigError("schedule must contain at least one segment");
        for (const auto& s : segments) s.validate();
    }

    double total_duration() const {
        double t = 0.0;
        for (const auto& s : segments) t += s.duration;
        return t;
    }

    static ControlSchedule single(const Segment& s) { return ControlSchedule{{s}}; }
};

} // namespace mirrorqed
