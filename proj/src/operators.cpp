#include "mirrorqed/operators.hpp"

#include <bit>

namespace mirrorqed {

Matrix sigma_minus(int n_emitters, int emitter) {
    const int dim = hilbert_dim(n_emitters);
    const int bit = 1 << (emitter - 1);
    Matrix op = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (i & bit) op(i ^ bit, i) = 1.0;
    }
    return op;
}

Matrix sigma_plus(int n_emitters, int emitter) {
    return sigma_minus(n_emitters, emitter).adjoint();
}

Matrix number_op(int n_emitters, int emitter) {
    const int dim = hilbert_dim(n_emitters);
    const int bit = 1 << (emitter - 1);
    Matrix op = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (i & bit) op(i, i) = 1.0;
    }
    return op;
}

int excitation_number(int state_index) {
    return std::popcount(static_cast<unsigned>(state_index));
}

namespace {
Vector from_amplitudes(std::initializer_list<std::pair<int, double>> amps) {
    Vector v = Vector::Zero(8);
    for (const auto& [idx, a] : amps) v(idx) = a;
    return v;
}
} // namespace

// Index map for three emitters: |egg> = 0b001 = 1, |geg> = 2, |gge> = 4.
Vector state_G() { return from_amplitudes({{0, 1.0}}); }

Vector state_D() {
    const double s = 1.0 / std::sqrt(2.0);
    return from_amplitudes({{1, s}, {4, -s}});
}

Vector state_A() {
    const double s = 1.0 / std::sqrt(6.0);
    return from_amplitudes({{1, s}, {2, -2.0 * s}, {4, s}});
}

Vector state_B() {
    const double s = 1.0 / std::sqrt(3.0);
    return from_amplitudes({{1, s}, {2, s}, {4, s}});
}

Vector single_excitation_state(const Vector& c) {
    const int n = static_cast<int>(c.size());
    Vector v = Vector::Zero(hilbert_dim(n));
    for (int k = 0; k < n; ++k) v(1 << k) = c(k);
    return v;
}

std::vector<int> single_excitation_indices(int n_emitters) {
    std::vector<int> idx(n_emitters);
    for (int k = 0; k < n_emitters; ++k) idx[k] = 1 << k;
    return idx;
}

} // namespace mirrorqed
