#include "mirrorqed/geometry.hpp"

#include "mirrorqed/errors.hpp"
#include "mirrorqed/operators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace mirrorqed {

namespace {
constexpr double K0 = 2.0 * PI; // resonant wavenumber in units of 1/lambda0
}

void EmitterArray::validate() const {
    if (positions.empty()) throw ConfigError("emitter array must contain at least one emitter");
    for (double x : positions) {
        if (!(x > 0.0)) throw ConfigError("emitter positions must be strictly positive (mirror at x = 0)");
        if (!std::isfinite(x)) throw ConfigError("emitter position not finite");
    }
    if (!(gamma0 > 0.0)) throw ConfigError("gamma0 must be positive");
    if (gamma_prime < 0.0) throw ConfigError("gamma_prime must be non-negative");
}

EmitterArray EmitterArray::mirror_configuration(int n, double gamma0, double gamma_prime) {
    EmitterArray a;
    a.positions.resize(n);
    for (int k = 0; k < n; ++k) a.positions[k] = (k + 1) + 0.25;
    a.gamma0 = gamma0;
    a.gamma_prime = gamma_prime;
    return a;
}

CouplingMatrices coupling_matrices(const EmitterArray& array) {
    array.validate();
    const int n = array.size();
    CouplingMatrices c;
    c.J.resize(n, n);
    c.Gamma.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double xd = std::abs(array.positions[i] - array.positions[j]);
            const double xs = array.positions[i] + array.positions[j];
            const Complex val =
                -IMU * (array.gamma0 / 4.0) * (std::exp(IMU * K0 * xd) - std::exp(IMU * K0 * xs));
            c.J(i, j) = val.real();
            c.Gamma(i, j) = -2.0 * val.imag();
        }
    }
    // Symmetrize away rounding asymmetry from the exponentials.
    c.J = ((c.J + c.J.transpose()) / 2.0).eval();
    c.Gamma = ((c.Gamma + c.Gamma.transpose()) / 2.0).eval();
    return c;
}

JumpOperator jump_operator(const EmitterArray& array) {
    array.validate();
    const int n = array.size();
    JumpOperator jop;
    jop.weights.resize(n);
    double gamma_B = 0.0;
    for (int k = 0; k < n; ++k) {
        jop.weights(k) = std::sin(K0 * array.positions[k]);
        gamma_B += array.gamma0 * jop.weights(k) * jop.weights(k);
    }
    jop.gamma_B = gamma_B;
    jop.fully_dark = gamma_B < 1e-30;
    const int dim = hilbert_dim(n);
    jop.op = Matrix::Zero(dim, dim);
    if (!jop.fully_dark) {
        const double scale = std::sqrt(array.gamma0 / gamma_B);
        for (int k = 0; k < n; ++k) jop.op += scale * jop.weights(k) * sigma_minus(n, k + 1);
    }
    return jop;
}

namespace {

// Two-excitation block of the non-Hermitian Hamiltonian for the mirror
// configuration at delta = -J, Delta = 0, in the basis (|eeg>, |ege>, |gee>).
Matrix two_excitation_block(double J, double gamma0) {
    Matrix h(3, 3);
    const Complex g = -IMU * gamma0;
    h << -J + g, J + g / 2.0, g / 2.0,
         J + g / 2.0, g, J + g / 2.0,
         g / 2.0, J + g / 2.0, -J + g;
    return h;
}

Vector embed_two_excitation(const Vector& v3) {
    // (|eeg>, |ege>, |gee>) sit at register indices 3, 5, 6.
    Vector v = Vector::Zero(8);
    v(3) = v3(0);
    v(5) = v3(1);
    v(6) = v3(2);
    return v;
}

} // namespace

CollectiveBasis collective_basis(const EmitterArray& array, double J) {
    array.validate();
    if (array.size() != 3)
        throw ConfigError("collective_basis requires the three-emitter configuration");

    CollectiveBasis basis;
    basis.G = state_G();
    basis.D = state_D();
    basis.A = state_A();
    basis.B = state_B();

    const double gamma0 = array.gamma0;
    Eigen::ComplexEigenSolver<Matrix> solver(two_excitation_block(J, gamma0));
    if (solver.info() != Eigen::Success)
        throw RegimeError("two-excitation eigensolver failed to converge");

    std::vector<NonHermitianEigenstate> eig;
    for (int k = 0; k < 3; ++k) {
        NonHermitianEigenstate e;
        Vector v = solver.eigenvectors().col(k);
        // Fix the bilinear normalization v.v = 1 used for the complex
        // symmetric block, then a deterministic overall sign.
        const Complex bilinear = (v.transpose() * v)(0);
        v /= std::sqrt(bilinear);
        int imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (std::real(v(imax)) < 0.0) v = -v;
        e.state = embed_two_excitation(v);
        e.shift = solver.eigenvalues()(k).real();
        e.decay = -2.0 * solver.eigenvalues()(k).imag();
        eig.push_back(std::move(e));
    }
    std::sort(eig.begin(), eig.end(), [](const auto& a, const auto& b) {
        if (std::abs(a.decay - b.decay) > 1e-12) return a.decay < b.decay;
        return a.shift < b.shift;
    });
    basis.two_excitation = eig;

    // sigma_D^dag |D> = -|ege>; lambda_{1,2} are the two eigenstates with
    // nonzero |ege> content (S_D has none). Order lambda_1 before lambda_2 by
    // ascending decay, matching the sorted list.
    Vector sdD = Vector::Zero(8);
    sdD(5) = -1.0;
    std::vector<Complex> xi;
    std::vector<const NonHermitianEigenstate*> lambdas;
    for (const auto& e : eig) {
        const Complex overlap = e.state.dot(sdD); // conjugating inner product
        if (std::abs(overlap) > 1e-9) {
            xi.push_back(overlap);
            lambdas.push_back(&e);
        }
    }
    if (xi.size() != 2) throw RegimeError("unexpected degeneracy in two-excitation sector");
    basis.xi1 = xi[0];
    basis.xi2 = xi[1];

    // S_B / S_A content of lambda_1.
    const Vector sB = embed_two_excitation((Vector(3) << 1, 1, 1).finished() / std::sqrt(3.0));
    const Vector sA = embed_two_excitation((Vector(3) << -1, 2, -1).finished() / std::sqrt(6.0));
    basis.eps1 = sB.dot(lambdas[0]->state);
    basis.eps2 = sA.dot(lambdas[0]->state);
    return basis;
}

std::vector<Complex> emitted_field(const std::vector<Vector>& amplitudes,
                                   const EmitterArray& array) {
    array.validate();
    const int n = array.size();
    std::vector<Complex> out;
    out.reserve(amplitudes.size());
    const double root_gamma0 = std::sqrt(array.gamma0);
    for (const auto& c : amplitudes) {
        if (c.size() != n) throw ConfigError("amplitude row length does not match emitter count");
        Complex psi = 0.0;
        for (int k = 0; k < n; ++k) psi += std::sin(K0 * array.positions[k]) * c(k);
        out.push_back(root_gamma0 * psi);
    }
    return out;
}

} // namespace mirrorqed
