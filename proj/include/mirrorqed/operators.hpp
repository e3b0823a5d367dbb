#pragma once

// Dense operator algebra for a register of N two-level emitters.
// Basis convention: computational index i encodes emitter n (1-based) in bit
// (n-1); bit set = excited. Dimension 2^N.

#include "mirrorqed/types.hpp"

#include <vector>

namespace mirrorqed {

inline int hilbert_dim(int n_emitters) { return 1 << n_emitters; }

// Lowering operator sigma_n = |g_n><e_n| embedded in the full register.
Matrix sigma_minus(int n_emitters, int emitter); // emitter is 1-based

Matrix sigma_plus(int n_emitters, int emitter);

// Number operator sigma_n^dag sigma_n.
Matrix number_op(int n_emitters, int emitter);

// Total excitation number of basis state i.
int excitation_number(int state_index);

// Collective three-emitter states (8-dim column vectors).
// |G> = |ggg>, |D> = (|egg>-|gge>)/sqrt2, |A> = (|egg>-2|geg>+|gge>)/sqrt6,
// |B> = (|egg>+|geg>+|gge>)/sqrt3.
Vector state_G();
Vector state_D();
Vector state_A();
Vector state_B();

// Single-excitation vector with amplitudes c_n on emitter n (N = c.size()).
Vector single_excitation_state(const Vector& c);

// Indices of the single-excitation basis states, ordered by emitter.
std::vector<int> single_excitation_indices(int n_emitters);

} // namespace mirrorqed
