#pragma once

// Matrices recorded from find_ergodic_sp4; the classical tests check that the
// search still reproduces them.

#include "torusq/ffcore.hpp"

namespace fixtures {

/// Default search: non-degenerate at 3, 5, 7. P_A = x^4 - 10x^3 + 19x^2 - 10x + 1.
inline torusq::IntMatrix sp4_bound_matrix() { return torusq::IntMatrix::parse_square("4,3,2,1,2,3,1,1,1,1,1,0,3,4,1,2"); }

/// Search with P_A split into distinct linear factors at one of 5, 7, 11, 13
/// (it is 13). P_A = x^4 - 13x^3 + 25x^2 - 13x + 1.
inline torusq::IntMatrix sp4_split_matrix() { return torusq::IntMatrix::parse_square("7,5,3,2,2,3,1,1,4,3,2,1,1,1,0,1"); }

inline constexpr torusq::Residue kSp4SplitPrime = 13;

}  // namespace fixtures
