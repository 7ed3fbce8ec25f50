#pragma once
// Integer lattices: saturated kernels of rational matrices and the
// admissible-mode lattice {k in Z^d : k . xi = 0 for every foliation row}.

#include "folhe/symbolic.hpp"

#include <vector>

namespace folhe {

using IntVec = std::vector<long long>;

// Basis of {k in Z^d : A k = 0}; A given as rows of rationals.
std::vector<IntVec> integer_kernel(const std::vector<std::vector<Rational>>& rows, int d);

// Linear system whose integer kernel is the admissible lattice: one row per
// (foliation row, monomial) pair.
std::vector<std::vector<Rational>> relation_rows(const std::vector<SymVec>& xi_rows);

// Exact test k . xi == 0 for every row.
bool annihilates(const IntVec& k, const std::vector<SymVec>& xi_rows);

// Size-reduce a basis (pairwise Gauss reduction) for small coefficients.
void reduce_basis(std::vector<IntVec>& basis);

}  // namespace folhe
