#pragma once
// Index algebra for transverse (p,q)-forms in the constant coframe
// zeta^j = e^{2j} + i e^{2j+1}, and for real forms in an orthonormal coframe.

#include <Eigen/Dense>

#include <complex>
#include <utility>
#include <vector>

namespace folhe::forms {

using cd = std::complex<double>;
using Mask = unsigned;

int popcount(Mask m);
// All subsets of {0..n-1} of the given size, ordered lexicographically.
std::vector<Mask> subsets(int n, int size);
int ncomp(int n, int p, int q);
// Components of bidegree (p,q): pairs (I, J) with zeta^I ^ zetabar^J.
std::vector<std::pair<Mask, Mask>> components(int n, int p, int q);
int comp_index(int n, int p, int q, Mask I, Mask J);
// e^A ^ e^B = merge_sign(A,B) e^{A|B}; zero when A and B intersect.
int merge_sign(Mask A, Mask B);
// (zeta^I1 zetabar^J1) ^ (zeta^I2 zetabar^J2) = sign * zeta^{I1|I2} zetabar^{J1|J2}.
int wedge_sign(Mask I1, Mask J1, Mask I2, Mask J2);

struct WedgeTerm {
  int c1, c2, cout;
  double sign;
};
std::vector<WedgeTerm> wedge_table(int n, int p1, int q1, int p2, int q2);

// Pointwise squared norm of each basis element (|zeta^j|^2 = 2).
inline double weight(int p, int q) { return static_cast<double>(1u << (p + q)); }

// Constant scalar form in the zeta basis.
struct ConstForm {
  int p = 0, q = 0;
  std::vector<cd> c;
};
ConstForm kahler_form(int n);  // omega = (i/2) sum zeta^j ^ zetabar^j
ConstForm const_wedge(int n, const ConstForm& a, const ConstForm& b);
ConstForm const_power(int n, const ConstForm& a, int k);  // a^k, a^0 = 1

// Real exterior algebra: *e^A = hodge_sign(D, A) e^{complement}.
int hodge_sign(int D, Mask A);
// Real-basis expansion of the (p,q) basis; matrix 2^{2n} x ncomp.
Eigen::MatrixXcd zeta_to_real(int n, int p, int q);
// Extracts (p,q) components from a real-basis vector; matrix ncomp x 2^{2n}.
Eigen::MatrixXcd real_to_zeta(int n, int p, int q);
// zeta^{1..n} ^ zetabar^{1..n} = top_factor(n) e^{0..2n-1}
cd top_factor(int n);

}  // namespace folhe::forms
