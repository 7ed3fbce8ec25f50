#pragma once
// Constant-coefficient calculus of basic (p,q)-forms: Dolbeault operators,
// Lefschetz and contraction, wedge products, integration against chi, the
// basic Hodge star and the P-operator.

#include "folhe/field.hpp"
#include "folhe/forms.hpp"

#include <random>
#include <utility>

namespace folhe {

// Parts that would exceed bidegree n come back empty().
struct DolbeaultPair {
  BasicField del;     // (p+1, q) part, empty() when p = n
  BasicField delbar;  // (p, q+1) part, empty() when q = n
};

BasicField del(const BasicField& a);
BasicField delbar(const BasicField& a);
DolbeaultPair dolbeault(const BasicField& a);

BasicField lefschetz(const BasicField& a);
BasicField contract(const BasicField& a);
// Exact mode-wise wedge with a constant scalar form (on either side).
BasicField wedge_const(const BasicField& a, const forms::ConstForm& c, bool const_on_left = true);

// Pointwise product computed on the dealiased grid and truncated to the modes.
BasicField wedge(const BasicField& a, const BasicField& b);
// Zero field of the given shape.
BasicField zero_like(const ModelPtr& model, int p, int q, int rank);

// int_X a ^ chi for a scalar (n,n)-form.
cd integrate(const BasicField& a);
// int_X tr(a) ^ chi.
cd integrate_trace(const BasicField& a);
// int_X f dvol for a scalar (0,0) field.
cd integrate_function(const BasicField& f);

// Complex-linear basic Hodge star, (p,q) -> (n-q, n-p).
BasicField hodge_star_B(const BasicField& a);

// P(f) = i Lambda delbar del f, entrywise on End-valued (0,0) fields.
BasicField p_operator(const BasicField& f);
// P^*(f) = i/(n-1)! *_B delbar del L^{n-1} f.
BasicField p_adjoint(const BasicField& f);
// Zero-mean solution of P(phi) = rhs; throws "not in Im(P)" on nonzero mean.
BasicField poisson_solve(const BasicField& rhs, double mean_tol = 1e-12);

// max coefficient of del delbar (omega^{n-1}) for the model metric.
double gauduchon_check(const ModelPtr& model);
// Same for the conformally rescaled metric e^psi omega.
double gauduchon_residual(const BasicField& psi);
// del delbar (e^{(n-1) psi}) ^ omega^{n-1}, the (n,n) form behind the residual.
BasicField gauduchon_form(const BasicField& psi);

// Random field with modes |a|_inf <= max_mode (lattice coordinates) and
// coefficient decay, optionally with the Hermitian symmetry a = a^*.
BasicField random_field(const ModelPtr& model, int p, int q, int rank, std::mt19937_64& rng,
                        bool hermitian = false, int max_mode = 3);

}  // namespace folhe
