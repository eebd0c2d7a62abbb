#pragma once

#include <functional>
#include <optional>

#include "unfold/poly.hpp"

namespace unfold {

/* The family (x^{k+1}+eps_{k-1}x^{k-1}+...+eps_0) y' = B(eps,x) y.
 * Only k = 1 (p = x^2 - eps) is supported by the Stokes machinery;
 * formal invariants accept general k. */
struct UnfoldedSystem {
    int n = 0;
    int k = 1;
    PolyMatrix B;

    Mat B_at(cplx eps, cplx x) const { return B.eval(eps, x); }
};

UnfoldedSystem parse_system(const json& doc);
json system_to_json(const UnfoldedSystem& sys);

struct OrderingRotation {
    std::vector<int> permutation;  // new index j <- old index permutation[j]
    double angle = 0.0;            // rotation phi applied as diff -> e^{i phi} diff
};

/* Sort eigenvalues of B(0,0) by decreasing real part (ties: increasing
 * imaginary part) and find the smallest non-negative rotation making
 * Re(lambda_q - lambda_j) > 0 strictly for q < j, with margin. */
OrderingRotation ordering_rotation(const UnfoldedSystem& sys, double margin = 1e-2);

/* Formal invariants at a fixed parameter value: the degree-<=k coefficient
 * polynomials lambda_j(eps,x), and for k=1, eps != 0 the exponent/monodromy
 * data of the model system. */
struct FormalInvariants {
    int n = 0;
    int k = 1;
    UnfoldedParameter eps;
    std::vector<std::vector<cplx>> lambda;  // [j][q], q = 0..k
    Vec mu_L, mu_R;                         // k=1, eps != 0 only
    Vec D_L, D_R;                           // diagonals of the model monodromies
    Vec lambda1_exp;                        // diagonal of e^{2 pi i Lambda_1}

    cplx lambda_at(int j, cplx x) const;
    const Vec& mu(Side l) const { return l == Side::L ? mu_L : mu_R; }
    const Vec& D(Side l) const { return l == Side::L ? D_L : D_R; }
};

FormalInvariants formal_invariants(const UnfoldedSystem& sys, const UnfoldedParameter& eps,
                                   const Tolerances& tol = {});

/* Model data constructed directly from Lambda(eps,x) = L0 + L1 x (k=1),
 * bypassing eigen-decomposition; used when invariants are given as input. */
FormalInvariants invariants_from_model(const Vec& lambda0, const Vec& lambda1,
                                       const UnfoldedParameter& eps);

cplx delta_ratio(const FormalInvariants& fi, int s, int j, Side l);

struct PrenormSamples {
    std::vector<cplx> grid;
    std::vector<Mat> P;  // eigenvector matrices, column j normalized (P)_{jj} = 1
    std::vector<Mat> R;  // remainder samples
};

PrenormSamples prenormalize(const UnfoldedSystem& sys, const UnfoldedParameter& eps,
                            const std::vector<cplx>& grid, double fd_step = 1e-5,
                            const Tolerances& tol = {});

struct ResonanceHit {
    UnfoldedParameter eps;
    int q = 0, j = 0;
    Side l = Side::L;
    int m = 1;
};

struct ResonanceSearchRegion {
    double modulus_min = 1e-6;
    double modulus_max = 1e-2;
    double arg_min = pi;
    double arg_max = 3 * pi;
};

/* Locate parameter values with mu_q,l - mu_j,l = m (integer m in
 * [m_min, m_max]) by Newton iteration on the cover, seeded on a log-spiral
 * grid. fi_fn evaluates formal invariants at a parameter. */
std::vector<ResonanceHit> resonance_values(
    const std::function<FormalInvariants(const UnfoldedParameter&)>& fi_fn, int q, int j, Side l,
    int m_min, int m_max, const ResonanceSearchRegion& region, int seeds_per_ring = 24);

/* Minimal-total-|diff| assignment of the rows of candidates to the reference
 * values (exact enumeration; n is small here). Returns perm with
 * matched[j] = candidates[perm[j]]. */
std::vector<int> match_branches(const Vec& reference, const Vec& candidates);

bool is_resonant(const FormalInvariants& fi, double margin, int* q = nullptr, int* j = nullptr,
                 Side* l = nullptr);

}  // namespace unfold
