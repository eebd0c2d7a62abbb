#pragma once

#include <optional>

#include "unfold/transport.hpp"

namespace unfold {

struct StokesCollection {
    UnfoldedParameter eps;
    int n = 0;
    Mat C_R, C_L;    // unipotent upper / lower triangular
    Vec D_R, D_L;    // model monodromy diagonals
    Vec gauge;       // diagonal scalings applied during extraction
    double leakage = 0.0;   // off-triangle norm discarded
    double diag_dev = 0.0;  // |diag - 1| before unipotent enforcement

    const Mat& C(Side l) const { return l == Side::L ? C_L : C_R; }
    const Vec& D(Side l) const { return l == Side::L ? D_L : D_R; }
};

json stokes_to_json(const StokesCollection& sc);
StokesCollection stokes_from_json(const json& j);

/* Basis whose column j spans the 1-dim intersection of the leading-j
 * invariant subspace of M_R (eigenvalues matched to D_R) with the trailing
 * invariant subspace of M_L for D_L[j..n]. Columns unit norm, first
 * significant component phase zero. */
Mat mixed_basis(const MonodromyData& mono, const FormalInvariants& fi, double tol = 1e-6);

StokesCollection extract_stokes(const SystemField& f, const UnfoldedParameter& eps,
                                const FormalInvariants& fi, const Tolerances& tol = {},
                                double r = 0.5, double delta = 0.1);

StokesCollection extract_stokes(const UnfoldedSystem& sys, const UnfoldedParameter& eps,
                                const Tolerances& tol = {}, double r = 0.5, double delta = 0.1);

struct GaugeWitness {
    Vec K;
    double residual = 0.0;
};

/* Deterministic gauge fixing: C_R superdiagonals by distance then row, then
 * C_L subdiagonals; first unconstrained entry above tol in each orbit is
 * scaled to 1. Idempotent. */
StokesCollection canonicalize(const StokesCollection& sc, double tol = 1e-8,
                              GaugeWitness* witness = nullptr);

std::optional<GaugeWitness> equivalent(const StokesCollection& a, const StokesCollection& b,
                                       double tol = 1e-8);

/* Frobenius distance between the C-matrices of two collections. */
double collection_distance(const StokesCollection& a, const StokesCollection& b);

struct DiagonalizerResult {
    Mat T;
    double margin = 0.0;  // min over pairs of |1 - Delta|
};

/* Unipotent triangular T with T^{-1} (C D) T = D from the recurrence
 *   T_ij (1 - Delta_ij) = C_ij + sum_k C_ik T_kj Delta_kj,
 * k between i and j in the triangle order of the side. */
DiagonalizerResult diagonalizer_T(const Mat& C, const Vec& D, Side l, double margin_tol = 1e-4);

struct LogTermResult {
    bool conclusive = false;
    bool blocked = false;
    cplx poly_value;
    std::string note;
};

/* Obstruction polynomials for Floquet solutions at a resonance mu_s - mu_j
 * in N* (side l), evaluated on the eps=0 Stokes matrices. Generic families:
 * (1,2,R), (n,n-1,L), and all pairs when the Stokes lines are distinct. */
LogTermResult log_term_predicates(const StokesCollection& sc0, int s, int j, Side l,
                                  const FormalInvariants* fi0 = nullptr);

struct TransitionInvariants {
    Mat N_L_bar, N_R_bar;
    Mat N_L_tilde, N_R_tilde;
};

TransitionInvariants transition_invariants(const StokesCollection& sc_bar,
                                           const StokesCollection& sc_tilde,
                                           double margin_tol = 1e-4);

struct AutoIntersectionReport {
    Vec Q_D, Q_U;
    double residual = 0.0;
    double qd_dev = 0.0, qu_dev = 0.0;  // |Q_s - I|
};

AutoIntersectionReport check_autointersection(const StokesCollection& sc_bar,
                                              const StokesCollection& sc_tilde,
                                              double margin_tol = 1e-4);

/* Exponentially small branch gap observable: sum of |N_l - C_l| at both
 * branch presentations (paper-certified to decay like exp(-A/sqrt|eps|)). */
double transition_gap(const StokesCollection& sc_bar, const StokesCollection& sc_tilde,
                      double margin_tol = 1e-4);

struct GapFit {
    double slope = 0.0;      // a in g ~ b exp(-a / sqrt|eps|)
    double intercept = 0.0;  // log b
    double r2 = 0.0;
    bool degenerate = false;  // all gaps at/below noise floor
};

/* Log-linear regression of log(gap) against -1/sqrt(modulus). */
GapFit gap_fit(const std::vector<std::pair<double, double>>& modulus_gap,
               double noise_floor = 1e-13);

/* Literal spec operation: per-modulus ||C(eps~) - C(eps-)|| of canonically
 * gauged pairs, fitted. */
GapFit summability_gap(
    const std::vector<std::pair<StokesCollection, StokesCollection>>& bar_tilde_pairs);

struct ReducibilityReport {
    std::vector<int> permutation;          // applied to indices, identity if none needed
    std::vector<std::vector<int>> blocks;  // finest common block partition
    std::vector<int> trivial_columns;
    std::vector<int> trivial_rows;
    std::vector<std::pair<int, int>> unstable_entries;  // straddle tol across samples
};

ReducibilityReport reducibility_analysis(const std::vector<StokesCollection>& family,
                                         double tol = 1e-8);

}  // namespace unfold
