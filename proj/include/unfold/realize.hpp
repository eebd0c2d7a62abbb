#pragma once

#include "unfold/stokes.hpp"

namespace unfold {

struct RealizeConfig {
    double r = 1.2;            // x-disk radius for the construction
    double theta = -1.0;       // offset constant, default 0.05 * r
    double c_horiz = 1.0;      // horizontal boundary length constant
    double delta = 0.1;        // sector overlap at eps = 0
    int max_nu = 20;
    int gauss_order = 16;      // Gauss-Legendre points per panel
    double quad_tol = 1e-10;
    double tol = 1e-8;         // stop when ||Z^nu|| below this
    int retries = 3;           // radius halvings on contraction failure
    double cutoff_rel = 1e-6;  // spiral truncation radius, relative
    int fit_degree = 40;       // polynomial degree of the reconstructed A fit
    double fit_radius_frac = 0.55;
};

/* One quadrature panel of a boundary path: Gauss-Legendre nodes with the
 * jump-matrix values attached. */
struct Panel {
    std::vector<cplx> h;      // node positions
    std::vector<cplx> w;      // node weights (already times dh/du)
    std::vector<Mat> Z;       // values at the nodes
    cplx a, b;                // panel endpoints
};

struct StagePath {
    std::vector<Panel> panels;
    DomainLabel side = DomainLabel::D;
};

struct NormLedger {
    std::vector<double> sup_Z;       // per stage nu = 1,2,...
    std::vector<double> K_estimate;  // flatness constants K_N, N = 1..4 (stage 1)
};

struct RealizationState {
    UnfoldedParameter eps;
    RealizeConfig cfg;
    FormalInvariants fi;
    StokesCollection target;
    std::vector<StagePath> stage_D, stage_U;  // index nu-1
    NormLedger ledger;
    int nu_end = 0;
    bool converged = false;
};

/* Jump matrix Z(eps,x) = F_D C F_D^{-1} - I on the L/R components, 0 on C.
 * Branch of F_D fixed by cuts pointing to the U side. */
Mat jump_matrix(const FormalInvariants& fi, const StokesCollection& target, cplx x,
                DomainLabel component);

struct JumpData {
    StagePath path_D, path_U;
    double max_Z = 0.0;
    std::vector<double> K_estimate;  // K_N for N = 1..4
};

JumpData jump_data(const FormalInvariants& fi, const StokesCollection& target,
                   const UnfoldedParameter& eps, const DomainSet& domains,
                   const RealizeConfig& cfg);

/* Cauchy-split kernel: values[i] = (1/2 pi i) sum over panels of
 * int Z(h)/(h - x_i) dh, with adaptive panel subdivision near the path.
 * Serial reference and OpenMP variants compute identical results. */
void cauchy_apply_serial(const std::vector<Panel>& panels, const std::vector<cplx>& points,
                         std::vector<Mat>& out, double quad_tol);
void cauchy_apply_parallel(const std::vector<Panel>& panels, const std::vector<cplx>& points,
                           std::vector<Mat>& out, double quad_tol);

struct Factorization {
    std::shared_ptr<RealizationState> state;

    Mat H(DomainLabel side, cplx x) const;         // product over stages
    Mat H_deriv(DomainLabel side, cplx x) const;   // Cauchy derivative on a local circle
    Mat Zsplit(DomainLabel side, int nu, cplx x) const;
};

Factorization birkhoff_factorize(const FormalInvariants& fi, const StokesCollection& target,
                                 const UnfoldedParameter& eps, RealizeConfig cfg = {});

struct ReconstructedSystem {
    UnfoldedParameter eps;
    double fit_radius = 0.0;
    std::vector<cplx> grid;      // sample circle
    std::vector<Mat> A_samples;  // A(eps, grid[i])
    std::vector<Mat> A_coeffs;   // Taylor/fit coefficients, A ~ sum A_k x^k
    double overlap_residual = 0.0;   // D- vs U-side evaluation mismatch
    double boundedness_ratio = 0.0;  // sup near x_l over sup on the sample circle

    Mat A_at(cplx x) const;
    UnfoldedSystem as_system() const;  // fitted polynomial matrix, eps-independent
};

ReconstructedSystem assemble_system(const Factorization& fact, const RealizeConfig& cfg);

struct RoundtripResult {
    double distance = 0.0;
    double jump_residual = 0.0;
    StokesCollection target_canonical;
    StokesCollection extracted_canonical;
    ReconstructedSystem system;
};

/* Build a system realizing (fi, target) at the given parameter, re-extract
 * its Stokes collection (ladder extrapolation when eps = 0), and return the
 * canonical distance. */
RoundtripResult roundtrip(const FormalInvariants& fi, const StokesCollection& target,
                          const UnfoldedParameter& eps, RealizeConfig cfg = {},
                          const Tolerances& tol = {});

}  // namespace unfold
