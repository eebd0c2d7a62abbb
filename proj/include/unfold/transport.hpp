#pragma once

#include "unfold/geometry.hpp"

namespace unfold {

struct IntegratorStats {
    long steps = 0;
    long rejects = 0;
    double err_estimate = 0.0;
};

/* Right-hand side provider: x -> B(eps,x). Wraps either an UnfoldedSystem or
 * any analytic matrix family (sampled/fitted systems). */
struct SystemField {
    int n = 0;
    cplx eps;
    std::function<Mat(cplx)> B;

    static SystemField of(const UnfoldedSystem& sys, const UnfoldedParameter& e);
};

/* Continuous-argument accumulators for log(x - x_L), log(x - x_R); updated
 * along paths so that monodromy winding is exact by construction. */
struct BranchState {
    double arg_L = 0.0, arg_R = 0.0;
    cplx at = 0.0;  // point the arguments refer to
};

BranchState branch_seed(const UnfoldedParameter& eps, cplx x);
BranchState branch_transport(const UnfoldedParameter& eps, const BranchState& bs,
                             const PathPlan& path);
BranchState branch_step(const UnfoldedParameter& eps, const BranchState& bs, cplx x_new);

/* Fundamental solution of the model system:
 *   F = (x-x_R)^{U_R} (x-x_L)^{U_L}        (eps != 0)
 *   F = x^{Lambda_1} exp(-Lambda_0 / x)    (eps  = 0, arg from bs.arg_L)
 * Diagonal, branch taken from the accumulators. */
Mat model_solution(const FormalInvariants& fi, cplx x, const BranchState& bs);

/* T with column j = solution at path end for initial value e_j at the start.
 * Embedded Dormand-Prince 5(4) with adaptive steps. */
Mat transfer_matrix(const SystemField& f, const PathPlan& path, double rtol,
                    IntegratorStats* stats = nullptr);

struct LocalFloquetBasis {
    Side l = Side::L;
    cplx x0;                            // the singular point
    Vec mu;                             // exponents mu_{j,l}
    std::vector<std::vector<Vec>> g;    // [j][m] series coefficients, g[j][0] = eigvec
    double radius_estimate = 0.0;

    /* column j at x: (x-x0)^{mu_j} sum_m g[j][m] (x-x0)^m, principal branch */
    Vec column(int j, cplx x) const;
};

LocalFloquetBasis local_floquet_basis(const SystemField& f, const UnfoldedParameter& eps,
                                      const FormalInvariants& fi, Side which, int order = 40,
                                      double tol = 1e-9);

struct MonodromyData {
    cplx base;
    Mat M_L, M_R;          // positive loop around x_L / negative loop around x_R
    Mat M_L_inv, M_R_inv;  // integrated along the reversed loops
    IntegratorStats stats;
    double det_residual_L = 0.0, det_residual_R = 0.0;
};

MonodromyData monodromy_matrices(const SystemField& f, const UnfoldedParameter& eps,
                                 const FormalInvariants& fi, cplx base, double rtol,
                                 double r = 0.5, double delta = 0.1);

}  // namespace unfold
