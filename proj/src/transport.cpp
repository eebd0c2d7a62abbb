#include "unfold/transport.hpp"

#include <Eigen/Eigenvalues>

namespace unfold {

SystemField SystemField::of(const UnfoldedSystem& sys, const UnfoldedParameter& e) {
    SystemField f;
    f.n = sys.n;
    f.eps = e.eps();
    PolyMatrix B = sys.B;
    cplx ev = f.eps;
    f.B = [B, ev](cplx x) { return B.eval(ev, x); };
    return f;
}

namespace {

/* Dormand-Prince 5(4) tableau */
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

struct SegmentRhs {
    const SystemField* f;
    const PathSegment* seg;

    Mat operator()(double u, const Mat& Y) const {
        cplx x = seg->point(u);
        cplx p = x * x - f->eps;
        if (std::abs(p) == 0.0) fail(errc::integrator, "path touches a singular point");
        return (f->B(x) * Y) * (seg->deriv(u) / p);
    }
};

void integrate_segment(const SystemField& f, const PathSegment& seg, Mat& Y, double rtol,
                       IntegratorStats* stats) {
    SegmentRhs rhs{&f, &seg};
    double u = 0.0, h = 0.01;
    const double hmin = 1e-13;
    Mat k1 = rhs(0.0, Y);
    while (u < 1.0) {
        h = std::min(h, 1.0 - u);
        Mat k2 = rhs(u + c2 * h, Y + h * (a21 * k1));
        Mat k3 = rhs(u + c3 * h, Y + h * (a31 * k1 + a32 * k2));
        Mat k4 = rhs(u + c4 * h, Y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        Mat k5 = rhs(u + c5 * h, Y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        Mat k6 = rhs(u + h, Y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Mat Y5 = Y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Mat k7 = rhs(u + h, Y5);
        Mat errm = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        // column-relative error: each column carries its own scale
        double err = 0.0;
        for (int j = 0; j < Y.cols(); ++j) {
            double scale = std::max(Y.col(j).norm(), Y5.col(j).norm());
            scale = std::max(scale, 1e-290);
            err = std::max(err, errm.col(j).norm() / scale);
        }
        if (!std::isfinite(err)) fail(errc::integrator, "integration diverged (non-finite state)");

        if (err <= rtol) {
            u += h;
            Y.swap(Y5);
            k1.swap(k7);  // FSAL
            if (stats) {
                stats->steps++;
                stats->err_estimate = std::max(stats->err_estimate, err);
            }
            h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(rtol / std::max(err, 1e-300), 0.2)));
        } else {
            if (stats) stats->rejects++;
            if (h <= hmin) fail(errc::integrator, "step size underflow (near-singularity?)");
            h *= std::max(0.1, 0.9 * std::pow(rtol / err, 0.2));
            h = std::max(h, hmin);
        }
    }
}

}  // namespace

Mat transfer_matrix(const SystemField& f, const PathPlan& path, double rtol,
                    IntegratorStats* stats) {
    Mat Y = Mat::Identity(f.n, f.n);
    for (const auto& seg : path.segments) integrate_segment(f, seg, Y, rtol, stats);
    return Y;
}

BranchState branch_seed(const UnfoldedParameter& eps, cplx x) {
    BranchState bs;
    bs.at = x;
    if (eps.is_origin()) {
        bs.arg_L = bs.arg_R = std::arg(x);
    } else {
        bs.arg_L = std::arg(x - eps.x_L());
        bs.arg_R = std::arg(x - eps.x_R());
    }
    return bs;
}

BranchState branch_step(const UnfoldedParameter& eps, const BranchState& bs, cplx x_new) {
    BranchState out = bs;
    cplx xl = eps.is_origin() ? cplx{0, 0} : eps.x_L();
    cplx xr = eps.is_origin() ? cplx{0, 0} : eps.x_R();
    double dl = std::arg((x_new - xl) / (bs.at - xl));
    double dr = std::arg((x_new - xr) / (bs.at - xr));
    if (std::abs(dl) > pi / 2 || std::abs(dr) > pi / 2)
        fail(errc::integrator, "branch step too large (argument jump > pi/2)");
    out.arg_L += dl;
    out.arg_R += dr;
    out.at = x_new;
    return out;
}

BranchState branch_transport(const UnfoldedParameter& eps, const BranchState& bs,
                             const PathPlan& path) {
    BranchState cur = bs;
    for (const auto& seg : path.segments) {
        // subdivide each segment until every argument step is small
        int n = 8;
        for (;;) {
            bool ok = true;
            BranchState trial = cur;
            try {
                for (int i = 1; i <= n; ++i) trial = branch_step(eps, trial, seg.point(double(i) / n));
            } catch (const error&) {
                ok = false;
            }
            if (ok) {
                cur = trial;
                break;
            }
            n *= 2;
            if (n > (1 << 22)) fail(errc::integrator, "branch transport cannot resolve path");
        }
    }
    return cur;
}

Mat model_solution(const FormalInvariants& fi, cplx x, const BranchState& bs) {
    int n = fi.n;
    Mat F = Mat::Zero(n, n);
    if (fi.eps.is_origin()) {
        cplx logx = std::log(std::abs(x)) + I * bs.arg_L;
        for (int j = 0; j < n; ++j)
            F(j, j) = std::exp(fi.lambda[j][1] * logx - fi.lambda[j][0] / x);
        return F;
    }
    cplx ll = std::log(std::abs(x - fi.eps.x_L())) + I * bs.arg_L;
    cplx lr = std::log(std::abs(x - fi.eps.x_R())) + I * bs.arg_R;
    for (int j = 0; j < n; ++j) F(j, j) = std::exp(fi.mu_R[j] * lr + fi.mu_L[j] * ll);
    return F;
}

LocalFloquetBasis local_floquet_basis(const SystemField& f, const UnfoldedParameter& eps,
                                      const FormalInvariants& fi, Side which, int order,
                                      double tol) {
    if (eps.is_origin()) fail(errc::usage, "local_floquet_basis: needs eps != 0");
    int n = f.n;
    cplx x0 = which == Side::L ? eps.x_L() : eps.x_R();
    cplx x1 = which == Side::L ? eps.x_R() : eps.x_L();
    cplx c = x0 - x1;  // distance to the other singular point

    const Vec& mu = fi.mu(which);
    // resonance precondition: no integer nonzero exponent gaps
    for (int q = 0; q < n; ++q)
        for (int j = 0; j < n; ++j) {
            if (q == j) continue;
            cplx d = mu[q] - mu[j];
            double nearest = std::round(d.real());
            if (nearest != 0.0 && std::abs(d - nearest) < tol)
                fail(errc::resonance, std::string("local_floquet_basis: resonance mu_") +
                                          std::to_string(q) + " - mu_" + std::to_string(j) +
                                          " near integer at side " + side_name(which));
        }

    // Taylor coefficients A_k of B(x0+u)/(u + c) around u = 0
    // B(x0+u) = sum_m Bm u^m (finite); 1/(u+c) = sum (-1)^i u^i / c^{i+1}
    std::vector<Mat> Bm;
    {
        // numerically stable derivative extraction on a circle
        int m_max = order + 4;
        int nq = 4 * m_max;
        double rad = 0.5 * std::abs(c);
        std::vector<Mat> samples;
        samples.reserve(nq);
        for (int i = 0; i < nq; ++i) {
            cplx u = rad * std::exp(2.0 * pi * I * double(i) / double(nq));
            samples.push_back(f.B(x0 + u));
        }
        for (int m = 0; m <= m_max; ++m) {
            Mat acc = Mat::Zero(n, n);
            for (int i = 0; i < nq; ++i) {
                cplx u = rad * std::exp(2.0 * pi * I * double(i) / double(nq));
                acc += samples[i] * std::exp(-2.0 * pi * I * double(i * m) / double(nq));
            }
            Bm.push_back(acc / (double(nq) * std::pow(rad, m)));
        }
    }
    std::vector<Mat> A(order + 1, Mat::Zero(n, n));
    for (int k = 0; k <= order; ++k)
        for (int i = 0; i <= k; ++i)
            A[k] += Bm[k - i] * (std::pow(-1.0, i) / std::pow(c, i + 1));

    LocalFloquetBasis basis;
    basis.l = which;
    basis.x0 = x0;
    basis.mu = mu;
    basis.g.assign(n, {});

    Eigen::ComplexEigenSolver<Mat> es(A[0]);
    for (int j = 0; j < n; ++j) {
        // eigenvector of the residue matrix for mu_j, j-th component 1
        std::vector<int> m = match_branches(mu, es.eigenvalues());
        Vec g0 = es.eigenvectors().col(m[j]);
        if (std::abs(g0[j]) < 1e-10)
            fail(errc::usage, "local_floquet_basis: eigenvector j-th component vanishes");
        g0 /= g0[j];
        std::vector<Vec>& g = basis.g[j];
        g.push_back(g0);
        for (int mo = 1; mo <= order; ++mo) {
            Vec rhs = Vec::Zero(n);
            for (int k = 1; k <= mo; ++k) rhs -= A[k] * g[mo - k];
            Mat lhs = A[0] - (mu[j] + double(mo)) * Mat::Identity(n, n);
            Eigen::FullPivLU<Mat> lu(lhs);
            if (lu.rcond() < 1e-13)
                fail(errc::resonance, "local_floquet_basis: singular recursion matrix at order " +
                                          std::to_string(mo));
            g.push_back(lu.solve(rhs));
        }
    }

    // convergence radius estimate by root test on the tail
    double lim = 0.0;
    for (int j = 0; j < n; ++j)
        for (int m = order / 2; m <= order; ++m)
            lim = std::max(lim, std::pow(basis.g[j][m].norm() + 1e-300, 1.0 / m));
    basis.radius_estimate = lim > 0 ? 1.0 / lim : std::abs(c);
    basis.radius_estimate = std::min(basis.radius_estimate, std::abs(c));
    return basis;
}

Vec LocalFloquetBasis::column(int j, cplx x) const {
    cplx u = x - x0;
    Vec acc = Vec::Zero(g[j][0].size());
    for (int m = int(g[j].size()) - 1; m >= 0; --m) acc = acc * u + g[j][m];
    return std::pow(u, mu[j]) * acc;
}

MonodromyData monodromy_matrices(const SystemField& f, const UnfoldedParameter& eps,
                                 const FormalInvariants& fi, cplx base, double rtol, double r,
                                 double delta) {
    if (eps.is_origin()) fail(errc::usage, "monodromy_matrices: needs eps != 0");
    MonodromyData out;
    out.base = base;
    double dist = std::abs(eps.x_L() - eps.x_R());
    double radius = 0.25 * dist;

    cplx base_R = default_base(eps, Side::R, r, delta);
    cplx base_L = default_base(eps, Side::L, r, delta);
    // keep the caller's base when it is usable for the R loop directly
    if (std::abs(base - base_R) > 1e-12) base_R = base;

    PathPlan conn = connector_path(eps, r, delta);  // base_R -> base_L
    // adjust connector endpoints to the actual bases
    PathPlan to_conn = line_path(base_R, conn.start());
    PathPlan from_conn = line_path(conn.end(), base_L);
    PathPlan full_conn = to_conn.then(conn).then(from_conn);

    PathPlan loop_R = monodromy_loop(eps, Side::R, base_R, radius);
    PathPlan loop_L_local = monodromy_loop(eps, Side::L, base_L, radius);

    Mat T_conn = transfer_matrix(f, full_conn, rtol, &out.stats);
    Mat ML_local = transfer_matrix(f, loop_L_local, rtol, &out.stats);
    Mat ML_local_inv = transfer_matrix(f, loop_L_local.reversed(), rtol, &out.stats);
    out.M_R = transfer_matrix(f, loop_R, rtol, &out.stats);
    out.M_R_inv = transfer_matrix(f, loop_R.reversed(), rtol, &out.stats);

    // express the L loop at the common base: loop = conn * loop_L * conn^{-1}
    Mat Tinv = T_conn.inverse();
    out.M_L = Tinv * ML_local * T_conn;
    out.M_L_inv = Tinv * ML_local_inv * T_conn;

    // Liouville check: det M_l = exp(sigma 2 pi i sum mu_l)
    cplx detL = std::exp(2.0 * pi * I * fi.mu_L.sum());
    cplx detR = std::exp(-2.0 * pi * I * fi.mu_R.sum());
    out.det_residual_L = std::abs(out.M_L.determinant() - detL) / std::max(1.0, std::abs(detL));
    out.det_residual_R = std::abs(out.M_R.determinant() - detR) / std::max(1.0, std::abs(detR));
    double lim = std::max(1e-6, 1e4 * rtol);
    if (out.det_residual_L > lim || out.det_residual_R > lim)
        fail(errc::integrator, "monodromy determinant invariant violated (branch tracking bug?)");
    return out;
}

}  // namespace unfold
