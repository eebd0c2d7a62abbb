#include "unfold/stokes.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "unfold/report.hpp"

namespace unfold {

json stokes_to_json(const StokesCollection& sc) {
    json j;
    j["eps"] = eps_to_json(sc.eps);
    j["n"] = sc.n;
    j["C_R"] = mat_to_json(sc.C_R);
    j["C_L"] = mat_to_json(sc.C_L);
    j["D_R"] = diag_to_json(sc.D_R);
    j["D_L"] = diag_to_json(sc.D_L);
    j["gauge"] = diag_to_json(sc.gauge);
    j["leakage"] = sc.leakage;
    j["diag_dev"] = sc.diag_dev;
    return j;
}

StokesCollection stokes_from_json(const json& j) {
    StokesCollection sc;
    sc.eps = eps_from_json(j.at("eps"));
    sc.n = j.at("n").get<int>();
    sc.C_R = mat_from_json(j.at("C_R"));
    sc.C_L = mat_from_json(j.at("C_L"));
    sc.D_R = diag_from_json(j.at("D_R"));
    sc.D_L = diag_from_json(j.at("D_L"));
    if (j.contains("gauge")) sc.gauge = diag_from_json(j["gauge"]);
    sc.leakage = j.value("leakage", 0.0);
    sc.diag_dev = j.value("diag_dev", 0.0);
    if (sc.C_R.rows() != sc.n || sc.C_L.rows() != sc.n)
        fail(errc::usage, "stokes document: dimension mismatch");
    return sc;
}

namespace {

/* distance |log(a) - log(b)| minimized over the 2 pi i lattice */
double log_dist(cplx a, cplx b) {
    double dr = std::log(std::abs(a)) - std::log(std::abs(b));
    double di = std::remainder(std::arg(a) - std::arg(b), 2 * pi);
    return std::hypot(dr, di);
}

/* Complex Schur form with the diagonal reordered to match the target list
 * (in index order). Returns Q; leading k columns span the invariant
 * subspace of the first k targets. */
Mat ordered_schur_flags(const Mat& M, const Vec& targets, double ambiguity_tol) {
    int n = int(M.rows());
    Eigen::ComplexSchur<Mat> schur(M, true);
    Mat T = schur.matrixT();
    Mat Q = schur.matrixU();

    // assignment of Schur diagonal to targets, minimal total log-distance
    std::vector<int> best(n);
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        double cost = 0;
        for (int j = 0; j < n; ++j) cost += log_dist(T(perm[j], perm[j]), targets[j]);
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    // ambiguity check: each matched eigenvalue must be clearly closest
    for (int j = 0; j < n; ++j) {
        double d0 = log_dist(T(best[j], best[j]), targets[j]);
        for (int q = 0; q < n; ++q) {
            if (q == best[j]) continue;
            double d1 = log_dist(T(q, q), targets[j]);
            if (d1 - d0 < ambiguity_tol)
                fail(errc::resonance, "eigenvalue matching ambiguous (separation below tolerance)");
        }
    }

    // desired position of each current diagonal slot
    std::vector<int> want(n);  // want[p] = current slot that must end up at p
    for (int p = 0; p < n; ++p) want[p] = best[p];

    // bubble into place with adjacent unitary swaps
    std::vector<int> pos(n);  // pos[slot] = current position
    std::vector<int> slot_at(n);
    std::iota(slot_at.begin(), slot_at.end(), 0);
    for (int i = 0; i < n; ++i) pos[i] = i;

    auto swap_adjacent = [&](int p) {
        // swap diagonal entries at positions p, p+1 of T by a Givens rotation
        cplx a = T(p, p), b = T(p, p + 1), d = T(p + 1, p + 1);
        cplx vx = b, vy = d - a;
        double r = std::hypot(std::abs(vx), std::abs(vy));
        Mat G = Mat::Identity(int(T.rows()), int(T.cols()));
        if (r > 0) {
            cplx c1 = vx / r, s1 = vy / r;
            G(p, p) = c1;
            G(p + 1, p) = s1;
            G(p, p + 1) = -std::conj(s1);
            G(p + 1, p + 1) = std::conj(c1);
        }
        T = (G.adjoint() * T * G).eval();
        Q = (Q * G).eval();
        // clean the structural zero
        T(p + 1, p) = 0.0;
        std::swap(slot_at[p], slot_at[p + 1]);
        pos[slot_at[p]] = p;
        pos[slot_at[p + 1]] = p + 1;
    };

    for (int p = 0; p < n; ++p) {
        int cur = pos[want[p]];
        while (cur > p) {
            swap_adjacent(cur - 1);
            cur--;
        }
    }
    return Q;
}

Vec flag_intersection(const Mat& V, const Mat& W, double* second_sv = nullptr) {
    int n = int(V.rows());
    Mat stack(2 * n, n);
    stack.topRows(n) = Mat::Identity(n, n) - V * V.adjoint();
    stack.bottomRows(n) = Mat::Identity(n, n) - W * W.adjoint();
    Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeFullV);
    if (second_sv && n >= 2) *second_sv = svd.singularValues()[n - 2];
    return svd.matrixV().col(n - 1);
}

}  // namespace

Mat mixed_basis(const MonodromyData& mono, const FormalInvariants& fi, double tol) {
    int n = fi.n;
    if (n == 1) return Mat::Identity(1, 1);

    // V-flags: leading subspaces of M_R matched to D_R in index order
    Mat QR = ordered_schur_flags(mono.M_R, fi.D_R, tol);
    // W-flags: trailing subspaces of M_L = leading subspaces of M_L^{-1}
    // matched to D_L^{-1} in reversed index order
    Vec targets(n);
    for (int j = 0; j < n; ++j) targets[j] = 1.0 / fi.D_L[n - 1 - j];
    Mat QL = ordered_schur_flags(mono.M_L_inv, targets, tol);

    Mat G(n, n);
    for (int j = 0; j < n; ++j) {
        Mat V = QR.leftCols(j + 1);
        Mat W = QL.leftCols(n - j);
        double sep = 0;
        Vec v = flag_intersection(V, W, &sep);
        if (sep < 1e-8)
            fail(errc::leakage, "flag intersection not 1-dimensional (degenerate system)");
        // unit norm, first significant component phase zero
        int lead = 0;
        for (int i = 0; i < n; ++i)
            if (std::abs(v[i]) > 0.5 / std::sqrt(double(n))) {
                lead = i;
                break;
            }
        v *= std::abs(v[lead]) / v[lead];
        G.col(j) = v / v.norm();
    }
    return G;
}

namespace {

StokesCollection extract_from_monodromy(const MonodromyData& mono, const FormalInvariants& fi,
                                        const UnfoldedParameter& eps, const Tolerances& tol) {
    int n = fi.n;
    Mat G = mixed_basis(mono, fi, 1e-6);
    Eigen::PartialPivLU<Mat> lu(G);
    Mat mR = lu.solve(mono.M_R * G);
    Mat mL = lu.solve(mono.M_L * G);

    StokesCollection sc;
    sc.eps = eps;
    sc.n = n;
    sc.D_R = fi.D_R;
    sc.D_L = fi.D_L;
    sc.gauge = Vec::Ones(n);
    Mat CR = mR, CL = mL;
    for (int j = 0; j < n; ++j) {
        CR.col(j) /= fi.D_R[j];
        CL.col(j) /= fi.D_L[j];
    }

    double leak = 0, dev = 0;
    for (int i = 0; i < n; ++i) {
        dev = std::max(dev, std::abs(CR(i, i) - 1.0));
        dev = std::max(dev, std::abs(CL(i, i) - 1.0));
        for (int j = 0; j < n; ++j) {
            if (i > j) leak = std::max(leak, std::abs(CR(i, j)));
            if (i < j) leak = std::max(leak, std::abs(CL(i, j)));
        }
    }
    sc.leakage = leak;
    sc.diag_dev = dev;
    if (leak > tol.extraction_tol || dev > tol.extraction_tol)
        fail(errc::leakage, "extracted collection not unipotent triangular (leakage " +
                                std::to_string(leak) + ", diag deviation " + std::to_string(dev) +
                                ")");

    sc.C_R = Mat::Identity(n, n);
    sc.C_L = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i < j) sc.C_R(i, j) = CR(i, j);
            if (i > j) sc.C_L(i, j) = CL(i, j);
        }
    return sc;
}

}  // namespace

StokesCollection extract_stokes(const SystemField& f, const UnfoldedParameter& eps,
                                const FormalInvariants& fi, const Tolerances& tol, double r,
                                double delta) {
    int q, j;
    Side l;
    if (is_resonant(fi, tol.resonance_margin, &q, &j, &l))
        fail(errc::resonance, std::string("extraction at a resonance: |1 - Delta_{") +
                                  std::to_string(q) + std::to_string(j) + "," + side_name(l) +
                                  "}| below margin");
    cplx base = default_base(eps, Side::R, r, delta);
    MonodromyData mono = monodromy_matrices(f, eps, fi, base, tol.rtol, r, delta);
    return extract_from_monodromy(mono, fi, eps, tol);
}

StokesCollection extract_stokes(const UnfoldedSystem& sys, const UnfoldedParameter& eps,
                                const Tolerances& tol, double r, double delta) {
    FormalInvariants fi = formal_invariants(sys, eps, tol);
    return extract_stokes(SystemField::of(sys, eps), eps, fi, tol, r, delta);
}

/* Gauge fixing. Entry (i,j) of C transforms as k_i/k_j * C_ij under
 * K = diag(k). Entries are visited in the documented order; the first entry
 * of each new ratio-orbit with modulus above tol is scaled to 1. */
StokesCollection canonicalize(const StokesCollection& sc, double tol, GaugeWitness* witness) {
    int n = sc.n;
    // union-find with multiplicative potentials: k_i = pot[i] * k_root(i)
    std::vector<int> parent(n);
    std::vector<cplx> pot(n, cplx{1, 0});
    std::iota(parent.begin(), parent.end(), 0);

    std::function<std::pair<int, cplx>(int)> find = [&](int i) -> std::pair<int, cplx> {
        if (parent[i] == i) return {i, cplx{1, 0}};
        auto [r, f] = find(parent[i]);
        parent[i] = r;
        pot[i] = pot[i] * f;
        return {r, pot[i]};
    };

    std::vector<std::tuple<char, int, int>> pinned;
    auto visit = [&](char which, int i, int j, cplx value) {
        if (std::abs(value) <= tol) return;
        auto [ri, fi_] = find(i);
        auto [rj, fj_] = find(j);
        if (ri == rj) return;  // ratio already constrained
        // require k_i / k_j * value = 1; k_i = fi Kri, k_j = fj Krj
        parent[ri] = rj;
        pot[ri] = fj_ / (fi_ * value);
        pinned.push_back({which, i, j});
    };

    for (int d = 1; d < n; ++d)
        for (int i = 0; i + d < n; ++i) visit('R', i, i + d, sc.C_R(i, i + d));
    for (int d = 1; d < n; ++d)
        for (int i = 0; i + d < n; ++i) visit('L', i + d, i, sc.C_L(i + d, i));

    Vec K(n);
    for (int i = 0; i < n; ++i) {
        auto [r, f] = find(i);
        (void)r;
        K[i] = f;  // k_root = 1 for every remaining orbit
    }

    StokesCollection out = sc;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            out.C_R(i, j) = K[i] * sc.C_R(i, j) / K[j];
            out.C_L(i, j) = K[i] * sc.C_L(i, j) / K[j];
        }
    // pinned entries are exactly 1 (makes the map exactly idempotent)
    for (auto [which, i, j] : pinned) {
        if (which == 'R')
            out.C_R(i, j) = 1.0;
        else
            out.C_L(i, j) = 1.0;
    }
    out.gauge = K;
    if (witness) {
        witness->K = K;
        witness->residual = 0.0;
    }
    return out;
}

std::optional<GaugeWitness> equivalent(const StokesCollection& a, const StokesCollection& b,
                                       double tol) {
    if (a.n != b.n) return std::nullopt;
    int n = a.n;
    // least squares on log ratios: u_i - u_j = log(b_ij / a_ij)
    std::vector<std::array<int, 2>> eqs;
    std::vector<cplx> rhs;
    auto add = [&](const Mat& A, const Mat& B) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                bool sa = std::abs(A(i, j)) > tol, sb = std::abs(B(i, j)) > tol;
                if (sa && sb) {
                    eqs.push_back({i, j});
                    rhs.push_back(std::log(B(i, j) / A(i, j)));
                }
            }
    };
    add(a.C_R, b.C_R);
    add(a.C_L, b.C_L);

    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(eqs.size() + 1, n);
    Vec r = Vec::Zero(eqs.size() + 1);
    for (size_t e = 0; e < eqs.size(); ++e) {
        M(e, eqs[e][0]) = 1.0;
        M(e, eqs[e][1]) = -1.0;
        r[e] = rhs[e];
    }
    M(eqs.size(), 0) = 1.0;  // pin u_0 = 0
    Vec u = M.colPivHouseholderQr().solve(r);

    GaugeWitness w;
    w.K = Vec(n);
    for (int i = 0; i < n; ++i) w.K[i] = std::exp(u[i]);
    double res = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            res = std::max(res, std::abs(w.K[i] * a.C_R(i, j) / w.K[j] - b.C_R(i, j)));
            res = std::max(res, std::abs(w.K[i] * a.C_L(i, j) / w.K[j] - b.C_L(i, j)));
        }
    w.residual = res;
    if (res < tol) return w;
    return std::nullopt;
}

double collection_distance(const StokesCollection& a, const StokesCollection& b) {
    return (a.C_R - b.C_R).norm() + (a.C_L - b.C_L).norm();
}

DiagonalizerResult diagonalizer_T(const Mat& C, const Vec& D, Side l, double margin_tol) {
    int n = int(C.rows());
    auto Delta = [&](int s, int j) { return D[s] / D[j]; };

    DiagonalizerResult out;
    out.T = Mat::Identity(n, n);
    out.margin = std::numeric_limits<double>::infinity();

    auto compute = [&](int i, int j) {
        cplx dij = Delta(i, j);
        out.margin = std::min(out.margin, std::abs(1.0 - dij));
        if (std::abs(1.0 - dij) < margin_tol)
            fail(errc::resonance, std::string("diagonalizer blocked: |1 - Delta_{") +
                                      std::to_string(i) + std::to_string(j) + "," + side_name(l) +
                                      "}| = " + std::to_string(std::abs(1.0 - dij)));
        cplx acc = C(i, j);
        int klo = std::min(i, j) + 1, khi = std::max(i, j) - 1;
        for (int k = klo; k <= khi; ++k) acc += C(i, k) * out.T(k, j) * Delta(k, j);
        out.T(i, j) = acc / (1.0 - dij);
    };

    if (l == Side::R) {
        for (int j = 1; j < n; ++j)
            for (int i = j - 1; i >= 0; --i) compute(i, j);
    } else {
        for (int j = n - 2; j >= 0; --j)
            for (int i = j + 1; i < n; ++i) compute(i, j);
    }
    return out;
}

LogTermResult log_term_predicates(const StokesCollection& sc0, int s, int j, Side l,
                                  const FormalInvariants* fi0) {
    int n = sc0.n;
    LogTermResult res;
    auto conclude = [&](cplx value, const char* note) {
        res.conclusive = true;
        res.poly_value = value;
        res.blocked = std::abs(value) > 1e-12;
        res.note = note;
        return res;
    };

    if (l == Side::R && s == 0 && j == 1)
        return conclude(sc0.C_R(0, 1), "generic family (C_R)_{12}");
    if (l == Side::L && s == n - 1 && j == n - 2)
        return conclude(sc0.C_L(n - 1, n - 2), "generic family (C_L)_{n,n-1}");

    // distinct Stokes lines: limit polynomial with integer coefficients
    if (fi0) {
        std::vector<cplx> l0(n);
        for (int a = 0; a < n; ++a) l0[a] = fi0->lambda[a][0];
        bool distinct = true;
        std::vector<double> args;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (a == b) continue;
                args.push_back(std::arg(l0[a] - l0[b]));
            }
        std::sort(args.begin(), args.end());
        for (size_t a = 0; a + 1 < args.size(); ++a)
            if (std::abs(args[a + 1] - args[a]) < 1e-9) distinct = false;
        if (distinct && ((l == Side::R && s < j) || (l == Side::L && s > j))) {
            // approach direction of sqrt(eps) for this resonance sequence
            cplx u = (l == Side::R) ? (l0[j] - l0[s]) : (l0[s] - l0[j]);
            const Mat& C = (l == Side::R) ? sc0.C_R : sc0.C_L;
            // recursive limit polynomials P_{kj} over the triangle
            std::function<cplx(int)> P = [&](int k) -> cplx {
                cplx acc = C(k, j);
                int klo = std::min(k, j) + 1, khi = std::max(k, j) - 1;
                for (int m = klo; m <= khi; ++m) {
                    double im = std::imag((l0[m] - l0[j]) / u);
                    double Lkj = im > 0 ? 0.0 : -1.0;
                    if (Lkj != 0.0) acc += C(k, m) * P(m) * Lkj;
                }
                return acc;
            };
            return conclude(P(s), "distinct Stokes lines limit polynomial");
        }
    }
    res.conclusive = false;
    res.note = "outside the generic families certified by the theory";
    return res;
}

TransitionInvariants transition_invariants(const StokesCollection& sc_bar,
                                           const StokesCollection& sc_tilde, double margin_tol) {
    TransitionInvariants tr;
    Mat TbR = diagonalizer_T(sc_bar.C_R, sc_bar.D_R, Side::R, margin_tol).T;
    Mat TbL = diagonalizer_T(sc_bar.C_L, sc_bar.D_L, Side::L, margin_tol).T;
    Mat TtR = diagonalizer_T(sc_tilde.C_R, sc_tilde.D_R, Side::R, margin_tol).T;
    Mat TtL = diagonalizer_T(sc_tilde.C_L, sc_tilde.D_L, Side::L, margin_tol).T;

    int n = sc_bar.n;
    Mat TbR_inv = TbR.inverse(), TtL_inv = TtL.inverse();
    tr.N_L_bar = TbR_inv * TbL;
    tr.N_R_bar = Mat(n, n);
    tr.N_R_tilde = TtL_inv * TtR;
    tr.N_L_tilde = Mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            tr.N_R_bar(i, j) = sc_bar.D_R[i] * tr.N_L_bar(i, j) / sc_bar.D_R[j];
            tr.N_L_tilde(i, j) = sc_tilde.D_L[i] * tr.N_R_tilde(i, j) / sc_tilde.D_L[j];
        }
    return tr;
}

AutoIntersectionReport check_autointersection(const StokesCollection& sc_bar,
                                              const StokesCollection& sc_tilde,
                                              double margin_tol) {
    TransitionInvariants tr = transition_invariants(sc_bar, sc_tilde, margin_tol);
    int n = sc_bar.n;
    // Q_D N_bar = N_tilde Q_U entrywise: Q_D[i] Nb(i,j) - Nt(i,j) Q_U[j] = 0
    int rows = 2 * n * n;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rows, 2 * n);
    int r = 0;
    auto put = [&](const Mat& Nb, const Mat& Nt) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                A(r, i) = Nb(i, j);
                A(r, n + j) = -Nt(i, j);
                ++r;
            }
    };
    put(tr.N_L_bar, tr.N_L_tilde);
    put(tr.N_R_bar, tr.N_R_tilde);

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
    Vec q = svd.matrixV().col(2 * n - 1);
    // scale to minimize || c q - 1 ||^2: c = sum conj(q_i) / sum |q_i|^2
    cplx num = 0;
    double den = 0;
    for (int i = 0; i < 2 * n; ++i) {
        num += std::conj(q[i]);
        den += std::norm(q[i]);
    }
    q *= num / den;

    AutoIntersectionReport rep;
    rep.Q_D = q.head(n);
    rep.Q_U = q.tail(n);
    double res = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            res = std::max(res, std::abs(rep.Q_D[i] * tr.N_L_bar(i, j) -
                                         tr.N_L_tilde(i, j) * rep.Q_U[j]));
            res = std::max(res, std::abs(rep.Q_D[i] * tr.N_R_bar(i, j) -
                                         tr.N_R_tilde(i, j) * rep.Q_U[j]));
        }
    rep.residual = res;
    rep.qd_dev = (rep.Q_D - Vec::Ones(n)).cwiseAbs().maxCoeff();
    rep.qu_dev = (rep.Q_U - Vec::Ones(n)).cwiseAbs().maxCoeff();
    return rep;
}

double transition_gap(const StokesCollection& sc_bar, const StokesCollection& sc_tilde,
                      double margin_tol) {
    TransitionInvariants tr = transition_invariants(sc_bar, sc_tilde, margin_tol);
    return (tr.N_L_bar - sc_bar.C_L).norm() + (tr.N_R_bar - sc_bar.C_R).norm() +
           (tr.N_L_tilde - sc_tilde.C_L).norm() + (tr.N_R_tilde - sc_tilde.C_R).norm();
}

GapFit gap_fit(const std::vector<std::pair<double, double>>& modulus_gap, double noise_floor) {
    GapFit fit;
    std::vector<double> xs, ys;
    for (auto [m, g] : modulus_gap) {
        if (g <= noise_floor) continue;
        xs.push_back(-1.0 / std::sqrt(m));
        ys.push_back(std::log(g));
    }
    if (xs.size() < 3) {
        fit.degenerate = true;
        return fit;
    }
    double n = double(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    if (vx <= 0 || vy <= 0) {
        fit.degenerate = true;
        return fit;
    }
    fit.slope = cxy / vx;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.r2 = (cxy * cxy) / (vx * vy);
    return fit;
}

GapFit summability_gap(
    const std::vector<std::pair<StokesCollection, StokesCollection>>& bar_tilde_pairs) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [b, t] : bar_tilde_pairs)
        pts.push_back({b.eps.modulus, collection_distance(b, t)});
    return gap_fit(pts);
}

ReducibilityReport reducibility_analysis(const std::vector<StokesCollection>& family,
                                         double tol) {
    ReducibilityReport rep;
    if (family.empty()) return rep;
    int n = family.front().n;

    // entry significance across samples; straddlers are excluded and reported
    Mat maxR = Mat::Zero(n, n), minR = Mat::Constant(n, n, 1e300);
    Mat maxL = Mat::Zero(n, n), minL = Mat::Constant(n, n, 1e300);
    for (const auto& sc : family)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                maxR(i, j) = std::max(maxR(i, j).real(), std::abs(sc.C_R(i, j)));
                minR(i, j) = std::min(minR(i, j).real(), std::abs(sc.C_R(i, j)));
                maxL(i, j) = std::max(maxL(i, j).real(), std::abs(sc.C_L(i, j)));
                minL(i, j) = std::min(minL(i, j).real(), std::abs(sc.C_L(i, j)));
            }
    auto stable_nonzero = [&](const Mat& mx, const Mat& mn, int i, int j) {
        if (mx(i, j).real() > tol && mn(i, j).real() <= tol) {
            rep.unstable_entries.push_back({i, j});
            return true;  // treat as coupling (conservative)
        }
        return mx(i, j).real() > tol;
    };
    // coupling pattern (strict off-diagonal)
    std::vector<std::vector<bool>> couple(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            bool c = false;
            if (i < j) c = stable_nonzero(maxR, minR, i, j);
            if (i > j) c = c || stable_nonzero(maxL, minL, i, j);
            couple[i][j] = c;
        }

    // search permutations preserving triangularity, maximizing block count
    std::vector<int> perm(n), best_perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::iota(best_perm.begin(), best_perm.end(), 0);
    int best_blocks = -1;

    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    do {
        // permuted coupling must stay triangular: an R-coupling (i<j) must map
        // to positions p_i' < p_j' etc. Since C_R is upper and C_L lower, a
        // permutation preserves triangularity iff it preserves the relative
        // order inside every coupled pair.
        bool ok = true;
        std::vector<int> inv(n);
        for (int i = 0; i < n; ++i) inv[p[i]] = i;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j)
                if (couple[i][j] && ((i < j) != (inv[i] < inv[j]))) ok = false;
        if (!ok) continue;
        // block cut positions: after position c (in new order) if no coupling crosses
        int blocks = 1;
        for (int c = 0; c + 1 < n; ++c) {
            bool crossed = false;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (couple[i][j] && ((inv[i] <= c) != (inv[j] <= c))) crossed = true;
            if (!crossed) blocks++;
        }
        if (blocks > best_blocks) {
            best_blocks = blocks;
            best_perm = p;
        }
    } while (std::next_permutation(p.begin(), p.end()));

    rep.permutation = best_perm;
    std::vector<int> inv(n);
    for (int i = 0; i < n; ++i) inv[best_perm[i]] = i;
    std::vector<int> cur;
    for (int c = 0; c < n; ++c) {
        cur.push_back(best_perm[c]);
        bool cut = (c == n - 1);
        if (!cut) {
            cut = true;
            for (int i = 0; i < n && cut; ++i)
                for (int j = 0; j < n && cut; ++j)
                    if (couple[i][j] && ((inv[i] <= c) != (inv[j] <= c))) cut = false;
        }
        if (cut) {
            rep.blocks.push_back(cur);
            cur.clear();
        }
    }

    for (int j = 0; j < n; ++j) {
        bool col_trivial = true, row_trivial = true;
        for (int i = 0; i < n; ++i) {
            if (i == j) continue;
            if (couple[i][j]) col_trivial = false;
            if (couple[j][i]) row_trivial = false;
        }
        if (col_trivial) rep.trivial_columns.push_back(j);
        if (row_trivial) rep.trivial_rows.push_back(j);
    }
    return rep;
}

}  // namespace unfold
