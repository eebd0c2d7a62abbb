#include "unfold/systems.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace unfold {

UnfoldedSystem parse_system(const json& doc) {
    if (!doc.is_object()) fail(errc::usage, "system document must be a JSON object");
    if (doc.contains("format") && doc["format"].get<int>() != 1)
        fail(errc::usage, "unsupported system document format");
    if (!doc.contains("n") || !doc.contains("B")) fail(errc::usage, "system document needs fields n, B");
    UnfoldedSystem sys;
    sys.n = doc["n"].get<int>();
    sys.k = doc.value("k", 1);
    if (sys.n <= 0) fail(errc::usage, "n must be positive");
    if (sys.k <= 0) fail(errc::usage, "k must be positive");
    sys.B = poly_matrix_from_json(doc["B"], sys.n);

    Eigen::ComplexEigenSolver<Mat> es(sys.B.eval(0.0, 0.0));
    for (int a = 0; a < sys.n; ++a)
        for (int b = a + 1; b < sys.n; ++b)
            if (std::abs(es.eigenvalues()[a] - es.eigenvalues()[b]) < 1e-10)
                fail(errc::usage, "resonant leading matrix: B(0,0) has a repeated eigenvalue");
    return sys;
}

json system_to_json(const UnfoldedSystem& sys) {
    json j;
    j["format"] = 1;
    j["n"] = sys.n;
    j["k"] = sys.k;
    j["B"] = poly_matrix_to_json(sys.B);
    return j;
}

namespace {

std::vector<int> sort_order(const Vec& ev) {
    std::vector<int> idx(ev.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (std::abs(ev[a].real() - ev[b].real()) > 1e-12) return ev[a].real() > ev[b].real();
        return ev[a].imag() < ev[b].imag();
    });
    return idx;
}

}  // namespace

OrderingRotation ordering_rotation(const UnfoldedSystem& sys, double margin) {
    Eigen::ComplexEigenSolver<Mat> es(sys.B.eval(0.0, 0.0));
    Vec ev = es.eigenvalues();
    OrderingRotation out;
    out.permutation = sort_order(ev);

    // rotation acts as diff -> e^{i phi} diff; need arg(diff)+phi in
    // (-pi/2 + margin, pi/2 - margin) for every ordered pair
    double lo = -pi, hi = pi;  // feasible window for phi
    for (size_t q = 0; q < out.permutation.size(); ++q) {
        for (size_t j = q + 1; j < out.permutation.size(); ++j) {
            cplx d = ev[out.permutation[q]] - ev[out.permutation[j]];
            double a = std::arg(d);
            lo = std::max(lo, -pi / 2 + margin - a);
            hi = std::min(hi, pi / 2 - margin - a);
        }
    }
    if (lo > hi) fail(errc::usage, "no admissible rotation (eigenvalue arguments span >= pi)");
    if (lo <= 0.0 && 0.0 <= hi)
        out.angle = 0.0;
    else if (lo > 0.0)
        out.angle = lo;
    else
        out.angle = hi;  // negative; smallest magnitude admissible
    return out;
}

std::vector<int> match_branches(const Vec& reference, const Vec& candidates) {
    int n = int(reference.size());
    std::vector<int> idx(n), best(n);
    std::iota(idx.begin(), idx.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    std::sort(idx.begin(), idx.end());
    do {
        double cost = 0;
        for (int j = 0; j < n; ++j) cost += std::abs(reference[j] - candidates[idx[j]]);
        if (cost < best_cost) {
            best_cost = cost;
            best = idx;
        }
    } while (std::next_permutation(idx.begin(), idx.end()));
    return best;
}

namespace {

/* Eigenvalues of B(eps, x) matched to the reference ordering. */
Vec matched_eigenvalues(const Mat& B, const Vec& reference, double collision_tol) {
    Eigen::ComplexEigenSolver<Mat> es(B);
    Vec ev = es.eigenvalues();
    int n = int(ev.size());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (std::abs(ev[a] - ev[b]) < collision_tol)
                fail(errc::usage, "eigenvalue collision at interpolation node (branch matching ambiguous)");
    std::vector<int> m = match_branches(reference, ev);
    Vec out(n);
    for (int j = 0; j < n; ++j) out[j] = ev[m[j]];
    return out;
}

/* d nu_j / dx via left/right eigenvectors: nu' = (u* B' v)/(u* v). */
Vec eigenvalue_x_derivative(const Mat& B, const Mat& Bx, const Vec& reference) {
    Eigen::ComplexEigenSolver<Mat> es(B);
    Vec ev = es.eigenvalues();
    Mat V = es.eigenvectors();
    Eigen::ComplexEigenSolver<Mat> esT(B.transpose());
    Vec evT = esT.eigenvalues();
    Mat U = esT.eigenvectors();

    int n = int(ev.size());
    std::vector<int> mv = match_branches(reference, ev);
    std::vector<int> mu = match_branches(reference, evT);
    Vec out(n);
    for (int j = 0; j < n; ++j) {
        Vec v = V.col(mv[j]);
        Vec u = U.col(mu[j]);  // row eigenvector as column of B^T
        out[j] = (u.transpose() * Bx * v).value() / (u.transpose() * v).value();
    }
    return out;
}

}  // namespace

FormalInvariants formal_invariants(const UnfoldedSystem& sys, const UnfoldedParameter& eps,
                                   const Tolerances& tol) {
    FormalInvariants fi;
    fi.n = sys.n;
    fi.k = sys.k;
    fi.eps = eps;
    fi.lambda.assign(sys.n, std::vector<cplx>(sys.k + 1, cplx{0, 0}));

    Eigen::ComplexEigenSolver<Mat> es0(sys.B.eval(0.0, 0.0));
    Vec ev0 = es0.eigenvalues();
    std::vector<int> order = sort_order(ev0);
    Vec ref(sys.n);
    for (int j = 0; j < sys.n; ++j) ref[j] = ev0[order[j]];

    if (sys.k != 1) fail(errc::usage, "formal invariants: only k = 1 implemented beyond validation");

    if (eps.is_origin()) {
        // confluent node: lambda_{j,0} = nu_j(0,0), lambda_{j,1} = d nu_j/dx (0,0)
        Vec d = eigenvalue_x_derivative(sys.B.eval(0.0, 0.0), sys.B.eval_deriv_x(0.0, 0.0), ref);
        for (int j = 0; j < sys.n; ++j) {
            fi.lambda[j][0] = ref[j];
            fi.lambda[j][1] = d[j];
        }
    } else {
        cplx xl = eps.x_L(), xr = eps.x_R();
        Vec evL = matched_eigenvalues(sys.B.eval(eps.eps(), xl), ref, tol.collision_tol);
        Vec evR = matched_eigenvalues(sys.B.eval(eps.eps(), xr), ref, tol.collision_tol);
        for (int j = 0; j < sys.n; ++j) {
            cplx l1 = (evL[j] - evR[j]) / (xl - xr);
            fi.lambda[j][1] = l1;
            fi.lambda[j][0] = (evL[j] + evR[j]) / 2.0;
        }
    }

    fi.lambda1_exp = Vec(sys.n);
    for (int j = 0; j < sys.n; ++j) fi.lambda1_exp[j] = std::exp(2.0 * pi * I * fi.lambda[j][1]);

    if (!eps.is_origin()) {
        cplx xl = eps.x_L(), xr = eps.x_R();
        fi.mu_L = Vec(sys.n);
        fi.mu_R = Vec(sys.n);
        fi.D_L = Vec(sys.n);
        fi.D_R = Vec(sys.n);
        for (int j = 0; j < sys.n; ++j) {
            fi.mu_L[j] = fi.lambda_at(j, xl) / (2.0 * xl);
            fi.mu_R[j] = fi.lambda_at(j, xr) / (2.0 * xr);
            fi.D_L[j] = std::exp(2.0 * pi * I * fi.mu_L[j]);
            fi.D_R[j] = std::exp(-2.0 * pi * I * fi.mu_R[j]);
        }
    }
    return fi;
}

FormalInvariants invariants_from_model(const Vec& lambda0, const Vec& lambda1,
                                       const UnfoldedParameter& eps) {
    int n = int(lambda0.size());
    FormalInvariants fi;
    fi.n = n;
    fi.k = 1;
    fi.eps = eps;
    fi.lambda.assign(n, std::vector<cplx>(2));
    fi.lambda1_exp = Vec(n);
    for (int j = 0; j < n; ++j) {
        fi.lambda[j][0] = lambda0[j];
        fi.lambda[j][1] = lambda1[j];
        fi.lambda1_exp[j] = std::exp(2.0 * pi * I * lambda1[j]);
    }
    if (!eps.is_origin()) {
        cplx xl = eps.x_L(), xr = eps.x_R();
        fi.mu_L = Vec(n);
        fi.mu_R = Vec(n);
        fi.D_L = Vec(n);
        fi.D_R = Vec(n);
        for (int j = 0; j < n; ++j) {
            fi.mu_L[j] = fi.lambda_at(j, xl) / (2.0 * xl);
            fi.mu_R[j] = fi.lambda_at(j, xr) / (2.0 * xr);
            fi.D_L[j] = std::exp(2.0 * pi * I * fi.mu_L[j]);
            fi.D_R[j] = std::exp(-2.0 * pi * I * fi.mu_R[j]);
        }
    }
    return fi;
}

cplx FormalInvariants::lambda_at(int j, cplx x) const {
    cplx acc{0, 0};
    for (int q = k; q >= 0; --q) acc = acc * x + lambda[j][q];
    return acc;
}

cplx delta_ratio(const FormalInvariants& fi, int s, int j, Side l) {
    const Vec& D = fi.D(l);
    return D[s] / D[j];
}

PrenormSamples prenormalize(const UnfoldedSystem& sys, const UnfoldedParameter& eps,
                            const std::vector<cplx>& grid, double fd_step, const Tolerances& tol) {
    PrenormSamples out;
    out.grid = grid;
    cplx e = eps.eps();

    FormalInvariants fi = formal_invariants(sys, eps, tol);
    Vec ref(sys.n);

    auto eigvec_matrix = [&](cplx x) -> Mat {
        Mat B = sys.B.eval(e, x);
        Eigen::ComplexEigenSolver<Mat> es(B);
        Vec ev = es.eigenvalues();
        for (int a = 0; a < sys.n; ++a)
            for (int b = a + 1; b < sys.n; ++b)
                if (std::abs(ev[a] - ev[b]) < tol.collision_tol)
                    fail(errc::usage, "grid point too close to an eigenvalue collision");
        for (int j = 0; j < sys.n; ++j) ref[j] = fi.lambda_at(j, x);
        std::vector<int> m = match_branches(ref, ev);
        Mat P(sys.n, sys.n);
        for (int j = 0; j < sys.n; ++j) {
            Vec v = es.eigenvectors().col(m[j]);
            if (std::abs(v[j]) < 1e-8)
                fail(errc::usage, "eigenvector normalization impossible (j-th component too small)");
            P.col(j) = v / v[j];
        }
        return P;
    };

    for (cplx x : grid) {
        Mat P = eigvec_matrix(x);
        Mat Pp = eigvec_matrix(x + fd_step);
        Mat Pm = eigvec_matrix(x - fd_step);
        Mat dP = (Pp - Pm) / (2 * fd_step);

        cplx p = x * x - e;
        Mat Binner = P.inverse() * sys.B.eval(e, x) * P;
        Mat Lam = Mat::Zero(sys.n, sys.n);
        for (int j = 0; j < sys.n; ++j) Lam(j, j) = fi.lambda_at(j, x);
        Mat R = (Binner - Lam) / p - P.inverse() * dP;
        out.P.push_back(P);
        out.R.push_back(R);
    }
    return out;
}

std::vector<ResonanceHit> resonance_values(
    const std::function<FormalInvariants(const UnfoldedParameter&)>& fi_fn, int q, int j, Side l,
    int m_min, int m_max, const ResonanceSearchRegion& region, int seeds_per_ring) {
    std::vector<ResonanceHit> hits;
    if (q == j) fail(errc::usage, "resonance_values: need q != j");
    if (m_min > m_max) return hits;

    auto mu_diff = [&](const UnfoldedParameter& e) -> cplx {
        FormalInvariants fi = fi_fn(e);
        return fi.mu(l)[q] - fi.mu(l)[j];
    };

    // Newton on w = log(eps) over the cover
    auto refine = [&](UnfoldedParameter e0, int m) -> std::optional<UnfoldedParameter> {
        cplx w = std::log(e0.modulus) + I * e0.argument;
        for (int it = 0; it < 60; ++it) {
            UnfoldedParameter e{std::exp(w.real()), w.imag()};
            if (e.modulus < region.modulus_min * 1e-2 || e.modulus > region.modulus_max * 1e2)
                return std::nullopt;
            cplx f = mu_diff(e) - double(m);
            if (std::abs(f) < 1e-12) return e;
            double h = 1e-7;
            UnfoldedParameter eh{std::exp(w.real() + h), w.imag()};
            cplx df = (mu_diff(eh) - (mu_diff(e))) / h;  // d/d(log eps) along radial direction
            if (std::abs(df) < 1e-30) return std::nullopt;
            cplx step = f / df;
            if (std::abs(step) > 1.5) step *= 1.5 / std::abs(step);
            w -= step;
        }
        return std::nullopt;
    };

    int rings = std::max(4, int(std::ceil(std::log(region.modulus_max / region.modulus_min) / std::log(2.0))) * 2);
    std::vector<UnfoldedParameter> found;
    for (int m = m_min; m <= m_max; ++m) {
        if (m <= 0) continue;
        for (int ri = 0; ri <= rings; ++ri) {
            double mod = region.modulus_max * std::pow(region.modulus_min / region.modulus_max,
                                                       double(ri) / rings);
            for (int ai = 0; ai < seeds_per_ring; ++ai) {
                double arg = region.arg_min + (region.arg_max - region.arg_min) *
                                                  (ai + 0.5) / seeds_per_ring;
                auto root = refine(UnfoldedParameter{mod, arg}, m);
                if (!root) continue;
                if (root->modulus < region.modulus_min || root->modulus > region.modulus_max)
                    continue;
                if (root->argument < region.arg_min || root->argument > region.arg_max) continue;
                bool dup = false;
                for (const auto& f : found)
                    if (std::abs(std::log(f.modulus / root->modulus)) < 1e-6 &&
                        std::abs(f.argument - root->argument) < 1e-6)
                        dup = true;
                if (dup) continue;
                found.push_back(*root);
                hits.push_back(ResonanceHit{*root, q, j, l, m});
            }
        }
    }
    return hits;
}

bool is_resonant(const FormalInvariants& fi, double margin, int* q_out, int* j_out, Side* l_out) {
    if (fi.eps.is_origin()) return false;
    for (Side l : {Side::L, Side::R}) {
        for (int q = 0; q < fi.n; ++q) {
            for (int j = 0; j < fi.n; ++j) {
                if (q == j) continue;
                cplx delta = delta_ratio(fi, q, j, l);
                // Delta == 1 at eps != 0 means an integer exponent gap; a
                // near-zero gap is equally fatal for the diagonalizer
                if (std::abs(delta - 1.0) < margin) {
                    if (q_out) *q_out = q;
                    if (j_out) *j_out = j;
                    if (l_out) *l_out = l;
                    return true;
                }
            }
        }
    }
    return false;
}

}  // namespace unfold
