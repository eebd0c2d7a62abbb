#include "unfold/riccati.hpp"

namespace unfold {

ProjectivePoint projectivize(const Vec& y, int chart) {
    int n = int(y.size());
    ProjectivePoint p;
    p.chart = chart;
    p.v = Vec(n - 1);
    if (std::abs(y[chart]) == 0.0) fail(errc::usage, "projectivize: chart component is zero");
    int k = 0;
    for (int i = 0; i < n; ++i) {
        if (i == chart) continue;
        p.v[k++] = -y[i] / y[chart];
    }
    return p;
}

Vec embed(const ProjectivePoint& p) {
    int n = p.n();
    Vec y(n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        if (i == p.chart) {
            y[i] = 1.0;
            continue;
        }
        y[i] = -p.v[k++];
    }
    return y;
}

ProjectivePoint chart_switch(const ProjectivePoint& p, int new_chart) {
    if (new_chart == p.chart) return p;
    return projectivize(embed(p), new_chart);
}

double chart_distance(const ProjectivePoint& a, const ProjectivePoint& b) {
    // compare as rays in C^n
    Vec ya = embed(a), yb = embed(b);
    ya /= ya.norm();
    yb /= yb.norm();
    cplx phase = yb.dot(ya);  // conj(yb) . ya
    if (std::abs(phase) > 0) ya *= std::conj(phase) / std::abs(phase);
    return std::min((ya - yb).norm(), (ya + yb).norm());
}

namespace {

/* chart-j Riccati right-hand side in x: dv/dx = (-B0 + B1 v + (B2.v) v)/p */
Vec riccati_rhs(const Mat& B, cplx p, int chart, const Vec& v) {
    int n = int(B.rows());
    Vec out(n - 1);
    // B0: column chart without (chart,chart); B1: minor minus B_cc I; B2: row chart
    cplx Bcc = B(chart, chart);
    cplx b2v = 0;
    {
        int k = 0;
        for (int i = 0; i < n; ++i) {
            if (i == chart) continue;
            b2v += B(chart, i) * v[k++];
        }
    }
    int r = 0;
    for (int i = 0; i < n; ++i) {
        if (i == chart) continue;
        cplx acc = -B(i, chart);
        int k = 0;
        for (int q = 0; q < n; ++q) {
            if (q == chart) continue;
            cplx b1 = B(i, q) - (i == q ? Bcc : cplx{0, 0});
            acc += b1 * v[k++];
        }
        acc += b2v * v[r];
        out[r++] = acc / p;
    }
    return out;
}

}  // namespace

RiccatiResult riccati_flow(const SystemField& f, const ProjectivePoint& start,
                           const PathPlan& path, double rtol, double switch_threshold) {
    RiccatiResult res;
    res.point = start;
    res.chart_history = {start.chart};

    for (const auto& seg : path.segments) {
        double u = 0.0, h = 0.01;
        const double hmin = 1e-13;
        auto rhs = [&](double uu, const Vec& v, int chart) -> Vec {
            cplx x = seg.point(uu);
            cplx p = x * x - f.eps;
            return riccati_rhs(f.B(x), p, chart, v) * seg.deriv(uu);
        };
        while (u < 1.0) {
            h = std::min(h, 1.0 - u);
            const Vec& v = res.point.v;
            int ch = res.point.chart;
            // Dormand-Prince 5(4)
            Vec k1 = rhs(u, v, ch);
            Vec k2 = rhs(u + h / 5, v + h / 5 * k1, ch);
            Vec k3 = rhs(u + 3 * h / 10, v + h * (3.0 / 40 * k1 + 9.0 / 40 * k2), ch);
            Vec k4 = rhs(u + 4 * h / 5, v + h * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3), ch);
            Vec k5 = rhs(u + 8 * h / 9,
                         v + h * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 + 64448.0 / 6561 * k3 -
                                  212.0 / 729 * k4),
                         ch);
            Vec k6 = rhs(u + h,
                         v + h * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 + 46732.0 / 5247 * k3 +
                                  49.0 / 176 * k4 - 5103.0 / 18656 * k5),
                         ch);
            Vec v5 = v + h * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 -
                              2187.0 / 6784 * k5 + 11.0 / 84 * k6);
            Vec k7 = rhs(u + h, v5, ch);
            Vec errv = h * ((35.0 / 384 - 5179.0 / 57600) * k1 + (500.0 / 1113 - 7571.0 / 16695) * k3 +
                            (125.0 / 192 - 393.0 / 640) * k4 +
                            (-2187.0 / 6784 + 92097.0 / 339200) * k5 +
                            (11.0 / 84 - 187.0 / 2100) * k6 - 1.0 / 40 * k7);
            double scale = std::max(1.0, std::max(v.norm(), v5.norm()));
            double err = errv.norm() / scale;
            if (!std::isfinite(err)) {
                // blow-up inside a step: force a chart switch and retry small
                int worst = 0;
                double mx = 0;
                for (int i = 0; i < v.size(); ++i)
                    if (std::abs(v[i]) > mx) {
                        mx = std::abs(v[i]);
                        worst = i;
                    }
                int target = worst >= res.point.chart ? worst + 1 : worst;
                res.point = chart_switch(res.point, target);
                res.chart_history.push_back(target);
                h = std::max(h / 4, hmin);
                continue;
            }
            if (err <= rtol) {
                u += h;
                res.point.v = v5;
                res.stats.steps++;
                h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(rtol / std::max(err, 1e-300), 0.2)));
                // chart switching on overflow of any coordinate
                double mx = 0;
                int worst = 0;
                for (int i = 0; i < v5.size(); ++i)
                    if (std::abs(v5[i]) > mx) {
                        mx = std::abs(v5[i]);
                        worst = i;
                    }
                if (mx > switch_threshold) {
                    int target = worst >= res.point.chart ? worst + 1 : worst;
                    res.point = chart_switch(res.point, target);
                    res.chart_history.push_back(target);
                }
            } else {
                res.stats.rejects++;
                if (h <= hmin) fail(errc::integrator, "riccati_flow: step size underflow");
                h *= std::max(0.1, 0.9 * std::pow(rtol / err, 0.2));
                h = std::max(h, hmin);
            }
        }
    }
    return res;
}

FirstIntegralVector first_integrals(const Mat& W, int chart, const ProjectivePoint& p) {
    int n = int(W.rows());
    Vec y = embed(chart == p.chart ? p : chart_switch(p, chart));
    // solve sum_q kappa_q (w_q - (w_q)_chart * y / y_chart) = 0, kappa_chart = 1
    // y_chart = 1 by the embedding
    Mat M(n, n);
    for (int q = 0; q < n; ++q) M.col(q) = W.col(q) - W(chart, q) * y;
    // row `chart` of M is identically zero; drop it and move column `chart` to the rhs
    Mat A(n - 1, n - 1);
    Vec rhs(n - 1);
    int r = 0;
    for (int i = 0; i < n; ++i) {
        if (i == chart) continue;
        int c = 0;
        for (int q = 0; q < n; ++q) {
            if (q == chart) continue;
            A(r, c++) = M(i, q);
        }
        rhs[r++] = -M(i, chart);
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
    Vec kappa = cod.solve(rhs);

    FirstIntegralVector H;
    H.chart = chart;
    H.h = Vec(n);
    int c = 0;
    for (int q = 0; q < n; ++q) H.h[q] = (q == chart) ? cplx{1, 0} : kappa[c++];
    return H;
}

bool FirstIntegralVector::entry_finite(int q, double tol) const {
    (void)q;
    return std::abs(h[chart]) > tol * h.norm();
}

cplx FirstIntegralVector::entry(int q) const { return h[q] / h[chart]; }

FirstIntegralVector first_integral_monodromy(const StokesCollection& sc,
                                             const FirstIntegralVector& H, Side which) {
    int n = sc.n;
    const Mat& C = sc.C(which);
    Vec u = C.inverse() * H.h;
    FirstIntegralVector out;
    out.chart = H.chart;
    out.h = Vec(n);
    for (int q = 0; q < n; ++q) {
        cplx delta = sc.D(which)[H.chart] / sc.D(which)[q];  // Delta_{jq,l} with j = chart
        out.h[q] = delta * u[q];
    }
    // homogeneous: denominator [C^{-1}]_{j.} H is u[chart]; normalize for readability
    if (std::abs(out.h[out.chart]) > 0) out.h /= out.h[out.chart];
    return out;
}

}  // namespace unfold
