#pragma once

#include "unfold/stokes.hpp"

namespace unfold {

/* Point of CP^{n-1} in affine chart j: coordinates v_i = -(y)_i/(y)_j for
 * i != j (n-1 entries, index i skips j). */
struct ProjectivePoint {
    int chart = 0;
    Vec v;  // size n-1

    int n() const { return int(v.size()) + 1; }
};

ProjectivePoint projectivize(const Vec& y, int chart);
Vec embed(const ProjectivePoint& p);  // representative with (y)_chart = 1
ProjectivePoint chart_switch(const ProjectivePoint& p, int new_chart);
double chart_distance(const ProjectivePoint& a, const ProjectivePoint& b);

struct RiccatiResult {
    ProjectivePoint point;
    std::vector<int> chart_history;
    IntegratorStats stats;
};

/* Integrate the chart-j Riccati system along the path (reparametrized by x),
 * switching charts when a coordinate exceeds the threshold. */
RiccatiResult riccati_flow(const SystemField& f, const ProjectivePoint& start,
                           const PathPlan& path, double rtol, double switch_threshold = 10.0);

/* First integral vector H^j = (H^j_1,...,H^j_n), H^j_j = 1, stored
 * homogeneously (entry q is h[q]/h[chart]; infinities appear as
 * h[chart] -> 0 relative). */
struct FirstIntegralVector {
    int chart = 0;
    Vec h;  // size n, homogeneous

    bool entry_finite(int q, double tol = 1e-13) const;
    cplx entry(int q) const;  // H^j_q = h[q]/h[chart]
};

/* Coefficient ratios of the decomposition y = sum_q k_q w_q with k_chart
 * normalized: H^j_q = k_q / k_chart. W is the frame at the same x. */
FirstIntegralVector first_integrals(const Mat& W, int chart, const ProjectivePoint& p);

/* Closed-form monodromy action
 *   M(H^j) = diag(Delta_{j1,l}..Delta_{jn,l}) C_l^{-1} H^j / ([C_l^{-1}]_j. H^j). */
FirstIntegralVector first_integral_monodromy(const StokesCollection& sc,
                                             const FirstIntegralVector& H, Side which);

}  // namespace unfold
