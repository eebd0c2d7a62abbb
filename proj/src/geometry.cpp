#include "unfold/geometry.hpp"

#include <cmath>

namespace unfold {

SectorS admissible_sector(const FormalInvariants& fi0, double safety, double require_margin,
                          double rho_start) {
    SectorS S;
    double max_arg = 0.0;
    for (int q = 0; q < fi0.n; ++q)
        for (int j = q + 1; j < fi0.n; ++j) {
            cplx d = fi0.lambda[q][0] - fi0.lambda[j][0];
            if (d.real() <= 0.0)
                fail(errc::usage, "admissible_sector: ordering Re(lambda_q - lambda_j) > 0 violated");
            max_arg = std::max(max_arg, std::abs(std::arg(d)));
        }
    S.theta0 = pi / 2 - max_arg;
    // positive root of g(1 + 2g/pi) = theta0
    double root = pi * (std::sqrt(1.0 + 8.0 * S.theta0 / pi) - 1.0) / 4.0;
    S.gamma = safety * root;

    // certify rho on a grid over S: Re(e^{+-i g(1+2g/pi)}(lambda_q-lambda_j)(eps,x_l)) > C
    double phase = S.gamma * (1.0 + 2.0 * S.gamma / pi);
    double rho = rho_start;
    for (int tries = 0; tries < 40; ++tries) {
        double worst = std::numeric_limits<double>::infinity();
        for (int mi = 0; mi <= 6; ++mi) {
            double mod = rho * std::pow(1e-3, double(mi) / 6.0);
            for (int ai = 0; ai <= 16; ++ai) {
                double arg = (pi - 2 * S.gamma) + (2 * pi + 4 * S.gamma) * ai / 16.0;
                UnfoldedParameter e{mod, arg};
                for (cplx xl : {e.x_L(), e.x_R()}) {
                    for (int q = 0; q < fi0.n; ++q)
                        for (int j = q + 1; j < fi0.n; ++j) {
                            cplx d = fi0.lambda_at(q, xl) - fi0.lambda_at(j, xl);
                            for (double s : {+1.0, -1.0})
                                worst = std::min(worst, (std::exp(I * s * phase) * d).real());
                        }
                }
            }
        }
        if (worst > require_margin) {
            S.rho = rho;
            S.margin_C = worst;
            return S;
        }
        rho /= 2;
    }
    fail(errc::usage, "admissible_sector: could not certify a sector radius");
}

SeparationRays separation_rays(const FormalInvariants& fi0) {
    SeparationRays out;
    for (int q = 0; q < fi0.n; ++q)
        for (int j = q + 1; j < fi0.n; ++j) {
            cplx d = fi0.lambda[q][0] - fi0.lambda[j][0];
            // Re(d / x) = 0 on the rays arg x = arg d +- pi/2
            out.pairs.push_back({q, j});
            out.angle.push_back(std::arg(d) + pi / 2);
        }
    return out;
}

cplx t_coordinate(const UnfoldedParameter& eps, cplx x, int branch) {
    if (eps.is_origin()) return -1.0 / x;
    cplx w = eps.sqrt_eps();
    if (std::abs(x - w) == 0.0 || std::abs(x + w) == 0.0)
        fail(errc::usage, "t_coordinate at a singular point");
    cplx t = std::log((x - w) / (x + w)) / (2.0 * w);
    if (branch != 0) t += double(branch) * pi * I / w;
    return t;
}

cplx x_of_t(const UnfoldedParameter& eps, cplx t) {
    if (eps.is_origin()) return -1.0 / t;
    cplx w = eps.sqrt_eps();
    return -w / std::tanh(w * t);
}

/* Strip description shared by the per-label membership predicates.
 *
 * For eps != 0 everything lives in the rotated coordinate
 * tau = -t e^{i alpha} (alpha = arg sqrt(eps)): sigma = Re tau runs toward
 * x_L at +inf and x_R at -inf; the level ell = -Im tau is periodic with
 * period P = pi/|sqrt eps|. Holes (|x| >= r) sit at level 0 mod P, the point
 * x = 0 at level P/2 mod P. Strips have horizontal middle (|sigma| <= sigma_c)
 * and tails of slope psi0 = theta_hat + alpha - pi, so that the tail
 * direction in t is e^{i theta_hat}. */
struct DomainGeometry {
    bool origin = false;
    UnfoldedParameter eps;
    double r = 0;
    double delta = 0;
    double alpha = 0;
    double P = 0;
    double d_in = 0;
    double b_out = 0;
    double sigma_c = 0;
    double psi0 = 0;
    double theta_hat = 0;

    void strip(cplx x, double& sigma, double& level) const {
        cplx t = t_coordinate(eps, x);
        cplx tau = -t * std::exp(I * alpha);
        sigma = tau.real();
        level = -tau.imag();
    }
    double mid(double sigma) const {
        double slope = std::tan(psi0);
        if (sigma > sigma_c) return -slope * (sigma - sigma_c);
        if (sigma < -sigma_c) return -slope * (sigma + sigma_c);
        return 0.0;
    }
    cplx x_of_strip(double sigma, double level) const {
        cplx tau(sigma, -level);
        cplx t = -tau * std::exp(-I * alpha);
        return x_of_t(eps, t);
    }

    bool in_D(cplx x) const {
        if (std::abs(x) >= r) return false;
        if (origin) {
            double a = std::arg(x);  // (-pi, pi]
            return (a < delta) || (a > pi - delta);  // sector -(pi+delta) < arg < delta
        }
        double s, l;
        strip(x, s, l);
        double m = mid(s);
        for (int k = -2; k <= 2; ++k) {
            double lv = l + k * P;
            if (lv > m - d_in && lv < m + P / 2 + b_out) return true;
        }
        return false;
    }
    bool in_U(cplx x) const {
        if (std::abs(x) >= r) return false;
        if (origin) {
            double a = std::arg(x);
            return (a > -delta) || (a < -pi + delta);  // sector -delta < arg < pi+delta
        }
        double s, l;
        strip(x, s, l);
        double m = mid(s);
        for (int k = -2; k <= 2; ++k) {
            double lv = l + k * P;
            if (lv > m - P / 2 - b_out && lv < m + d_in) return true;
        }
        return false;
    }
    std::optional<DomainLabel> component(cplx x) const {
        if (!in_D(x) || !in_U(x)) return std::nullopt;
        if (origin) return x.real() > 0 ? DomainLabel::R : DomainLabel::L;
        double s, l;
        strip(x, s, l);
        double m = mid(s);
        for (int k = -2; k <= 2; ++k) {
            double lv = l + k * P;
            if (std::abs(lv - m) < d_in) return s > 0 ? DomainLabel::L : DomainLabel::R;
        }
        return DomainLabel::C;
    }
};

bool DomainDescriptor::contains(cplx x) const {
    switch (label) {
        case DomainLabel::D: return geo->in_D(x);
        case DomainLabel::U: return geo->in_U(x);
        default: {
            auto c = geo->component(x);
            return c.has_value() && *c == label;
        }
    }
}

DomainDescriptor DomainSet::domain(DomainLabel l) const {
    DomainDescriptor d;
    d.label = l;
    d.eps = eps;
    d.r = r;
    d.theta_hat = theta_hat;
    d.geo = geo;
    return d;
}

DomainSet sector_domains(const UnfoldedParameter& eps, const SectorS& S, double r, double c,
                         double delta) {
    if (!eps.is_origin() && !S.contains(eps))
        fail(errc::usage, "sector_domains: parameter outside S");
    if (delta <= 0) delta = S.gamma / 2;

    auto geo = std::make_shared<DomainGeometry>();
    geo->eps = eps;
    geo->r = r;
    geo->delta = delta;
    if (eps.is_origin()) {
        geo->origin = true;
    } else {
        cplx w = eps.sqrt_eps();
        geo->alpha = eps.argument / 2.0;
        geo->P = pi / std::abs(w);
        geo->theta_hat = (2.0 * S.gamma / pi) * (pi - geo->alpha);
        geo->psi0 = geo->theta_hat + geo->alpha - pi;
        geo->d_in = std::sin(delta) / r;
        geo->b_out = std::min(geo->P / 8.0, 2.0 * geo->d_in);
        geo->sigma_c = c / (2.0 * std::abs(w));
    }

    DomainSet ds;
    ds.eps = eps;
    ds.r = r;
    ds.theta_hat = geo->theta_hat;
    ds.geo = geo;
    return ds;
}

cplx PathSegment::point(double u) const {
    if (kind == Kind::line) return a + (b - a) * u;
    double ang = ang0 + (ang1 - ang0) * u;
    return center + radius * std::exp(I * ang);
}

cplx PathSegment::deriv(double u) const {
    if (kind == Kind::line) return b - a;
    double ang = ang0 + (ang1 - ang0) * u;
    return radius * std::exp(I * ang) * I * (ang1 - ang0);
}

double PathSegment::length() const {
    if (kind == Kind::line) return std::abs(b - a);
    return radius * std::abs(ang1 - ang0);
}

double PathPlan::length() const {
    double s = 0;
    for (const auto& seg : segments) s += seg.length();
    return s;
}

PathPlan PathPlan::reversed() const {
    PathPlan p;
    p.winding_L = -winding_L;
    p.winding_R = -winding_R;
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
        PathSegment s = *it;
        if (s.kind == PathSegment::Kind::line)
            std::swap(s.a, s.b);
        else
            std::swap(s.ang0, s.ang1);
        p.segments.push_back(s);
    }
    return p;
}

PathPlan PathPlan::then(const PathPlan& next) const {
    PathPlan p = *this;
    p.segments.insert(p.segments.end(), next.segments.begin(), next.segments.end());
    p.winding_L += next.winding_L;
    p.winding_R += next.winding_R;
    return p;
}

std::vector<cplx> PathPlan::sample(int per_segment) const {
    std::vector<cplx> pts;
    for (const auto& seg : segments)
        for (int i = 0; i < per_segment; ++i) pts.push_back(seg.point(double(i) / per_segment));
    pts.push_back(end());
    return pts;
}

PathPlan line_path(cplx a, cplx b) {
    PathPlan p;
    PathSegment s;
    s.kind = PathSegment::Kind::line;
    s.a = a;
    s.b = b;
    p.segments.push_back(s);
    return p;
}

PathPlan circle_path(cplx center, double radius, double start_angle, int orientation) {
    PathPlan p;
    PathSegment s;
    s.kind = PathSegment::Kind::arc;
    s.center = center;
    s.radius = radius;
    s.ang0 = start_angle;
    s.ang1 = start_angle + orientation * 2 * pi;
    p.segments.push_back(s);
    return p;
}

PathPlan monodromy_loop(const UnfoldedParameter& eps, Side which, cplx base, double loop_radius) {
    if (eps.is_origin()) fail(errc::usage, "monodromy_loop: eps = 0 has no Fuchsian loops");
    cplx xl = which == Side::L ? eps.x_L() : eps.x_R();
    cplx other = which == Side::L ? eps.x_R() : eps.x_L();
    double dist = std::abs(eps.x_L() - eps.x_R());
    if (loop_radius >= dist / 2)
        fail(errc::usage, "monodromy_loop: radius would enclose both points");
    if (std::abs(base - xl) <= loop_radius)
        fail(errc::usage, "monodromy_loop: base inside the loop");
    if (std::abs(base - other) < 1e-3 * dist)
        fail(errc::usage, "monodromy_loop: base too close to the other singular point");

    int orient = which == Side::L ? +1 : -1;
    double a0 = std::arg(base - xl);
    cplx start = xl + loop_radius * std::exp(I * a0);
    PathPlan p = line_path(base, start)
                     .then(circle_path(xl, loop_radius, a0, orient))
                     .then(line_path(start, base));
    if (which == Side::L)
        p.winding_L = orient;
    else
        p.winding_R = orient;
    return p;
}

cplx default_base(const UnfoldedParameter& eps, Side which, double r, double delta) {
    // along the ray through the singular point, rotated into the D side
    // (levels > 0 correspond to arg x in (alpha, alpha + pi))
    double alpha = eps.argument / 2.0;
    double ang = which == Side::L ? alpha + delta / 4.0 : alpha + pi - delta / 4.0;
    return 0.5 * r * std::exp(I * ang);
}

PathPlan connector_path(const UnfoldedParameter& eps, double r, double delta) {
    // base_R to base_L staying on the D side: arg decreasing from
    // alpha + pi - delta/4 to alpha + delta/4 at radius 0.5 r
    double alpha = eps.argument / 2.0;
    PathPlan p;
    PathSegment s;
    s.kind = PathSegment::Kind::arc;
    s.center = 0.0;
    s.radius = 0.5 * r;
    s.ang0 = alpha + pi - delta / 4.0;
    s.ang1 = alpha + delta / 4.0;
    p.segments.push_back(s);
    return p;
}

namespace {

std::vector<double> ladder(double s0, double s1, int n) {
    std::vector<double> v;
    n = std::max(n, 2);
    for (int i = 0; i <= n; ++i) v.push_back(s0 + (s1 - s0) * i / n);
    return v;
}

}  // namespace

BoundaryPath boundary_path(const DomainSet& domains, int nu, DomainLabel s, double theta,
                           double cutoff_rel, int nodes_per_panel) {
    const DomainGeometry& g = *domains.geo;
    BoundaryPath bp;
    bp.side = s;
    bp.nu = nu;
    double off_scale = std::pow(2.0, -nu) * theta;
    double side_sign = (s == DomainLabel::D) ? -1.0 : +1.0;  // edge level relative to mid

    if (g.origin) {
        double r = g.r, cutoff = cutoff_rel * r, dD = g.delta;
        // edge rays: D side above both axes (arg pi - delta and + delta),
        // U side below; quadratic offset rotates away from the overlap
        auto ray = [&](double base_angle, double rot_sign, bool inward) {
            std::vector<cplx> pts;
            double decades = std::log10(r / cutoff);
            int n = std::max(8, int(decades * nodes_per_panel * 3));
            for (int i = 0; i <= n; ++i) {
                double u = inward ? double(i) / n : 1.0 - double(i) / n;
                double rho = r * std::pow(cutoff / r, u);
                double ang = base_angle + rot_sign * off_scale * rho;
                pts.push_back(rho * std::exp(I * ang));
            }
            return pts;
        };
        auto cap = [&](double ang_from, double ang_to) {
            std::vector<cplx> pts;
            int n = 8;
            for (int i = 0; i <= n; ++i)
                pts.push_back(r * std::exp(I * (ang_from + (ang_to - ang_from) * i / n)));
            return pts;
        };
        BoundaryPath::Piece left, right;
        if (s == DomainLabel::D) {
            left.component = DomainLabel::L;
            left.nodes = cap(pi, pi - dD);
            auto rayL = ray(pi - dD, +1.0, true);  // offset toward larger arg (away from wedge)
            left.nodes.insert(left.nodes.end(), rayL.begin() + 1, rayL.end());
            right.component = DomainLabel::R;
            right.nodes = ray(dD, +1.0, false);
            auto capR = cap(dD, 0.0);
            right.nodes.insert(right.nodes.end(), capR.begin() + 1, capR.end());
        } else {
            left.component = DomainLabel::L;
            left.nodes = cap(-pi, -pi + dD);
            auto rayL = ray(-pi + dD, -1.0, true);
            left.nodes.insert(left.nodes.end(), rayL.begin() + 1, rayL.end());
            right.component = DomainLabel::R;
            right.nodes = ray(-dD, -1.0, false);
            auto capR = cap(-dD, 0.0);
            right.nodes.insert(right.nodes.end(), capR.begin() + 1, capR.end());
        }
        bp.pieces = {left, right};
        return bp;
    }

    cplx w = g.eps.sqrt_eps();
    double aw = std::abs(w);
    double dist = 2.0 * aw;
    double cutoff = cutoff_rel * dist;
    double sigma_cut = std::log(2.0 * aw / cutoff) / (2.0 * aw);
    double sigma_hole = std::sqrt(std::max(1.0 / (g.r * g.r) - g.d_in * g.d_in, 1e-12));

    auto edge_x = [&](double sigma) -> cplx {
        double base_level = g.mid(sigma) + side_sign * g.d_in;
        cplx x = g.x_of_strip(sigma, base_level);
        cplx xl_near = (sigma > 0) ? g.eps.x_L() : g.eps.x_R();
        double d2 = std::norm(x - xl_near);
        double h = 1e-5;
        cplx x1 = g.x_of_strip(sigma, base_level + h);
        cplx nrm = (x1 - x) / std::abs(x1 - x);  // direction of increasing level
        return x + side_sign * off_scale * d2 * nrm;
    };

    // node count: resolve the strip on |sigma| in [sigma_hole, sigma_cut]
    int n_nodes = std::max(40, int((sigma_cut - sigma_hole) * aw * 24)) * nodes_per_panel / 8 + 8;

    auto cap_to = [&](cplx from_anchor, cplx to_edge, bool reverse) {
        std::vector<cplx> pts;
        int n = 10;
        double angA = std::arg(from_anchor), angB = std::arg(to_edge);
        double d = std::remainder(angB - angA, 2 * pi);
        double rA = std::abs(from_anchor), rB = std::abs(to_edge);
        for (int i = 0; i <= n; ++i) {
            double u = double(i) / n;
            if (reverse) u = 1.0 - u;
            pts.push_back((rA + (rB - rA) * u) * std::exp(I * (angA + d * u)));
        }
        return pts;
    };

    // L piece: from the disk-edge anchor r e^{i alpha} into x_L
    BoundaryPath::Piece left;
    left.component = DomainLabel::L;
    {
        cplx anchor = g.r * std::exp(I * g.alpha);
        cplx entry = edge_x(sigma_hole);
        left.nodes = cap_to(anchor, entry, false);
        for (double sg : ladder(sigma_hole, sigma_cut, n_nodes))
            left.nodes.push_back(edge_x(sg));
    }
    // R piece: from x_R out to the anchor r e^{i(alpha+pi)}
    BoundaryPath::Piece right;
    right.component = DomainLabel::R;
    {
        for (double sg : ladder(-sigma_cut, -sigma_hole, n_nodes))
            right.nodes.push_back(edge_x(sg));
        cplx anchor = g.r * std::exp(I * (g.alpha + pi));
        cplx exitp = edge_x(-sigma_hole);
        auto capv = cap_to(exitp, anchor, false);
        right.nodes.insert(right.nodes.end(), capv.begin() + 1, capv.end());
    }
    bp.pieces = {left, right};
    return bp;
}

std::map<std::pair<int, char>, BoundaryPath> boundary_paths(const UnfoldedParameter&,
                                                            const DomainSet& domains, int nu_max,
                                                            double theta) {
    std::map<std::pair<int, char>, BoundaryPath> out;
    for (int nu = 1; nu <= nu_max; ++nu) {
        out[{nu, 'D'}] = boundary_path(domains, nu, DomainLabel::D, theta);
        out[{nu, 'U'}] = boundary_path(domains, nu, DomainLabel::U, theta);
    }
    return out;
}

json geometry_to_json(const DomainSet& d, const std::vector<BoundaryPath>& paths) {
    json j;
    j["eps"] = json{{"modulus", d.eps.modulus}, {"argument", d.eps.argument}};
    j["r"] = d.r;
    j["theta_hat"] = d.theta_hat;
    json ps = json::array();
    for (const auto& p : paths) {
        json pieces = json::array();
        for (const auto& pc : p.pieces) {
            json nodes = json::array();
            for (cplx z : pc.nodes) nodes.push_back(json::array({z.real(), z.imag()}));
            pieces.push_back(json{
                {"component", pc.component == DomainLabel::L ? "L" : "R"}, {"nodes", nodes}});
        }
        ps.push_back(json{{"side", p.side == DomainLabel::D ? "D" : "U"},
                          {"nu", p.nu},
                          {"pieces", pieces}});
    }
    j["paths"] = ps;
    return j;
}

}  // namespace unfold
