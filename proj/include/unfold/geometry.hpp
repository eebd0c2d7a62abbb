#pragma once

#include <array>
#include <map>
#include <memory>

#include "unfold/systems.hpp"

namespace unfold {

/* Ramified parameter sector S = {0 < |eps| < rho, arg in (pi-2g, 3pi+2g)}. */
struct SectorS {
    double gamma = 0.0;
    double rho = 0.0;
    double theta0 = 0.0;
    double margin_C = 0.0;  // certified lower bound in the rho condition

    bool contains(const UnfoldedParameter& e) const {
        return e.modulus > 0.0 && e.modulus < rho && e.argument > pi - 2 * gamma &&
               e.argument < 3 * pi + 2 * gamma;
    }
    /* eps-bar side of the auto-intersection; the partner is arg + 2 pi. */
    bool in_autointersection_bar(const UnfoldedParameter& e) const {
        return e.modulus > 0.0 && e.modulus < rho && std::abs(e.argument - pi) < 2 * gamma;
    }
};

SectorS admissible_sector(const FormalInvariants& fi0, double safety = 0.5,
                          double require_margin = 1e-3, double rho_start = 0.05);

/* Separation rays of a pair: the two opposite angles with
 * Re((lambda_q0 - lambda_j0)/x) = 0. */
struct SeparationRays {
    std::vector<std::array<int, 2>> pairs;
    std::vector<double> angle;  // one representative per pair; other is angle+pi
};

SeparationRays separation_rays(const FormalInvariants& fi0);

/* Rectifying coordinate t with dx/dt = x^2 - eps. */
cplx t_coordinate(const UnfoldedParameter& eps, cplx x, int branch = 0);
cplx x_of_t(const UnfoldedParameter& eps, cplx t);

enum class DomainLabel { D, U, L, R, C };

struct DomainGeometry;  // shared construction data

/* Membership predicate of one sectorial domain, evaluated through the
 * t-coordinate strip description. */
struct DomainDescriptor {
    DomainLabel label;
    UnfoldedParameter eps;
    double r = 0.0;
    double theta_hat = 0.0;
    std::shared_ptr<const DomainGeometry> geo;

    bool contains(cplx x) const;
};

struct DomainSet {
    UnfoldedParameter eps;
    double r = 0.0;
    double theta_hat = 0.0;
    std::shared_ptr<const DomainGeometry> geo;

    DomainDescriptor domain(DomainLabel l) const;
};

/* Construction constants: delta (overlap, default gamma/2), c (horizontal
 * boundary length constant), per the sector data. */
DomainSet sector_domains(const UnfoldedParameter& eps, const SectorS& S, double r, double c = 1.0,
                         double delta = -1.0);

struct PathSegment {
    enum class Kind { line, arc } kind = Kind::line;
    cplx a, b;            // line endpoints
    cplx center;          // arc
    double radius = 0.0;  // arc
    double ang0 = 0.0, ang1 = 0.0;

    cplx point(double u) const;  // u in [0,1]
    cplx deriv(double u) const;
    double length() const;
};

struct PathPlan {
    std::vector<PathSegment> segments;
    int winding_L = 0;
    int winding_R = 0;

    cplx start() const { return segments.front().point(0.0); }
    cplx end() const { return segments.back().point(1.0); }
    double length() const;
    PathPlan reversed() const;
    PathPlan then(const PathPlan& next) const;
    std::vector<cplx> sample(int per_segment) const;
};

PathPlan line_path(cplx a, cplx b);
PathPlan circle_path(cplx center, double radius, double start_angle, int orientation);

/* Loop around one singular point: approach from base, full circle, return.
 * Orientation: positive around x_L, negative around x_R. */
PathPlan monodromy_loop(const UnfoldedParameter& eps, Side which, cplx base, double loop_radius);

/* Default base points and the connector between them (kept on the D side). */
cplx default_base(const UnfoldedParameter& eps, Side which, double r, double delta);
PathPlan connector_path(const UnfoldedParameter& eps, double r, double delta);

/* Discretized boundary path gamma_{nu,s} of Omega_s(nu): a broken path of
 * two graded polylines, the L piece from the x_L-side disk edge into x_L
 * and the R piece from x_R out to the x_R-side edge, offset from the domain
 * by 2^{-nu} theta |x - x_l|^2 and truncated near the singular points. */
struct BoundaryPath {
    struct Piece {
        std::vector<cplx> nodes;
        DomainLabel component = DomainLabel::L;  // which overlap component it bounds
    };
    std::vector<Piece> pieces;
    DomainLabel side = DomainLabel::D;  // D or U
    int nu = 1;
};

BoundaryPath boundary_path(const DomainSet& domains, int nu, DomainLabel s, double theta,
                           double cutoff_rel = 1e-6, int nodes_per_panel = 8);

std::map<std::pair<int, char>, BoundaryPath> boundary_paths(const UnfoldedParameter& eps,
                                                            const DomainSet& domains, int nu_max,
                                                            double theta);

json geometry_to_json(const DomainSet& d, const std::vector<BoundaryPath>& paths);

}  // namespace unfold
