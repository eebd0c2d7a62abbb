#pragma once

#include <json.hpp>

#include "unfold/core.hpp"

namespace unfold {

using json = nlohmann::ordered_json;

/* Bivariate polynomial sum c[dx][de] * x^dx * eps^de with complex coefficients. */
class BivarPoly {
public:
    BivarPoly() = default;
    BivarPoly(int deg_x, int deg_eps)
        : coeff_(deg_x + 1, std::vector<cplx>(deg_eps + 1, cplx{0, 0})) {}
    static BivarPoly constant(cplx c);

    int deg_x() const { return coeff_.empty() ? -1 : int(coeff_.size()) - 1; }
    int deg_eps() const { return coeff_.empty() ? -1 : int(coeff_[0].size()) - 1; }

    cplx& at(int dx, int de);
    cplx at(int dx, int de) const;

    cplx eval(cplx eps, cplx x) const;
    BivarPoly deriv_x() const;
    BivarPoly& operator+=(const BivarPoly& o);

private:
    std::vector<std::vector<cplx>> coeff_;  // [deg_x][deg_eps]
};

/* n x n matrix of bivariate polynomials, the coefficient data of B(eps, x). */
class PolyMatrix {
public:
    PolyMatrix() = default;
    explicit PolyMatrix(int n) : n_(n), entries_(n * n) {}

    int n() const { return n_; }
    BivarPoly& operator()(int i, int j) { return entries_[i * n_ + j]; }
    const BivarPoly& operator()(int i, int j) const { return entries_[i * n_ + j]; }

    Mat eval(cplx eps, cplx x) const;
    Mat eval_deriv_x(cplx eps, cplx x) const;
    cplx trace_eval(cplx eps, cplx x) const;

private:
    int n_ = 0;
    std::vector<BivarPoly> entries_;
};

json poly_matrix_to_json(const PolyMatrix& m);
PolyMatrix poly_matrix_from_json(const json& j, int n);

}  // namespace unfold
