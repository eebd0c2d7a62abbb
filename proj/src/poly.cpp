#include "unfold/poly.hpp"

namespace unfold {

BivarPoly BivarPoly::constant(cplx c) {
    BivarPoly p(0, 0);
    p.at(0, 0) = c;
    return p;
}

cplx& BivarPoly::at(int dx, int de) {
    if (dx >= int(coeff_.size())) coeff_.resize(dx + 1);
    int cols = std::max<int>(de + 1, coeff_.empty() || coeff_[0].empty() ? de + 1 : int(coeff_[0].size()));
    for (auto& row : coeff_)
        if (int(row.size()) < cols) row.resize(cols, cplx{0, 0});
    return coeff_[dx][de];
}

cplx BivarPoly::at(int dx, int de) const {
    if (dx < 0 || dx >= int(coeff_.size())) return {0, 0};
    if (de < 0 || de >= int(coeff_[dx].size())) return {0, 0};
    return coeff_[dx][de];
}

cplx BivarPoly::eval(cplx eps, cplx x) const {
    cplx acc{0, 0};
    for (int dx = int(coeff_.size()) - 1; dx >= 0; --dx) {
        cplx row{0, 0};
        for (int de = int(coeff_[dx].size()) - 1; de >= 0; --de) row = row * eps + coeff_[dx][de];
        acc = acc * x + row;
    }
    return acc;
}

BivarPoly BivarPoly::deriv_x() const {
    if (coeff_.size() <= 1) return BivarPoly(0, std::max(0, deg_eps()));
    BivarPoly d(deg_x() - 1, deg_eps());
    for (int dx = 1; dx <= deg_x(); ++dx)
        for (int de = 0; de <= deg_eps(); ++de) d.at(dx - 1, de) = at(dx, de) * double(dx);
    return d;
}

BivarPoly& BivarPoly::operator+=(const BivarPoly& o) {
    for (int dx = 0; dx <= o.deg_x(); ++dx)
        for (int de = 0; de <= o.deg_eps(); ++de) at(dx, de) += o.at(dx, de);
    return *this;
}

Mat PolyMatrix::eval(cplx eps, cplx x) const {
    Mat m(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j).eval(eps, x);
    return m;
}

Mat PolyMatrix::eval_deriv_x(cplx eps, cplx x) const {
    Mat m(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j).deriv_x().eval(eps, x);
    return m;
}

cplx PolyMatrix::trace_eval(cplx eps, cplx x) const {
    cplx t{0, 0};
    for (int i = 0; i < n_; ++i) t += (*this)(i, i).eval(eps, x);
    return t;
}

json poly_matrix_to_json(const PolyMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.n(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.n(); ++j) {
            const BivarPoly& p = m(i, j);
            json tensor = json::array();
            for (int dx = 0; dx <= std::max(0, p.deg_x()); ++dx) {
                json line = json::array();
                for (int de = 0; de <= std::max(0, p.deg_eps()); ++de) {
                    cplx c = p.at(dx, de);
                    line.push_back(json::array({c.real(), c.imag()}));
                }
                tensor.push_back(line);
            }
            row.push_back(tensor);
        }
        rows.push_back(row);
    }
    return rows;
}

PolyMatrix poly_matrix_from_json(const json& j, int n) {
    if (!j.is_array() || int(j.size()) != n) fail(errc::usage, "B: expected n rows");
    PolyMatrix m(n);
    for (int i = 0; i < n; ++i) {
        if (!j[i].is_array() || int(j[i].size()) != n) fail(errc::usage, "B: expected n columns");
        for (int c = 0; c < n; ++c) {
            const json& tensor = j[i][c];
            if (!tensor.is_array() || tensor.empty()) fail(errc::usage, "B entry: expected coefficient tensor");
            for (int dx = 0; dx < int(tensor.size()); ++dx) {
                const json& line = tensor[dx];
                if (!line.is_array()) fail(errc::usage, "B entry: expected row of [re,im]");
                for (int de = 0; de < int(line.size()); ++de) {
                    const json& z = line[de];
                    if (!z.is_array() || z.size() != 2) fail(errc::usage, "coefficient must be [re,im]");
                    m(i, c).at(dx, de) = cplx(z[0].get<double>(), z[1].get<double>());
                }
            }
        }
    }
    return m;
}

}  // namespace unfold
