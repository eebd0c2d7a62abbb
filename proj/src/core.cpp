#include "unfold/core.hpp"

namespace unfold {

double rel_err(const Mat& a, const Mat& b) {
    double scale = std::max(1.0, std::max(a.norm(), b.norm()));
    return (a - b).norm() / scale;
}

double rel_err(cplx a, cplx b) {
    double scale = std::max(1.0, std::max(std::abs(a), std::abs(b)));
    return std::abs(a - b) / scale;
}

}  // namespace unfold
