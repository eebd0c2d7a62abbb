#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace unfold {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr cplx I{0.0, 1.0};

/* Error classes map 1:1 onto CLI exit codes. */
enum class errc {
    usage = 2,
    resonance = 3,
    integrator = 4,
    leakage = 5,
    contraction = 6,
};

class error : public std::runtime_error {
public:
    error(errc c, const std::string& msg) : std::runtime_error(msg), code_(c) {}
    errc code() const { return code_; }
    int exit_code() const { return static_cast<int>(code_); }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc c, const std::string& msg) { throw error(c, msg); }

/* A point of the universal cover of the punctured eps-plane. The argument is
 * unconstrained: modulus*e^{i*arg} with arg and arg+2*pi are distinct
 * parameter values (the two branches over the auto-intersection of S). */
struct UnfoldedParameter {
    double modulus = 0.0;
    double argument = 0.0;

    bool is_origin() const { return modulus == 0.0; }
    cplx eps() const { return modulus * std::exp(I * argument); }
    cplx sqrt_eps() const { return std::sqrt(modulus) * std::exp(I * argument / 2.0); }
    cplx x_L() const { return sqrt_eps(); }
    cplx x_R() const { return -sqrt_eps(); }
};

enum class Side { L, R };

inline const char* side_name(Side s) { return s == Side::L ? "L" : "R"; }

struct Tolerances {
    double rtol = 1e-11;            // path integration, embedded error control
    double extraction_tol = 1e-7;   // unipotent-structure leakage threshold
    double resonance_margin = 1e-4; // min |1 - Delta| accepted by extraction
    double collision_tol = 1e-8;    // eigenvalue-collision threshold
    double compare_tol = 1e-10;     // invariant comparisons
};

double rel_err(const Mat& a, const Mat& b);
double rel_err(cplx a, cplx b);

}  // namespace unfold
