#ifndef WGM_NUMERICS_HPP
#define WGM_NUMERICS_HPP

#include <complex>
#include <functional>
#include <vector>

#include "wgm/errors.hpp"

namespace wgm::numerics
{

struct ValueDeriv
{
    double value = 0.0;
    double derivative = 0.0;
};

struct ComplexValueDeriv
{
    std::complex<double> value{0.0, 0.0};
    std::complex<double> derivative{0.0, 0.0};
};

// Spherical Bessel functions with first derivative.
// j uses downward (Miller) recurrence normalized against j0/j1; y uses upward
// recurrence. Orders up to 5000 are supported; values outside the double range
// raise RangeError.
ValueDeriv spherical_bessel_j(int order, double x);
ValueDeriv spherical_bessel_y(int order, double x);
ComplexValueDeriv spherical_bessel_j(int order, std::complex<double> z);
ComplexValueDeriv spherical_bessel_y(int order, std::complex<double> z);

// Riccati–Bessel functions: psi_l(x) = x j_l(x), chi_l(x) = -x y_l(x),
// xi_l(x) = psi_l(x) - i chi_l(x) (outgoing wave).
ValueDeriv riccati_psi(int order, double x);
ValueDeriv riccati_chi(int order, double x);
ComplexValueDeriv riccati_psi(int order, std::complex<double> z);
ComplexValueDeriv riccati_chi(int order, std::complex<double> z);
ComplexValueDeriv riccati_xi(int order, std::complex<double> z);

// |Y_l^m(theta, .)|^2, phi-independent, normalized so the full solid-angle
// integral equals 1. Stable for l up to several thousand (scaled recurrence).
double normalized_assoc_legendre_sq(int l, int m, double theta);

struct BracketedRoot
{
    double lower = 0.0;
    double upper = 0.0;
    double root = 0.0;
    double residual = 0.0; // f(root)
};

// Brent's method on [lower, upper]; requires a sign change. Deterministic.
// Iteration cap 200 -> ConvergenceError.
BracketedRoot find_root_bracketed(const std::function<double(double)> &f,
                                  double lower, double upper,
                                  double tol_x, double tol_f);

// Minimal dense row-major matrix, just enough for the NNLS design matrices.
struct Matrix
{
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0)
    {
    }
    double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Lawson–Hanson non-negative least squares. Requires rows >= cols and no
// all-zero column. KKT: w_j = (A^T (b - A x))_j <= tol for x_j = 0, |w_j| <= tol
// for x_j > 0.
std::vector<double> nnls(const Matrix &design, const std::vector<double> &target,
                         double tol = 1e-10);

// Adaptive Simpson quadrature; relative tolerance; subdivision budget 1e4.
// On budget exhaustion throws ConvergenceError carrying the best estimate.
double integrate_adaptive(const std::function<double(double)> &f,
                          double a, double b, double tol_rel);

} // namespace wgm::numerics

#endif
