#include "wgm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wgm::numerics
{

namespace
{

constexpr double kRescaleLimit = 1e250;
constexpr int kMaxOrder = 5000;

double magnitude(double v) { return std::abs(v); }
double magnitude(std::complex<double> v) { return std::abs(v); }

bool finite(double v) { return std::isfinite(v); }
bool finite(std::complex<double> v)
{
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

template <typename T>
void check_order(int order, T x, bool needs_nonzero)
{
    if (order < 0 || order > kMaxOrder)
        throw ArgumentError("spherical_bessel: order out of range [0, 5000]");
    if (needs_nonzero && magnitude(x) == 0.0)
        throw ArgumentError("spherical_bessel: x = 0 not allowed for this kind");
}

// sin(z)/z and companions, safe near z = 0.
template <typename T>
T sinc_like_j0(T z)
{
    if (magnitude(z) < 1e-6)
        return T(1.0) - z * z / 6.0;
    return std::sin(z) / z;
}

template <typename T>
T small_j1(T z)
{
    // j1 = sin z / z^2 - cos z / z; the closed form cancels badly near zero,
    // so switch to the series well before that matters.
    if (magnitude(z) < 1e-2)
    {
        T z2 = z * z;
        return z / 3.0 * (T(1.0) - z2 / 10.0 * (T(1.0) - z2 / 28.0));
    }
    return std::sin(z) / (z * z) - std::cos(z) / z;
}

// Small-argument series j_l(x) ~ x^l / (2l+1)!! (1 - x^2/(2(2l+3))).
template <typename T>
bool small_arg_j(int l, T x, T &value, T &deriv)
{
    if (l < 2 || magnitude(x) > 0.1 * std::sqrt(double(2 * l + 3)))
        return false;
    T lead = T(1.0);
    for (int k = 1; k <= l; ++k)
        lead *= x / double(2 * k + 1);
    T corr = T(1.0) - x * x / (2.0 * (2 * l + 3));
    value = lead * corr;
    // j_{l-1} by the same series, then derivative recurrence.
    T lead_m1 = T(1.0);
    for (int k = 1; k <= l - 1; ++k)
        lead_m1 *= x / double(2 * k + 1);
    T jm1 = lead_m1 * (T(1.0) - x * x / (2.0 * (2 * l + 1)));
    deriv = jm1 - (double(l + 1) / x) * value;
    return true;
}

template <typename T>
struct Pair
{
    T value, derivative;
};

template <typename T>
Pair<T> bessel_j_impl(int l, T x)
{
    check_order(l, x, false);
    if (magnitude(x) == 0.0)
    {
        // j_0(0) = 1, j_1'(0) = 1/3, everything else zero at the origin.
        if (l == 0) return {T(1.0), T(0.0)};
        if (l == 1) return {T(0.0), T(1.0 / 3.0)};
        return {T(0.0), T(0.0)};
    }
    if (l == 0)
    {
        T j0 = sinc_like_j0(x);
        T j1 = small_j1(x);
        return {j0, -j1};
    }
    if (l == 1)
    {
        T j0 = sinc_like_j0(x);
        T j1 = small_j1(x);
        return {j1, j0 - 2.0 / x * j1};
    }
    {
        T v, d;
        if (small_arg_j(l, x, v, d))
            return {v, d};
    }

    // Downward Miller recurrence from a start order above both l and |x|.
    double ax = magnitude(x);
    int start = std::max(l, int(ax)) + 16 +
                int(2.0 * std::sqrt(double(std::max(l, int(ax) + 1))));
    T fnp1 = T(0.0);   // unnormalized f_{n+1}
    T fn = T(1e-30);   // unnormalized f_n, arbitrary seed
    T f_l = T(0.0), f_lm1 = T(0.0);
    int rescales = 0, rescales_l = 0, rescales_lm1 = 0;
    for (int n = start; n >= 1; --n)
    {
        T fnm1 = (2.0 * n + 1.0) / x * fn - fnp1;
        fnp1 = fn;
        fn = fnm1; // fn now holds f_{n-1}
        if (n - 1 == l) { f_l = fn; rescales_l = rescales; }
        if (n - 1 == l - 1) { f_lm1 = fn; rescales_lm1 = rescales; }
        if (magnitude(fn) > kRescaleLimit)
        {
            fn /= kRescaleLimit;
            fnp1 /= kRescaleLimit;
            ++rescales;
        }
    }
    // fn = unnormalized f_0, fnp1 = unnormalized f_1 at the final scale.
    T j0 = sinc_like_j0(x);
    T j1 = small_j1(x);
    // Normalize against whichever closed-form reference is larger.
    T ratio = (magnitude(j0) >= magnitude(j1) || magnitude(fnp1) == 0.0)
                  ? j0 / fn
                  : j1 / fnp1;
    auto unscale = [&](int cap_rescales) {
        double s = 1.0;
        for (int k = cap_rescales; k < rescales; ++k)
            s /= kRescaleLimit; // values captured earlier carry pre-rescale scale
        return s;
    };
    T jl = f_l * ratio * unscale(rescales_l);
    T jlm1 = f_lm1 * ratio * unscale(rescales_lm1);
    T djl = jlm1 - (double(l + 1) / x) * jl;
    if (!finite(jl) || !finite(djl))
        throw RangeError("spherical_bessel_j: result not representable");
    return {jl, djl};
}

template <typename T>
Pair<T> bessel_y_impl(int l, T x)
{
    check_order(l, x, true);
    T y0 = -std::cos(x) / x;
    T y1 = -std::cos(x) / (x * x) - std::sin(x) / x;
    if (l == 0) return {y0, -y1};
    if (l == 1) return {y1, y0 - 2.0 / x * y1};
    T ym = y0, yc = y1;
    for (int k = 1; k < l; ++k)
    {
        T yp = (2.0 * k + 1.0) / x * yc - ym;
        ym = yc;
        yc = yp;
        if (!finite(yc))
            throw RangeError("spherical_bessel_y: overflow in upward recurrence");
    }
    T dy = ym - (double(l + 1) / x) * yc;
    if (!finite(dy))
        throw RangeError("spherical_bessel_y: result not representable");
    return {yc, dy};
}

} // namespace

ValueDeriv spherical_bessel_j(int order, double x)
{
    auto [v, d] = bessel_j_impl(order, x);
    return {v, d};
}

ValueDeriv spherical_bessel_y(int order, double x)
{
    auto [v, d] = bessel_y_impl(order, x);
    return {v, d};
}

ComplexValueDeriv spherical_bessel_j(int order, std::complex<double> z)
{
    auto [v, d] = bessel_j_impl(order, z);
    return {v, d};
}

ComplexValueDeriv spherical_bessel_y(int order, std::complex<double> z)
{
    auto [v, d] = bessel_y_impl(order, z);
    return {v, d};
}

ValueDeriv riccati_psi(int order, double x)
{
    auto j = spherical_bessel_j(order, x);
    return {x * j.value, j.value + x * j.derivative};
}

ValueDeriv riccati_chi(int order, double x)
{
    auto y = spherical_bessel_y(order, x);
    return {-x * y.value, -(y.value + x * y.derivative)};
}

ComplexValueDeriv riccati_psi(int order, std::complex<double> z)
{
    auto j = spherical_bessel_j(order, z);
    return {z * j.value, j.value + z * j.derivative};
}

ComplexValueDeriv riccati_chi(int order, std::complex<double> z)
{
    auto y = spherical_bessel_y(order, z);
    return {-z * y.value, -(y.value + z * y.derivative)};
}

ComplexValueDeriv riccati_xi(int order, std::complex<double> z)
{
    auto p = riccati_psi(order, z);
    auto c = riccati_chi(order, z);
    const std::complex<double> i(0.0, 1.0);
    return {p.value - i * c.value, p.derivative - i * c.derivative};
}

double normalized_assoc_legendre_sq(int l, int m, double theta)
{
    if (l < 0 || std::abs(m) > l)
        throw ArgumentError("normalized_assoc_legendre_sq: require 0 <= |m| <= l");
    if (theta < 0.0 || theta > M_PI)
        throw ArgumentError("normalized_assoc_legendre_sq: theta outside [0, pi]");
    m = std::abs(m); // |Y_l^{-m}|^2 == |Y_l^m|^2

    const double x = std::cos(theta);
    const double s = std::sin(theta);
    if (m > 0 && s == 0.0)
        return 0.0;

    // Sectoral start in log space to survive sin^m(theta) for large m:
    // Pbar_mm^2 = (2m+1)/(4pi) * prod_{k=1..m} (2k-1)/(2k) * sin^{2m}.
    double log_pmm_sq = std::log((2.0 * m + 1.0) / (4.0 * M_PI));
    for (int k = 1; k <= m; ++k)
        log_pmm_sq += std::log((2.0 * k - 1.0) / (2.0 * k));
    if (m > 0)
        log_pmm_sq += 2.0 * m * std::log(s);

    // Track the value as v * exp(log_scale), rescaling to keep v ~ O(1).
    double log_scale = 0.5 * log_pmm_sq;
    double pmm = 1.0;
    if (l == m)
    {
        double lg = 2.0 * std::log(std::abs(pmm)) + 2.0 * log_scale;
        return lg < -700.0 ? 0.0 : std::exp(lg);
    }
    double pm1 = pmm;                                    // Pbar_{m,m}
    double pc = x * std::sqrt(2.0 * m + 3.0) * pm1;      // Pbar_{m+1,m}
    for (int ll = m + 2; ll <= l; ++ll)
    {
        double a = std::sqrt((4.0 * ll * ll - 1.0) / (double(ll) * ll - double(m) * m));
        double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - double(m) * m) /
                             (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
        double pn = a * (x * pc - b * pm1);
        pm1 = pc;
        pc = pn;
        double mag = std::max(std::abs(pc), std::abs(pm1));
        if (mag > 1e100 || (mag > 0.0 && mag < 1e-100))
        {
            double f = std::log(mag);
            pc *= std::exp(-f);
            pm1 *= std::exp(-f);
            log_scale += f;
        }
    }
    if (pc == 0.0)
        return 0.0;
    double lg = 2.0 * std::log(std::abs(pc)) + 2.0 * log_scale;
    return lg < -700.0 ? 0.0 : std::exp(lg);
}

BracketedRoot find_root_bracketed(const std::function<double(double)> &f,
                                  double lower, double upper,
                                  double tol_x, double tol_f)
{
    if (!(lower < upper))
        throw ArgumentError("find_root_bracketed: lower must be < upper");
    double a = lower, b = upper;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return {lower, upper, a, 0.0};
    if (fb == 0.0) return {lower, upper, b, 0.0};
    if ((fa > 0.0) == (fb > 0.0))
        throw BracketError("find_root_bracketed: no sign change across bracket");

    // Brent's method.
    double c = a, fc = fa;
    double d = b - a, e = d;
    const int kMaxIter = 200;
    for (int iter = 0; iter < kMaxIter; ++iter)
    {
        if (std::abs(fc) < std::abs(fb))
        {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol_x;
        double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || std::abs(fb) <= tol_f)
            return {lower, upper, b, fb};
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb))
        {
            double s = fb / fa, p, q;
            if (a == c)
            {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            }
            else
            {
                double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q)))
            {
                e = d;
                d = p / q;
            }
            else
            {
                d = xm;
                e = d;
            }
        }
        else
        {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0))
        {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    throw ConvergenceError("find_root_bracketed: iteration cap (200) exceeded", b);
}

namespace
{

// Solve the unconstrained LS subproblem on the passive set via normal
// equations + Cholesky; column count is tiny here.
std::vector<double> ls_on_set(const Matrix &A, const std::vector<double> &b,
                              const std::vector<std::size_t> &cols)
{
    const std::size_t n = cols.size();
    std::vector<double> G(n * n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = i; j < n; ++j)
        {
            double s = 0.0;
            for (std::size_t r = 0; r < A.rows(); ++r)
                s += A(r, cols[i]) * A(r, cols[j]);
            G[i * n + j] = G[j * n + i] = s;
        }
        double s = 0.0;
        for (std::size_t r = 0; r < A.rows(); ++r)
            s += A(r, cols[i]) * b[r];
        rhs[i] = s;
    }
    // Cholesky with a tiny diagonal floor against exact rank deficiency.
    std::vector<double> L(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = 0; j <= i; ++j)
        {
            double s = G[i * n + j];
            for (std::size_t k = 0; k < j; ++k)
                s -= L[i * n + k] * L[j * n + k];
            if (i == j)
                L[i * n + i] = std::sqrt(std::max(s, 1e-300));
            else
                L[i * n + j] = s / L[j * n + j];
        }
    }
    std::vector<double> z(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k)
            s -= L[i * n + k] * z[k];
        z[i] = s / L[i * n + i];
    }
    std::vector<double> sol(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;)
    {
        double s = z[ii];
        for (std::size_t k = ii + 1; k < n; ++k)
            s -= L[k * n + ii] * sol[k];
        sol[ii] = s / L[ii * n + ii];
    }
    return sol;
}

} // namespace

std::vector<double> nnls(const Matrix &A, const std::vector<double> &b, double tol)
{
    const std::size_t m = A.rows(), n = A.cols();
    if (m < n)
        throw ArgumentError("nnls: need rows >= cols");
    if (b.size() != m)
        throw ArgumentError("nnls: target length mismatch");
    for (std::size_t c = 0; c < n; ++c)
    {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r)
            s += A(r, c) * A(r, c);
        if (s == 0.0)
            throw ArgumentError("nnls: design has an all-zero column");
    }

    std::vector<double> x(n, 0.0);
    std::vector<bool> passive(n, false);
    std::vector<double> resid = b; // b - A x, x = 0 initially

    auto gradient = [&](std::size_t c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r)
            s += A(r, c) * resid[r];
        return s;
    };
    auto recompute_resid = [&]() {
        for (std::size_t r = 0; r < m; ++r)
        {
            double s = b[r];
            for (std::size_t c = 0; c < n; ++c)
                if (x[c] != 0.0)
                    s -= A(r, c) * x[c];
            resid[r] = s;
        }
    };

    double grad_tol = tol;
    {
        double bn = 0.0;
        for (double v : b) bn = std::max(bn, std::abs(v));
        grad_tol = tol * std::max(1.0, bn);
    }

    const int kOuterCap = 3 * int(n) + 30;
    for (int outer = 0; outer < kOuterCap; ++outer)
    {
        // Most-violating zero coordinate.
        int best = -1;
        double bestw = grad_tol;
        for (std::size_t c = 0; c < n; ++c)
        {
            if (passive[c]) continue;
            double w = gradient(c);
            if (w > bestw)
            {
                bestw = w;
                best = int(c);
            }
        }
        if (best < 0)
            break; // KKT satisfied
        passive[std::size_t(best)] = true;

        for (int inner = 0; inner < kOuterCap; ++inner)
        {
            std::vector<std::size_t> cols;
            for (std::size_t c = 0; c < n; ++c)
                if (passive[c]) cols.push_back(c);
            std::vector<double> z = ls_on_set(A, b, cols);
            bool all_pos = true;
            for (double v : z)
                if (v <= 0.0) { all_pos = false; break; }
            if (all_pos)
            {
                std::fill(x.begin(), x.end(), 0.0);
                for (std::size_t i = 0; i < cols.size(); ++i)
                    x[cols[i]] = z[i];
                break;
            }
            // Step toward z, dropping the first variable that hits zero.
            double alpha = 1.0;
            for (std::size_t i = 0; i < cols.size(); ++i)
                if (z[i] <= 0.0)
                    alpha = std::min(alpha, x[cols[i]] / (x[cols[i]] - z[i]));
            for (std::size_t i = 0; i < cols.size(); ++i)
            {
                x[cols[i]] += alpha * (z[i] - x[cols[i]]);
                if (x[cols[i]] <= tol)
                {
                    x[cols[i]] = 0.0;
                    passive[cols[i]] = false;
                }
            }
        }
        recompute_resid();
    }
    return x;
}

namespace
{

struct SimpsonBudget
{
    int remaining = 10000;
};

double simpson(double fa, double fm, double fb, double h)
{
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)> &f, double a, double b,
             double fa, double fm, double fb, double whole, double tol,
             SimpsonBudget &budget, bool &converged)
{
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(fa, flm, fm, m - a);
    double right = simpson(fm, frm, fb, b - m);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || (b - a) < 1e-14 * (std::abs(a) + std::abs(b)))
        return left + right + delta / 15.0;
    if (budget.remaining-- <= 0) // one subdivision = one split of a panel
    {
        converged = false;
        return left + right + delta / 15.0;
    }
    double l = adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, budget, converged);
    double r = adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, budget, converged);
    return l + r;
}

} // namespace

double integrate_adaptive(const std::function<double(double)> &f,
                          double a, double b, double tol_rel)
{
    if (!(a < b))
        throw ArgumentError("integrate_adaptive: need a < b");
    // Seed with a fixed coarse panel split so narrow features are not missed.
    const int kPanels = 32;
    double h = (b - a) / kPanels;
    double coarse = 0.0;
    std::vector<double> fs(2 * kPanels + 1);
    for (int i = 0; i <= 2 * kPanels; ++i)
        fs[std::size_t(i)] = f(a + 0.5 * h * i);
    for (int i = 0; i < kPanels; ++i)
        coarse += simpson(fs[std::size_t(2 * i)], fs[std::size_t(2 * i + 1)],
                          fs[std::size_t(2 * i + 2)], h);
    double abs_tol = tol_rel * std::max(std::abs(coarse), 1e-300);

    SimpsonBudget budget;
    bool converged = true;
    double total = 0.0;
    for (int i = 0; i < kPanels; ++i)
    {
        double pa = a + h * i, pb = pa + h;
        double whole = simpson(fs[std::size_t(2 * i)], fs[std::size_t(2 * i + 1)],
                               fs[std::size_t(2 * i + 2)], h);
        total += adapt(f, pa, pb, fs[std::size_t(2 * i)], fs[std::size_t(2 * i + 1)],
                       fs[std::size_t(2 * i + 2)], whole, abs_tol / kPanels, budget,
                       converged);
    }
    if (!converged)
        throw ConvergenceError("integrate_adaptive: subdivision budget (1e4) exceeded",
                               total);
    return total;
}

} // namespace wgm::numerics
