#include "wgm/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "wgm/errors.hpp"

namespace wgm::modes
{

namespace num = wgm::numerics;

namespace
{

constexpr double kPi = std::numbers::pi;

// Zeros of the Airy function Ai(-t); asymptotic x_n ~ (nu + t_n (nu/2)^(1/3))/N.
constexpr double kAiryZeros[] = {
    2.338107410459767, 4.087949444130971, 5.520559828095551, 6.786708090071759,
    7.944133587120853, 9.022650853340980, 10.04017434155809, 11.00852430373326,
    11.93601556323626, 12.82877675286576, 13.69148903521072, 14.52782995177533,
    15.34075513597799, 16.13268515694577, 16.90563399742994, 17.66130010569706,
    18.40113259920712, 19.12638047424695, 19.83812989172149, 20.53733290767756};

double airy_zero(int n)
{
    if (n <= 20)
        return kAiryZeros[n - 1];
    // McMahon-style asymptotic for higher zeros.
    double s = 3.0 * kPi * (4.0 * n - 1.0) / 8.0;
    return std::pow(s, 2.0 / 3.0);
}

// Second-order asymptotic estimate of the size parameter of the n-th radial
// order for angular number l (Airy expansion of the interior caustic).
double root_estimate(double index, int l, int n)
{
    double nu = l + 0.5;
    double t = airy_zero(n);
    return (nu + t * std::pow(0.5 * nu, 1.0 / 3.0) +
            0.3 * t * t * std::pow(2.0, -2.0 / 3.0) * std::pow(nu, -1.0 / 3.0)) /
           index;
}

// Inverse of root_estimate: nu such that the n-th root sits at size parameter x.
double nu_estimate(double index, double x, int n)
{
    double t = airy_zero(n);
    double nu = index * x;
    for (int it = 0; it < 30; ++it)
        nu = index * x - t * std::pow(0.5 * nu, 1.0 / 3.0) -
             0.3 * t * t * std::pow(2.0, -2.0 / 3.0) * std::pow(nu, -1.0 / 3.0);
    return nu;
}

double char_fn_value(double index, Polarization pol, int l, double x)
{
    auto psi = num::riccati_psi(l, index * x);
    auto chi = num::riccati_chi(l, x);
    if (pol == Polarization::TE)
        return index * psi.derivative * chi.value - psi.value * chi.derivative;
    return psi.derivative * chi.value / index - index * psi.value * chi.derivative;
}

std::complex<double> char_fn_outgoing_value(std::complex<double> index, Polarization pol,
                                            int l, std::complex<double> x)
{
    auto psi = num::riccati_psi(l, index * x);
    auto xi = num::riccati_xi(l, x);
    if (pol == Polarization::TE)
        return index * psi.derivative * xi.value - psi.value * xi.derivative;
    return psi.derivative * xi.value / index - index * psi.value * xi.derivative;
}

std::complex<double> char_fn_outgoing_deriv(std::complex<double> index, Polarization pol,
                                            int l, std::complex<double> x)
{
    auto psi = num::riccati_psi(l, index * x);
    auto xi = num::riccati_xi(l, x);
    std::complex<double> ll(double(l) * (l + 1), 0.0);
    std::complex<double> zin = index * x;
    std::complex<double> ppsi = (ll / (zin * zin) - 1.0) * psi.value;
    std::complex<double> pxi = (ll / (x * x) - 1.0) * xi.value;
    if (pol == Polarization::TE)
        return index * index * ppsi * xi.value - psi.value * pxi;
    return ppsi * xi.value + psi.derivative * xi.derivative / index -
           index * index * psi.derivative * xi.derivative - index * psi.value * pxi;
}

struct RealRoot
{
    double x = 0.0;
    double residual = 0.0;
};

// Scan [x_lo, x_hi] with the FSR/50 step and bracket every sign change.
std::vector<RealRoot> scan_roots(const Sphere &sphere, Polarization pol, int l,
                                 double x_lo, double x_hi, std::size_t max_roots)
{
    std::vector<RealRoot> roots;
    double n_re = sphere.index_real;
    double step = 1.0 / (50.0 * n_re);
    if (x_hi <= x_lo)
        return roots;
    double prev_x = x_lo;
    double prev_f = char_fn_value(n_re, pol, l, prev_x);
    std::size_t steps = std::size_t((x_hi - x_lo) / step) + 1;
    for (std::size_t i = 1; i <= steps && roots.size() < max_roots; ++i)
    {
        double x = std::min(x_lo + double(i) * step, x_hi);
        double f = char_fn_value(n_re, pol, l, x);
        if (std::signbit(f) != std::signbit(prev_f))
        {
            auto fn = [&](double t) { return char_fn_value(n_re, pol, l, t); };
            auto br = num::find_root_bracketed(fn, prev_x, x, 1e-14 * x, 0.0);
            double scale = std::max(std::abs(prev_f), std::abs(f));
            if (std::abs(br.residual) > 1e-9 * scale)
                throw ConvergenceError("resonance residual exceeds contract",
                                       br.root);
            roots.push_back({br.root, br.residual});
        }
        prev_x = x;
        prev_f = f;
        if (x >= x_hi)
            break;
    }
    return roots;
}

// Real-branch roots of orders 1..n_max in scan order (lowest x first).
std::vector<double> ordered_roots(const Sphere &sphere, Polarization pol, int l,
                                  int n_max)
{
    double nu = l + 0.5;
    double x_lo = nu / sphere.index_real + 1e-3;
    double x_hi = std::min(root_estimate(sphere.index_real, l, n_max) +
                               2.0 / sphere.index_real,
                           double(l) + 5.0);
    auto roots = scan_roots(sphere, pol, l, x_lo, x_hi, std::size_t(n_max));
    std::vector<double> xs;
    xs.reserve(roots.size());
    for (const auto &r : roots)
        xs.push_back(r.x);
    return xs;
}

double radiative_q_from_seed(const Sphere &sphere, Polarization pol, int l,
                             double x_seed)
{
    std::complex<double> index = sphere.index_complex();
    std::complex<double> x(x_seed, 0.0);
    for (int it = 0; it < 50; ++it)
    {
        std::complex<double> f = char_fn_outgoing_value(index, pol, l, x);
        std::complex<double> df = char_fn_outgoing_deriv(index, pol, l, x);
        if (df == std::complex<double>(0.0, 0.0))
            throw ConvergenceError("radiative_q: zero derivative in Newton step",
                                   x.real());
        std::complex<double> delta = f / df;
        x -= delta;
        if (std::abs(delta) <= 1e-15 * std::abs(x) ||
            (x.imag() != 0.0 && std::abs(delta) <= 1e-10 * std::abs(x.imag())))
        {
            if (x.imag() >= 0.0)
                throw ConvergenceError("radiative_q: root not in the lower half plane",
                                       x.real());
            double q = x.real() / (-2.0 * x.imag());
            if (!std::isfinite(q) || q <= 0.0)
                throw RangeError("radiative_q: quality factor not representable");
            return q;
        }
    }
    throw ConvergenceError("radiative_q: Newton iteration did not converge", x.real());
}

} // namespace

std::string to_string(Polarization pol)
{
    return pol == Polarization::TE ? "TE" : "TM";
}

Polarization polarization_from_string(const std::string &s)
{
    if (s == "TE")
        return Polarization::TE;
    if (s == "TM")
        return Polarization::TM;
    throw ArgumentError("unknown polarization: " + s);
}

std::string to_string(PeakPolarization pol)
{
    switch (pol)
    {
    case PeakPolarization::TE: return "TE";
    case PeakPolarization::TM: return "TM";
    default: return "unknown";
    }
}

PeakPolarization peak_polarization_from_string(const std::string &s)
{
    if (s == "TE")
        return PeakPolarization::TE;
    if (s == "TM")
        return PeakPolarization::TM;
    if (s == "unknown")
        return PeakPolarization::Unknown;
    throw ArgumentError("unknown polarization: " + s);
}

void Sphere::validate() const
{
    if (!(radius > 0.0))
        throw ArgumentError("sphere radius must be positive");
    if (!(index_real > ambient_index))
        throw ArgumentError("sphere index must exceed the ambient index");
    if (index_imag < 0.0)
        throw ArgumentError("imaginary index part must be nonnegative");
}

double Mode::q_total() const
{
    if (q_loaded > 0.0)
        return 1.0 / (1.0 / q_loaded + 1.0 / q_radiative);
    return q_radiative;
}

void PeakList::validate() const
{
    for (std::size_t i = 0; i < entries.size(); ++i)
    {
        if (!(entries[i].wavelength > 0.0))
            throw ArgumentError("peak wavelengths must be positive");
        if (i > 0 && !(entries[i].wavelength > entries[i - 1].wavelength))
            throw ArgumentError("peak wavelengths must be strictly increasing");
    }
}

double characteristic_fn(const Sphere &sphere, Polarization pol, int l, double x)
{
    sphere.validate();
    if (l < 1)
        throw ArgumentError("characteristic_fn: l must be >= 1");
    if (!(x > 0.0))
        throw ArgumentError("characteristic_fn: x must be positive");
    return char_fn_value(sphere.index_real, pol, l, x);
}

std::complex<double> characteristic_fn_outgoing(const Sphere &sphere, Polarization pol,
                                                int l, std::complex<double> x)
{
    sphere.validate();
    if (l < 1)
        throw ArgumentError("characteristic_fn_outgoing: l must be >= 1");
    if (x.imag() > 0.0)
        throw ArgumentError("characteristic_fn_outgoing: Im(x) must be <= 0");
    return char_fn_outgoing_value(sphere.index_complex(), pol, l, x);
}

double fsr_analytic(const Sphere &sphere, double lambda)
{
    sphere.validate();
    if (!(lambda > 0.0))
        throw ArgumentError("fsr_analytic: wavelength must be positive");
    return lambda * lambda / (2.0 * kPi * sphere.radius * sphere.index_real);
}

RadialProfile::RadialProfile(const Sphere &sphere, Polarization pol, int l,
                             double lambda)
    : radius_(sphere.radius), wavenumber_(2.0 * kPi / lambda),
      index_(sphere.index_real), l_(l)
{
    sphere.validate();
    if (l < 1 || !(lambda > 0.0))
        throw ArgumentError("RadialProfile: invalid l or wavelength");

    double x = wavenumber_ * radius_;
    double inside = num::spherical_bessel_j(l_, index_ * x).value;
    double outside = num::spherical_bessel_y(l_, x).value;
    boundary_in_ = inside * inside;
    // TE: tangential E continuous -> intensity continuous. TM: dominant radial
    // E jumps by eps = N^2 -> intensity jump N^4.
    double jump = pol == Polarization::TE ? 1.0 : std::pow(index_, 4);
    exterior_scale_ = jump * boundary_in_ / (outside * outside);

    double n_eff = double(l_) / x;
    if (n_eff <= 1.0)
        throw ArgumentError("RadialProfile: mode is not evanescent outside");
    decay_length_ = 1.0 / (wavenumber_ * std::sqrt(n_eff * n_eff - 1.0));

    // Interior maxima and the global peak on a 10^4-point grid.
    constexpr int kGrid = 10000;
    peak_ = jump * boundary_in_; // exterior value at r = R+
    interior_maxima_ = 0;
    std::vector<double> samples(kGrid);
    for (int i = 1; i <= kGrid; ++i)
    {
        double r = radius_ * double(i) / double(kGrid);
        double v = unnormalized(r * (1.0 - 1e-12)); // stay on the interior side
        samples[i - 1] = v;
        peak_ = std::max(peak_, v);
    }
    double floor_level = 1e-12 * peak_;
    for (int i = 1; i + 1 < kGrid; ++i)
    {
        double v = samples[i];
        if (v > floor_level && v > samples[i - 1] && v >= samples[i + 1])
            ++interior_maxima_;
    }
    surface_rel_ = jump * boundary_in_ / peak_;
}

double RadialProfile::unnormalized(double r) const
{
    if (!(r > 0.0))
        throw ArgumentError("radial_profile: r must be positive");
    if (r < radius_)
    {
        double v = num::spherical_bessel_j(l_, index_ * wavenumber_ * r).value;
        return v * v;
    }
    double v = num::spherical_bessel_y(l_, wavenumber_ * r).value;
    return exterior_scale_ * v * v;
}

double RadialProfile::operator()(double r) const
{
    return unnormalized(r) / peak_;
}

double radial_profile(const Sphere &sphere, const Mode &mode, double r)
{
    RadialProfile profile(sphere, mode.id.polarization, mode.id.l, mode.lambda_res);
    return profile(r);
}

namespace detail
{

double polar_second_moment(int l, int m)
{
    auto p2 = [&](double theta) {
        double p = num::normalized_assoc_legendre_sq(l, m, theta);
        return p * p * std::sin(theta);
    };
    return 2.0 * kPi * num::integrate_adaptive(p2, 0.0, kPi, 1e-8);
}

double mode_volume_from_profile(const Sphere &sphere, const RadialProfile &profile,
                                int l, int m, double scale)
{
    double radius = sphere.radius;
    double eps_in = sphere.index_real * sphere.index_real;

    auto weighted = [&](double r) {
        double eps = r < radius ? eps_in : 1.0;
        return eps * scale * profile.unnormalized(r);
    };
    auto first_in = [&](double r) { return weighted(r) * r * r; };
    auto second_in = [&](double r) { double w = weighted(r); return w * w * r * r; };

    // The interior intensity is exponentially small below the caustic; start a
    // little under it to keep the quadrature focused.
    double r_lo = 0.6 * radius;
    double r_out = radius + 30.0 * profile.decay_length();

    double ir1 = num::integrate_adaptive(first_in, r_lo, radius, 1e-7) +
                 num::integrate_adaptive(first_in, radius, r_out, 1e-7);
    double ir2 = num::integrate_adaptive(second_in, r_lo, radius, 1e-7) +
                 num::integrate_adaptive(second_in, radius, r_out, 1e-7);
    double ip2 = polar_second_moment(l, m);
    double v = ir1 * ir1 / (ir2 * ip2);
    if (!(v > 0.0) || !std::isfinite(v))
        throw ConvergenceError("mode_volume: non-positive result", v);
    return v;
}

} // namespace detail

double mode_volume(const Sphere &sphere, const Mode &mode)
{
    RadialProfile profile(sphere, mode.id.polarization, mode.id.l, mode.lambda_res);
    return detail::mode_volume_from_profile(sphere, profile, mode.id.l, mode.id.m);
}

double radiative_q(const Sphere &sphere, Polarization pol, int l, int n)
{
    sphere.validate();
    if (l < 1 || n < 1)
        throw ArgumentError("radiative_q: l and n must be >= 1");
    auto xs = ordered_roots(sphere, pol, l, n);
    if (int(xs.size()) < n)
        throw ConvergenceError("radiative_q: requested radial order not found",
                               xs.empty() ? 0.0 : xs.back());
    return radiative_q_from_seed(sphere, pol, l, xs[std::size_t(n - 1)]);
}

std::vector<Mode> find_resonances_l(const Sphere &sphere, Polarization pol, int l,
                                    int n_max, double lambda_min, double lambda_max,
                                    double q_loaded)
{
    sphere.validate();
    if (!(lambda_min < lambda_max) || n_max < 1 || l < 1)
        throw ArgumentError("find_resonances: invalid window, n_max, or l");

    double nu = l + 0.5;
    double x_win_lo = 2.0 * kPi * sphere.radius / lambda_max;
    double x_win_hi = 2.0 * kPi * sphere.radius / lambda_min;
    double x_lo = std::max(x_win_lo, nu / sphere.index_real + 1e-3);
    double x_hi = std::min({x_win_hi, nu - 1e-3, double(l) + 5.0});

    std::vector<Mode> out;
    for (const auto &root : scan_roots(sphere, pol, l, x_lo, x_hi,
                                       std::numeric_limits<std::size_t>::max()))
    {
        double lambda = 2.0 * kPi * sphere.radius / root.x;
        RadialProfile profile(sphere, pol, l, lambda);
        int n = profile.interior_maxima();
        if (n < 1 || n > n_max)
            continue;
        Mode mode;
        mode.id = ModeId{pol, n, l, l};
        mode.lambda_res = lambda;
        mode.size_parameter = root.x;
        mode.q_loaded = q_loaded;
        mode.surface_intensity_rel = profile.surface_intensity_rel();
        mode.decay_length = profile.decay_length();
        mode.q_radiative = radiative_q_from_seed(sphere, pol, l, root.x);
        mode.mode_volume = detail::mode_volume_from_profile(sphere, profile, l, l);
        out.push_back(mode);
    }
    std::sort(out.begin(), out.end(),
              [](const Mode &a, const Mode &b) { return a.lambda_res < b.lambda_res; });
    return out;
}

std::vector<Mode> find_resonances(const Sphere &sphere, Polarization pol, int n_max,
                                  double lambda_min, double lambda_max,
                                  double q_loaded)
{
    sphere.validate();
    if (!(lambda_min < lambda_max) || n_max < 1)
        throw ArgumentError("find_resonances: invalid window or n_max");

    double x_win_lo = 2.0 * kPi * sphere.radius / lambda_max;
    double x_win_hi = 2.0 * kPi * sphere.radius / lambda_min;
    double margin = 3.0 / sphere.index_real;

    std::vector<Mode> out;
    int l_hi = int(sphere.index_real * x_win_hi) + 2;
    for (int l = std::max(1, int(x_win_lo) - 1); l <= l_hi; ++l)
    {
        bool candidate = false;
        for (int n = 1; n <= n_max && !candidate; ++n)
        {
            double est = root_estimate(sphere.index_real, l, n);
            candidate = est >= x_win_lo - margin && est <= x_win_hi + margin;
        }
        if (!candidate)
            continue;
        auto modes = find_resonances_l(sphere, pol, l, n_max, lambda_min, lambda_max,
                                       q_loaded);
        out.insert(out.end(), modes.begin(), modes.end());
    }
    std::sort(out.begin(), out.end(),
              [](const Mode &a, const Mode &b) { return a.lambda_res < b.lambda_res; });
    return out;
}

int fundamental_l(const Sphere &sphere, Polarization pol, double lambda)
{
    sphere.validate();
    if (!(lambda > 0.0))
        throw ArgumentError("fundamental_l: wavelength must be positive");
    double x_target = 2.0 * kPi * sphere.radius / lambda;
    int l0 = int(std::lround(nu_estimate(sphere.index_real, x_target, 1) - 0.5));
    int best_l = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (int l = std::max(1, l0 - 2); l <= l0 + 2; ++l)
    {
        auto xs = ordered_roots(sphere, pol, l, 1);
        if (xs.empty())
            continue;
        double err = std::abs(xs[0] - x_target);
        if (err < best_err)
        {
            best_err = err;
            best_l = l;
        }
    }
    if (best_l == 0)
        throw ConvergenceError("fundamental_l: no fundamental root located", 0.0);
    return best_l;
}

Mode nearest_mode(const Sphere &sphere, Polarization pol, int n, double lambda,
                  double q_loaded)
{
    sphere.validate();
    if (n < 1 || !(lambda > 0.0))
        throw ArgumentError("nearest_mode: invalid n or wavelength");
    double x_target = 2.0 * kPi * sphere.radius / lambda;
    int l0 = int(std::lround(nu_estimate(sphere.index_real, x_target, n) - 0.5));

    bool found = false;
    Mode best;
    double best_err = std::numeric_limits<double>::infinity();
    for (int l = std::max(1, l0 - 3); l <= l0 + 3; ++l)
    {
        double est = root_estimate(sphere.index_real, l, n);
        double span = 2.5 / sphere.index_real;
        double lam_lo = 2.0 * kPi * sphere.radius / (est + span);
        double lam_hi = 2.0 * kPi * sphere.radius /
                        std::max(est - span, (l + 0.5) / sphere.index_real + 2e-3);
        for (const auto &mode :
             find_resonances_l(sphere, pol, l, n, lam_lo, lam_hi, q_loaded))
        {
            if (mode.id.n != n)
                continue;
            double err = std::abs(mode.lambda_res - lambda);
            if (err < best_err)
            {
                best_err = err;
                best = mode;
                found = true;
            }
        }
    }
    if (!found)
        throw ConvergenceError("nearest_mode: no mode of the requested order found",
                               double(l0));
    return best;
}

PeakList synthesize_spectrum(const Sphere &sphere, double lambda_min, double lambda_max,
                             int n_max, double q_loaded)
{
    if (lambda_max - lambda_min <
        fsr_analytic(sphere, 0.5 * (lambda_min + lambda_max)))
        throw ArgumentError("synthesize_spectrum: window narrower than one FSR");

    PeakList list;
    for (Polarization pol : {Polarization::TE, Polarization::TM})
    {
        for (const auto &mode :
             find_resonances(sphere, pol, n_max, lambda_min, lambda_max, q_loaded))
        {
            Peak peak;
            peak.wavelength = mode.lambda_res;
            peak.polarization =
                pol == Polarization::TE ? PeakPolarization::TE : PeakPolarization::TM;
            // Coupling proxy: strong surface field and small volume couple best.
            peak.height = mode.surface_intensity_rel / (mode.mode_volume * 1e18);
            peak.label = mode.id;
            list.entries.push_back(peak);
        }
    }
    std::sort(list.entries.begin(), list.entries.end(),
              [](const Peak &a, const Peak &b) { return a.wavelength < b.wavelength; });
    if (!list.entries.empty())
    {
        double top = 0.0;
        for (const auto &p : list.entries)
            top = std::max(top, p.height);
        for (auto &p : list.entries)
            p.height /= top;
    }
    list.validate();
    return list;
}

namespace
{

struct RootEntry
{
    Polarization pol;
    int n;
    int l;
    double x;
};

// Real-branch roots (n <= 2, both polarizations) for every l that can land in
// the measured wavelength span across the radius search band.
std::vector<RootEntry> build_root_table(double index, double radius_guess,
                                        double lambda_lo, double lambda_hi)
{
    Sphere sphere{radius_guess, index, 0.0, 1.0};
    double x_lo = 2.0 * kPi * 0.88 * radius_guess / lambda_hi;
    double x_hi = 2.0 * kPi * 1.12 * radius_guess / lambda_lo;
    std::vector<RootEntry> table;
    for (Polarization pol : {Polarization::TE, Polarization::TM})
    {
        for (int n = 1; n <= 2; ++n)
        {
            for (int l = std::max(1, int(x_lo)); l <= int(index * x_hi) + 2; ++l)
            {
                double est = root_estimate(index, l, n);
                if (est < x_lo || est > x_hi)
                    continue;
                double nu = l + 0.5;
                double span = 1.5 / index;
                double s_lo = std::max(est - span, nu / index + 1e-3);
                auto roots = scan_roots(sphere, pol, l, s_lo, est + span, 8);
                // Keep the root whose radial order matches n (count maxima).
                for (const auto &r : roots)
                {
                    double lam = 2.0 * kPi * radius_guess / r.x;
                    RadialProfile profile(sphere, pol, l, lam);
                    if (profile.interior_maxima() == n)
                    {
                        table.push_back({pol, n, l, r.x});
                        break;
                    }
                }
            }
        }
    }
    return table;
}

struct LabeledFit
{
    std::vector<int> assignment; // index into the root table, one per peak
    double radius = 0.0;
    double rms = std::numeric_limits<double>::infinity();
};

bool pol_compatible(PeakPolarization peak, Polarization mode)
{
    if (peak == PeakPolarization::Unknown)
        return true;
    return (peak == PeakPolarization::TE) == (mode == Polarization::TE);
}

// Assign each peak to the nearest synthetic wavelength at the given radius,
// then solve the closed-form least-squares radius for that labeling; iterate.
LabeledFit fit_labeling(const PeakList &measured, const std::vector<RootEntry> &table,
                        double radius_start)
{
    LabeledFit fit;
    fit.radius = radius_start;
    for (int iter = 0; iter < 6; ++iter)
    {
        std::vector<int> assignment(measured.entries.size(), -1);
        for (std::size_t i = 0; i < measured.entries.size(); ++i)
        {
            const auto &peak = measured.entries[i];
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < table.size(); ++j)
            {
                if (!pol_compatible(peak.polarization, table[j].pol))
                    continue;
                double lam = 2.0 * kPi * fit.radius / table[j].x;
                double err = std::abs(lam - peak.wavelength);
                if (err < best)
                {
                    best = err;
                    assignment[i] = int(j);
                }
            }
            if (assignment[i] < 0)
                throw ArgumentError("assign_peaks: no candidate mode for a peak");
        }
        // Closed-form radius: minimize sum (lambda_i - 2 pi R / x_i)^2.
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < measured.entries.size(); ++i)
        {
            double x = table[std::size_t(assignment[i])].x;
            num += measured.entries[i].wavelength / x;
            den += 1.0 / (x * x);
        }
        double radius = num / (2.0 * kPi * den);
        bool same = assignment == fit.assignment;
        fit.assignment = std::move(assignment);
        fit.radius = radius;
        if (same)
            break;
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < measured.entries.size(); ++i)
    {
        double lam = 2.0 * kPi * fit.radius / table[std::size_t(fit.assignment[i])].x;
        double d = lam - measured.entries[i].wavelength;
        ss += d * d;
    }
    fit.rms = std::sqrt(ss / double(measured.entries.size()));
    return fit;
}

} // namespace

PeakAssignment assign_peaks(const PeakList &measured, double radius_guess,
                            double index_guess)
{
    measured.validate();
    if (measured.entries.size() < 4)
        throw ArgumentError("assign_peaks: at least 4 peaks are required");
    double lambda_lo = measured.entries.front().wavelength;
    double lambda_hi = measured.entries.back().wavelength;
    Sphere guess{radius_guess, index_guess, 0.0, 1.0};
    if (lambda_hi - lambda_lo <
        2.0 * fsr_analytic(guess, 0.5 * (lambda_lo + lambda_hi)))
        throw ArgumentError("assign_peaks: peaks must span at least two FSRs");

    // Labeling keyed by (pol, n, l) per peak so equal labelings found at
    // different indices compare equal.
    using LabelKey = std::vector<std::tuple<int, int, int>>;
    std::map<LabelKey, double> labeling_best;

    struct Candidate
    {
        double rms = std::numeric_limits<double>::infinity();
        double radius = 0.0;
        double index = 0.0;
        std::vector<RootEntry> roots; // per-peak assigned roots
    };
    Candidate best;

    auto evaluate_index = [&](double index) {
        auto table = build_root_table(index, radius_guess, lambda_lo, lambda_hi);
        if (table.empty())
            return std::numeric_limits<double>::infinity();
        double local_best = std::numeric_limits<double>::infinity();
        for (int j = -55; j <= 55; ++j)
        {
            double r_start = radius_guess * (1.0 + 0.002 * double(j));
            LabeledFit fit;
            try
            {
                fit = fit_labeling(measured, table, r_start);
            }
            catch (const ArgumentError &)
            {
                continue;
            }
            if (std::abs(fit.radius - radius_guess) > 0.12 * radius_guess)
                continue;
            LabelKey key;
            key.reserve(fit.assignment.size());
            for (int idx : fit.assignment)
            {
                const auto &e = table[std::size_t(idx)];
                key.emplace_back(int(e.pol), e.n, e.l);
            }
            auto it = labeling_best.find(key);
            if (it == labeling_best.end() || fit.rms < it->second)
                labeling_best[key] = fit.rms;
            if (fit.rms < best.rms)
            {
                best.rms = fit.rms;
                best.radius = fit.radius;
                best.index = index;
                best.roots.clear();
                for (int idx : fit.assignment)
                    best.roots.push_back(table[std::size_t(idx)]);
            }
            local_best = std::min(local_best, fit.rms);
        }
        return local_best;
    };

    // Coarse grid over the +/-2% index band, then a golden-section refinement.
    double n_lo = index_guess * 0.975, n_hi = index_guess * 1.025;
    double coarse_best = std::numeric_limits<double>::infinity();
    double n_center = index_guess;
    for (int i = 0; i <= 10; ++i)
    {
        double n = n_lo + (n_hi - n_lo) * double(i) / 10.0;
        double rms = evaluate_index(n);
        if (rms < coarse_best)
        {
            coarse_best = rms;
            n_center = n;
        }
    }
    double a = std::max(n_lo, n_center - (n_hi - n_lo) / 10.0);
    double b = std::min(n_hi, n_center + (n_hi - n_lo) / 10.0);
    constexpr double kGolden = 0.6180339887498949;
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = evaluate_index(x1), f2 = evaluate_index(x2);
    for (int it = 0; it < 30 && (b - a) > 1e-6 * index_guess; ++it)
    {
        if (f1 < f2)
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = evaluate_index(x1);
        }
        else
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = evaluate_index(x2);
        }
    }

    if (!std::isfinite(best.rms))
        throw ConvergenceError("assign_peaks: no labeling converged", 0.0);

    // Ambiguity: a genuinely different labeling within 10% of the best rms.
    LabelKey best_key;
    for (const auto &e : best.roots)
        best_key.emplace_back(int(e.pol), e.n, e.l);
    for (const auto &[key, rms] : labeling_best)
    {
        if (key != best_key && rms <= 1.1 * best.rms)
            throw AmbiguityError("assign_peaks: two labelings fit comparably well");
    }

    PeakAssignment result;
    result.sphere = Sphere{best.radius, best.index, 0.0, 1.0};
    result.rms_residual = best.rms;
    for (const auto &e : best.roots)
        result.labels.push_back(ModeId{e.pol, e.n, e.l, e.l});
    return result;
}

} // namespace wgm::modes
