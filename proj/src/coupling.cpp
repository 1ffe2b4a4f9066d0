#include "wgm/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wgm/errors.hpp"

namespace wgm::coupling
{

namespace num = wgm::numerics;

namespace
{
constexpr double kPi = std::numbers::pi;

void require_complete(const modes::Mode &mode)
{
    if (!(mode.lambda_res > 0.0) || !(mode.mode_volume > 0.0) ||
        !(mode.decay_length > 0.0) || !(mode.q_total() > 0.0) ||
        !(mode.surface_intensity_rel > 0.0) || mode.surface_intensity_rel > 1.0)
        throw ArgumentError("mode descriptor incomplete (lambda, Q, V, decay, surface)");
}
} // namespace

void Emitter::validate() const
{
    if (!(lambda_center > 0.0) || !(linewidth > 0.0))
        throw ArgumentError("emitter wavelength and linewidth must be positive");
    if (!(sigma_abs_molecule > 0.0))
        throw ArgumentError("per-molecule cross section must be positive");
    if (molecule_count < 1)
        throw ArgumentError("molecule count must be >= 1");
    if (gap < 0.0)
        throw ArgumentError("gap must be nonnegative");
}

void AngularScan::validate() const
{
    if (samples.size() < 10)
        throw ArgumentError("angular scan needs at least 10 samples");
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        if (samples[i].second < 0.0)
            throw ArgumentError("angular scan intensities must be nonnegative");
        if (i > 0 && !(samples[i].first > samples[i - 1].first))
            throw ArgumentError("angular scan angles must be strictly increasing");
    }
}

double beta0(const modes::Sphere &sphere, const modes::Mode &mode, double gap)
{
    sphere.validate();
    require_complete(mode);
    if (gap < 0.0)
        throw ArgumentError("beta0: gap must be nonnegative");
    double lambda = mode.lambda_res; // emitter in air at the surface, N_host = 1
    double u = mode.surface_intensity_rel * std::exp(-2.0 * gap / mode.decay_length);
    double purcell = (3.0 / (4.0 * kPi * kPi)) * lambda * lambda * lambda *
                     (mode.q_total() / mode.mode_volume) * u / 3.0;
    return purcell / (1.0 + purcell);
}

double beta_broadband(double beta0_value, double gamma_cav, double gamma_b)
{
    if (!(gamma_cav > 0.0) || !(gamma_b > 0.0))
        throw ArgumentError("beta_broadband: linewidths must be positive");
    return beta0_value * std::min(1.0, gamma_cav / gamma_b);
}

double cavity_linewidth(double lambda, double q_total)
{
    if (!(q_total > 0.0))
        throw ArgumentError("cavity_linewidth: Q must be positive");
    return lambda / q_total;
}

std::vector<std::pair<double, double>> distance_scan(const modes::Sphere &sphere,
                                                     const modes::Mode &mode,
                                                     const std::vector<double> &gaps)
{
    sphere.validate();
    require_complete(mode);
    if (gaps.empty())
        return {};
    for (std::size_t i = 0; i < gaps.size(); ++i)
    {
        if (gaps[i] < 0.0)
            throw ArgumentError("distance_scan: gaps must be nonnegative");
        if (i > 0 && !(gaps[i] > gaps[i - 1]))
            throw ArgumentError("distance_scan: gaps must be increasing");
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(gaps.size());
    double ref = std::exp(-2.0 * gaps.front() / mode.decay_length);
    for (double gap : gaps)
        out.emplace_back(gap, std::exp(-2.0 * gap / mode.decay_length) / ref);
    return out;
}

numerics::Matrix angular_model(const modes::Sphere &sphere, int l, int K,
                               const std::vector<double> &thetas)
{
    sphere.validate();
    if (K < 1 || K > l)
        throw ArgumentError("angular_model: require 1 <= K <= l");
    if (thetas.empty())
        throw ArgumentError("angular_model: no sample angles");
    constexpr double kBand = 20.0 * kPi / 180.0 + 1e-9;
    for (double theta : thetas)
        if (std::abs(theta - kPi / 2.0) > kBand)
            throw ArgumentError("angular_model: angles must stay within 20 deg of the equator");

    numerics::Matrix design(thetas.size(), std::size_t(K));
    for (int p = 0; p < K; ++p)
    {
        double colmax = 0.0;
        for (std::size_t i = 0; i < thetas.size(); ++i)
        {
            double v = num::normalized_assoc_legendre_sq(l, l - p, thetas[i]);
            design(i, std::size_t(p)) = v;
            colmax = std::max(colmax, v);
        }
        if (!(colmax > 0.0))
            throw ArgumentError("angular_model: zero column in design matrix");
        for (std::size_t i = 0; i < thetas.size(); ++i)
            design(i, std::size_t(p)) /= colmax;
    }
    return design;
}

AngularFit fit_angular_scan(const AngularScan &scan, const modes::Sphere &sphere,
                            int l, int K)
{
    scan.validate();
    std::vector<double> thetas, target;
    thetas.reserve(scan.samples.size());
    target.reserve(scan.samples.size());
    for (const auto &[theta, intensity] : scan.samples)
    {
        thetas.push_back(theta);
        target.push_back(intensity);
    }
    auto design = angular_model(sphere, l, K, thetas);
    auto weights = num::nnls(design, target);

    AngularFit fit;
    fit.weights = weights;
    double ss = 0.0;
    for (std::size_t i = 0; i < thetas.size(); ++i)
    {
        double model = 0.0;
        for (std::size_t p = 0; p < weights.size(); ++p)
            model += design(i, p) * weights[p];
        double d = model - target[i];
        ss += d * d;
    }
    fit.residual_rms = std::sqrt(ss / double(thetas.size()));

    // Dense curve over the scan range, using the same per-column scaling as
    // the design matrix (recovered from the sample grid).
    std::vector<double> colmax(std::size_t(K), 0.0);
    for (int p = 0; p < K; ++p)
        for (double theta : thetas)
            colmax[std::size_t(p)] = std::max(
                colmax[std::size_t(p)], num::normalized_assoc_legendre_sq(l, l - p, theta));
    constexpr int kDense = 512;
    double lo = thetas.front(), hi = thetas.back();
    for (int i = 0; i <= kDense; ++i)
    {
        double theta = lo + (hi - lo) * double(i) / double(kDense);
        double v = 0.0;
        for (int p = 0; p < K; ++p)
            v += fit.weights[std::size_t(p)] *
                 num::normalized_assoc_legendre_sq(l, l - p, theta) / colmax[std::size_t(p)];
        fit.fitted_curve.emplace_back(theta, v);
    }
    return fit;
}

} // namespace wgm::coupling
