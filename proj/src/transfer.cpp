#include "wgm/transfer.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "wgm/errors.hpp"

namespace wgm::transfer
{

namespace
{
constexpr double kPi = std::numbers::pi;
}

void LossBudget::validate() const
{
    if (sigma_a_abs < 0.0 || sigma_d_sca < 0.0 || sigma_d_abs < 0.0)
        throw ArgumentError("loss-budget cross sections must be nonnegative");
    if (!(sigma_q > 0.0))
        throw ArgumentError("cavity-loss cross section must be positive");
}

void MultimodeConfig::validate() const
{
    if (n_cutoff_gain < 1 || lm_family_gain < 1 || fsr_count < 1 ||
        polarizations < 1 || polarizations > 2)
        throw ArgumentError("multimode config gains must be positive (<= 2 polarizations)");
}

double sigma_q(const modes::Sphere &sphere, const modes::Mode &mode)
{
    sphere.validate();
    if (!(mode.mode_volume > 0.0) || !(mode.q_total() > 0.0) || !(mode.lambda_res > 0.0))
        throw ArgumentError("sigma_q: mode needs V_eff, Q_total, and lambda");
    return 2.0 * kPi * sphere.index_real * mode.mode_volume /
           (mode.q_total() * mode.lambda_res);
}

double quotient(const LossBudget &budget)
{
    budget.validate();
    double denom = budget.sigma_a_abs + budget.sigma_d_sca + budget.sigma_d_abs +
                   budget.sigma_q;
    if (!(denom > 0.0))
        throw ArgumentError("quotient: zero total cross section");
    return budget.sigma_a_abs / denom;
}

double eta_single_mode(double beta_i, double quotient_value)
{
    if (beta_i < 0.0 || beta_i > 1.0 || quotient_value < 0.0 || quotient_value > 1.0)
        throw ArgumentError("eta_single_mode: factors must lie in [0, 1]");
    return beta_i * quotient_value;
}

double multimode_factor(const MultimodeConfig &config)
{
    config.validate();
    return double(config.n_cutoff_gain) * double(config.lm_family_gain) *
           double(config.fsr_count) * double(config.polarizations);
}

double free_space_absorption(double sigma_a, double r)
{
    if (!(sigma_a > 0.0) || !(r > 0.0))
        throw ArgumentError("free_space_absorption: sigma and r must be positive");
    return sigma_a / (4.0 * kPi * r * r);
}

double fret_efficiency(double r, double r0)
{
    if (r < 0.0 || !(r0 > 0.0))
        throw ArgumentError("fret_efficiency: require r >= 0 and r0 > 0");
    double q = r / r0;
    double q6 = q * q * q * q * q * q;
    return 1.0 / (1.0 + q6);
}

TransferBudget aggregate_eta(const modes::Sphere &sphere, const coupling::Emitter &donor,
                             const coupling::Emitter &acceptor, double q_loaded,
                             const AggregateOptions &options)
{
    sphere.validate();
    donor.validate();
    acceptor.validate();
    if (options.n_cutoff < 1 || options.lm_cutoff < 1 || options.polarizations < 1 ||
        options.polarizations > 2)
        throw ArgumentError("aggregate_eta: invalid aggregation cutoffs");

    TransferBudget out;
    auto fundamental = modes::nearest_mode(sphere, modes::Polarization::TE, 1,
                                           donor.lambda_center, q_loaded);

    out.beta0_fundamental = coupling::beta0(sphere, fundamental, donor.gap);
    out.gamma_cav = options.gamma_cav > 0.0
                        ? options.gamma_cav
                        : coupling::cavity_linewidth(fundamental.lambda_res,
                                                     fundamental.q_total());
    double beta_i = coupling::beta_broadband(out.beta0_fundamental, out.gamma_cav,
                                             donor.linewidth);
    out.sigma_q_fundamental = sigma_q(sphere, fundamental);
    LossBudget budget{acceptor.sigma_abs_total(), options.sigma_d_sca,
                      options.sigma_d_abs, out.sigma_q_fundamental};
    double q_fund = quotient(budget);
    out.eta_fundamental = eta_single_mode(beta_i, q_fund);

    int fsr_count = options.fsr_count_override;
    if (fsr_count <= 0)
    {
        double fsr = modes::fsr_analytic(sphere, donor.lambda_center);
        fsr_count = std::max(1, int(std::lround(options.spectrum_span / fsr)));
    }
    MultimodeConfig counting{options.n_cutoff, options.lm_cutoff, fsr_count,
                             options.polarizations};
    out.multimode_factor = multimode_factor(counting);
    out.eta_total = out.eta_fundamental * out.multimode_factor;

    out.per_mode.push_back({fundamental.id, fundamental.lambda_res, beta_i, q_fund,
                            out.eta_fundamental, 1.0});

    if (options.explicit_sum)
    {
        out.per_mode.clear();
        double eta_sum = 0.0;
        std::vector<modes::Polarization> pols{modes::Polarization::TE};
        if (options.polarizations == 2)
            pols.push_back(modes::Polarization::TM);
        for (auto pol : pols)
        {
            for (int n = 1; n <= options.n_cutoff; ++n)
            {
                auto mode = modes::nearest_mode(sphere, pol, n, donor.lambda_center,
                                                q_loaded);
                int l = mode.id.l;
                double ip2_equator = modes::detail::polar_second_moment(l, l);
                for (int p = 0; p < options.lm_cutoff && l - p >= 1; ++p)
                {
                    modes::Mode variant = mode;
                    variant.id.m = l - p;
                    variant.mode_volume =
                        mode.mode_volume * ip2_equator /
                        modes::detail::polar_second_moment(l, l - p);
                    double b0 = coupling::beta0(sphere, variant, donor.gap);
                    double bi = coupling::beta_broadband(b0, out.gamma_cav,
                                                         donor.linewidth);
                    LossBudget bb{acceptor.sigma_abs_total(), options.sigma_d_sca,
                                  options.sigma_d_abs, sigma_q(sphere, variant)};
                    double qv = quotient(bb);
                    double eta = eta_single_mode(bi, qv);
                    double degeneracy = 2.0 * double(fsr_count); // +/- m, per FSR
                    eta_sum += eta * degeneracy;
                    out.per_mode.push_back({variant.id, variant.lambda_res, bi, qv,
                                            eta, degeneracy});
                }
            }
        }
        out.multimode_factor_explicit = eta_sum / out.eta_fundamental;
    }

    out.baseline_free_space =
        free_space_absorption(acceptor.sigma_abs_molecule, options.baseline_distance);
    out.baseline_fret_r0_ratio =
        fret_efficiency(options.baseline_distance, options.fret_r0);
    out.enhancement = out.eta_total / out.baseline_free_space;
    return out;
}

MonteCarloResult monte_carlo_quotient(const LossBudget &budget, std::int64_t trials,
                                      std::uint64_t seed)
{
    if (budget.sigma_a_abs < 0.0 || budget.sigma_d_sca < 0.0 ||
        budget.sigma_d_abs < 0.0 || budget.sigma_q < 0.0)
        throw ArgumentError("monte_carlo_quotient: cross sections must be >= 0");
    if (!(budget.sigma_a_abs + budget.sigma_d_sca + budget.sigma_d_abs +
              budget.sigma_q >
          0.0))
        throw ArgumentError("monte_carlo_quotient: total cross section must be > 0");
    if (trials < 10000)
        throw ArgumentError("monte_carlo_quotient: at least 1e4 trials required");

    // Scale the per-pass probabilities so absorption + loss sum to 0.1.
    double total = budget.sigma_a_abs + budget.sigma_d_sca + budget.sigma_d_abs +
                   budget.sigma_q;
    double sigma_ref = total / 0.1;
    double p_absorb = budget.sigma_a_abs / sigma_ref;
    constexpr double kPerPass = 0.1;

    constexpr std::int64_t kChunk = 1 << 20;
    std::int64_t absorbed = 0;
    for (std::int64_t base = 0, chunk_index = 0; base < trials;
         base += kChunk, ++chunk_index)
    {
        std::int64_t count = std::min(kChunk, trials - base);
        std::mt19937_64 rng(seed ^
                            (0x9E3779B97F4A7C15ULL * std::uint64_t(chunk_index + 1)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (std::int64_t t = 0; t < count; ++t)
        {
            for (;;)
            {
                double u = uni(rng);
                if (u < p_absorb)
                {
                    ++absorbed;
                    break;
                }
                if (u < kPerPass)
                    break; // lost to another channel
            }
        }
    }
    MonteCarloResult result;
    result.estimate = double(absorbed) / double(trials);
    result.std_error =
        std::sqrt(std::max(0.0, result.estimate * (1.0 - result.estimate)) /
                  double(trials));
    return result;
}

} // namespace wgm::transfer
