#pragma once

#include <cstdint>
#include <vector>

#include "wgm/coupling.hpp"
#include "wgm/modes.hpp"

namespace wgm::transfer
{

struct LossBudget
{
    double sigma_a_abs = 0.0; // acceptor absorption, m^2
    double sigma_d_sca = 0.0; // donor scattering loss, m^2
    double sigma_d_abs = 0.0; // donor self-absorption, m^2
    double sigma_q = 0.0;     // cavity-loss equivalent cross section, m^2

    void validate() const;
};

struct PerModeRow
{
    modes::ModeId id;
    double lambda_res = 0.0;
    double beta_i = 0.0;
    double quotient = 0.0;
    double eta_i = 0.0; // beta_i * quotient, exact identity
    double degeneracy = 1.0;
};

struct TransferBudget
{
    std::vector<PerModeRow> per_mode;
    double beta0_fundamental = 0.0;
    double gamma_cav = 0.0;
    double sigma_q_fundamental = 0.0;
    double eta_fundamental = 0.0;
    double multimode_factor = 0.0;
    double multimode_factor_explicit = 0.0; // 0 when the explicit sum is skipped
    double eta_total = 0.0;
    double baseline_free_space = 0.0;
    double baseline_fret_r0_ratio = 0.0;
    double enhancement = 0.0; // eta_total / baseline_free_space
};

// Equivalent cavity-loss cross section: sigma_Q = 2 pi N V_eff / (Q_total lambda).
double sigma_q(const modes::Sphere &sphere, const modes::Mode &mode);

// Probability that a cavity photon is absorbed by the acceptor before any
// loss channel claims it.
double quotient(const LossBudget &budget);

double eta_single_mode(double beta_i, double quotient_value);

struct MultimodeConfig
{
    int n_cutoff_gain = 10;  // radial orders contributing before Q_rad collapses
    int lm_family_gain = 40; // polar (l - |m|) families carrying the signal
    int fsr_count = 20;      // spectral span of the donor in FSR units
    int polarizations = 2;

    void validate() const;
};

// Counting path: plain product of the four gains.
double multimode_factor(const MultimodeConfig &config);

struct AggregateOptions
{
    double gamma_cav = 0.0;        // 0 -> computed as lambda / Q_total
    double spectrum_span = 46e-9;  // donor emission span, meters
    int n_cutoff = 10;
    int lm_cutoff = 40;
    int polarizations = 2;
    int fsr_count_override = 0;    // 0 -> round(spectrum_span / FSR)
    double sigma_d_sca = 0.0;
    double sigma_d_abs = 0.0;
    double baseline_distance = 50e-6;
    double fret_r0 = 10e-9;
    bool explicit_sum = false;     // also evaluate the enumerated-mode path
};

// Full evaluation chain for the donor/acceptor pair on one sphere.
TransferBudget aggregate_eta(const modes::Sphere &sphere, const coupling::Emitter &donor,
                             const coupling::Emitter &acceptor, double q_loaded,
                             const AggregateOptions &options = {});

// Efficiency of one emitter absorbing a photon radiated isotropically by the
// other at distance r: sigma / (4 pi r^2).
double free_space_absorption(double sigma_a, double r);

// FRET efficiency 1 / (1 + (r/r0)^6).
double fret_efficiency(double r, double r0);

struct MonteCarloResult
{
    double estimate = 0.0;
    double std_error = 0.0;
};

// Stochastic pass-by-pass competition oracle for `quotient`. Deterministic for
// identical (seed, trials); trials are partitioned with derived seeds.
MonteCarloResult monte_carlo_quotient(const LossBudget &budget, std::int64_t trials,
                                      std::uint64_t seed);

} // namespace wgm::transfer
