#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wgm/coupling.hpp"
#include "wgm/modes.hpp"
#include "wgm/transfer.hpp"

namespace wgm::io
{

// Shortest decimal form of v that parses back to the same double; '.' decimal
// separator regardless of locale. Keeps CSV outputs byte-reproducible.
std::string format_number(double v);

// -------- CSV --------

// Header: pol,n,l,m,lambda_nm,q_rad,v_eff_um3,surface_rel,decay_nm
void write_mode_table(const std::string &path, const std::vector<modes::Mode> &table);

// Header: wavelength_nm,polarization,height
void write_peak_list(const std::string &path, const modes::PeakList &peaks);
modes::PeakList read_peak_list(const std::string &path);

// Two-column CSV with the given header line (e.g. "gap_nm,beta0").
void write_xy(const std::string &path, const std::string &header,
              const std::vector<std::pair<double, double>> &rows);

// Header: theta_deg,intensity; theta on disk is degrees from the equator,
// in memory radians from the pole.
coupling::AngularScan read_angular_scan(const std::string &path);
void write_angular_curve(const std::string &path,
                         const std::vector<std::pair<double, double>> &curve);

// Header: pol,n,l,m,lambda_nm,beta_i,quotient,eta_i,degeneracy
void write_per_mode(const std::string &path,
                    const std::vector<transfer::PerModeRow> &rows);

// -------- Config --------

// Flat key = value document, '#' comments; values in the units given by the
// key suffixes (nm, um, cm2, deg). Defaults describe the 35 um scenario.
struct RunConfig
{
    double sphere_diameter_um = 35.0;
    double sphere_index = 1.45724;
    double sphere_index_imag = 0.0;
    double q_loaded = 3e7;

    double donor_lambda_nm = 670.0;
    double donor_linewidth_nm = 20.0;
    double donor_sigma_cm2 = 1e-16;
    long donor_molecules = 1;
    double donor_gap_nm = 50.0;
    double donor_theta_deg = 0.0;

    double acceptor_lambda_nm = 670.0;
    double acceptor_linewidth_nm = 20.0;
    double acceptor_sigma_cm2 = 1e-16;
    long acceptor_molecules = 1;
    double acceptor_gap_nm = 0.0;
    double acceptor_theta_deg = 0.0;

    double window_min_nm = 660.0;
    double window_max_nm = 680.0;

    int aggregation_n_cutoff = 10;
    int aggregation_lm_cutoff = 40;
    int aggregation_fsr_count = 0; // 0 -> derived from the spectrum span
    double aggregation_spectrum_span_nm = 46.0;
    int aggregation_polarizations = 2;
    bool aggregation_explicit_sum = false;

    double gamma_cav_nm = 6e-5; // 0 -> computed as lambda/Q
    double sigma_d_sca_cm2 = 0.0;
    double sigma_d_abs_cm2 = 0.0;

    double baseline_distance_um = 50.0;
    double baseline_fret_r0_nm = 10.0;

    long mc_trials = 10000000;
    unsigned long long mc_seed = 12345;

    std::string output_dir = ".";

    // SI-converted views.
    modes::Sphere sphere() const;
    coupling::Emitter donor() const;
    coupling::Emitter acceptor() const;
    transfer::AggregateOptions aggregate_options() const;
    transfer::LossBudget loss_budget() const;
};

RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::string &path);
std::string serialize_config(const RunConfig &config);

// -------- Report --------

// Plain-text key-value tree; cross sections in cm^2 (with SI fields alongside).
std::string render_report(const RunConfig &config, const transfer::TransferBudget &budget);

} // namespace wgm::io
