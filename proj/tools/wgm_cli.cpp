// Command-line front end: resonance tables, synthetic spectra, peak
// assignment, coupling sweeps, the full transfer budget, baselines, and the
// Monte Carlo cross-check. Exit codes: 0 success, 2 input/validation error,
// 3 numerical non-convergence.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wgm/coupling.hpp"
#include "wgm/errors.hpp"
#include "wgm/io.hpp"
#include "wgm/modes.hpp"
#include "wgm/transfer.hpp"

namespace
{

namespace fs = std::filesystem;
using namespace wgm;

constexpr double kNm = 1e-9;
constexpr double kUm = 1e-6;
constexpr double kCm2 = 1e-4;

// Deletes every registered output unless commit() is called (partial outputs
// must not survive a failed run).
class OutputGuard
{
  public:
    std::string track(const std::string &path)
    {
        paths_.push_back(path);
        return path;
    }
    void commit() { paths_.clear(); }
    ~OutputGuard()
    {
        for (const auto &p : paths_)
        {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

  private:
    std::vector<std::string> paths_;
};

std::string out_path(const std::string &dir, const std::string &name)
{
    if (fs::path(name).is_absolute())
        return name;
    return (fs::path(dir) / name).string();
}

struct ModesArgs
{
    double diameter_um = 96.0;
    double index = 1.45724;
    double index_imag = 0.0;
    double lmin_nm = 606.0;
    double lmax_nm = 612.0;
    int nmax = 2;
    double q_loaded = 0.0;
    std::string pol = "both";
    std::string out = "modes.csv";
};

void add_sphere_flags(CLI::App *cmd, ModesArgs &args)
{
    cmd->add_option("--diameter-um", args.diameter_um, "sphere diameter, um");
    cmd->add_option("--index", args.index, "refractive index (real part)");
    cmd->add_option("--index-imag", args.index_imag, "refractive index (imaginary part)");
}

std::vector<modes::Mode> collect_modes(const ModesArgs &args)
{
    modes::Sphere sphere{0.5 * args.diameter_um * kUm, args.index, args.index_imag, 1.0};
    std::vector<modes::Mode> table;
    auto gather = [&](modes::Polarization pol) {
        auto found = modes::find_resonances(sphere, pol, args.nmax, args.lmin_nm * kNm,
                                            args.lmax_nm * kNm, args.q_loaded);
        table.insert(table.end(), found.begin(), found.end());
    };
    if (args.pol == "both" || args.pol == "TE")
        gather(modes::Polarization::TE);
    if (args.pol == "both" || args.pol == "TM")
        gather(modes::Polarization::TM);
    if (args.pol != "both" && args.pol != "TE" && args.pol != "TM")
        throw ArgumentError("--pol must be TE, TM, or both");
    std::sort(table.begin(), table.end(), [](const auto &a, const auto &b) {
        return a.lambda_res < b.lambda_res;
    });
    return table;
}

std::vector<double> gap_grid(double max_nm, double step_nm)
{
    if (!(max_nm > 0.0) || !(step_nm > 0.0))
        throw ArgumentError("gap sweep bounds must be positive");
    std::vector<double> gaps;
    for (double g = 0.0; g <= max_nm + 1e-9; g += step_nm)
        gaps.push_back(g * kNm);
    return gaps;
}

int run(int argc, char **argv)
{
    CLI::App app{"whispering-gallery-mode microsphere toolkit"};
    app.require_subcommand(0, 1);
    app.fallthrough(); // let subcommands use the app-wide --output-dir

    std::string default_dir = ".";
    if (const char *env = std::getenv("WGM_OUTPUT_DIR"); env && *env)
        default_dir = env;
    std::string output_dir = default_dir;
    app.add_option("--output-dir", output_dir, "directory for output files");

    bool print_default = false;
    app.add_flag("--print-default-config", print_default,
                 "print the default 35 um configuration and exit");

    // ---- modes / spectrum ----
    ModesArgs modes_args;
    auto *cmd_modes = app.add_subcommand("modes", "resonance table for a window");
    add_sphere_flags(cmd_modes, modes_args);
    cmd_modes->add_option("--lmin-nm", modes_args.lmin_nm, "window lower edge, nm");
    cmd_modes->add_option("--lmax-nm", modes_args.lmax_nm, "window upper edge, nm");
    cmd_modes->add_option("--nmax", modes_args.nmax, "highest radial order");
    cmd_modes->add_option("--q-loaded", modes_args.q_loaded, "measured loaded Q (0 = none)");
    cmd_modes->add_option("--pol", modes_args.pol, "TE, TM, or both");
    cmd_modes->add_option("--out", modes_args.out, "mode table CSV");

    ModesArgs spectrum_args;
    spectrum_args.out = "fig1b.csv";
    auto *cmd_spectrum = app.add_subcommand("spectrum", "synthetic labeled peak list");
    add_sphere_flags(cmd_spectrum, spectrum_args);
    cmd_spectrum->add_option("--lmin-nm", spectrum_args.lmin_nm, "window lower edge, nm");
    cmd_spectrum->add_option("--lmax-nm", spectrum_args.lmax_nm, "window upper edge, nm");
    cmd_spectrum->add_option("--nmax", spectrum_args.nmax, "highest radial order");
    cmd_spectrum->add_option("--q-loaded", spectrum_args.q_loaded, "measured loaded Q");
    cmd_spectrum->add_option("--out", spectrum_args.out, "peak list CSV");

    // ---- assign ----
    std::string assign_peaks_file, assign_out = "assignment.csv";
    double assign_radius_um = 48.0, assign_index = 1.45724;
    auto *cmd_assign = app.add_subcommand("assign", "fit (R, N) to measured peaks");
    cmd_assign->add_option("--peaks", assign_peaks_file, "measured peak list CSV")
        ->required();
    cmd_assign->add_option("--radius-guess-um", assign_radius_um, "radius guess, um")
        ->required();
    cmd_assign->add_option("--index-guess", assign_index, "index guess")->required();
    cmd_assign->add_option("--out", assign_out, "labeled assignment CSV");

    // ---- beta0 / distance-scan ----
    ModesArgs beta_args;
    beta_args.diameter_um = 35.0;
    double beta_lambda_nm = 670.0, beta_q_loaded = 3e7;
    double gap_max_nm = 500.0, gap_step_nm = 5.0;
    std::string beta_out = "fig3d.csv";
    auto *cmd_beta = app.add_subcommand("beta0", "single-mode emission fraction vs gap");
    add_sphere_flags(cmd_beta, beta_args);
    cmd_beta->add_option("--lambda-nm", beta_lambda_nm, "mode wavelength, nm");
    cmd_beta->add_option("--q-loaded", beta_q_loaded, "loaded Q");
    cmd_beta->add_option("--gap-max-nm", gap_max_nm, "sweep end, nm");
    cmd_beta->add_option("--gap-step-nm", gap_step_nm, "sweep step, nm");
    cmd_beta->add_option("--out", beta_out, "sweep CSV (gap_nm,beta0)");

    ModesArgs dist_args;
    dist_args.diameter_um = 96.0;
    double dist_lambda_nm = 610.0, dist_max_nm = 500.0, dist_step_nm = 5.0;
    std::string dist_out = "fig2a.csv";
    auto *cmd_dist = app.add_subcommand("distance-scan", "evanescent signal vs gap");
    add_sphere_flags(cmd_dist, dist_args);
    cmd_dist->add_option("--lambda-nm", dist_lambda_nm, "mode wavelength, nm");
    cmd_dist->add_option("--gap-max-nm", dist_max_nm, "sweep end, nm");
    cmd_dist->add_option("--gap-step-nm", dist_step_nm, "sweep step, nm");
    cmd_dist->add_option("--out", dist_out, "scan CSV (gap_nm,signal_rel)");

    // ---- angular-fit ----
    ModesArgs ang_args;
    ang_args.diameter_um = 96.0;
    std::string ang_scan_file, ang_out = "fig2b.csv", ang_weights_out;
    double ang_lambda_nm = 610.0;
    int ang_k = 10;
    auto *cmd_ang = app.add_subcommand("angular-fit", "NNLS fit of a polar scan");
    add_sphere_flags(cmd_ang, ang_args);
    cmd_ang->add_option("--scan", ang_scan_file, "scan CSV (theta_deg,intensity)")
        ->required();
    cmd_ang->add_option("--lambda-nm", ang_lambda_nm, "detection wavelength, nm");
    cmd_ang->add_option("--k", ang_k, "number of polar profiles in the basis");
    cmd_ang->add_option("--out", ang_out, "fitted curve CSV");
    cmd_ang->add_option("--weights-out", ang_weights_out, "optional weight CSV");

    // ---- transfer ----
    std::string transfer_config, transfer_report = "report.txt",
                transfer_per_mode = "per_mode.csv";
    auto *cmd_transfer = app.add_subcommand("transfer", "full photon-transfer budget");
    cmd_transfer->add_option("--config", transfer_config, "run configuration file")
        ->required();
    cmd_transfer->add_option("--report", transfer_report, "report output path");
    cmd_transfer->add_option("--per-mode-out", transfer_per_mode, "per-mode CSV");

    // ---- baseline ----
    double base_sigma_cm2 = 1e-16, base_r_um = 50.0;
    double fret_r_nm = -1.0, fret_r0_nm = 10.0;
    auto *cmd_base = app.add_subcommand("baseline", "free-space and FRET baselines");
    cmd_base->add_option("--sigma-cm2", base_sigma_cm2, "absorption cross section, cm^2");
    cmd_base->add_option("--r-um", base_r_um, "emitter separation, um");
    cmd_base->add_option("--fret-r-nm", fret_r_nm, "also print FRET efficiency at r, nm");
    cmd_base->add_option("--fret-r0-nm", fret_r0_nm, "FRET radius r0, nm");

    // ---- mc-check ----
    double mc_sigma_a = 1e-16, mc_sigma_q = 2e-12, mc_sigma_dsca = 0.0, mc_sigma_dabs = 0.0;
    std::int64_t mc_trials = 10000000;
    std::uint64_t mc_seed = 12345;
    auto *cmd_mc = app.add_subcommand("mc-check", "Monte Carlo quotient cross-check");
    cmd_mc->add_option("--sigma-a-cm2", mc_sigma_a, "acceptor absorption, cm^2");
    cmd_mc->add_option("--sigma-q-cm2", mc_sigma_q, "cavity-loss cross section, cm^2");
    cmd_mc->add_option("--sigma-d-sca-cm2", mc_sigma_dsca, "donor scattering, cm^2");
    cmd_mc->add_option("--sigma-d-abs-cm2", mc_sigma_dabs, "donor self-absorption, cm^2");
    cmd_mc->add_option("--trials", mc_trials, "number of trials");
    cmd_mc->add_option("--seed", mc_seed, "RNG seed");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        if (e.get_exit_code() == 0)
        {
            app.exit(e);
            return 0;
        }
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    if (print_default)
    {
        std::cout << io::serialize_config(io::RunConfig{});
        return 0;
    }
    if (app.get_subcommands().empty())
    {
        std::cerr << app.help() << "\n";
        return 2;
    }

    OutputGuard guard;

    if (cmd_modes->parsed())
    {
        auto table = collect_modes(modes_args);
        io::write_mode_table(guard.track(out_path(output_dir, modes_args.out)), table);
        double spacing = 0.0;
        int pairs = 0;
        for (std::size_t i = 1; i < table.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (table[i].id.polarization == table[j].id.polarization &&
                    table[i].id.n == table[j].id.n &&
                    table[i].id.l + 1 == table[j].id.l)
                {
                    spacing += table[i].lambda_res - table[j].lambda_res;
                    ++pairs;
                }
        std::printf("modes: %zu resonances; mean same-family spacing %s nm\n",
                    table.size(),
                    pairs ? io::format_number(spacing / pairs / kNm).c_str() : "n/a");
    }
    else if (cmd_spectrum->parsed())
    {
        modes::Sphere sphere{0.5 * spectrum_args.diameter_um * kUm, spectrum_args.index,
                             spectrum_args.index_imag, 1.0};
        auto peaks = modes::synthesize_spectrum(sphere, spectrum_args.lmin_nm * kNm,
                                                spectrum_args.lmax_nm * kNm,
                                                spectrum_args.nmax,
                                                spectrum_args.q_loaded);
        io::write_peak_list(guard.track(out_path(output_dir, spectrum_args.out)), peaks);
        std::printf("spectrum: %zu labeled peaks in [%s, %s] nm\n", peaks.entries.size(),
                    io::format_number(spectrum_args.lmin_nm).c_str(),
                    io::format_number(spectrum_args.lmax_nm).c_str());
    }
    else if (cmd_assign->parsed())
    {
        auto peaks = io::read_peak_list(assign_peaks_file);
        auto fit = modes::assign_peaks(peaks, assign_radius_um * kUm, assign_index);
        std::ofstream out(guard.track(out_path(output_dir, assign_out)),
                          std::ios::binary);
        out << "wavelength_nm,pol,n,l,m\n";
        for (std::size_t i = 0; i < peaks.entries.size(); ++i)
            out << io::format_number(peaks.entries[i].wavelength / kNm) << ','
                << modes::to_string(fit.labels[i].polarization) << ','
                << fit.labels[i].n << ',' << fit.labels[i].l << ',' << fit.labels[i].m
                << '\n';
        std::printf("assign: R = %s um, N = %s, rms = %s pm\n",
                    io::format_number(fit.sphere.radius / kUm).c_str(),
                    io::format_number(fit.sphere.index_real).c_str(),
                    io::format_number(fit.rms_residual / 1e-12).c_str());
    }
    else if (cmd_beta->parsed())
    {
        modes::Sphere sphere{0.5 * beta_args.diameter_um * kUm, beta_args.index,
                             beta_args.index_imag, 1.0};
        auto mode = modes::nearest_mode(sphere, modes::Polarization::TE, 1,
                                        beta_lambda_nm * kNm, beta_q_loaded);
        std::vector<std::pair<double, double>> rows;
        for (double gap : gap_grid(gap_max_nm, gap_step_nm))
            rows.emplace_back(gap / kNm, coupling::beta0(sphere, mode, gap));
        io::write_xy(guard.track(out_path(output_dir, beta_out)), "gap_nm,beta0", rows);
        std::printf("beta0: fundamental l = %d at %s nm; beta0(50 nm) = %s\n",
                    mode.id.l, io::format_number(mode.lambda_res / kNm).c_str(),
                    io::format_number(coupling::beta0(sphere, mode, 50e-9)).c_str());
    }
    else if (cmd_dist->parsed())
    {
        modes::Sphere sphere{0.5 * dist_args.diameter_um * kUm, dist_args.index,
                             dist_args.index_imag, 1.0};
        auto mode = modes::nearest_mode(sphere, modes::Polarization::TE, 1,
                                        dist_lambda_nm * kNm);
        auto scan = coupling::distance_scan(sphere, mode,
                                            gap_grid(dist_max_nm, dist_step_nm));
        std::vector<std::pair<double, double>> rows;
        for (const auto &[gap, signal] : scan)
            rows.emplace_back(gap / kNm, signal);
        io::write_xy(guard.track(out_path(output_dir, dist_out)), "gap_nm,signal_rel",
                     rows);
        std::printf("distance-scan: decay length %s nm\n",
                    io::format_number(mode.decay_length / kNm).c_str());
    }
    else if (cmd_ang->parsed())
    {
        modes::Sphere sphere{0.5 * ang_args.diameter_um * kUm, ang_args.index,
                             ang_args.index_imag, 1.0};
        auto scan = io::read_angular_scan(ang_scan_file);
        int l = modes::fundamental_l(sphere, modes::Polarization::TE,
                                     ang_lambda_nm * kNm);
        auto fit = coupling::fit_angular_scan(scan, sphere, l, ang_k);
        io::write_angular_curve(guard.track(out_path(output_dir, ang_out)),
                                fit.fitted_curve);
        if (!ang_weights_out.empty())
        {
            std::ofstream out(guard.track(out_path(output_dir, ang_weights_out)),
                              std::ios::binary);
            out << "p,weight\n";
            for (std::size_t p = 0; p < fit.weights.size(); ++p)
                out << p << ',' << io::format_number(fit.weights[p]) << '\n';
        }
        std::printf("angular-fit: l = %d, rms = %s\n", l,
                    io::format_number(fit.residual_rms).c_str());
    }
    else if (cmd_transfer->parsed())
    {
        auto config = io::load_config(transfer_config);
        if (config.output_dir != "." && output_dir == default_dir)
            output_dir = config.output_dir;
        auto budget = transfer::aggregate_eta(config.sphere(), config.donor(),
                                              config.acceptor(), config.q_loaded,
                                              config.aggregate_options());
        std::ofstream out(guard.track(out_path(output_dir, transfer_report)),
                          std::ios::binary);
        out << io::render_report(config, budget);
        io::write_per_mode(guard.track(out_path(output_dir, transfer_per_mode)),
                           budget.per_mode);
        std::printf("transfer: eta_total = %s, enhancement = %s\n",
                    io::format_number(budget.eta_total).c_str(),
                    io::format_number(budget.enhancement).c_str());
    }
    else if (cmd_base->parsed())
    {
        double p = transfer::free_space_absorption(base_sigma_cm2 * kCm2,
                                                   base_r_um * kUm);
        std::printf("baseline: free-space absorption probability %s at %s um\n",
                    io::format_number(p).c_str(), io::format_number(base_r_um).c_str());
        if (fret_r_nm >= 0.0)
            std::printf("baseline: FRET efficiency %s at r = %s nm (r0 = %s nm)\n",
                        io::format_number(transfer::fret_efficiency(
                                              fret_r_nm * kNm, fret_r0_nm * kNm))
                            .c_str(),
                        io::format_number(fret_r_nm).c_str(),
                        io::format_number(fret_r0_nm).c_str());
    }
    else if (cmd_mc->parsed())
    {
        transfer::LossBudget budget{mc_sigma_a * kCm2, mc_sigma_dsca * kCm2,
                                    mc_sigma_dabs * kCm2, mc_sigma_q * kCm2};
        auto mc = transfer::monte_carlo_quotient(budget, mc_trials, mc_seed);
        double analytic = transfer::quotient(budget);
        std::printf("mc-check: estimate %s +/- %s (analytic %s)\n",
                    io::format_number(mc.estimate).c_str(),
                    io::format_number(mc.std_error).c_str(),
                    io::format_number(analytic).c_str());
    }

    guard.commit();
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    try
    {
        return run(argc, argv);
    }
    catch (const ArgumentError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    catch (const ConvergenceError &e)
    {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    catch (const std::exception &e) // RangeError, BracketError, AmbiguityError, ...
    {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
}
