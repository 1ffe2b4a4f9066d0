// Acceptance gate: one line per criterion, PASS or FAIL, nonzero exit on any
// failure. Tolerances are pinned here and nowhere else.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <unistd.h>
#include <vector>

#include "wgm/coupling.hpp"
#include "wgm/io.hpp"
#include "wgm/modes.hpp"
#include "wgm/numerics.hpp"
#include "wgm/transfer.hpp"

using namespace wgm;

namespace
{
constexpr double kPi = 3.141592653589793238462643383279502884;

int g_failures = 0;

void report(int criterion, const char *title, bool ok, const std::string &detail)
{
    std::printf("criterion %2d [%s] %s (%s)\n", criterion, ok ? "PASS" : "FAIL",
                title, detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++g_failures;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5g", v);
    return buf;
}

modes::Sphere sphere(double diameter_um)
{
    modes::Sphere s;
    s.radius = 0.5 * diameter_um * 1e-6;
    s.index_real = 1.45724;
    return s;
}

} // namespace

// 1. Free spectral range of the 96 um sphere near 610 nm: 0.85 nm within 5%,
//    from exact neighbouring roots and from the analytic formula.
void criterion_1()
{
    auto s = sphere(96.0);
    auto m = modes::nearest_mode(s, modes::Polarization::TE, 1, 610e-9);
    auto next = modes::find_resonances_l(s, modes::Polarization::TE, m.id.l - 1, 1,
                                         m.lambda_res, m.lambda_res + 2e-9);
    bool ok = next.size() == 1;
    double exact = ok ? (next[0].lambda_res - m.lambda_res) : 0.0;
    double analytic = modes::fsr_analytic(s, 610e-9);
    ok = ok && std::abs(exact - 0.85e-9) < 0.05 * 0.85e-9 &&
         std::abs(analytic - 0.85e-9) < 0.05 * 0.85e-9;
    report(1, "FSR 96 um sphere = 0.85 nm (5%)", ok,
           "exact=" + fmt(exact * 1e9) + " nm, analytic=" + fmt(analytic * 1e9) +
               " nm");
}

// 2. Free spectral range of the 35 um sphere: 2.3 nm within 5%.
void criterion_2()
{
    auto s = sphere(35.0);
    double analytic = modes::fsr_analytic(s, 610e-9);
    bool ok = std::abs(analytic - 2.3e-9) < 0.05 * 2.3e-9;
    report(2, "FSR 35 um sphere = 2.3 nm (5%)", ok,
           "analytic=" + fmt(analytic * 1e9) + " nm");
}

// 3. Synthesized 606-612 nm spectrum of the 96 um sphere: exactly 4 mode
//    families (TE/TM x n=1,2), fundamental peaks taller than n=2 peaks.
void criterion_3()
{
    auto s = sphere(96.0);
    auto peaks = modes::synthesize_spectrum(s, 606e-9, 612e-9, 2);
    bool has[2][2] = {{false, false}, {false, false}};
    double best[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    bool labeled = true;
    for (const auto &p : peaks.entries)
    {
        if (!p.label || (p.label->n != 1 && p.label->n != 2))
        {
            labeled = false;
            continue;
        }
        int pol = p.label->polarization == modes::Polarization::TE ? 0 : 1;
        int n = p.label->n - 1;
        has[pol][n] = true;
        best[pol][n] = std::max(best[pol][n], p.height);
    }
    bool families = has[0][0] && has[0][1] && has[1][0] && has[1][1];
    bool ordering = best[0][0] > best[0][1] && best[1][0] > best[1][1];
    bool ok = labeled && families && ordering;
    report(3, "96 um spectrum: 4 families, n=1 above n=2", ok,
           std::to_string(peaks.entries.size()) + " peaks, hTE1=" + fmt(best[0][0]) +
               " hTE2=" + fmt(best[0][1]) + " hTM1=" + fmt(best[1][0]) +
               " hTM2=" + fmt(best[1][1]));
}

// 4. sigma_Q of the 35 um fundamental mode at Q = 3e7 within a factor of 3 of
//    2e-12 cm^2.
void criterion_4()
{
    auto s = sphere(35.0);
    auto m = modes::nearest_mode(s, modes::Polarization::TE, 1, 670e-9, 3e7);
    double sq_cm2 = transfer::sigma_q(s, m) * 1e4;
    bool ok = sq_cm2 > 2e-12 / 3.0 && sq_cm2 < 2e-12 * 3.0;
    report(4, "sigma_Q within factor 3 of 2e-12 cm^2", ok,
           "sigma_Q=" + fmt(sq_cm2) + " cm^2");
}

// 5. Single-molecule quotient in [1e-5, 2e-4].
void criterion_5()
{
    transfer::LossBudget b;
    b.sigma_a_abs = 1e-20; // 1e-16 cm^2
    b.sigma_q = 2e-16;     // 2e-12 cm^2
    double q = transfer::quotient(b);
    bool ok = q >= 1e-5 && q <= 2e-4;
    report(5, "single-molecule quotient in [1e-5, 2e-4]", ok, "quotient=" + fmt(q));
}

// 6. Broadband beta chain: 0.5 * (6e-5 / 20) = 1.5e-6 exactly.
void criterion_6()
{
    double beta = coupling::beta_broadband(0.5, 6e-5, 20.0);
    bool ok = beta == 0.5 * (6e-5 / 20.0) && std::abs(beta - 1.5e-6) < 1e-18;
    report(6, "beta chain gives 1.5e-6 exactly", ok, "beta=" + fmt(beta));
}

// 7. beta0 at a 50 nm gap in [0.17, 1) and strictly decreasing over 0-500 nm.
void criterion_7()
{
    auto s = sphere(35.0);
    auto m = modes::nearest_mode(s, modes::Polarization::TE, 1, 670e-9, 3e7);
    double b50 = coupling::beta0(s, m, 50e-9);
    bool in_band = b50 >= 0.17 && b50 < 1.0;
    bool monotone = true;
    double prev = 2.0;
    for (double gap = 0.0; gap <= 500e-9; gap += 25e-9)
    {
        double b = coupling::beta0(s, m, gap);
        if (!(b < prev))
            monotone = false;
        prev = b;
    }
    report(7, "beta0(50 nm) in [0.17, 1) and monotone in gap", in_band && monotone,
           "beta0=" + fmt(b50));
}

// 8. Multimode factor: counting path in [1e4, 4e4]; explicit enumeration within
//    a factor 5 of it.
// 9. End-to-end eta within factor 5 of 1e-6; enhancement over free space > 1e6.
void criteria_8_9()
{
    auto s = sphere(35.0);
    coupling::Emitter donor;
    donor.lambda_center = 670e-9;
    donor.linewidth = 20e-9;
    donor.sigma_abs_molecule = 1e-20;
    donor.gap = 50e-9;
    coupling::Emitter acceptor = donor;
    acceptor.role = coupling::Role::Acceptor;
    acceptor.gap = 0.0;

    transfer::AggregateOptions opts;
    opts.gamma_cav = 6e-14; // 6e-5 nm
    opts.explicit_sum = true;
    auto budget = transfer::aggregate_eta(s, donor, acceptor, 3e7, opts);

    double counting = budget.multimode_factor;
    double explicit_sum = budget.multimode_factor_explicit;
    double ratio = explicit_sum > 0.0
                       ? std::max(counting / explicit_sum, explicit_sum / counting)
                       : 1e9;
    bool ok8 = counting >= 1e4 && counting <= 4e4 && ratio <= 5.0;
    report(8, "multimode factor: counting in [1e4,4e4], explicit within x5", ok8,
           "counting=" + fmt(counting) + ", explicit=" + fmt(explicit_sum) +
               ", ratio=" + fmt(ratio));

    bool ok9 = budget.eta_total >= 1e-6 / 5.0 && budget.eta_total <= 1e-6 * 5.0 &&
               budget.enhancement > 1e6;
    report(9, "eta_total within x5 of 1e-6, enhancement > 1e6", ok9,
           "eta=" + fmt(budget.eta_total) + ", enhancement=" +
               fmt(budget.enhancement));
}

// 10. Free-space baseline 3.2e-13 at 50 um within 10% of 3e-13; exact 1/4 under
//     doubling of the distance.
void criterion_10()
{
    double eta = transfer::free_space_absorption(1e-20, 50e-6);
    bool ok = std::abs(eta - 3e-13) < 0.1 * 3e-13 &&
              transfer::free_space_absorption(1e-20, 100e-6) == eta / 4.0;
    report(10, "free-space baseline ~3e-13 (10%), exact 1/4 at 2r", ok,
           "eta_fs=" + fmt(eta));
}

// 11. FRET baseline: efficiency exactly 0.5 at r = r0.
void criterion_11()
{
    double e = transfer::fret_efficiency(10e-9, 10e-9);
    report(11, "FRET efficiency at r0 is exactly 0.5", e == 0.5, "eta=" + fmt(e));
}

// 12. Angular NNLS round trip under 2% noise recovers 10 weights within 0.05;
//     fundamental half-width of the 96 um band in [2, 10] degrees.
void criterion_12()
{
    auto s = sphere(96.0);
    int l = modes::fundamental_l(s, modes::Polarization::TE, 610e-9);

    const int K = 10;
    std::vector<double> truth = {1.0, 0.0, 0.4, 0.0, 0.25, 0.0, 0.1, 0.05, 0.0, 0.0};
    std::vector<double> thetas;
    for (int i = 0; i < 301; ++i)
        thetas.push_back(kPi / 2.0 - 0.25 + 0.5 * i / 300.0);
    auto design = coupling::angular_model(s, l, K, thetas);

    coupling::AngularScan scan;
    unsigned long long state = 99;
    auto noise = [&state]() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return (double((state >> 11) & 0xFFFFFFFFULL) / double(0xFFFFFFFFULL) - 0.5) *
               0.04;
    };
    for (std::size_t i = 0; i < thetas.size(); ++i)
    {
        double v = 0.0;
        for (int c = 0; c < K; ++c)
            v += truth[std::size_t(c)] * design(i, std::size_t(c));
        scan.samples.emplace_back(thetas[i], std::max(0.0, v * (1.0 + noise())));
    }
    auto fit = coupling::fit_angular_scan(scan, s, l, K);
    double worst = 0.0;
    for (int c = 0; c < K; ++c)
        worst = std::max(worst, std::abs(fit.weights[std::size_t(c)] -
                                         truth[std::size_t(c)]));

    double peak = numerics::normalized_assoc_legendre_sq(l, l, kPi / 2.0);
    double fwhm_deg = 0.0;
    for (double deg = 0.0; deg < 30.0; deg += 0.01)
    {
        if (numerics::normalized_assoc_legendre_sq(
                l, l, kPi / 2.0 - deg * kPi / 180.0) < 0.5 * peak)
        {
            fwhm_deg = 2.0 * deg;
            break;
        }
    }
    bool ok = worst < 0.05 && fwhm_deg >= 2.0 && fwhm_deg <= 10.0;
    report(12, "angular fit within 0.05; FWHM in [2,10] deg", ok,
           "worst=" + fmt(worst) + ", fwhm=" + fmt(fwhm_deg) + " deg");
}

// 13. Property suite: Wronskian identity, |Y_l^m|^2 normalization and lobe
//     counts, root residual contract, mode-volume monotonicity, Monte Carlo vs
//     analytic quotient at 1e7 trials, byte-identical CSV reproduction.
void criterion_13()
{
    std::string detail;
    bool ok = true;
    auto require = [&ok, &detail](bool cond, const char *what) {
        if (!cond)
        {
            ok = false;
            detail += std::string(detail.empty() ? "" : "; ") + what;
        }
    };

    // Wronskian of the Riccati pair.
    for (int l : {1, 10, 100, 1000})
    {
        double x = l + 0.7 * std::sqrt(double(l)) + 1.0;
        auto psi = numerics::riccati_psi(l, x);
        auto chi = numerics::riccati_chi(l, x);
        double w = psi.derivative * chi.value - psi.value * chi.derivative;
        if (std::abs(w - 1.0) > 1e-10)
            require(false, "Wronskian");
    }

    // Spherical-harmonic normalization and lobe counts.
    for (auto [l, m] : std::vector<std::pair<int, int>>{{5, 3}, {60, 30}, {229, 229}})
    {
        double integral = 0.0;
        const int grid = 20000;
        for (int i = 0; i < grid; ++i)
        {
            double theta = kPi * (i + 0.5) / grid;
            integral += 2.0 * kPi * numerics::normalized_assoc_legendre_sq(l, m, theta) *
                        std::sin(theta) * (kPi / grid);
        }
        require(std::abs(integral - 1.0) < 1e-6, "Y_lm normalization");

        int lobes = 0;
        const int scan_n = 20000;
        double prev = 0.0, cur = 0.0;
        for (int i = 0; i <= scan_n; ++i)
        {
            double theta = 1e-6 + (kPi - 2e-6) * i / scan_n;
            double next = numerics::normalized_assoc_legendre_sq(l, m, theta);
            if (i >= 2 && cur > prev && cur > next && cur > 1e-12)
                ++lobes;
            prev = cur;
            cur = next;
        }
        require(lobes == l - m + 1, "Y_lm lobe count");
    }

    // Root residual contract on a fresh enumeration.
    auto s35 = sphere(35.0);
    auto ms = modes::find_resonances(s35, modes::Polarization::TE, 2, 668e-9, 672e-9);
    require(!ms.empty(), "resonances found");
    for (const auto &m : ms)
    {
        double h = 1.0 / (50.0 * s35.index_real);
        double f = modes::characteristic_fn(s35, modes::Polarization::TE, m.id.l,
                                            m.size_parameter);
        double fa = std::abs(modes::characteristic_fn(s35, modes::Polarization::TE,
                                                      m.id.l, m.size_parameter - h));
        double fb = std::abs(modes::characteristic_fn(s35, modes::Polarization::TE,
                                                      m.id.l, m.size_parameter + h));
        require(std::abs(f) < 1e-9 * std::max(fa, fb), "root residual");
    }

    // Mode-volume monotonicity in radial order and in l - |m|.
    auto m1 = modes::nearest_mode(s35, modes::Polarization::TE, 1, 670e-9);
    auto m2 = modes::nearest_mode(s35, modes::Polarization::TE, 2, 670e-9);
    require(m1.mode_volume < m2.mode_volume, "V monotone in n");
    modes::RadialProfile prof(s35, modes::Polarization::TE, m1.id.l, m1.lambda_res);
    double v_l = modes::detail::mode_volume_from_profile(s35, prof, m1.id.l, m1.id.l);
    double v_lm2 =
        modes::detail::mode_volume_from_profile(s35, prof, m1.id.l, m1.id.l - 2);
    require(v_lm2 > v_l, "V monotone in l-|m|");

    // Monte Carlo quotient within 3 sigma of the analytic value at 1e7 trials.
    transfer::LossBudget budget;
    budget.sigma_a_abs = 1e-20;
    budget.sigma_q = 2e-16;
    double analytic = transfer::quotient(budget);
    auto mc = transfer::monte_carlo_quotient(budget, 10'000'000, 12345);
    require(std::abs(mc.estimate - analytic) <= 3.0 * mc.std_error,
            "Monte Carlo 3 sigma");
    auto mc2 = transfer::monte_carlo_quotient(budget, 10'000'000, 12345);
    require(mc.estimate == mc2.estimate, "Monte Carlo determinism");

    // Byte-identical CSV reproduction.
    auto dir = std::filesystem::temp_directory_path() /
               ("wgm_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    auto path1 = (dir / "a.csv").string();
    auto path2 = (dir / "b.csv").string();
    io::write_mode_table(path1, ms);
    io::write_mode_table(path2, ms);
    auto slurp = [](const std::string &p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    require(!slurp(path1).empty() && slurp(path1) == slurp(path2),
            "CSV reproducibility");
    std::filesystem::remove_all(dir);

    report(13, "property suite", ok, ok ? "all properties hold" : detail);
}

int main()
{
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criteria_8_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
    if (g_failures > 0)
    {
        std::printf("ACCEPTANCE: %d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("ACCEPTANCE: all 13 criteria passed\n");
    return 0;
}
