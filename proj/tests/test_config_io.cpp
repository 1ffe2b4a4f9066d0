#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "wgm/errors.hpp"
#include "wgm/io.hpp"

using namespace wgm;
using namespace wgm::io;

namespace
{
constexpr double kPi = 3.141592653589793238462643383279502884;

struct TempDir
{
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path() /
               ("wgm_io_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string &name) const { return (path / name).string(); }
};

std::string slurp(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}
} // namespace

TEST_CASE("format_number round-trips every double it prints")
{
    std::vector<double> values = {0.0,       1.0,          -1.5,       0.1,
                                  1e-300,    1.7e308,      3.183e-13,  670e-9,
                                  kPi,       1.0 / 3.0,    2.3223e-9,  5e-5,
                                  123456789.123456789,     -0.0001};
    for (double v : values)
    {
        std::string s = format_number(v);
        double back = std::strtod(s.c_str(), nullptr);
        CHECK(back == v);
        CHECK(s.find(',') == std::string::npos);
    }
    // Prefers short forms.
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0) == "1");
}

TEST_CASE("config serialization and parsing are inverse operations")
{
    RunConfig def;
    std::string text = serialize_config(def);
    RunConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);

    // Every documented key appears exactly once.
    CHECK(text.find("sphere.diameter_um") != std::string::npos);
    CHECK(text.find("mc.seed") != std::string::npos);
}

TEST_CASE("config parser accepts comments and whitespace, rejects unknown keys")
{
    RunConfig cfg = parse_config("# a comment\n"
                                 "sphere.diameter_um = 96.0\n"
                                 "\n"
                                 "   sphere.q_loaded=1e7   # trailing comment\n");
    CHECK(cfg.sphere_diameter_um == 96.0);
    CHECK(cfg.q_loaded == 1e7);

    CHECK_THROWS_AS(parse_config("not_a_key = 1\n"), ArgumentError);
    CHECK_THROWS_AS(parse_config("sphere.diameter_um\n"), ArgumentError);
    CHECK_THROWS_AS(parse_config("sphere.diameter_um = banana\n"), ArgumentError);
}

TEST_CASE("config unit conversion to SI views")
{
    RunConfig cfg;
    cfg.sphere_diameter_um = 35.0;
    cfg.donor_gap_nm = 50.0;
    cfg.acceptor_sigma_cm2 = 1e-16;
    cfg.baseline_distance_um = 50.0;

    CHECK(cfg.sphere().radius == doctest::Approx(17.5e-6).epsilon(1e-15));
    CHECK(cfg.donor().gap == doctest::Approx(50e-9).epsilon(1e-15));
    CHECK(cfg.acceptor().sigma_abs_molecule == doctest::Approx(1e-20).epsilon(1e-15));
    CHECK(cfg.aggregate_options().baseline_distance ==
          doctest::Approx(50e-6).epsilon(1e-15));
    CHECK(cfg.loss_budget().sigma_a_abs == doctest::Approx(1e-20).epsilon(1e-15));
}

TEST_CASE("peak list CSV round trip")
{
    TempDir tmp;
    modes::PeakList list;
    modes::Peak a;
    a.wavelength = 667.123456e-9;
    a.polarization = modes::PeakPolarization::TE;
    a.height = 1.0;
    modes::Peak b;
    b.wavelength = 669.5e-9;
    b.polarization = modes::PeakPolarization::Unknown;
    b.height = 0.25;
    list.entries = {a, b};

    std::string path = tmp.file("peaks.csv");
    write_peak_list(path, list);
    modes::PeakList back = read_peak_list(path);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0].wavelength == doctest::Approx(a.wavelength).epsilon(1e-12));
    CHECK(back.entries[0].polarization == modes::PeakPolarization::TE);
    CHECK(back.entries[1].polarization == modes::PeakPolarization::Unknown);
    CHECK(back.entries[1].height == doctest::Approx(0.25));

    std::string header = slurp(path);
    CHECK(header.rfind("wavelength_nm,polarization,height", 0) == 0);
}

TEST_CASE("peak list reader rejects malformed files")
{
    TempDir tmp;
    std::string path = tmp.file("bad.csv");
    {
        std::ofstream out(path);
        out << "completely,wrong,header\n1,TE,1\n";
    }
    CHECK_THROWS_AS(read_peak_list(path), ArgumentError);
    CHECK_THROWS_AS(read_peak_list(tmp.file("missing.csv")), ArgumentError);
}

TEST_CASE("angular scan CSV converts degrees-from-equator to radians-from-pole")
{
    TempDir tmp;
    std::string path = tmp.file("scan.csv");
    {
        std::ofstream out(path);
        out << "theta_deg,intensity\n";
        for (int d = -10; d <= 10; d += 2)
            out << d << "," << 1.0 / (1.0 + d * d) << "\n";
    }
    auto scan = read_angular_scan(path);
    REQUIRE(scan.samples.size() == 11);
    scan.validate();
    // -10 deg from the equator is pi/2 + 10 deg from the pole... sorted
    // ascending in the polar angle, so the +10 deg row comes first.
    CHECK(scan.samples.front().first ==
          doctest::Approx(kPi / 2.0 - 10.0 * kPi / 180.0).epsilon(1e-12));
    CHECK(scan.samples.back().first ==
          doctest::Approx(kPi / 2.0 + 10.0 * kPi / 180.0).epsilon(1e-12));
    // Equator row keeps its intensity.
    CHECK(scan.samples[5].second == doctest::Approx(1.0));
}

TEST_CASE("xy writer emits the requested header and one row per pair")
{
    TempDir tmp;
    std::string path = tmp.file("xy.csv");
    write_xy(path, "gap_nm,beta0", {{50.0, 0.5}, {100.0, 0.25}});
    std::string text = slurp(path);
    CHECK(text == "gap_nm,beta0\n50,0.5\n100,0.25\n");
}

TEST_CASE("mode table and per-mode writers are deterministic")
{
    TempDir tmp;
    modes::Mode m;
    m.id = {modes::Polarization::TE, 1, 229, 229};
    m.lambda_res = 668.7e-9;
    m.size_parameter = 164.4;
    m.q_radiative = 7.5e34;
    m.mode_volume = 258e-18;
    m.surface_intensity_rel = 0.1264;
    m.decay_length = 109.8e-9;

    std::string p1 = tmp.file("modes1.csv");
    std::string p2 = tmp.file("modes2.csv");
    write_mode_table(p1, {m});
    write_mode_table(p2, {m});
    CHECK(slurp(p1) == slurp(p2));
    CHECK(slurp(p1).rfind("pol,n,l,m,lambda_nm,q_rad,v_eff_um3,surface_rel,decay_nm",
                          0) == 0);

    transfer::PerModeRow row;
    row.id = m.id;
    row.lambda_res = m.lambda_res;
    row.beta_i = 1.5e-6;
    row.quotient = 5e-5;
    row.eta_i = 7.5e-11;
    row.degeneracy = 40.0;
    std::string p3 = tmp.file("per_mode.csv");
    write_per_mode(p3, {row});
    CHECK(slurp(p3).rfind("pol,n,l,m,lambda_nm,beta_i,quotient,eta_i,degeneracy", 0) ==
          0);
}

TEST_CASE("report contains the headline quantities in both unit systems")
{
    RunConfig cfg;
    transfer::TransferBudget budget;
    budget.beta0_fundamental = 0.5;
    budget.gamma_cav = 6e-14;
    budget.sigma_q_fundamental = 2e-16;
    budget.eta_fundamental = 7.5e-11;
    budget.multimode_factor = 16000.0;
    budget.eta_total = 1.2e-6;
    budget.baseline_free_space = 3.183e-13;
    budget.baseline_fret_r0_ratio = 6.4e-23;
    budget.enhancement = 3.8e6;

    std::string report = render_report(cfg, budget);
    CHECK(report.find("eta_total") != std::string::npos);
    CHECK(report.find("enhancement") != std::string::npos);
    CHECK(report.find("sigma_q") != std::string::npos);
    CHECK(report.find("cm2") != std::string::npos);
    CHECK(report.find("beta0") != std::string::npos);
}

TEST_CASE("polarization string round trips")
{
    using modes::Polarization;
    CHECK(modes::to_string(Polarization::TE) == "TE");
    CHECK(modes::polarization_from_string("TM") == Polarization::TM);
    CHECK_THROWS_AS(modes::polarization_from_string("TX"), ArgumentError);
    CHECK(modes::to_string(modes::PeakPolarization::Unknown) == "unknown");
    CHECK(modes::peak_polarization_from_string("unknown") ==
          modes::PeakPolarization::Unknown);
}
