#include "wgm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "wgm/errors.hpp"

namespace wgm::io
{

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double kNm = 1e-9;
constexpr double kUm = 1e-6;
constexpr double kCm2 = 1e-4;

std::vector<std::string> split_csv_line(const std::string &line)
{
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    return fields;
}

double parse_double(const std::string &s, const std::string &context)
{
    char *end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || (end && *end != '\0'))
        throw ArgumentError("bad number '" + s + "' in " + context);
    return v;
}

std::ofstream open_out(const std::string &path)
{
    std::ofstream out(path, std::ios::binary); // '\n' endings on every platform
    if (!out)
        throw ArgumentError("cannot open output file: " + path);
    return out;
}

std::string trim(const std::string &s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

std::string format_number(double v)
{
    if (!std::isfinite(v))
        throw RangeError("cannot format a non-finite value");
    char buf[64];
    std::string best;
    for (int prec = 1; prec <= 17; ++prec)
    {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v)
        {
            // Shortest text wins, not smallest precision: "670" beats "6.7e+02".
            if (best.empty() || std::strlen(buf) < best.size())
                best = buf;
            if (prec >= 17)
                break;
        }
    }
    if (best.empty())
        best = buf;
    return best;
}

void write_mode_table(const std::string &path, const std::vector<modes::Mode> &table)
{
    auto out = open_out(path);
    out << "pol,n,l,m,lambda_nm,q_rad,v_eff_um3,surface_rel,decay_nm\n";
    for (const auto &mode : table)
    {
        out << modes::to_string(mode.id.polarization) << ',' << mode.id.n << ','
            << mode.id.l << ',' << mode.id.m << ','
            << format_number(mode.lambda_res / kNm) << ','
            << format_number(mode.q_radiative) << ','
            << format_number(mode.mode_volume / (kUm * kUm * kUm)) << ','
            << format_number(mode.surface_intensity_rel) << ','
            << format_number(mode.decay_length / kNm) << '\n';
    }
}

void write_peak_list(const std::string &path, const modes::PeakList &peaks)
{
    auto out = open_out(path);
    out << "wavelength_nm,polarization,height\n";
    for (const auto &peak : peaks.entries)
        out << format_number(peak.wavelength / kNm) << ','
            << modes::to_string(peak.polarization) << ','
            << format_number(peak.height) << '\n';
}

modes::PeakList read_peak_list(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ArgumentError("cannot open peak list: " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "wavelength_nm,polarization,height")
        throw ArgumentError("peak list must start with 'wavelength_nm,polarization,height'");
    modes::PeakList peaks;
    while (std::getline(in, line))
    {
        if (trim(line).empty())
            continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw ArgumentError("peak list rows need 3 fields: " + line);
        modes::Peak peak;
        peak.wavelength = parse_double(trim(fields[0]), path) * kNm;
        peak.polarization = modes::peak_polarization_from_string(trim(fields[1]));
        peak.height = parse_double(trim(fields[2]), path);
        peaks.entries.push_back(peak);
    }
    peaks.validate();
    return peaks;
}

void write_xy(const std::string &path, const std::string &header,
              const std::vector<std::pair<double, double>> &rows)
{
    auto out = open_out(path);
    out << header << '\n';
    for (const auto &[x, y] : rows)
        out << format_number(x) << ',' << format_number(y) << '\n';
}

coupling::AngularScan read_angular_scan(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ArgumentError("cannot open angular scan: " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "theta_deg,intensity")
        throw ArgumentError("angular scan must start with 'theta_deg,intensity'");
    coupling::AngularScan scan;
    while (std::getline(in, line))
    {
        if (trim(line).empty())
            continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw ArgumentError("angular scan rows need 2 fields: " + line);
        double deg_from_equator = parse_double(trim(fields[0]), path);
        double theta_pole = kPi / 2.0 - deg_from_equator * kPi / 180.0;
        scan.samples.emplace_back(theta_pole, parse_double(trim(fields[1]), path));
    }
    std::sort(scan.samples.begin(), scan.samples.end());
    scan.validate();
    return scan;
}

void write_angular_curve(const std::string &path,
                         const std::vector<std::pair<double, double>> &curve)
{
    std::vector<std::pair<double, double>> rows;
    rows.reserve(curve.size());
    for (const auto &[theta_pole, intensity] : curve)
        rows.emplace_back((kPi / 2.0 - theta_pole) * 180.0 / kPi, intensity);
    std::sort(rows.begin(), rows.end());
    write_xy(path, "theta_deg,intensity", rows);
}

void write_per_mode(const std::string &path,
                    const std::vector<transfer::PerModeRow> &rows)
{
    auto out = open_out(path);
    out << "pol,n,l,m,lambda_nm,beta_i,quotient,eta_i,degeneracy\n";
    for (const auto &row : rows)
        out << modes::to_string(row.id.polarization) << ',' << row.id.n << ','
            << row.id.l << ',' << row.id.m << ','
            << format_number(row.lambda_res / kNm) << ','
            << format_number(row.beta_i) << ',' << format_number(row.quotient) << ','
            << format_number(row.eta_i) << ',' << format_number(row.degeneracy)
            << '\n';
}

modes::Sphere RunConfig::sphere() const
{
    return modes::Sphere{0.5 * sphere_diameter_um * kUm, sphere_index,
                         sphere_index_imag, 1.0};
}

coupling::Emitter RunConfig::donor() const
{
    return coupling::Emitter{coupling::Role::Donor,
                             donor_lambda_nm * kNm,
                             donor_linewidth_nm * kNm,
                             donor_sigma_cm2 * kCm2,
                             donor_molecules,
                             donor_gap_nm * kNm,
                             donor_theta_deg * kPi / 180.0};
}

coupling::Emitter RunConfig::acceptor() const
{
    return coupling::Emitter{coupling::Role::Acceptor,
                             acceptor_lambda_nm * kNm,
                             acceptor_linewidth_nm * kNm,
                             acceptor_sigma_cm2 * kCm2,
                             acceptor_molecules,
                             acceptor_gap_nm * kNm,
                             acceptor_theta_deg * kPi / 180.0};
}

transfer::AggregateOptions RunConfig::aggregate_options() const
{
    transfer::AggregateOptions options;
    options.gamma_cav = gamma_cav_nm * kNm;
    options.spectrum_span = aggregation_spectrum_span_nm * kNm;
    options.n_cutoff = aggregation_n_cutoff;
    options.lm_cutoff = aggregation_lm_cutoff;
    options.polarizations = aggregation_polarizations;
    options.fsr_count_override = aggregation_fsr_count;
    options.sigma_d_sca = sigma_d_sca_cm2 * kCm2;
    options.sigma_d_abs = sigma_d_abs_cm2 * kCm2;
    options.baseline_distance = baseline_distance_um * kUm;
    options.fret_r0 = baseline_fret_r0_nm * kNm;
    options.explicit_sum = aggregation_explicit_sum;
    return options;
}

transfer::LossBudget RunConfig::loss_budget() const
{
    // sigma_q must come from the mode under study; this fills the rest.
    return transfer::LossBudget{acceptor_sigma_cm2 * kCm2 * double(acceptor_molecules),
                                sigma_d_sca_cm2 * kCm2, sigma_d_abs_cm2 * kCm2, 0.0};
}

namespace
{

struct KeyBinding
{
    std::function<void(RunConfig &, const std::string &)> set;
    std::function<std::string(const RunConfig &)> get;
};

std::map<std::string, KeyBinding> &key_table()
{
    static std::map<std::string, KeyBinding> table;
    if (!table.empty())
        return table;
    auto bind_double = [&](const std::string &key, double RunConfig::*member) {
        table[key] = {[member, key](RunConfig &c, const std::string &v) {
                          c.*member = parse_double(v, "config key " + key);
                      },
                      [member](const RunConfig &c) { return format_number(c.*member); }};
    };
    auto bind_int = [&](const std::string &key, int RunConfig::*member) {
        table[key] = {[member, key](RunConfig &c, const std::string &v) {
                          c.*member = int(parse_double(v, "config key " + key));
                      },
                      [member](const RunConfig &c) { return std::to_string(c.*member); }};
    };
    auto bind_long = [&](const std::string &key, long RunConfig::*member) {
        table[key] = {[member, key](RunConfig &c, const std::string &v) {
                          c.*member = long(parse_double(v, "config key " + key));
                      },
                      [member](const RunConfig &c) { return std::to_string(c.*member); }};
    };

    bind_double("sphere.diameter_um", &RunConfig::sphere_diameter_um);
    bind_double("sphere.index", &RunConfig::sphere_index);
    bind_double("sphere.index_imag", &RunConfig::sphere_index_imag);
    bind_double("sphere.q_loaded", &RunConfig::q_loaded);
    bind_double("donor.lambda_nm", &RunConfig::donor_lambda_nm);
    bind_double("donor.linewidth_nm", &RunConfig::donor_linewidth_nm);
    bind_double("donor.sigma_cm2", &RunConfig::donor_sigma_cm2);
    bind_long("donor.molecules", &RunConfig::donor_molecules);
    bind_double("donor.gap_nm", &RunConfig::donor_gap_nm);
    bind_double("donor.theta_deg", &RunConfig::donor_theta_deg);
    bind_double("acceptor.lambda_nm", &RunConfig::acceptor_lambda_nm);
    bind_double("acceptor.linewidth_nm", &RunConfig::acceptor_linewidth_nm);
    bind_double("acceptor.sigma_cm2", &RunConfig::acceptor_sigma_cm2);
    bind_long("acceptor.molecules", &RunConfig::acceptor_molecules);
    bind_double("acceptor.gap_nm", &RunConfig::acceptor_gap_nm);
    bind_double("acceptor.theta_deg", &RunConfig::acceptor_theta_deg);
    bind_double("window.min_nm", &RunConfig::window_min_nm);
    bind_double("window.max_nm", &RunConfig::window_max_nm);
    bind_int("aggregation.n_cutoff", &RunConfig::aggregation_n_cutoff);
    bind_int("aggregation.lm_cutoff", &RunConfig::aggregation_lm_cutoff);
    bind_int("aggregation.fsr_count", &RunConfig::aggregation_fsr_count);
    bind_double("aggregation.spectrum_span_nm", &RunConfig::aggregation_spectrum_span_nm);
    bind_int("aggregation.polarizations", &RunConfig::aggregation_polarizations);
    table["aggregation.explicit_sum"] = {
        [](RunConfig &c, const std::string &v) {
            if (v == "1" || v == "true")
                c.aggregation_explicit_sum = true;
            else if (v == "0" || v == "false")
                c.aggregation_explicit_sum = false;
            else
                throw ArgumentError("aggregation.explicit_sum must be 0/1/true/false");
        },
        [](const RunConfig &c) {
            return std::string(c.aggregation_explicit_sum ? "true" : "false");
        }};
    bind_double("coupling.gamma_cav_nm", &RunConfig::gamma_cav_nm);
    bind_double("loss.sigma_d_sca_cm2", &RunConfig::sigma_d_sca_cm2);
    bind_double("loss.sigma_d_abs_cm2", &RunConfig::sigma_d_abs_cm2);
    bind_double("baseline.distance_um", &RunConfig::baseline_distance_um);
    bind_double("baseline.fret_r0_nm", &RunConfig::baseline_fret_r0_nm);
    bind_long("mc.trials", &RunConfig::mc_trials);
    table["mc.seed"] = {[](RunConfig &c, const std::string &v) {
                            c.mc_seed = std::strtoull(v.c_str(), nullptr, 10);
                        },
                        [](const RunConfig &c) { return std::to_string(c.mc_seed); }};
    table["output.dir"] = {[](RunConfig &c, const std::string &v) { c.output_dir = v; },
                           [](const RunConfig &c) { return c.output_dir; }};
    return table;
}

// Serialization order (stable on round trips, grouped for the human reader).
const std::vector<std::string> &key_order()
{
    static const std::vector<std::string> order = {
        "sphere.diameter_um", "sphere.index", "sphere.index_imag", "sphere.q_loaded",
        "donor.lambda_nm", "donor.linewidth_nm", "donor.sigma_cm2", "donor.molecules",
        "donor.gap_nm", "donor.theta_deg",
        "acceptor.lambda_nm", "acceptor.linewidth_nm", "acceptor.sigma_cm2",
        "acceptor.molecules", "acceptor.gap_nm", "acceptor.theta_deg",
        "window.min_nm", "window.max_nm",
        "aggregation.n_cutoff", "aggregation.lm_cutoff", "aggregation.fsr_count",
        "aggregation.spectrum_span_nm", "aggregation.polarizations",
        "aggregation.explicit_sum",
        "coupling.gamma_cav_nm",
        "loss.sigma_d_sca_cm2", "loss.sigma_d_abs_cm2",
        "baseline.distance_um", "baseline.fret_r0_nm",
        "mc.trials", "mc.seed",
        "output.dir"};
    return order;
}

} // namespace

RunConfig parse_config(const std::string &text)
{
    RunConfig config;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line))
    {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ArgumentError("config line " + std::to_string(line_no) +
                                " is not 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = key_table().find(key);
        if (it == key_table().end())
            throw ArgumentError("unknown config key: " + key);
        it->second.set(config, value);
    }
    return config;
}

RunConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ArgumentError("cannot open config: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig &config)
{
    std::string out;
    for (const auto &key : key_order())
        out += key + " = " + key_table().at(key).get(config) + "\n";
    return out;
}

std::string render_report(const RunConfig &config, const transfer::TransferBudget &budget)
{
    std::ostringstream out;
    auto kv = [&](const std::string &key, const std::string &value) {
        out << "  " << key << " = " << value << "\n";
    };
    auto kvd = [&](const std::string &key, double value) {
        kv(key, format_number(value));
    };

    out << "sphere:\n";
    kvd("diameter_um", config.sphere_diameter_um);
    kvd("index", config.sphere_index);
    kvd("q_loaded", config.q_loaded);

    out << "coupling:\n";
    kvd("beta0_fundamental", budget.beta0_fundamental);
    kvd("gamma_cav_nm", budget.gamma_cav / kNm);
    kvd("donor_gap_nm", config.donor_gap_nm);

    out << "cross_sections:\n";
    double sigma_a = config.acceptor_sigma_cm2 * kCm2 * double(config.acceptor_molecules);
    kvd("sigma_a_abs_cm2", sigma_a / kCm2);
    kvd("sigma_a_abs_m2", sigma_a);
    kvd("sigma_d_sca_cm2", config.sigma_d_sca_cm2);
    kvd("sigma_d_sca_m2", config.sigma_d_sca_cm2 * kCm2);
    kvd("sigma_d_abs_cm2", config.sigma_d_abs_cm2);
    kvd("sigma_d_abs_m2", config.sigma_d_abs_cm2 * kCm2);
    kvd("sigma_q_cm2", budget.sigma_q_fundamental / kCm2);
    kvd("sigma_q_m2", budget.sigma_q_fundamental);

    out << "transfer:\n";
    kvd("eta_fundamental", budget.eta_fundamental);
    kvd("multimode_factor", budget.multimode_factor);
    if (budget.multimode_factor_explicit > 0.0)
        kvd("multimode_factor_explicit", budget.multimode_factor_explicit);
    kvd("eta_total", budget.eta_total);

    out << "baselines:\n";
    kvd("free_space", budget.baseline_free_space);
    kvd("free_space_distance_um", config.baseline_distance_um);
    kvd("fret_r0_ratio", budget.baseline_fret_r0_ratio);
    kvd("fret_r0_nm", config.baseline_fret_r0_nm);
    kvd("enhancement", budget.enhancement);

    out << "per_mode:\n";
    for (const auto &row : budget.per_mode)
    {
        out << "  - " << modes::to_string(row.id.polarization) << " n=" << row.id.n
            << " l=" << row.id.l << " m=" << row.id.m
            << " beta_i=" << format_number(row.beta_i)
            << " quotient=" << format_number(row.quotient)
            << " eta_i=" << format_number(row.eta_i)
            << " degeneracy=" << format_number(row.degeneracy) << "\n";
    }
    return out.str();
}

} // namespace wgm::io
