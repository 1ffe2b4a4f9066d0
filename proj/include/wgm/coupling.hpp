#pragma once

#include <utility>
#include <vector>

#include "wgm/modes.hpp"
#include "wgm/numerics.hpp"

namespace wgm::coupling
{

enum class Role { Donor, Acceptor };

struct Emitter
{
    Role role = Role::Donor;
    double lambda_center = 670e-9; // meters
    double linewidth = 20e-9;      // FWHM of the broadband emission, meters
    double sigma_abs_molecule = 1e-20; // square meters per molecule
    long molecule_count = 1;
    double gap = 0.0;         // surface-to-emitter distance, meters
    double polar_angle = 0.0; // radians from the equator

    void validate() const;
    double sigma_abs_total() const { return sigma_abs_molecule * double(molecule_count); }
};

struct AngularScan
{
    // (polar angle in radians measured from the pole, intensity >= 0)
    std::vector<std::pair<double, double>> samples;

    void validate() const; // >= 10 samples, strictly increasing angles
};

struct AngularFit
{
    std::vector<double> weights; // one per p = l - |m| in 0..K-1
    double residual_rms = 0.0;
    std::vector<std::pair<double, double>> fitted_curve; // (theta, intensity)
};

// Fraction of a narrow-band emitter's photons entering one mode at the given
// gap: Purcell ratio F/(1+F) with F = (1/3)(3/(4 pi^2)) lambda^3 (Q/V) u(d)
// and u(d) = surface_intensity_rel * exp(-2 d / decay_length).
double beta0(const modes::Sphere &sphere, const modes::Mode &mode, double gap);

// Broadband reduction: beta = beta0 * min(1, gamma_cav / gamma_b).
double beta_broadband(double beta0_value, double gamma_cav, double gamma_b);

// Cavity linewidth in wavelength units: lambda / Q.
double cavity_linewidth(double lambda, double q_total);

// Relative collected signal vs gap, normalized to 1 at the smallest gap.
std::vector<std::pair<double, double>> distance_scan(const modes::Sphere &sphere,
                                                     const modes::Mode &mode,
                                                     const std::vector<double> &gaps);

// Design matrix for the polar-profile fit: column p is |Y_l^{l-p}|^2 over the
// polar angles (radians from the pole), scaled to unit column maximum.
numerics::Matrix angular_model(const modes::Sphere &sphere, int l, int K,
                               const std::vector<double> &thetas);

// Non-negative fit of a measured polar scan to the first K WGM polar profiles.
AngularFit fit_angular_scan(const AngularScan &scan, const modes::Sphere &sphere,
                            int l, int K = 10);

} // namespace wgm::coupling
