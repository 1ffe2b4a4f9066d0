#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "wgm/numerics.hpp"

namespace wgm::modes
{

enum class Polarization { TE, TM };

std::string to_string(Polarization pol);
Polarization polarization_from_string(const std::string &s);

// Dielectric sphere in an ambient medium of unit index.
struct Sphere
{
    double radius = 0.0;       // meters
    double index_real = 1.45;  // N
    double index_imag = 0.0;   // material-loss part of the complex index
    double ambient_index = 1.0;

    void validate() const; // throws ArgumentError on bad geometry/index
    std::complex<double> index_complex() const { return {index_real, index_imag}; }
};

struct ModeId
{
    Polarization polarization = Polarization::TE;
    int n = 1; // radial order (count of interior intensity maxima)
    int l = 1;
    int m = 1;

    bool fundamental() const { return n == 1 && std::abs(m) == l; }
};

struct Mode
{
    ModeId id;
    double lambda_res = 0.0;      // vacuum wavelength, meters
    double size_parameter = 0.0;  // x = 2*pi*R/lambda
    double q_radiative = 0.0;
    double q_loaded = 0.0;        // 0 means "not provided"
    double mode_volume = 0.0;     // cubic meters
    double surface_intensity_rel = 0.0; // |E(R)|^2 / max |E|^2 along the radius
    double decay_length = 0.0;    // 1/e length of the evanescent intensity

    // Combined quality factor: 1/Q = 1/Q_loaded + 1/Q_rad (loaded optional).
    double q_total() const;
};

enum class PeakPolarization { TE, TM, Unknown };

std::string to_string(PeakPolarization pol);
PeakPolarization peak_polarization_from_string(const std::string &s);

struct Peak
{
    double wavelength = 0.0; // meters
    PeakPolarization polarization = PeakPolarization::Unknown;
    double height = 0.0;
    std::optional<ModeId> label; // filled by synthesize_spectrum / assign_peaks
};

struct PeakList
{
    std::vector<Peak> entries; // strictly increasing in wavelength

    void validate() const;
};

// Resonance (Mie pole) function on the real branch: zero at each WGM position.
// TE: N*psi'_l(N x)*chi_l(x) - psi_l(N x)*chi'_l(x)
// TM: psi'_l(N x)*chi_l(x)/N - N*psi_l(N x)*chi'_l(x)
double characteristic_fn(const Sphere &sphere, Polarization pol, int l, double x);

// Complex resonance branch: chi replaced by the outgoing xi = psi - i*chi,
// and the sphere index taken complex. Zeros sit just below the real axis.
std::complex<double> characteristic_fn_outgoing(const Sphere &sphere, Polarization pol,
                                                int l, std::complex<double> x);

// Analytic free spectral range in wavelength: lambda^2 / (2*pi*R*N).
double fsr_analytic(const Sphere &sphere, double lambda);

// Scalar separable intensity model of one mode, |E|^2 = radial(r) * polar(theta).
class RadialProfile
{
  public:
    RadialProfile(const Sphere &sphere, Polarization pol, int l, double lambda);

    double operator()(double r) const; // relative intensity, max = 1
    int interior_maxima() const { return interior_maxima_; }
    double surface_intensity_rel() const { return surface_rel_; }
    double decay_length() const { return decay_length_; }
    double radius() const { return radius_; }

    // Unnormalized intensity (used by the integration routines).
    double unnormalized(double r) const;
    double peak_value() const { return peak_; }

  private:
    double radius_, wavenumber_, index_;
    int l_;
    double exterior_scale_;   // intensity jump factor at the boundary
    double boundary_in_;      // interior intensity at r = R
    double peak_ = 1.0;
    double surface_rel_ = 0.0;
    double decay_length_ = 0.0;
    int interior_maxima_ = 0;
};

double radial_profile(const Sphere &sphere, const Mode &mode, double r);

// Effective mode volume of the separable intensity model (second-moment form):
// V = (Int eps*I r^2 dr)^2 / (Int (eps*I)^2 r^2 dr * Int P^2 dOmega).
double mode_volume(const Sphere &sphere, const Mode &mode);

namespace detail
{
// Volume from an explicit radial profile and polar numbers; `scale` multiplies
// the unnormalized intensity and must cancel out of the result.
double mode_volume_from_profile(const Sphere &sphere, const RadialProfile &profile,
                                int l, int m, double scale = 1.0);
// Polar second moment Int |Y_l^m|^2|^2 dOmega for the per-(l-|m|) volume scaling.
double polar_second_moment(int l, int m);
} // namespace detail

// Diffraction-limited Q from the complex root of the outgoing characteristic
// function, seeded from the real-branch root: Q = Re(x*) / (-2 Im(x*)).
double radiative_q(const Sphere &sphere, Polarization pol, int l, int n);

// All modes of one polarization and angular number l with radial order <= n_max
// whose resonance falls inside [lambda_min, lambda_max]. Sorted by wavelength.
std::vector<Mode> find_resonances_l(const Sphere &sphere, Polarization pol, int l,
                                    int n_max, double lambda_min, double lambda_max,
                                    double q_loaded = 0.0);

// Same, scanning every l that can contribute to the window.
std::vector<Mode> find_resonances(const Sphere &sphere, Polarization pol, int n_max,
                                  double lambda_min, double lambda_max,
                                  double q_loaded = 0.0);

// Angular number of the fundamental (n=1) band nearest `lambda` for the given
// polarization.
int fundamental_l(const Sphere &sphere, Polarization pol, double lambda);

// Fully populated mode of radial order n whose resonance is nearest `lambda`
// (the angular number is chosen accordingly).
Mode nearest_mode(const Sphere &sphere, Polarization pol, int n, double lambda,
                  double q_loaded = 0.0);

// Merged TE+TM peak list over the window with |m| = l, n <= n_max; heights are
// the surface intensity divided by mode volume (prism coupling favors low n).
PeakList synthesize_spectrum(const Sphere &sphere, double lambda_min, double lambda_max,
                             int n_max, double q_loaded = 0.0);

struct PeakAssignment
{
    Sphere sphere;                // fitted radius and index
    std::vector<ModeId> labels;   // one per measured peak
    double rms_residual = 0.0;    // meters
};

// Fit (R, N) to measured peaks and label each peak with its ModeId.
PeakAssignment assign_peaks(const PeakList &measured, double radius_guess,
                            double index_guess);

} // namespace wgm::modes
