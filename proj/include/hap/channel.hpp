#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hap::channel {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;

inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kBoltzmann = 1.380649e-23;

// Uniform planar array: n_x by n_y elements, N_t = n_x n_y.
struct ArrayGeometry {
    int n_x = 1;
    int n_y = 1;
    double spacing_x_m = 0.0;
    double spacing_y_m = 0.0;
    double carrier_hz = 0.0;

    int n_t() const noexcept { return n_x * n_y; }
    double wavelength_m() const noexcept { return kSpeedOfLight / carrier_hz; }
    void validate() const;

    // Half-wavelength (or other) spacing expressed in wavelengths on both axes.
    static ArrayGeometry with_spacing_wavelengths(int n_x, int n_y, double spacing_wavelengths,
                                                  double carrier_hz);
};

struct UserLink {
    double theta_x = 0.0;  // AoD, rad
    double theta_y = 0.0;
    double u_x = 0.0;      // spatial angles
    double u_y = 0.0;
    double gamma = 0.0;    // mean channel power, linear
    double kappa = 0.0;    // Rician factor, linear
    double qos_rate_bps = 0.0;

    // Fills u_x = sin(theta_y) cos(theta_x), u_y = cos(theta_y).
    static UserLink from_angles(double theta_x, double theta_y, double gamma, double kappa,
                                double qos_rate_bps);
};

struct ChannelDraw {
    Complex g;
    CVector h;
};

// Entry m: exp(-j 2 pi f_c spacing u m / c) / sqrt(n).
CVector axis_response(int n, double spacing_m, double u, double carrier_hz);

// v = v_x kron v_y (x index major).
CVector upa_response(const ArrayGeometry& arr, const UserLink& link);

// gamma = G_tx G_rx N_t (c / (4 pi f_c h))^2, gains in dB.
double mean_channel_power(const ArrayGeometry& arr, double g_tx_db, double g_rx_db,
                          double altitude_m);

// Thermal noise k_B T B_w scaled by the receiver noise figure.
double thermal_noise_power(double bandwidth_hz, double noise_figure_db = 7.0,
                           double temperature_k = 290.0);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Seeded Rician small-scale gain generator. The LOS component has phase 0;
// the scattered part is circular complex Gaussian, so E|g|^2 = gamma.
class RicianSampler {
public:
    RicianSampler(double gamma, double kappa, std::uint64_t seed);
    Complex next();

private:
    double los_amplitude_;
    double scatter_sigma_;  // per real dimension
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Single draw from a freshly seeded sampler.
Complex sample_rician(double gamma, double kappa, std::uint64_t seed);

// h = v g for one fading draw.
ChannelDraw draw_channel(const CVector& steering, RicianSampler& sampler);

// |b_k^H h_k|^2 / (sum_{l != k} |b_l^H h_k|^2 + N_0).
double instantaneous_sinr(std::span<const CVector> beams, std::size_t k, const CVector& h_k,
                          double n0_w);

// Uniform AoDs theta_x in [-60, 60] deg, theta_y in [20, 70] deg (radians out).
struct AngleDraw {
    double theta_x;
    double theta_y;
};
std::vector<AngleDraw> synthesize_user_angles(std::size_t count, std::uint64_t seed);

}  // namespace hap::channel
