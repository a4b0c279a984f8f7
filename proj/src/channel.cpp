#include "hap/channel.hpp"

#include <cmath>
#include <numbers>

#include "hap/error.hpp"

namespace hap::channel {

namespace {
constexpr double kPi = std::numbers::pi;
}

void ArrayGeometry::validate() const {
    if (n_x < 1 || n_y < 1) throw PreconditionError("array needs at least one element per axis");
    if (!(spacing_x_m > 0.0 && spacing_y_m > 0.0)) {
        throw PreconditionError("array spacings must be positive");
    }
    if (!(carrier_hz > 0.0)) throw PreconditionError("carrier frequency must be positive");
}

ArrayGeometry ArrayGeometry::with_spacing_wavelengths(int n_x, int n_y, double spacing_wavelengths,
                                                      double carrier_hz) {
    ArrayGeometry arr;
    arr.n_x = n_x;
    arr.n_y = n_y;
    arr.carrier_hz = carrier_hz;
    arr.spacing_x_m = spacing_wavelengths * kSpeedOfLight / carrier_hz;
    arr.spacing_y_m = arr.spacing_x_m;
    arr.validate();
    return arr;
}

UserLink UserLink::from_angles(double theta_x, double theta_y, double gamma, double kappa,
                               double qos_rate_bps) {
    UserLink link;
    link.theta_x = theta_x;
    link.theta_y = theta_y;
    link.u_x = std::sin(theta_y) * std::cos(theta_x);
    link.u_y = std::cos(theta_y);
    link.gamma = gamma;
    link.kappa = kappa;
    link.qos_rate_bps = qos_rate_bps;
    return link;
}

CVector axis_response(int n, double spacing_m, double u, double carrier_hz) {
    if (n < 1) throw PreconditionError("axis response needs n >= 1");
    CVector v(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double step = -2.0 * kPi * carrier_hz * spacing_m * u / kSpeedOfLight;
    for (int m = 0; m < n; ++m) v[m] = std::polar(scale, step * m);
    return v;
}

CVector upa_response(const ArrayGeometry& arr, const UserLink& link) {
    const CVector vx = axis_response(arr.n_x, arr.spacing_x_m, link.u_x, arr.carrier_hz);
    const CVector vy = axis_response(arr.n_y, arr.spacing_y_m, link.u_y, arr.carrier_hz);
    CVector v(arr.n_t());
    for (int i = 0; i < arr.n_x; ++i) {
        v.segment(static_cast<Eigen::Index>(i) * arr.n_y, arr.n_y) = vx[i] * vy;
    }
    return v;
}

double mean_channel_power(const ArrayGeometry& arr, double g_tx_db, double g_rx_db,
                          double altitude_m) {
    if (!(altitude_m > 0.0)) throw PreconditionError("altitude must be positive");
    const double fspl = kSpeedOfLight / (4.0 * kPi * arr.carrier_hz * altitude_m);
    return db_to_linear(g_tx_db) * db_to_linear(g_rx_db) * arr.n_t() * fspl * fspl;
}

double thermal_noise_power(double bandwidth_hz, double noise_figure_db, double temperature_k) {
    return kBoltzmann * temperature_k * bandwidth_hz * db_to_linear(noise_figure_db);
}

RicianSampler::RicianSampler(double gamma, double kappa, std::uint64_t seed)
    : los_amplitude_(std::sqrt(gamma * kappa / (kappa + 1.0))),
      scatter_sigma_(std::sqrt(gamma / (kappa + 1.0) / 2.0)),
      rng_(seed) {
    if (!(gamma > 0.0)) throw PreconditionError("Rician power must be positive");
    if (!(kappa >= 0.0)) throw PreconditionError("Rician factor must be non-negative");
}

Complex RicianSampler::next() {
    const double re = normal_(rng_);
    const double im = normal_(rng_);
    return {los_amplitude_ + scatter_sigma_ * re, scatter_sigma_ * im};
}

Complex sample_rician(double gamma, double kappa, std::uint64_t seed) {
    RicianSampler sampler(gamma, kappa, seed);
    return sampler.next();
}

ChannelDraw draw_channel(const CVector& steering, RicianSampler& sampler) {
    ChannelDraw d;
    d.g = sampler.next();
    d.h = steering * d.g;
    return d;
}

double instantaneous_sinr(std::span<const CVector> beams, std::size_t k, const CVector& h_k,
                          double n0_w) {
    if (k >= beams.size()) throw DimensionError("user index outside beam set");
    if (!(n0_w > 0.0)) throw PreconditionError("noise power must be positive");
    double interference = 0.0;
    double signal = 0.0;
    for (std::size_t l = 0; l < beams.size(); ++l) {
        if (beams[l].size() != h_k.size()) throw DimensionError("beam and channel sizes differ");
        const double gain = std::norm(beams[l].dot(h_k));  // dot() conjugates the left operand
        if (l == k) {
            signal = gain;
        } else {
            interference += gain;
        }
    }
    return signal / (interference + n0_w);
}

std::vector<AngleDraw> synthesize_user_angles(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ax(-60.0, 60.0);
    std::uniform_real_distribution<double> ay(20.0, 70.0);
    std::vector<AngleDraw> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double tx = ax(rng);
        const double ty = ay(rng);
        out.push_back({tx * kPi / 180.0, ty * kPi / 180.0});
    }
    return out;
}

}  // namespace hap::channel
