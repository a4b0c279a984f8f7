#include "hap/propulsion.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "hap/error.hpp"

namespace hap {

double reynolds(const Atmosphere& atm, double v0_mps, double length_m) {
    if (!(v0_mps > 0.0) || !(length_m > 0.0)) {
        throw PreconditionError("Reynolds number needs positive airspeed and length");
    }
    return atm.rho * v0_mps * length_m / atm.mu;
}

double hull_drag_coefficient(double slenderness, double reynolds_number) {
    if (!(slenderness > 0.0) || !(reynolds_number > 0.0)) {
        throw PreconditionError("hull drag coefficient needs positive slenderness and Re");
    }
    const double e = slenderness;
    const double shape = 0.18 * std::pow(e, 0.3) + 0.27 * std::pow(e, -1.2) +
                         1.08 * std::pow(e, -2.7);
    return shape / std::pow(reynolds_number, 1.0 / 6.0);
}

double aerodynamic_drag(const Atmosphere& atm, const PlatformGeometry& geom, double v0_mps) {
    if (!(v0_mps > 0.0)) throw PreconditionError("airspeed must be positive");
    const double re = reynolds(atm, v0_mps, geom.length_m);
    const double cdv = hull_drag_coefficient(geom.slenderness(), re);
    return 0.5 * atm.rho * v0_mps * v0_mps * cdv * std::cbrt(geom.volume_m3 * geom.volume_m3) *
           geom.tail_correction_kf;
}

double surrogate_efficiency(const SurrogateCoeffs& coeffs, double v0_mps) {
    if (!(v0_mps >= kSurrogateMinAirspeedMps)) {
        throw RangeError("airspeed " + std::to_string(v0_mps) +
                         " m/s below surrogate fit range (>= 1 m/s)");
    }
    return coeffs.c - coeffs.alpha * std::pow(v0_mps, -coeffs.beta);
}

namespace {

struct LinearFit {
    double c = 0.0;
    double alpha = 0.0;
    double sse = 0.0;
};

// Closed-form least squares for eta = c - alpha * x with x = V0^-beta.
LinearFit fit_linear_part(std::span<const EfficiencySample> samples, double beta) {
    const auto n = static_cast<double>(samples.size());
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& s : samples) {
        sx += std::pow(s.v0_mps, -beta);
        sy += s.eta_p;
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& s : samples) {
        const double dx = std::pow(s.v0_mps, -beta) - mx;
        sxx += dx * dx;
        sxy += dx * (s.eta_p - my);
    }
    LinearFit fit;
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.alpha = -slope;
    fit.c = my - slope * mx;
    for (const auto& s : samples) {
        const double r = s.eta_p - (fit.c - fit.alpha * std::pow(s.v0_mps, -beta));
        fit.sse += r * r;
    }
    return fit;
}

}  // namespace

SurrogateCoeffs fit_inverse_power_surrogate(std::span<const EfficiencySample> samples,
                                            const SurrogateFitOptions& opts) {
    if (samples.size() < 4) {
        throw FitError("surrogate fit needs at least 4 samples, got " +
                       std::to_string(samples.size()));
    }
    std::set<double> speeds;
    for (const auto& s : samples) {
        if (!(s.v0_mps > 0.0)) throw FitError("sample airspeeds must be positive");
        speeds.insert(s.v0_mps);
    }
    if (speeds.size() < 4) throw FitError("surrogate fit needs at least 4 distinct airspeeds");

    // Golden-section search on the profiled sum of squares.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = opts.beta_lo;
    double b = opts.beta_hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = fit_linear_part(samples, x1).sse;
    double f2 = fit_linear_part(samples, x2).sse;
    while (b - a > opts.beta_tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = fit_linear_part(samples, x1).sse;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = fit_linear_part(samples, x2).sse;
        }
    }
    const double beta = 0.5 * (a + b);
    const LinearFit best = fit_linear_part(samples, beta);

    SurrogateCoeffs out;
    out.c = best.c;
    out.alpha = best.alpha;
    out.beta = beta;
    out.n_samples = samples.size();
    out.rmse = std::sqrt(best.sse / static_cast<double>(samples.size()));
    return out;
}

double propulsion_power(const Atmosphere& atm, const PlatformGeometry& geom, double v0_mps,
                        const SurrogateCoeffs& coeffs) {
    const double eta = surrogate_efficiency(coeffs, v0_mps);
    return aerodynamic_drag(atm, geom, v0_mps) * v0_mps / (eta * geom.motor_eff);
}

double propulsion_power_expanded(const Atmosphere& atm, const PlatformGeometry& geom,
                                 double v0_mps, const SurrogateCoeffs& coeffs) {
    const double eta = surrogate_efficiency(coeffs, v0_mps);
    const double l = geom.length_m;
    const double d = geom.width_m;
    const double shape = 0.18 * std::pow(l, 2.0 / 15.0) * std::pow(d, -0.3) +
                         0.27 * std::pow(l, -41.0 / 30.0) * std::pow(d, 1.2) +
                         1.08 * std::pow(l, -43.0 / 15.0) * std::pow(d, 2.7);
    return 0.5 * std::pow(atm.rho, 5.0 / 6.0) * std::pow(v0_mps, 17.0 / 6.0) *
           std::pow(atm.mu, 1.0 / 6.0) * std::pow(geom.volume_m3, 2.0 / 3.0) / geom.motor_eff *
           geom.tail_correction_kf * shape / eta;
}

double propulsion_power_constant_eta(const Atmosphere& atm, const PlatformGeometry& geom,
                                     double v0_mps, double eta_p) {
    if (!(eta_p > 0.0 && eta_p <= 1.0)) {
        throw PreconditionError("constant propeller efficiency must lie in (0, 1]");
    }
    return aerodynamic_drag(atm, geom, v0_mps) * v0_mps / (eta_p * geom.motor_eff);
}

}  // namespace hap
