#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hap/config.hpp"

namespace hap {

// Inverse-power propeller-efficiency surrogate eta(V0) = c - alpha * V0^-beta.
struct SurrogateCoeffs {
    double c = 0.73;
    double alpha = 0.2;
    double beta = 0.45;
    double rmse = 0.0;
    std::size_t n_samples = 0;
};

// Coefficients identified from the reference CFD sweep of the finalized platform.
inline constexpr SurrogateCoeffs kPlatformSurrogate{0.73, 0.2, 0.45, 0.0, 0};

// Lowest airspeed covered by the CFD samples; the surrogate diverges below it.
inline constexpr double kSurrogateMinAirspeedMps = 1.0;

struct EfficiencySample {
    double v0_mps = 0.0;
    double eta_p = 0.0;
};

double reynolds(const Atmosphere& atm, double v0_mps, double length_m);

// Hull drag coefficient from slenderness and Reynolds number.
double hull_drag_coefficient(double slenderness, double reynolds_number);

// Aerodynamic drag T = 0.5 rho V0^2 C_DV Omega^(2/3) K_F, newtons.
double aerodynamic_drag(const Atmosphere& atm, const PlatformGeometry& geom, double v0_mps);

// Throws RangeError for v0 below the fit floor.
double surrogate_efficiency(const SurrogateCoeffs& coeffs, double v0_mps);

struct SurrogateFitOptions {
    double beta_lo = 0.05;
    double beta_hi = 3.0;
    double beta_tol = 1e-8;
};

// Least-squares fit of (c, alpha, beta). For fixed beta the model is linear in
// (c, alpha); beta is found by golden-section search on the profiled residual.
// Throws FitError for fewer than four samples or fewer than four distinct speeds.
SurrogateCoeffs fit_inverse_power_surrogate(std::span<const EfficiencySample> samples,
                                            const SurrogateFitOptions& opts = {});

// P_prop = T V0 / (eta_hat(V0) eta_m).
double propulsion_power(const Atmosphere& atm, const PlatformGeometry& geom, double v0_mps,
                        const SurrogateCoeffs& coeffs);

// Same quantity evaluated through the closed form with the slenderness and
// Reynolds dependence expanded into powers of rho, mu, V0, l and d.
double propulsion_power_expanded(const Atmosphere& atm, const PlatformGeometry& geom,
                                 double v0_mps, const SurrogateCoeffs& coeffs);

// Constant-efficiency model T V0 / (eta_p eta_m), kept for side-by-side comparison.
double propulsion_power_constant_eta(const Atmosphere& atm, const PlatformGeometry& geom,
                                     double v0_mps, double eta_p);

}  // namespace hap
