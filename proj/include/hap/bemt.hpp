#pragma once

#include <cstddef>
#include <vector>

#include "hap/config.hpp"

namespace hap::bemt {

// Piecewise-linear lookup y(x) over strictly increasing abscissae.
class Table1D {
public:
    Table1D() = default;
    Table1D(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

struct PolarPoint {
    double alpha_deg = 0.0;
    double cl = 0.0;
    double cd = 0.0;
};

// Sectional lift/drag coefficients versus angle of attack. Lookups outside the
// tabulated range throw RangeError.
class AirfoilPolar {
public:
    AirfoilPolar() = default;
    explicit AirfoilPolar(const std::vector<PolarPoint>& points);

    struct Coefficients {
        double cl;
        double cd;
    };
    Coefficients at(double alpha_rad) const;
    double alpha_min_deg() const { return cl_.x_min(); }
    double alpha_max_deg() const { return cl_.x_max(); }

private:
    Table1D cl_;
    Table1D cd_;
};

struct BladeStation {
    double r_m = 0.0;
    double chord_m = 0.0;
    double pitch_deg = 0.0;
};

struct PropellerSpec {
    int n_blades = 0;
    double r_hub_m = 0.0;
    double r_tip_m = 0.0;
    Table1D chord_m;    // r -> b(r)
    Table1D pitch_rad;  // r -> geometric pitch
    AirfoilPolar polar;

    // Builds a spec whose hub and tip are the first and last stations.
    static PropellerSpec from_stations(int n_blades, const std::vector<BladeStation>& stations,
                                       AirfoilPolar polar);
    void validate() const;
};

// 3 blades, 0.3 m hub, 3 m tip, linear chord 0.35 -> 0.12 m, linear twist
// 35 -> 12 deg, thin-airfoil polar cl = 2 pi sin(a) cos(a),
// cd = 0.008 + 0.01 a^2, tabulated on [-45, 45] deg at 0.5 deg.
// A test fixture: only blade count and radius describe the real propeller.
PropellerSpec default_test_propeller();

struct SectionState {
    double r_m = 0.0;
    double phi = 0.0;    // inflow angle, rad
    double alpha = 0.0;  // angle of attack, rad
    double a_a = 0.0;    // axial induction
    double sigma = 0.0;  // local solidity
    double k_p = 0.0;    // tip-loss factor
    double cl = 0.0;
    double cd = 0.0;
    bool unloaded = false;  // tip boundary: zero loading by convention
    int iterations = 0;
    double residual = 0.0;  // |a_a - induction(a_a)| at exit
};

struct PropellerOperatingPoint {
    double v0_mps = 0.0;
    double n_s = 0.0;  // rev/s
    double thrust_n = 0.0;
    double shaft_power_w = 0.0;
    double eta_p = 0.0;
};

struct SolverOptions {
    double relaxation = 0.5;
    double tolerance = 1e-10;
    int max_iterations = 200;
    double tip_loss_floor = 1e-6;
    std::size_t quadrature_nodes = 101;  // odd
};

// Prandtl tip-loss factor K_p = (2/pi) acos(exp(-N_b (R - r) / (2 r sin phi0))).
double tip_loss(int n_blades, double r_m, double r_tip_m, double phi0);

// Axial induction factor from the blade-element / momentum balance.
// Throws SectionError when cl cos(phi) - cd sin(phi) <= 0.
double axial_induction(double sigma, double phi, double cl, double cd, double k_p);

// Fixed point of the induction balance at one radius. Damped iteration first,
// then bisection on a*(x(a) - 1) - 1 over a > 0 when the iteration oscillates
// or leaves the physical branch. Throws SectionError for a non-propulsive
// section and ConvergenceError if the residual stays above tolerance.
SectionState solve_section(const PropellerSpec& spec, double v0_mps, double n_s, double r_m,
                           const SolverOptions& opts = {});

// Thrust and shaft power by Simpson quadrature over the span, with the radial
// coordinate mapped as r = R - (R - r0)(1 - s)^2 so the square-root tip-loss
// behaviour becomes smooth in s.
PropellerOperatingPoint propeller_performance(const PropellerSpec& spec, const Atmosphere& atm,
                                              double v0_mps, double n_s,
                                              const SolverOptions& opts = {});

}  // namespace hap::bemt
