#include "hap/bemt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hap/error.hpp"

namespace hap::bemt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

}  // namespace

Table1D::Table1D(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2) {
        throw PreconditionError("table needs at least two (x, y) pairs of equal length");
    }
    for (std::size_t i = 1; i < x_.size(); ++i) {
        if (!(x_[i] > x_[i - 1])) throw PreconditionError("table abscissae must be increasing");
    }
}

double Table1D::operator()(double x) const {
    if (x_.empty()) throw PreconditionError("lookup in empty table");
    if (x < x_.front() || x > x_.back()) {
        throw RangeError("table lookup at " + std::to_string(x) + " outside [" +
                         std::to_string(x_.front()) + ", " + std::to_string(x_.back()) + "]");
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.end()) return y_.back();
    const auto i = static_cast<std::size_t>(it - x_.begin());
    const double t = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return y_[i - 1] + t * (y_[i] - y_[i - 1]);
}

AirfoilPolar::AirfoilPolar(const std::vector<PolarPoint>& points) {
    std::vector<double> a;
    std::vector<double> cl;
    std::vector<double> cd;
    for (const auto& p : points) {
        a.push_back(p.alpha_deg);
        cl.push_back(p.cl);
        cd.push_back(p.cd);
    }
    cl_ = Table1D(a, std::move(cl));
    cd_ = Table1D(std::move(a), std::move(cd));
}

AirfoilPolar::Coefficients AirfoilPolar::at(double alpha_rad) const {
    const double deg = alpha_rad / kDeg;
    return {cl_(deg), cd_(deg)};
}

PropellerSpec PropellerSpec::from_stations(int n_blades, const std::vector<BladeStation>& stations,
                                           AirfoilPolar polar) {
    if (stations.size() < 2) throw PreconditionError("blade needs at least two stations");
    std::vector<double> r;
    std::vector<double> chord;
    std::vector<double> pitch;
    for (const auto& s : stations) {
        r.push_back(s.r_m);
        chord.push_back(s.chord_m);
        pitch.push_back(s.pitch_deg * kDeg);
    }
    PropellerSpec spec;
    spec.n_blades = n_blades;
    spec.r_hub_m = r.front();
    spec.r_tip_m = r.back();
    spec.chord_m = Table1D(r, std::move(chord));
    spec.pitch_rad = Table1D(std::move(r), std::move(pitch));
    spec.polar = std::move(polar);
    spec.validate();
    return spec;
}

void PropellerSpec::validate() const {
    if (n_blades < 1) throw PreconditionError("propeller needs at least one blade");
    if (!(r_hub_m > 0.0 && r_hub_m < r_tip_m)) {
        throw PreconditionError("propeller radii require 0 < r_hub < r_tip");
    }
    if (chord_m.empty() || pitch_rad.empty()) throw PreconditionError("blade tables missing");
    if (chord_m.x_min() > r_hub_m || chord_m.x_max() < r_tip_m) {
        throw PreconditionError("chord table does not span [r_hub, r_tip]");
    }
    if (pitch_rad.x_min() > r_hub_m || pitch_rad.x_max() < r_tip_m) {
        throw PreconditionError("pitch table does not span [r_hub, r_tip]");
    }
    if (polar.alpha_min_deg() > -15.0 || polar.alpha_max_deg() < 20.0) {
        throw PreconditionError("airfoil polar must cover at least [-15, 20] deg");
    }
}

PropellerSpec default_test_propeller() {
    constexpr double r_hub = 0.3;
    constexpr double r_tip = 3.0;
    std::vector<BladeStation> stations;
    constexpr int n_stations = 28;
    for (int i = 0; i < n_stations; ++i) {
        const double t = static_cast<double>(i) / (n_stations - 1);
        stations.push_back({r_hub + t * (r_tip - r_hub), 0.35 + t * (0.12 - 0.35),
                            35.0 + t * (12.0 - 35.0)});
    }
    std::vector<PolarPoint> polar;
    for (int i = -90; i <= 90; ++i) {
        const double deg = 0.5 * i;
        const double a = deg * kDeg;
        polar.push_back({deg, 2.0 * kPi * std::sin(a) * std::cos(a), 0.008 + 0.01 * a * a});
    }
    return PropellerSpec::from_stations(3, stations, AirfoilPolar(polar));
}

double tip_loss(int n_blades, double r_m, double r_tip_m, double phi0) {
    if (!(r_m > 0.0 && r_m <= r_tip_m)) throw PreconditionError("tip loss needs 0 < r <= R");
    if (!(phi0 > 0.0 && phi0 < kPi / 2.0)) {
        throw PreconditionError("tip loss needs inflow angle in (0, pi/2)");
    }
    const double f = n_blades * (r_tip_m - r_m) / (2.0 * r_m * std::sin(phi0));
    return 2.0 / kPi * std::acos(std::exp(-f));
}

namespace {

double force_coefficient(double phi, double cl, double cd) {
    return cl * std::cos(phi) - cd * std::sin(phi);
}

// Loading ratio x = 4 K sin^2(phi) / (sigma C); a = 1 / (x - 1).
double loading_ratio(double sigma, double phi, double c_force, double k_p) {
    const double s = std::sin(phi);
    return 4.0 * k_p * s * s / (sigma * c_force);
}

}  // namespace

double axial_induction(double sigma, double phi, double cl, double cd, double k_p) {
    const double c_force = force_coefficient(phi, cl, cd);
    if (!(c_force > 0.0)) {
        throw SectionError("non-propulsive section: cl cos(phi) - cd sin(phi) <= 0", 0.0);
    }
    return 1.0 / (loading_ratio(sigma, phi, c_force, k_p) - 1.0);
}

namespace {

struct SectionContext {
    const PropellerSpec& spec;
    double v0;
    double omega_r;  // 2 pi n_s r
    double theta;
    double sigma;
    double k_p;
    double r;

    struct Eval {
        double phi;
        double alpha;
        double cl;
        double cd;
        double c_force;
        double x;  // loading ratio, +inf when c_force <= 0
    };

    Eval eval(double a) const {
        Eval e{};
        e.phi = std::atan2(v0 * (1.0 + a), omega_r);
        e.alpha = theta - e.phi;
        // Induction large enough to push the section below the tabulated
        // angles lies on the unloaded side of the balance; the bracket
        // expansion can step there before bisection pulls it back.
        if (e.alpha < spec.polar.alpha_min_deg() * kPi / 180.0) {
            e.cl = 0.0;
            e.cd = 0.0;
            e.c_force = 0.0;
            e.x = std::numeric_limits<double>::infinity();
            return e;
        }
        const auto coeffs = spec.polar.at(e.alpha);
        e.cl = coeffs.cl;
        e.cd = coeffs.cd;
        e.c_force = force_coefficient(e.phi, e.cl, e.cd);
        e.x = e.c_force > 0.0 ? loading_ratio(sigma, e.phi, e.c_force, k_p)
                              : std::numeric_limits<double>::infinity();
        return e;
    }

    // Induction implied by the balance at the current guess.
    double induction(const Eval& e) const { return 1.0 / (e.x - 1.0); }
};

SectionState make_state(const SectionContext& ctx, double a, const SectionContext::Eval& e,
                        int iterations) {
    SectionState s;
    s.r_m = ctx.r;
    s.phi = e.phi;
    s.alpha = e.alpha;
    s.a_a = a;
    s.sigma = ctx.sigma;
    s.k_p = ctx.k_p;
    s.cl = e.cl;
    s.cd = e.cd;
    s.iterations = iterations;
    s.residual = std::abs(ctx.induction(e) - a);
    return s;
}

}  // namespace

SectionState solve_section(const PropellerSpec& spec, double v0_mps, double n_s, double r_m,
                           const SolverOptions& opts) {
    if (!(r_m >= spec.r_hub_m && r_m <= spec.r_tip_m)) {
        throw PreconditionError("section radius outside [r_hub, r_tip]");
    }
    if (!(v0_mps > 0.0 && n_s > 0.0)) {
        throw PreconditionError("section solve needs positive airspeed and rotational speed");
    }
    const double omega_r = 2.0 * kPi * n_s * r_m;
    const double phi0 = std::atan2(v0_mps, omega_r);
    const double sigma = spec.n_blades * spec.chord_m(r_m) / (2.0 * kPi * r_m);
    const double k_p = tip_loss(spec.n_blades, r_m, spec.r_tip_m, phi0);

    SectionContext ctx{spec, v0_mps, omega_r, spec.pitch_rad(r_m), sigma, k_p, r_m};

    if (k_p < opts.tip_loss_floor) {
        SectionState tip;
        tip.r_m = r_m;
        tip.phi = phi0;
        tip.alpha = ctx.theta - phi0;
        tip.sigma = sigma;
        tip.k_p = k_p;
        tip.unloaded = true;
        return tip;
    }

    const auto start = ctx.eval(0.0);
    if (!(start.c_force > 0.0)) {
        throw SectionError("non-propulsive section at r = " + std::to_string(r_m) + " m", r_m);
    }

    // Damped fixed-point iteration on the physical branch a > 0.
    double a = 0.0;
    double prev_residual = std::numeric_limits<double>::infinity();
    int growth = 0;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const auto e = ctx.eval(a);
        if (!(e.x > 1.0)) break;
        const double target = ctx.induction(e);
        const double residual = std::abs(target - a);
        if (residual < opts.tolerance) return make_state(ctx, a, e, it);
        growth = residual >= prev_residual ? growth + 1 : 0;
        if (growth >= 3) break;  // oscillating
        prev_residual = residual;
        const double next = a + opts.relaxation * (target - a);
        if (!(next > 0.0)) break;
        a = next;
    }

    // Bisection on h(a) = a (x(a) - 1) - 1, which is -1 at a = 0 and grows
    // without bound as the section unloads; no pole on the bracket.
    auto h = [&](double aa) {
        const auto e = ctx.eval(aa);
        return std::isinf(e.x) ? std::numeric_limits<double>::infinity() : aa * (e.x - 1.0) - 1.0;
    };
    double lo = 0.0;
    double hi = 0.5;
    int expansions = 0;
    while (h(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 60) {
            throw ConvergenceError("induction bracket expansion failed at r = " +
                                       std::to_string(r_m) + " m",
                                   std::abs(h(hi)));
        }
    }
    int bis = 0;
    for (; bis < opts.max_iterations && hi - lo > 1e-15 * std::max(1.0, hi); ++bis) {
        const double mid = 0.5 * (lo + hi);
        if (h(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    a = 0.5 * (lo + hi);
    const auto e = ctx.eval(a);
    SectionState state = make_state(ctx, a, e, it + bis);
    if (!(e.c_force > 0.0)) {
        throw SectionError("non-propulsive section at r = " + std::to_string(r_m) + " m", r_m);
    }
    if (!(state.residual < std::max(opts.tolerance, 1e-6))) {
        throw ConvergenceError("induction fixed point not converged at r = " +
                                   std::to_string(r_m) + " m",
                               state.residual);
    }
    return state;
}

PropellerOperatingPoint propeller_performance(const PropellerSpec& spec, const Atmosphere& atm,
                                              double v0_mps, double n_s,
                                              const SolverOptions& opts) {
    spec.validate();
    if (opts.quadrature_nodes < 3 || opts.quadrature_nodes % 2 == 0) {
        throw PreconditionError("Simpson quadrature needs an odd node count >= 3");
    }
    const std::size_t n = opts.quadrature_nodes;
    const double span = spec.r_tip_m - spec.r_hub_m;
    const double ds = 1.0 / static_cast<double>(n - 1);

    std::vector<double> thrust_f(n, 0.0);
    std::vector<double> torque_f(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) * ds;
        const double t = 1.0 - s;
        const double r = i == 0       ? spec.r_hub_m
                         : i + 1 == n ? spec.r_tip_m
                                      : spec.r_tip_m - span * t * t;
        const double jac = 2.0 * span * t;
        const SectionState st = solve_section(spec, v0_mps, n_s, r, opts);
        if (st.unloaded) continue;
        const double sin_phi = std::sin(st.phi);
        const double cos_phi = std::cos(st.phi);
        const double w = spec.chord_m(r) * (1.0 + st.a_a) * (1.0 + st.a_a) / (sin_phi * sin_phi) * jac;
        thrust_f[i] = (st.cl * cos_phi - st.cd * sin_phi) * w;
        torque_f[i] = (st.cl * sin_phi + st.cd * cos_phi) * w * r;
    }

    double thrust_sum = 0.0;
    double torque_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double weight = (i == 0 || i + 1 == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        thrust_sum += weight * thrust_f[i];
        torque_sum += weight * torque_f[i];
    }
    thrust_sum *= ds / 3.0;
    torque_sum *= ds / 3.0;

    PropellerOperatingPoint op;
    op.v0_mps = v0_mps;
    op.n_s = n_s;
    op.thrust_n = 0.5 * atm.rho * v0_mps * v0_mps * spec.n_blades * thrust_sum;
    op.shaft_power_w = kPi * n_s * atm.rho * v0_mps * v0_mps * spec.n_blades * torque_sum;
    op.eta_p = op.shaft_power_w > 0.0 ? op.thrust_n * v0_mps / op.shaft_power_w : 0.0;
    return op;
}

}  // namespace hap::bemt
