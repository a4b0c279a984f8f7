#include "hap/config.hpp"

#include <array>
#include <cmath>
#include <string>

#include "hap/error.hpp"

namespace hap {

namespace {

struct IsaRow {
    double altitude_m;
    double rho;
    double mu;
};

// Geopotential altitude, U.S. Standard Atmosphere 1976; mu from Sutherland's law.
constexpr std::array<IsaRow, 33> kIsaTable{{
    {0.0, 1.225, 1.7894e-05},
    {1000.0, 1.11164, 1.7578e-05},
    {2000.0, 1.00649, 1.726e-05},
    {3000.0, 0.909122, 1.6937e-05},
    {4000.0, 0.819129, 1.6611e-05},
    {5000.0, 0.736116, 1.6281e-05},
    {6000.0, 0.659697, 1.5947e-05},
    {7000.0, 0.589501, 1.561e-05},
    {8000.0, 0.525167, 1.5268e-05},
    {9000.0, 0.466348, 1.4922e-05},
    {10000.0, 0.412706, 1.4571e-05},
    {11000.0, 0.363918, 1.4216e-05},
    {12000.0, 0.310828, 1.4216e-05},
    {13000.0, 0.265483, 1.4216e-05},
    {14000.0, 0.226753, 1.4216e-05},
    {15000.0, 0.193673, 1.4216e-05},
    {16000.0, 0.16542, 1.4216e-05},
    {17000.0, 0.141287, 1.4216e-05},
    {18000.0, 0.120676, 1.4216e-05},
    {19000.0, 0.103071, 1.4216e-05},
    {20000.0, 0.08803, 1.4216e-05},  // pinned to the platform constants
    {21000.0, 0.0748735, 1.4271e-05},
    {22000.0, 0.0637272, 1.4326e-05},
    {23000.0, 0.0542801, 1.4381e-05},
    {24000.0, 0.0462672, 1.4435e-05},
    {25000.0, 0.0394657, 1.449e-05},
    {26000.0, 0.0336882, 1.4544e-05},
    {27000.0, 0.0287768, 1.4598e-05},
    {28000.0, 0.0245987, 1.4652e-05},
    {29000.0, 0.021042, 1.4706e-05},
    {30000.0, 0.0180119, 1.476e-05},
    {31000.0, 0.0154287, 1.4814e-05},
    {32000.0, 0.013225, 1.4868e-05},
}};

}  // namespace

void PlatformGeometry::validate() const {
    if (!(width_m > 0.0 && length_m > width_m)) {
        throw PreconditionError("platform geometry requires length > width > 0");
    }
    if (!(volume_m3 > 0.0)) throw PreconditionError("platform volume must be positive");
    if (!(tail_correction_kf >= 1.0)) throw PreconditionError("tail correction K_F must be >= 1");
    if (!(motor_eff > 0.0 && motor_eff <= 1.0)) {
        throw PreconditionError("motor efficiency must lie in (0, 1]");
    }
}

void PowerLedger::validate() const {
    for (double p : {p_hap_w, p_payload_w, p_standby_w, p_rfc_w, p_lo_w, p_bb_w}) {
        if (!(p >= 0.0)) throw PreconditionError("ledger powers must be non-negative");
    }
    if (!(xi >= 1.0)) throw PreconditionError("PA inefficiency xi must be >= 1");
    if (n_t < 0) throw PreconditionError("antenna count must be non-negative");
}

Atmosphere isa_properties(double altitude_m) {
    if (!(altitude_m >= kIsaMinAltitudeM && altitude_m <= kIsaMaxAltitudeM)) {
        throw RangeError("altitude " + std::to_string(altitude_m) +
                         " m outside ISA table [0, 32000] m");
    }
    const auto idx = static_cast<std::size_t>(altitude_m / 1000.0);
    if (idx + 1 >= kIsaTable.size()) {
        const auto& top = kIsaTable.back();
        return {altitude_m, top.rho, top.mu};
    }
    const auto& lo = kIsaTable[idx];
    const auto& hi = kIsaTable[idx + 1];
    const double t = (altitude_m - lo.altitude_m) / (hi.altitude_m - lo.altitude_m);
    if (t == 0.0) return {altitude_m, lo.rho, lo.mu};
    return {altitude_m, lo.rho + t * (hi.rho - lo.rho), lo.mu + t * (hi.mu - lo.mu)};
}

double static_comm_power(const PowerLedger& ledger) {
    return static_cast<double>(ledger.n_t) * ledger.p_rfc_w + ledger.p_lo_w + ledger.p_bb_w;
}

double rf_budget(const PowerLedger& ledger, double p_prop_w) {
    const double numerator = ledger.p_hap_w - p_prop_w - ledger.p_payload_w -
                             ledger.p_standby_w - static_comm_power(ledger);
    if (numerator < 0.0) {
        throw InfeasibleBudgetError("platform power sinks exceed supply by " +
                                        std::to_string(-numerator) + " W",
                                    -numerator);
    }
    return numerator / ledger.xi;
}

double total_comm_power(std::span<const double> p, std::span<const double> w_norms_sq,
                        const PowerLedger& ledger) {
    if (p.size() != w_norms_sq.size()) {
        throw DimensionError("coefficient and beam-norm vectors differ in length");
    }
    double rf = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) rf += p[k] * p[k] * w_norms_sq[k];
    return ledger.xi * rf + static_comm_power(ledger);
}

}  // namespace hap
