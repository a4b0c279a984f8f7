#pragma once

#include <span>

namespace hap {

// Standard-atmosphere state at a fixed altitude.
struct Atmosphere {
    double altitude_m = 0.0;
    double rho = 0.0;  // kg/m^3
    double mu = 0.0;   // Pa s
};

// Hull geometry and drive-train efficiency of the airship.
struct PlatformGeometry {
    double length_m = 0.0;
    double width_m = 0.0;
    double volume_m3 = 0.0;
    double tail_correction_kf = 1.0;
    double motor_eff = 1.0;

    double slenderness() const noexcept { return length_m / width_m; }
    void validate() const;
};

// Every non-RF power sink on the platform plus the amplifier inefficiency.
struct PowerLedger {
    double p_hap_w = 0.0;
    double p_payload_w = 0.0;
    double p_standby_w = 0.0;
    double p_rfc_w = 0.0;  // per RF chain
    double p_lo_w = 0.0;
    double p_bb_w = 0.0;
    double xi = 1.0;       // PA inefficiency factor
    int n_t = 0;           // antenna count (fully digital: one chain per antenna)

    void validate() const;
};

inline constexpr double kIsaMinAltitudeM = 0.0;
inline constexpr double kIsaMaxAltitudeM = 32000.0;

// ISA-1976 density and viscosity at a geopotential altitude in [0, 32] km.
// Tabulated at 1 km and linearly interpolated; the 20 km row carries the
// rounded values used throughout the platform model (rho = 0.08803,
// mu = 1.4216e-5). Throws RangeError outside the table.
Atmosphere isa_properties(double altitude_m);

// Static circuit power P_t = N_t P_RFC + P_LO + P_BB.
double static_comm_power(const PowerLedger& ledger);

// RF transmit budget left after propulsion, payload, standby and static
// circuit power, divided by the PA inefficiency. Throws
// InfeasibleBudgetError (with the deficit) if the sinks exceed P_HAP.
double rf_budget(const PowerLedger& ledger, double p_prop_w);

// Total communication power xi * sum_k p_k^2 ||w_k||^2 + P_t.
double total_comm_power(std::span<const double> p, std::span<const double> w_norms_sq,
                        const PowerLedger& ledger);

}  // namespace hap
