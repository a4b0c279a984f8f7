#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hap {

inline constexpr double kMaxGramCondition = 1e8;

// Zero-forcing precoder W = V (V^H V)^-1 for a set of steering vectors.
struct ZfBeamformer {
    Eigen::MatrixXcd w;               // N_t x K, column k is w_k
    std::vector<double> w_norms_sq;   // ||w_k||^2
    double gram_condition = 1.0;      // condition number of V^H V

    std::size_t users() const { return w_norms_sq.size(); }
};

// Statistical rate model: R_k = B_w log2(1 + gamma_k p_k^2 / N_0), in bps.
struct RateModel {
    double bw_hz = 0.0;
    double n0_w = 0.0;
    std::vector<double> gammas;

    void validate() const;
};

// Steering vectors as columns of an N_t x K matrix. Throws ConditioningError
// when the Gram matrix is singular or its condition number reaches 1e8.
ZfBeamformer zf_beamformer(const Eigen::MatrixXcd& steering);

double surrogate_rate(double p, double gamma, const RateModel& model);

// Smallest coefficient meeting a rate target under the surrogate rate.
double min_power_coefficient(double qos_bps, double gamma, const RateModel& model);

// Sum rate over communication power, bps/W.
double energy_efficiency(std::span<const double> rates_bps, double p_com_w);

}  // namespace hap
