#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hap/beamforming.hpp"
#include "hap/channel.hpp"

namespace hap {

// A downlink scenario under statistical CSI: the array, the users and the
// noise/bandwidth pair that defines the surrogate rate.
struct Scenario {
    channel::ArrayGeometry array;
    std::vector<channel::UserLink> users;
    double bw_hz = 10e6;
    double n0_w = 0.0;

    std::size_t users_count() const { return users.size(); }
    Eigen::MatrixXcd steering_matrix() const;  // N_t x K
    RateModel rate_model() const;
    std::vector<double> qos_bps() const;
    void validate() const;
};

}  // namespace hap
