#include "hap/scenario.hpp"

#include "hap/error.hpp"

namespace hap {

Eigen::MatrixXcd Scenario::steering_matrix() const {
    Eigen::MatrixXcd v(array.n_t(), static_cast<Eigen::Index>(users.size()));
    for (std::size_t k = 0; k < users.size(); ++k) {
        v.col(static_cast<Eigen::Index>(k)) = channel::upa_response(array, users[k]);
    }
    return v;
}

RateModel Scenario::rate_model() const {
    RateModel m;
    m.bw_hz = bw_hz;
    m.n0_w = n0_w;
    m.gammas.reserve(users.size());
    for (const auto& u : users) m.gammas.push_back(u.gamma);
    return m;
}

std::vector<double> Scenario::qos_bps() const {
    std::vector<double> q;
    q.reserve(users.size());
    for (const auto& u : users) q.push_back(u.qos_rate_bps);
    return q;
}

void Scenario::validate() const {
    array.validate();
    if (users.empty()) throw PreconditionError("scenario has no users");
    if (static_cast<int>(users.size()) > array.n_t()) {
        throw PreconditionError("scenario has more users than antennas");
    }
    rate_model().validate();
    for (const auto& u : users) {
        if (!(u.qos_rate_bps >= 0.0)) throw PreconditionError("QoS targets must be non-negative");
        if (!(u.kappa >= 0.0)) throw PreconditionError("Rician factor must be non-negative");
    }
}

}  // namespace hap
