#include "hap/beamforming.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "hap/error.hpp"

namespace hap {

void RateModel::validate() const {
    if (!(bw_hz > 0.0)) throw PreconditionError("bandwidth must be positive");
    if (!(n0_w > 0.0)) throw PreconditionError("noise power must be positive");
    for (double g : gammas) {
        if (!(g > 0.0)) throw PreconditionError("mean channel powers must be positive");
    }
}

ZfBeamformer zf_beamformer(const Eigen::MatrixXcd& steering) {
    const auto n_t = steering.rows();
    const auto k = steering.cols();
    if (k == 0) throw DimensionError("zero-forcing needs at least one steering vector");
    if (k > n_t) {
        throw ConditioningError("more users (" + std::to_string(k) + ") than antennas (" +
                                    std::to_string(n_t) + ")",
                                std::numeric_limits<double>::infinity());
    }
    const Eigen::MatrixXcd gram = steering.adjoint() * steering;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(cond < kMaxGramCondition)) {
        throw ConditioningError("steering Gram matrix ill-conditioned (cond = " +
                                    std::to_string(cond) + ")",
                                cond);
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw ConditioningError("steering Gram matrix not positive definite", cond);
    }
    // W^H = G^-1 V^H since G is Hermitian.
    ZfBeamformer zf;
    zf.w = llt.solve(steering.adjoint()).adjoint();
    zf.gram_condition = cond;
    zf.w_norms_sq.resize(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        zf.w_norms_sq[static_cast<std::size_t>(j)] = zf.w.col(j).squaredNorm();
    }
    return zf;
}

double surrogate_rate(double p, double gamma, const RateModel& model) {
    if (!(p >= 0.0)) throw PreconditionError("power coefficient must be non-negative");
    return model.bw_hz * std::log2(1.0 + gamma * p * p / model.n0_w);
}

double min_power_coefficient(double qos_bps, double gamma, const RateModel& model) {
    if (!(qos_bps >= 0.0)) throw PreconditionError("QoS target must be non-negative");
    return std::sqrt(model.n0_w * std::expm1(qos_bps / model.bw_hz * std::numbers::ln2) / gamma);
}

double energy_efficiency(std::span<const double> rates_bps, double p_com_w) {
    if (!(p_com_w > 0.0)) throw PreconditionError("communication power must be positive");
    return std::accumulate(rates_bps.begin(), rates_bps.end(), 0.0) / p_com_w;
}

}  // namespace hap
