#include "hap/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hap/error.hpp"

namespace hap {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw DimensionError(what);
}

}  // namespace

AllocationProblem AllocationProblem::build(const ZfBeamformer& zf, const RateModel& model,
                                           std::span<const double> qos_bps,
                                           const PowerLedger& ledger, double p_tot_w) {
    model.validate();
    const std::size_t k = zf.users();
    require_same_size(model.gammas.size(), k, "rate model and beamformer disagree on K");
    require_same_size(qos_bps.size(), k, "QoS targets and beamformer disagree on K");
    AllocationProblem prob;
    prob.w_norms_sq = zf.w_norms_sq;
    prob.gammas = model.gammas;
    prob.qos_bps.assign(qos_bps.begin(), qos_bps.end());
    prob.bw_hz = model.bw_hz;
    prob.n0_w = model.n0_w;
    prob.xi = ledger.xi;
    prob.p_static_w = static_comm_power(ledger);
    prob.p_tot_w = p_tot_w;
    prob.p_min.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        prob.p_min[i] = min_power_coefficient(prob.qos_bps[i], prob.gammas[i], model);
    }
    prob.validate();
    return prob;
}

void AllocationProblem::validate() const {
    const std::size_t k = users();
    if (k == 0) throw PreconditionError("allocation problem has no users");
    require_same_size(gammas.size(), k, "gammas length mismatch");
    require_same_size(qos_bps.size(), k, "QoS length mismatch");
    require_same_size(p_min.size(), k, "p_min length mismatch");
    if (!(bw_hz > 0.0 && n0_w > 0.0)) throw PreconditionError("bandwidth and noise must be positive");
    if (!(xi > 0.0)) throw PreconditionError("PA inefficiency must be positive");
    if (!(p_static_w > 0.0)) throw PreconditionError("static circuit power must be positive");
    if (!(p_tot_w >= 0.0)) throw PreconditionError("RF budget must be non-negative");
    for (std::size_t i = 0; i < k; ++i) {
        if (!(w_norms_sq[i] > 0.0)) throw PreconditionError("beam norms must be positive");
        if (!(gammas[i] > 0.0)) throw PreconditionError("channel powers must be positive");
    }
}

double AllocationProblem::rate(std::size_t k, double p) const {
    return bw_hz * std::log2(1.0 + gammas[k] * p * p / n0_w);
}

std::vector<double> AllocationProblem::rates(std::span<const double> p) const {
    require_same_size(p.size(), users(), "coefficient vector length mismatch");
    std::vector<double> r(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) r[k] = rate(k, p[k]);
    return r;
}

double AllocationProblem::rf_spent(std::span<const double> p) const {
    require_same_size(p.size(), users(), "coefficient vector length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += w_norms_sq[k] * p[k] * p[k];
    return s;
}

double AllocationProblem::p_com(std::span<const double> p) const {
    return xi * rf_spent(p) + p_static_w;
}

std::vector<double> AllocationProblem::min_costs() const {
    std::vector<double> c(users());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = w_norms_sq[k] * p_min[k] * p_min[k];
    return c;
}

std::vector<double> FeasibilityPartition::floor_mask(std::span<const double> p_min) const {
    std::vector<double> m(p_min.size(), 0.0);
    for (std::size_t k : satisfied_set) m[k] = p_min[k];
    return m;
}

FeasibilityPartition feasibility_partition(std::span<const double> p_mins,
                                           std::span<const double> w_norms_sq, double p_tot_w) {
    require_same_size(p_mins.size(), w_norms_sq.size(), "p_min and norm vectors differ in length");
    if (!(p_tot_w >= 0.0)) throw PreconditionError("budget must be non-negative");
    const std::size_t k = p_mins.size();
    FeasibilityPartition part;
    part.min_cost_w.resize(k);
    for (std::size_t i = 0; i < k; ++i) part.min_cost_w[i] = w_norms_sq[i] * p_mins[i] * p_mins[i];
    part.order.resize(k);
    std::iota(part.order.begin(), part.order.end(), std::size_t{0});
    std::stable_sort(part.order.begin(), part.order.end(), [&](std::size_t a, std::size_t b) {
        return part.min_cost_w[a] < part.min_cost_w[b];
    });
    part.p_emin_w = std::accumulate(part.min_cost_w.begin(), part.min_cost_w.end(), 0.0);

    double spent = 0.0;
    for (std::size_t idx : part.order) {
        if (spent + part.min_cost_w[idx] > p_tot_w) break;
        spent += part.min_cost_w[idx];
        part.satisfied_set.push_back(idx);
    }
    part.full_feasible = part.satisfied_set.size() == k;
    part.residual_budget_w = p_tot_w - spent;
    return part;
}

namespace {

struct ProjectionState {
    std::vector<double> p_hat;
    double p_m = 0.0;
    double p_0 = 0.0;
    bool scaled = false;
    double alpha = 1.0;
};

ProjectionState projection_state(std::span<const double> p_raw, std::span<const double> mask,
                                 std::span<const double> c, double p_tot) {
    require_same_size(p_raw.size(), mask.size(), "projection mask length mismatch");
    require_same_size(p_raw.size(), c.size(), "projection weight length mismatch");
    ProjectionState s;
    s.p_hat.resize(p_raw.size());
    for (std::size_t k = 0; k < p_raw.size(); ++k) {
        if (!(mask[k] >= 0.0)) throw PreconditionError("projection floor must be non-negative");
        s.p_hat[k] = std::max(p_raw[k], mask[k]);
        s.p_m += c[k] * mask[k] * mask[k];
        s.p_0 += c[k] * s.p_hat[k] * s.p_hat[k];
    }
    if (s.p_m > p_tot * (1.0 + 1e-12)) {
        throw PreconditionError("projection floor costs " + std::to_string(s.p_m) +
                                " W, above the budget " + std::to_string(p_tot) + " W");
    }
    if (s.p_0 > p_tot) {
        s.scaled = true;
        s.alpha = std::clamp((p_tot - s.p_m) / (s.p_0 - s.p_m), 0.0, 1.0);
    }
    return s;
}

}  // namespace

std::vector<double> project_capped(std::span<const double> p_raw, std::span<const double> mask,
                                   std::span<const double> w_norms_sq, double p_tot_w) {
    ProjectionState s = projection_state(p_raw, mask, w_norms_sq, p_tot_w);
    if (!s.scaled) return s.p_hat;
    std::vector<double> p(p_raw.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double m2 = mask[k] * mask[k];
        p[k] = std::sqrt(m2 + s.alpha * (s.p_hat[k] * s.p_hat[k] - m2));
    }
    return p;
}

std::vector<double> project_capped_vjp(std::span<const double> p_raw,
                                       std::span<const double> mask,
                                       std::span<const double> w_norms_sq, double p_tot_w,
                                       std::span<const double> grad_p) {
    require_same_size(p_raw.size(), grad_p.size(), "gradient length mismatch");
    ProjectionState s = projection_state(p_raw, mask, w_norms_sq, p_tot_w);
    const std::size_t k_all = p_raw.size();
    std::vector<double> g_hat(k_all, 0.0);
    if (!s.scaled) {
        g_hat.assign(grad_p.begin(), grad_p.end());
    } else {
        // p_k = sqrt(m_k^2 + alpha (phat_k^2 - m_k^2)),
        // alpha = (P - P_m) / (P_0 - P_m), dP_0/dphat_j = 2 c_j phat_j.
        double coupled = 0.0;
        std::vector<double> direct(k_all, 0.0);
        for (std::size_t k = 0; k < k_all; ++k) {
            const double m2 = mask[k] * mask[k];
            const double spread = s.p_hat[k] * s.p_hat[k] - m2;
            const double p = std::sqrt(m2 + s.alpha * spread);
            if (p > 0.0) {
                direct[k] = s.alpha * s.p_hat[k] / p;
                coupled += grad_p[k] * spread / (2.0 * p);
            } else if (mask[k] == 0.0) {
                direct[k] = std::sqrt(s.alpha);
            }
        }
        const double dalpha_scale = -s.alpha / (s.p_0 - s.p_m);
        for (std::size_t j = 0; j < k_all; ++j) {
            g_hat[j] = grad_p[j] * direct[j] +
                       coupled * dalpha_scale * 2.0 * w_norms_sq[j] * s.p_hat[j];
        }
    }
    for (std::size_t k = 0; k < k_all; ++k) {
        if (!(p_raw[k] > mask[k])) g_hat[k] = 0.0;
    }
    return g_hat;
}

Q3eSolution make_solution(const AllocationProblem& prob, std::vector<double> p,
                          std::vector<std::size_t> q_set, std::string tag) {
    Q3eSolution sol;
    sol.rates_bps = prob.rates(p);
    sol.rf_spent_w = prob.rf_spent(p);
    sol.p_com_w = prob.xi * sol.rf_spent_w + prob.p_static_w;
    sol.ee_bps_per_w = energy_efficiency(sol.rates_bps, sol.p_com_w);
    sol.p = std::move(p);
    std::sort(q_set.begin(), q_set.end());
    sol.q_set = std::move(q_set);
    sol.solver_tag = std::move(tag);
    return sol;
}

}  // namespace hap
