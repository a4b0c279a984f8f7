#include "hap/q3e.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hap/error.hpp"

namespace hap {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// max sum_{free} B log2(1 + a_k x_k) / (xi sum_k c_k x_k + P_t)
// s.t. x_k >= lo_k, x_k = lo_k for pinned users, sum_k c_k x_k <= cap.
struct FractionalProblem {
    std::vector<double> c;
    std::vector<double> a;   // gamma / N_0
    std::vector<double> lo;  // floor in x = p^2
    std::vector<bool> free;
    double cap = 0.0;
    double bw = 0.0;
    double xi = 1.0;
    double p_static = 0.0;

    std::size_t size() const { return c.size(); }

    // Stationary point of the parametric Lagrangian with multiplier mu on sum c x.
    std::vector<double> response(double mu) const {
        std::vector<double> x(lo);
        for (std::size_t k = 0; k < size(); ++k) {
            if (!free[k]) continue;
            x[k] = std::max(lo[k], bw / (kLn2 * mu * c[k]) - 1.0 / a[k]);
        }
        return x;
    }

    double spend(const std::vector<double>& x) const {
        double s = 0.0;
        for (std::size_t k = 0; k < size(); ++k) s += c[k] * x[k];
        return s;
    }

    double numerator(const std::vector<double>& x) const {
        double s = 0.0;
        for (std::size_t k = 0; k < size(); ++k) {
            if (free[k]) s += bw * std::log2(1.0 + a[k] * x[k]);
        }
        return s;
    }

    double denominator(const std::vector<double>& x) const { return xi * spend(x) + p_static; }
};

struct FractionalResult {
    std::vector<double> x;
    int iterations = 0;
    double gap = 0.0;
    double objective = 0.0;
};

// Smallest multiplier mu >= mu_floor whose response fits the cap.
std::vector<double> budget_response(const FractionalProblem& fp, double mu_floor, double mu_hi) {
    if (mu_floor > 0.0) {
        std::vector<double> x = fp.response(mu_floor);
        if (fp.spend(x) <= fp.cap) return x;
    }
    double lo = mu_floor;
    double hi = mu_hi;
    for (int i = 0; i < 2000 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (fp.spend(fp.response(mid)) > fp.cap) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return fp.response(hi);
}

FractionalResult dinkelbach(const FractionalProblem& fp, const BarrierConfig& cfg) {
    FractionalResult res;
    if (fp.spend(fp.lo) >= fp.cap) {
        res.x = fp.lo;
        res.objective = fp.numerator(res.x) / fp.denominator(res.x);
        return res;
    }
    // At mu_hi every free user sits on its floor, which fits the cap.
    double mu_hi = 0.0;
    for (std::size_t k = 0; k < fp.size(); ++k) {
        if (fp.free[k]) {
            mu_hi = std::max(mu_hi, fp.bw * fp.a[k] / (kLn2 * fp.c[k] * (1.0 + fp.a[k] * fp.lo[k])));
        }
    }
    if (mu_hi == 0.0) {
        res.x = fp.lo;
        res.objective = fp.numerator(res.x) / fp.denominator(res.x);
        return res;
    }
    mu_hi *= 1.0 + 1e-9;

    const double tol = cfg.step_tolerance > 0.0 ? cfg.step_tolerance : 1e-13;
    double q = 0.0;
    for (int it = 1; it <= std::max(cfg.max_iters, 1); ++it) {
        res.x = budget_response(fp, q * fp.xi, mu_hi);
        const double qn = fp.numerator(res.x) / fp.denominator(res.x);
        res.iterations = it;
        res.gap = std::abs(qn - q);
        q = std::max(q, qn);
        if (res.gap <= tol * qn) break;
    }
    res.objective = fp.numerator(res.x) / fp.denominator(res.x);
    return res;
}

FractionalProblem base_fractional(const AllocationProblem& prob) {
    FractionalProblem fp;
    const std::size_t k = prob.users();
    fp.c = prob.w_norms_sq;
    fp.a.resize(k);
    for (std::size_t i = 0; i < k; ++i) fp.a[i] = prob.gammas[i] / prob.n0_w;
    fp.lo.assign(k, 0.0);
    fp.free.assign(k, true);
    fp.cap = prob.p_tot_w;
    fp.bw = prob.bw_hz;
    fp.xi = prob.xi;
    fp.p_static = prob.p_static_w;
    return fp;
}

std::vector<double> to_coefficients(const std::vector<double>& x, const std::vector<double>& lo,
                                     std::span<const double> p_floor) {
    std::vector<double> p(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        p[k] = x[k] <= lo[k] ? p_floor[k] : std::sqrt(x[k]);
    }
    return p;
}

Q3eSolution finish(const AllocationProblem& prob, const FractionalProblem& fp,
                   const FractionalResult& fr, std::span<const double> p_floor,
                   std::vector<std::size_t> q_set, const char* tag) {
    Q3eSolution sol = make_solution(prob, to_coefficients(fr.x, fp.lo, p_floor), std::move(q_set), tag);
    sol.diagnostics.iterations = fr.iterations;
    sol.diagnostics.residual = fr.gap;
    sol.diagnostics.objective = fr.objective;
    return sol;
}

}  // namespace

Q3eSolution solve_p1(const AllocationProblem& prob, const FeasibilityPartition& part,
                     const BarrierConfig& cfg) {
    if (!part.full_feasible) throw PreconditionError("P1 requires every user to be affordable");
    FractionalProblem fp = base_fractional(prob);
    for (std::size_t k = 0; k < prob.users(); ++k) fp.lo[k] = prob.p_min[k] * prob.p_min[k];
    const FractionalResult fr = dinkelbach(fp, cfg);
    return finish(prob, fp, fr, prob.p_min, part.satisfied_set, "q3e-numeric");
}

Q3eSolution solve_p2(const AllocationProblem& prob, const FeasibilityPartition& part,
                     const BarrierConfig& cfg) {
    if (part.full_feasible) throw PreconditionError("P2 applies only when some user is unaffordable");
    FractionalProblem fp = base_fractional(prob);
    const std::vector<double> floor = part.floor_mask(prob.p_min);
    for (std::size_t k : part.satisfied_set) {
        fp.lo[k] = prob.p_min[k] * prob.p_min[k];
        fp.free[k] = false;
    }
    const FractionalResult fr = dinkelbach(fp, cfg);
    return finish(prob, fp, fr, floor, part.satisfied_set, "q3e-numeric");
}

std::string to_string(Backend b) { return b == Backend::numeric ? "numeric" : "mlp"; }

Backend backend_from_string(const std::string& name) {
    if (name == "numeric" || name == "q3e-numeric") return Backend::numeric;
    if (name == "mlp" || name == "q3e-mlp") return Backend::mlp;
    throw ConfigError("unknown Q3E backend '" + name + "'");
}

Q3eSolution q3e(const AllocationProblem& prob, const Q3eOptions& opts) {
    prob.validate();
    const FeasibilityPartition part = feasibility_partition(prob.p_min, prob.w_norms_sq, prob.p_tot_w);
    if (opts.backend == Backend::numeric) {
        return part.full_feasible ? solve_p1(prob, part, opts.barrier) : solve_p2(prob, part, opts.barrier);
    }
    const neuro::PhaseProblem phase = neuro::PhaseProblem::make(prob, part);
    const neuro::TrainResult tr = neuro::train(phase, opts.train);
    Q3eSolution sol = make_solution(prob, tr.p, part.satisfied_set, "q3e-mlp");
    sol.diagnostics.iterations = static_cast<int>(tr.epochs_run);
    sol.diagnostics.residual = tr.max_violation_w;
    sol.diagnostics.objective = tr.best_objective;
    return sol;
}

Q3eSolution q3e(const Scenario& scenario, const PowerLedger& ledger, double p_tot_w,
                const Q3eOptions& opts) {
    scenario.validate();
    const ZfBeamformer zf = zf_beamformer(scenario.steering_matrix());
    const std::vector<double> qos = scenario.qos_bps();
    return q3e(AllocationProblem::build(zf, scenario.rate_model(), qos, ledger, p_tot_w), opts);
}

Q3eSolution baseline_max_sum_rate(const AllocationProblem& prob) {
    prob.validate();
    FractionalProblem fp = base_fractional(prob);
    std::vector<double> x(prob.users(), 0.0);
    int iterations = 0;
    if (prob.p_tot_w > 0.0) {
        double hi = 0.0;
        for (std::size_t k = 0; k < fp.size(); ++k) {
            hi = std::max(hi, fp.bw * fp.a[k] / (kLn2 * fp.c[k]));
        }
        double lo = hi;
        while (fp.spend(fp.response(lo)) <= fp.cap && lo > 1e-300) lo *= 1e-6;
        // Geometric bisection; the spend is decreasing in the water level's inverse.
        for (; iterations < 400 && hi - lo > 1e-15 * hi; ++iterations) {
            const double mid = std::sqrt(lo * hi);
            if (!(mid > lo && mid < hi)) break;
            if (fp.spend(fp.response(mid)) > fp.cap) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        x = fp.response(hi);
    }
    std::vector<double> p(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) p[k] = std::sqrt(x[k]);
    std::vector<std::size_t> q_set;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (prob.rate(k, p[k]) >= prob.qos_bps[k] * (1.0 - 1e-9)) q_set.push_back(k);
    }
    Q3eSolution sol = make_solution(prob, std::move(p), std::move(q_set), "max-sum-rate");
    sol.diagnostics.iterations = iterations;
    double total = 0.0;
    for (double r : sol.rates_bps) total += r;
    sol.diagnostics.objective = total;
    return sol;
}

Q3eSolution baseline_qos_only(const AllocationProblem& prob) {
    prob.validate();
    const FeasibilityPartition part = feasibility_partition(prob.p_min, prob.w_norms_sq, prob.p_tot_w);
    std::vector<double> p(prob.users(), 0.0);
    if (!part.satisfied_set.empty()) {
        // sum_Q (sqrt(c_k) p_min,k + Delta)^2 = P_tot, a quadratic in Delta.
        double s1 = 0.0;
        double s2 = 0.0;
        for (std::size_t k : part.satisfied_set) {
            const double root_c = std::sqrt(prob.w_norms_sq[k]);
            s1 += root_c * prob.p_min[k];
            s2 += prob.w_norms_sq[k] * prob.p_min[k] * prob.p_min[k];
        }
        const double n = static_cast<double>(part.satisfied_set.size());
        const double slack = std::max(prob.p_tot_w - s2, 0.0);
        const double delta = slack > 0.0 ? slack / (s1 + std::sqrt(s1 * s1 + n * slack)) : 0.0;
        for (std::size_t k : part.satisfied_set) {
            p[k] = prob.p_min[k] + delta / std::sqrt(prob.w_norms_sq[k]);
        }
    }
    Q3eSolution sol = make_solution(prob, std::move(p), part.satisfied_set, "qos-only");
    sol.diagnostics.objective = sol.ee_bps_per_w;
    return sol;
}

Q3eSolution solve_with(const std::string& tag, const AllocationProblem& prob,
                       const Q3eOptions& opts) {
    if (tag == "q3e-numeric" || tag == "numeric") {
        Q3eOptions o = opts;
        o.backend = Backend::numeric;
        return q3e(prob, o);
    }
    if (tag == "q3e-mlp" || tag == "mlp") {
        Q3eOptions o = opts;
        o.backend = Backend::mlp;
        return q3e(prob, o);
    }
    if (tag == "max-sum-rate") return baseline_max_sum_rate(prob);
    if (tag == "qos-only") return baseline_qos_only(prob);
    throw ConfigError("unknown solver tag '" + tag + "'");
}

}  // namespace hap
