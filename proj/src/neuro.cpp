#include "hap/neuro.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "hap/error.hpp"

namespace hap::neuro {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

constexpr const char* kCheckpointFormat = "hap-mlp";
constexpr int kCheckpointVersion = 1;

}  // namespace

// ---------------------------------------------------------------- network

MlpNetwork::MlpNetwork(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw DimensionError("network needs an input and an output width");
    for (std::size_t w : widths_) {
        if (w == 0) throw DimensionError("layer widths must be positive");
    }
    build_offsets();
    params_.assign(offsets_.back(), 0.0);
}

void MlpNetwork::build_offsets() {
    offsets_.assign(1, 0);
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        offsets_.push_back(offsets_.back() + widths_[l] * widths_[l + 1] + widths_[l + 1]);
    }
}

MlpNetwork MlpNetwork::initialized(std::vector<std::size_t> widths, std::uint64_t seed) {
    MlpNetwork net(std::move(widths));
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < net.layers(); ++l) {
        const std::size_t fan_in = net.widths_[l];
        const std::size_t fan_out = net.widths_[l + 1];
        // He-style bound ahead of a ReLU, plain 1/sqrt(fan_in) on the output layer.
        const bool last = l + 1 == net.layers();
        const double bound = last ? 1.0 / std::sqrt(static_cast<double>(fan_in))
                                  : std::sqrt(6.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        double* w = net.params_.data() + net.offsets_[l];
        for (std::size_t i = 0; i < fan_in * fan_out; ++i) w[i] = dist(rng);
    }
    return net;
}

std::vector<double> MlpNetwork::forward(std::span<const double> features) const {
    Tape tape;
    return forward(features, tape);
}

std::vector<double> MlpNetwork::forward(std::span<const double> features, Tape& tape) const {
    if (features.size() != input_width()) {
        throw DimensionError("feature length " + std::to_string(features.size()) +
                             " does not match input width " + std::to_string(input_width()));
    }
    tape.activations.assign(1, std::vector<double>(features.begin(), features.end()));
    tape.pre.clear();
    for (std::size_t l = 0; l < layers(); ++l) {
        const std::size_t n_in = widths_[l];
        const std::size_t n_out = widths_[l + 1];
        const double* w = params_.data() + offsets_[l];
        const double* b = w + n_in * n_out;
        const std::vector<double>& a = tape.activations.back();
        std::vector<double> z(n_out);
        for (std::size_t o = 0; o < n_out; ++o) {
            double s = b[o];
            const double* row = w + o * n_in;
            for (std::size_t i = 0; i < n_in; ++i) s += row[i] * a[i];
            z[o] = s;
        }
        std::vector<double> out(n_out);
        const bool last = l + 1 == layers();
        for (std::size_t o = 0; o < n_out; ++o) {
            if (last) {
                const double sp = softplus(z[o]);
                out[o] = sp * sp;
            } else {
                out[o] = z[o] > 0.0 ? z[o] : 0.0;
            }
        }
        tape.pre.push_back(std::move(z));
        tape.activations.push_back(std::move(out));
    }
    return tape.activations.back();
}

std::vector<double> MlpNetwork::backward(const Tape& tape, std::span<const double> grad_out) const {
    if (grad_out.size() != output_width()) throw DimensionError("output gradient length mismatch");
    if (tape.pre.size() != layers()) throw DimensionError("tape does not match network depth");
    std::vector<double> grad(params_.size(), 0.0);
    std::vector<double> delta(grad_out.size());
    const std::vector<double>& z_last = tape.pre.back();
    for (std::size_t o = 0; o < delta.size(); ++o) {
        delta[o] = grad_out[o] * 2.0 * softplus(z_last[o]) * sigmoid(z_last[o]);
    }
    for (std::size_t l = layers(); l-- > 0;) {
        const std::size_t n_in = widths_[l];
        const std::size_t n_out = widths_[l + 1];
        const double* w = params_.data() + offsets_[l];
        double* gw = grad.data() + offsets_[l];
        double* gb = gw + n_in * n_out;
        const std::vector<double>& a = tape.activations[l];
        for (std::size_t o = 0; o < n_out; ++o) {
            gb[o] = delta[o];
            for (std::size_t i = 0; i < n_in; ++i) gw[o * n_in + i] = delta[o] * a[i];
        }
        if (l == 0) break;
        std::vector<double> prev(n_in, 0.0);
        const std::vector<double>& z_prev = tape.pre[l - 1];
        for (std::size_t i = 0; i < n_in; ++i) {
            if (!(z_prev[i] > 0.0)) continue;
            double s = 0.0;
            for (std::size_t o = 0; o < n_out; ++o) s += w[o * n_in + i] * delta[o];
            prev[i] = s;
        }
        delta = std::move(prev);
    }
    return grad;
}

nlohmann::json MlpNetwork::to_json() const {
    return nlohmann::json{{"format", kCheckpointFormat},
                          {"version", kCheckpointVersion},
                          {"widths", widths_},
                          {"parameters", params_}};
}

MlpNetwork MlpNetwork::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kCheckpointFormat) {
            throw ConfigError("not a network checkpoint");
        }
        if (j.at("version").get<int>() != kCheckpointVersion) {
            throw ConfigError("unsupported checkpoint version");
        }
        MlpNetwork net(j.at("widths").get<std::vector<std::size_t>>());
        std::vector<double> params = j.at("parameters").get<std::vector<double>>();
        if (params.size() != net.parameter_count()) {
            throw ConfigError("checkpoint parameter count does not match its widths");
        }
        net.params_ = std::move(params);
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
}

void MlpNetwork::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << to_json().dump() << '\n';
    if (!out) throw Error("failed writing checkpoint " + path.string());
}

MlpNetwork MlpNetwork::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read checkpoint " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("checkpoint " + path.string() + ": " + e.what());
    }
}

std::vector<double> mlp_forward(const MlpNetwork& net, std::span<const double> features) {
    return net.forward(features);
}

// ---------------------------------------------------------------- Adam

Adam::Adam(std::size_t n, double step, double beta1, double beta2, double eps)
    : step_(step), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::vector<double>& params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw DimensionError("Adam state size mismatch");
    }
    ++t_;
    beta1_pow_ *= beta1_;
    beta2_pow_ *= beta2_;
    const double c1 = 1.0 - beta1_pow_;
    const double c2 = 1.0 - beta2_pow_;
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        params[i] -= step_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

// ---------------------------------------------------------------- problem

PhaseProblem PhaseProblem::make(const AllocationProblem& prob, const FeasibilityPartition& part) {
    PhaseProblem pp;
    pp.prob = prob;
    pp.part = part;
    pp.phase = part.full_feasible ? Phase::p1 : Phase::p2;
    pp.floor = part.floor_mask(prob.p_min);
    pp.scored.assign(prob.users(), true);
    if (pp.phase == Phase::p2) {
        for (std::size_t k : part.satisfied_set) pp.scored[k] = false;
        pp.barrier_budget_w = part.residual_budget_w;
    } else {
        pp.barrier_budget_w = prob.p_tot_w;
    }
    return pp;
}

PhaseProblem PhaseProblem::make(const AllocationProblem& prob) {
    return make(prob, feasibility_partition(prob.p_min, prob.w_norms_sq, prob.p_tot_w));
}

namespace {

// In P2 the pinned users are constants at their floor.
double effective(const PhaseProblem& pp, std::span<const double> p, std::size_t k) {
    return pp.phase == Phase::p2 && !pp.scored[k] ? pp.floor[k] : p[k];
}

struct ObjectiveParts {
    double numerator = 0.0;
    double denominator = 0.0;
};

ObjectiveParts objective_parts(const PhaseProblem& pp, std::span<const double> p) {
    if (p.size() != pp.prob.users()) throw DimensionError("coefficient vector length mismatch");
    ObjectiveParts o;
    double rf = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double pk = effective(pp, p, k);
        rf += pp.prob.w_norms_sq[k] * pk * pk;
        if (pp.scored[k]) o.numerator += pp.prob.rate(k, pk);
    }
    o.denominator = pp.prob.xi * rf + pp.prob.p_static_w;
    return o;
}

// Gradient of the objective (bps/W) with respect to p.
void objective_gradient(const PhaseProblem& pp, std::span<const double> p, const ObjectiveParts& o,
                        std::vector<double>& g) {
    const AllocationProblem& prob = pp.prob;
    const double d2 = o.denominator * o.denominator;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (pp.phase == Phase::p2 && !pp.scored[k]) {
            g[k] = 0.0;
            continue;
        }
        const double a = prob.gammas[k] / prob.n0_w;
        const double dr = pp.scored[k]
                              ? prob.bw_hz / std::numbers::ln2 * 2.0 * a * p[k] / (1.0 + a * p[k] * p[k])
                              : 0.0;
        const double dd = 2.0 * prob.xi * prob.w_norms_sq[k] * p[k];
        g[k] = (dr * o.denominator - o.numerator * dd) / d2;
    }
}

double floored_log(double x, double eps, double* slope) {
    const double arg = x + eps;
    if (arg > eps) {
        if (slope) *slope = 1.0 / arg;
        return std::log(arg);
    }
    if (slope) *slope = 0.0;
    return std::log(eps);
}

}  // namespace

double PhaseProblem::objective(std::span<const double> p) const {
    const ObjectiveParts o = objective_parts(*this, p);
    return o.numerator / o.denominator;
}

double PhaseProblem::barrier_spend(std::span<const double> p) const {
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (phase == Phase::p2 && !scored[k]) continue;
        s += prob.w_norms_sq[k] * p[k] * p[k];
    }
    return s;
}

double loss_p1(std::span<const double> p, const PhaseProblem& pp, const BarrierConfig& barrier,
               std::vector<double>* grad) {
    if (pp.phase != Phase::p1) throw PreconditionError("loss_p1 needs a fully feasible instance");
    const ObjectiveParts o = objective_parts(pp, p);
    const double lambda = barrier.lambda;
    const double eps = barrier.epsilon;
    double log_sum = 0.0;
    std::vector<double> slope(p.size(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
        log_sum += floored_log(p[k] - pp.prob.p_min[k], eps, &slope[k]);
    }
    double budget_slope = 0.0;
    log_sum += floored_log(pp.barrier_budget_w - pp.barrier_spend(p), eps, &budget_slope);
    const double value = -(o.numerator / o.denominator) / kLossRateScale - lambda * log_sum;
    if (grad) {
        grad->assign(p.size(), 0.0);
        objective_gradient(pp, p, o, *grad);
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double d_budget = -2.0 * pp.prob.w_norms_sq[k] * p[k];
            (*grad)[k] = -(*grad)[k] / kLossRateScale - lambda * (slope[k] + budget_slope * d_budget);
        }
    }
    return value;
}

double loss_p2(std::span<const double> p, const PhaseProblem& pp, const BarrierConfig& barrier,
               std::vector<double>* grad) {
    if (pp.phase != Phase::p2) throw PreconditionError("loss_p2 needs a partially feasible instance");
    const ObjectiveParts o = objective_parts(pp, p);
    const double lambda = barrier.lambda;
    double budget_slope = 0.0;
    const double log_term =
        floored_log(pp.barrier_budget_w - pp.barrier_spend(p), barrier.epsilon, &budget_slope);
    const double value = -(o.numerator / o.denominator) / kLossRateScale - lambda * log_term;
    if (grad) {
        grad->assign(p.size(), 0.0);
        objective_gradient(pp, p, o, *grad);
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (!pp.scored[k]) {
                (*grad)[k] = 0.0;
                continue;
            }
            const double d_budget = -2.0 * pp.prob.w_norms_sq[k] * p[k];
            (*grad)[k] = -(*grad)[k] / kLossRateScale - lambda * budget_slope * d_budget;
        }
    }
    return value;
}

double phase_loss(std::span<const double> p, const PhaseProblem& pp, const BarrierConfig& barrier,
                  std::vector<double>* grad) {
    return pp.phase == Phase::p1 ? loss_p1(p, pp, barrier, grad) : loss_p2(p, pp, barrier, grad);
}

std::vector<double> problem_features(const PhaseProblem& pp) {
    const AllocationProblem& prob = pp.prob;
    const std::size_t k_all = prob.users();
    const double g_max = *std::max_element(prob.gammas.begin(), prob.gammas.end());
    const double c_max = *std::max_element(prob.w_norms_sq.begin(), prob.w_norms_sq.end());
    std::vector<double> f;
    f.reserve(3 * k_all + 1);
    for (std::size_t k = 0; k < k_all; ++k) {
        f.push_back(prob.gammas[k] / g_max);
        f.push_back(prob.qos_bps[k] / prob.bw_hz);
        f.push_back(prob.w_norms_sq[k] / c_max);
    }
    const double ref = pp.part.p_emin_w > 0.0 ? pp.part.p_emin_w : 1.0;
    f.push_back(prob.p_tot_w / ref);
    return f;
}

Decoder Decoder::make(const PhaseProblem& pp) {
    const AllocationProblem& prob = pp.prob;
    const std::size_t k_all = prob.users();
    Decoder d;
    d.offset = pp.floor;
    d.scale.assign(k_all, 0.0);
    double floor_spend = 0.0;
    std::size_t n_free = 0;
    for (std::size_t k = 0; k < k_all; ++k) {
        floor_spend += prob.w_norms_sq[k] * pp.floor[k] * pp.floor[k];
        if (pp.scored[k]) ++n_free;
    }
    const double headroom = std::max(prob.p_tot_w - floor_spend, 0.0);
    if (n_free == 0) return d;
    for (std::size_t k = 0; k < k_all; ++k) {
        if (pp.scored[k]) {
            d.scale[k] = std::sqrt(headroom / (static_cast<double>(n_free) * prob.w_norms_sq[k]));
        }
    }
    return d;
}

std::vector<double> Decoder::operator()(std::span<const double> u) const {
    if (u.size() != offset.size()) throw DimensionError("decoder width mismatch");
    std::vector<double> p(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        p[k] = std::sqrt(offset[k] * offset[k] + scale[k] * scale[k] * std::max(u[k], 0.0));
    }
    return p;
}

std::vector<double> Decoder::vjp(std::span<const double> p_raw,
                                 std::span<const double> grad_raw) const {
    std::vector<double> g(p_raw.size(), 0.0);
    for (std::size_t k = 0; k < p_raw.size(); ++k) {
        if (p_raw[k] > 0.0) g[k] = grad_raw[k] * scale[k] * scale[k] / (2.0 * p_raw[k]);
    }
    return g;
}

// ---------------------------------------------------------------- training

void TrainConfig::validate() const {
    if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
    if (patience >= max_epochs) throw ConfigError("patience must be below max_epochs");
    if (!(step > 0.0)) throw ConfigError("Adam step size must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(eps_adam > 0.0)) throw ConfigError("Adam epsilon must be positive");
    if (!(barrier.lambda > 0.0 && barrier.epsilon > 0.0)) {
        throw ConfigError("barrier lambda and epsilon must be positive");
    }
    if (lambda_halving_epochs == 0) throw ConfigError("lambda halving period must be positive");
}

namespace {

std::vector<double> clamp_only(std::span<const double> p_raw, std::span<const double> floor) {
    std::vector<double> p(p_raw.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::max(p_raw[k], floor[k]);
    return p;
}

}  // namespace

TrainResult train(const PhaseProblem& pp, const TrainConfig& cfg) {
    cfg.validate();
    const AllocationProblem& prob = pp.prob;
    const std::size_t k_all = prob.users();
    const std::vector<double> features = problem_features(pp);
    const Decoder decode = Decoder::make(pp);

    std::vector<std::size_t> widths{features.size()};
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(k_all);
    MlpNetwork net = MlpNetwork::initialized(widths, cfg.seed);
    {
        // Start with u close to 0.25 on every user: output weights shrunk by
        // 1e-2, output biases at softplus^-1(0.5). The first decoded iterate
        // then spends about a quarter of the headroom. An iterate that starts
        // beyond the budget gets no radial gradient back through the scaling
        // projection and stays pinned to the budget surface.
        auto& params = net.parameters();
        const auto k = static_cast<std::ptrdiff_t>(k_all);
        const auto fan_in = static_cast<std::ptrdiff_t>(widths[widths.size() - 2]);
        for (auto it = params.end() - k - k * fan_in; it != params.end() - k; ++it) *it *= 1e-2;
        std::fill(params.end() - k, params.end(), std::log(std::expm1(0.5)));
    }
    Adam adam(net.parameter_count(), cfg.step, cfg.beta1, cfg.beta2, cfg.eps_adam);

    TrainResult res;
    std::vector<double> best_params = net.parameters();
    double best = -std::numeric_limits<double>::infinity();
    const double budget = prob.p_tot_w;
    const double tol_w = 1e-9 * std::max(1.0, budget);

    MlpNetwork::Tape tape;
    std::vector<double> grad_p;
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        BarrierConfig barrier = cfg.barrier;
        barrier.lambda = cfg.use_soft_loss
                             ? cfg.barrier.lambda *
                                   std::pow(0.5, static_cast<double>(epoch / cfg.lambda_halving_epochs))
                             : 0.0;

        const std::vector<double> u = net.forward(features, tape);
        const std::vector<double> p_raw = decode(u);
        const std::vector<double> p = cfg.use_scaling
                                          ? project_capped(p_raw, pp.floor, prob.w_norms_sq, budget)
                                          : clamp_only(p_raw, pp.floor);

        const double overshoot = std::max(0.0, prob.rf_spent(p) - budget);
        res.max_violation_w = std::max(res.max_violation_w, overshoot);
        if (cfg.use_scaling) {
            bool floor_ok = true;
            for (std::size_t k = 0; k < k_all; ++k) floor_ok = floor_ok && p[k] >= pp.floor[k];
            if (overshoot > tol_w || !floor_ok) {
                throw TrainingError("projected output infeasible (overshoot " +
                                        std::to_string(overshoot) + " W)",
                                    epoch);
            }
        }

        const double loss = phase_loss(p, pp, barrier, &grad_p);
        if (!std::isfinite(loss)) throw TrainingError("non-finite training loss", epoch);
        res.loss_history.push_back(loss);
        res.epochs_run = epoch + 1;

        const double obj = pp.objective(p);
        if (epoch == 0 || obj > best + cfg.min_relative_improvement * std::abs(best)) {
            best = obj;
            res.best_epoch = epoch;
            res.p = p;
            best_params = net.parameters();
        } else if (epoch - res.best_epoch >= cfg.patience) {
            break;
        }

        std::vector<double> grad_raw;
        if (cfg.use_scaling) {
            grad_raw = project_capped_vjp(p_raw, pp.floor, prob.w_norms_sq, budget, grad_p);
        } else {
            grad_raw = grad_p;
            for (std::size_t k = 0; k < k_all; ++k) {
                if (!(p_raw[k] > pp.floor[k])) grad_raw[k] = 0.0;
            }
        }
        const std::vector<double> grad_u = decode.vjp(p_raw, grad_raw);
        const std::vector<double> grad = net.backward(tape, grad_u);
        for (double g : grad) {
            if (!std::isfinite(g)) throw TrainingError("non-finite gradient", epoch);
        }
        adam.step(net.parameters(), grad);
    }

    net.parameters() = std::move(best_params);
    res.net = std::move(net);
    res.best_objective = best;
    res.overshoot_w = std::max(0.0, prob.rf_spent(res.p) - budget);
    res.feasible = res.overshoot_w <= tol_w;
    for (std::size_t k = 0; k < k_all; ++k) res.feasible = res.feasible && res.p[k] >= pp.floor[k];
    return res;
}

// ---------------------------------------------------------------- gradient check

double gradient_check(const MlpNetwork& net, std::span<const double> features,
                      const OutputLoss& loss, const GradientCheckOptions& opts) {
    MlpNetwork::Tape tape;
    const std::vector<double> out = net.forward(features, tape);
    std::vector<double> grad_out;
    loss(out, &grad_out);
    std::vector<double> analytic = net.backward(tape, grad_out);
    if (opts.corrupt) opts.corrupt(analytic);

    std::vector<std::size_t> idx(net.parameter_count());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (idx.size() > opts.max_parameters) {
        std::mt19937_64 rng(opts.seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(opts.max_parameters);
    }

    MlpNetwork probe = net;
    double worst = 0.0;
    for (std::size_t i : idx) {
        const double saved = probe.parameters()[i];
        probe.parameters()[i] = saved + opts.step;
        const double up = loss(probe.forward(features), nullptr);
        probe.parameters()[i] = saved - opts.step;
        const double down = loss(probe.forward(features), nullptr);
        probe.parameters()[i] = saved;
        const double fd = (up - down) / (2.0 * opts.step);
        const double err = std::abs(analytic[i] - fd) / std::max(std::abs(analytic[i]), 1e-12);
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace hap::neuro
