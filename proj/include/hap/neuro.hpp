#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

#include "hap/allocation.hpp"

namespace hap::neuro {

// Fully connected ReLU network. Parameters are stored flat, layer by layer,
// each layer as its weight matrix (row-major, out x in) followed by its bias.
// The last layer is linear and followed by the positivity map softplus(z)^2.
class MlpNetwork {
public:
    MlpNetwork() = default;
    // Zero-initialized parameters.
    explicit MlpNetwork(std::vector<std::size_t> widths);
    // Uniform fan-in initialization, biases zero.
    static MlpNetwork initialized(std::vector<std::size_t> widths, std::uint64_t seed);

    const std::vector<std::size_t>& widths() const { return widths_; }
    std::size_t layers() const { return widths_.empty() ? 0 : widths_.size() - 1; }
    std::size_t input_width() const { return widths_.front(); }
    std::size_t output_width() const { return widths_.back(); }
    std::size_t parameter_count() const { return params_.size(); }
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }

    struct Tape {
        std::vector<std::vector<double>> activations;  // a_0 = input, a_l after ReLU
        std::vector<std::vector<double>> pre;          // z_l per layer
    };

    std::vector<double> forward(std::span<const double> features) const;
    std::vector<double> forward(std::span<const double> features, Tape& tape) const;
    // Parameter gradient given dL/d(output) for the pass recorded in tape.
    std::vector<double> backward(const Tape& tape, std::span<const double> grad_out) const;

    nlohmann::json to_json() const;
    static MlpNetwork from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static MlpNetwork load(const std::filesystem::path& path);

private:
    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
    void build_offsets();

    std::vector<std::size_t> widths_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

std::vector<double> mlp_forward(const MlpNetwork& net, std::span<const double> features);

// Adam with bias correction.
class Adam {
public:
    Adam(std::size_t n, double step = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);
    void step(std::vector<double>& params, std::span<const double> grad);
    std::size_t steps_taken() const { return t_; }

private:
    double step_, beta1_, beta2_, eps_;
    std::vector<double> m_, v_;
    std::size_t t_ = 0;
    double beta1_pow_ = 1.0;
    double beta2_pow_ = 1.0;
};

enum class Phase { p1, p2 };

// One allocation instance with its admitted set fixed, in the form the
// training loop consumes.
struct PhaseProblem {
    AllocationProblem prob;
    FeasibilityPartition part;
    Phase phase = Phase::p1;
    std::vector<double> floor;   // p_min on Q, zero elsewhere
    std::vector<bool> scored;    // users whose rates enter the objective
    double barrier_budget_w = 0.0;  // P_tot in P1, residual budget in P2

    static PhaseProblem make(const AllocationProblem& prob, const FeasibilityPartition& part);
    static PhaseProblem make(const AllocationProblem& prob);

    // Objective of the phase in bps/W: all rates (P1) or unpinned rates (P2) over P_com.
    double objective(std::span<const double> p) const;
    // Barrier-side spend: total RF in P1, unpinned RF in P2.
    double barrier_spend(std::span<const double> p) const;
};

// Losses are in Mbps/W so that lambda acts on the same scale as the EE term.
inline constexpr double kLossRateScale = 1e6;

// -EE - lambda (sum_k ln(p_k - p_min,k + eps) + ln(P_tot - spend + eps)), each
// log argument floored at eps. Optional gradient with respect to p.
double loss_p1(std::span<const double> p, const PhaseProblem& pp, const BarrierConfig& barrier,
               std::vector<double>* grad = nullptr);
// -EE_P2 - lambda ln(P_tot' - unpinned spend + eps), floored likewise.
double loss_p2(std::span<const double> p, const PhaseProblem& pp, const BarrierConfig& barrier,
               std::vector<double>* grad = nullptr);
double phase_loss(std::span<const double> p, const PhaseProblem& pp, const BarrierConfig& barrier,
                  std::vector<double>* grad = nullptr);

// Per user: gamma_k / max gamma, r_k / B_w, c_k / max c; then P_tot / P_emin.
std::vector<double> problem_features(const PhaseProblem& pp);

// Network output u -> raw coefficients p~_k = sqrt(m_k^2 + s_k^2 u_k), so u
// measures RF spend above the floor. Pinned users get s_k = 0; the others get
// s_k^2 = H / (n_free c_k) with H the headroom, and u = 1 on every free user
// spends it exactly.
struct Decoder {
    std::vector<double> offset;
    std::vector<double> scale;
    static Decoder make(const PhaseProblem& pp);
    std::vector<double> operator()(std::span<const double> u) const;
    // dL/du given dL/dp~ at the raw coefficients p~ = (*this)(u).
    std::vector<double> vjp(std::span<const double> p_raw, std::span<const double> grad_raw) const;
};

struct TrainConfig {
    std::vector<std::size_t> hidden{64, 64, 32, 32};
    std::size_t max_epochs = 2000;
    std::size_t patience = 50;
    double step = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    std::uint64_t seed = 1;
    BarrierConfig barrier{1e-2, 1e-6, 200, 1e-13};
    std::size_t lambda_halving_epochs = 200;
    double min_relative_improvement = 1e-9;
    bool use_scaling = true;    // false: clamp only, no alpha scaling
    bool use_soft_loss = true;  // false: lambda = 0

    void validate() const;
};

struct TrainResult {
    MlpNetwork net;                 // best checkpoint
    std::vector<double> p;          // its projected output
    double best_objective = 0.0;    // bps/W
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    std::vector<double> loss_history;
    double max_violation_w = 0.0;   // worst constraint violation seen over all epochs
    double overshoot_w = 0.0;       // max(0, spend(p) - P_tot) of the returned output
    bool feasible = true;           // returned output respects floor and budget
};

// Single-instance training loop. Every forward pass goes through the
// projector (unless disabled for ablation) before the loss. Throws
// TrainingError on a non-finite loss or, with projection enabled, on an
// infeasible projected output.
TrainResult train(const PhaseProblem& pp, const TrainConfig& cfg);

// Scalar loss of the network output with its gradient.
using OutputLoss = std::function<double(std::span<const double> out, std::vector<double>* grad)>;

struct GradientCheckOptions {
    std::size_t max_parameters = 100;
    double step = 1e-6;
    std::uint64_t seed = 7;
    // Applied to the analytic gradient before comparison (negative controls).
    std::function<void(std::vector<double>&)> corrupt;
};

// Max over checked parameters of |analytic - central| / max(|analytic|, 1e-12).
double gradient_check(const MlpNetwork& net, std::span<const double> features,
                      const OutputLoss& loss, const GradientCheckOptions& opts = {});

}  // namespace hap::neuro
