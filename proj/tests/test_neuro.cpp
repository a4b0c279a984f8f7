#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "doctest.h"

#include "ee_oracle.hpp"
#include "fixtures.hpp"
#include "hap/error.hpp"
#include "hap/neuro.hpp"
#include "hap/q3e.hpp"
#include "oracles.hpp"

using namespace hap;
using namespace hap::neuro;

namespace {
double softplus(double z) { return std::log1p(std::exp(z)); }

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

OutputLoss weighted_quadratic(std::vector<double> w) {
    return [w](std::span<const double> out, std::vector<double>* grad) {
        double s = 0.0;
        if (grad) grad->assign(out.size(), 0.0);
        for (std::size_t i = 0; i < out.size(); ++i) {
            s += w[i] * out[i] + 0.5 * out[i] * out[i];
            if (grad) (*grad)[i] = w[i] + out[i];
        }
        return s;
    };
}

TrainConfig quick_config(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    return cfg;
}
}  // namespace

TEST_CASE("forward pass basics") {
    MlpNetwork zero({5, 7, 3});
    const std::vector<double> x{0.1, -2.0, 3.0, 0.4, 5.0};
    for (double y : mlp_forward(zero, x)) CHECK(y == doctest::Approx(std::pow(std::log(2.0), 2)).epsilon(1e-15));
    CHECK(zero.parameter_count() == 5 * 7 + 7 + 7 * 3 + 3);

    MlpNetwork tiny({2, 1, 1});
    auto& w = tiny.parameters();
    // layer 0: W (1x2), b (1); layer 1: W (1x1), b (1)
    w = {0.5, -0.25, 0.1, 2.0, -0.3};
    const std::vector<double> in{1.2, 0.8};
    const double h = std::max(0.0, 0.5 * 1.2 - 0.25 * 0.8 + 0.1);
    const double expect = std::pow(softplus(2.0 * h - 0.3), 2);
    CHECK(mlp_forward(tiny, in)[0] == doctest::Approx(expect).epsilon(1e-15));

    std::mt19937_64 rng(4);
    const auto net = MlpNetwork::initialized({10, 64, 64, 32, 32, 3}, 11);
    CHECK(net.parameter_count() == 10 * 64 + 64 + 64 * 64 + 64 + 64 * 32 + 32 + 32 * 32 + 32 + 32 * 3 + 3);
    for (int t = 0; t < 50; ++t) {
        const auto out = mlp_forward(net, random_vector(10, rng, -1e3, 1e3));
        for (double y : out) {
            CHECK(std::isfinite(y));
            CHECK(y >= 0.0);
        }
    }
    CHECK_THROWS_AS(mlp_forward(net, std::vector<double>(9, 0.0)), DimensionError);
}

TEST_CASE("backprop agrees with finite differences") {
    std::mt19937_64 rng(1);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const std::vector<std::size_t> widths{4, 8 + s, 6, 3};
        const auto net = MlpNetwork::initialized(widths, 100 + s);
        const auto x = random_vector(4, rng);
        const auto loss = weighted_quadratic(random_vector(3, rng));
        CHECK(gradient_check(net, x, loss) < 1e-4);
    }
}

TEST_CASE("corrupted gradient is caught") {
    std::mt19937_64 rng(2);
    const auto net = MlpNetwork::initialized({4, 6, 2}, 5);
    const auto x = random_vector(4, rng);
    const auto loss = weighted_quadratic(random_vector(2, rng));
    GradientCheckOptions opts;
    opts.max_parameters = 1000;
    CHECK(gradient_check(net, x, loss, opts) < 1e-4);
    opts.corrupt = [](std::vector<double>& g) { g[3] = 1.5 * g[3] + 0.1; };
    CHECK(gradient_check(net, x, loss, opts) > 1e-2);
}

TEST_CASE("network without hidden layers") {
    std::mt19937_64 rng(3);
    const auto net = MlpNetwork::initialized({3, 2}, 9);
    const auto loss = weighted_quadratic(random_vector(2, rng));
    GradientCheckOptions opts;
    opts.step = 1e-5;
    CHECK(gradient_check(net, random_vector(3, rng), loss, opts) < 1e-8);
}

TEST_CASE("checkpoint round trip is exact") {
    const auto net = MlpNetwork::initialized({7, 16, 5}, 21);
    const auto path = std::filesystem::temp_directory_path() / "hap_ckpt_test.json";
    net.save(path);
    const auto back = MlpNetwork::load(path);
    CHECK(back.widths() == net.widths());
    CHECK(back.parameters() == net.parameters());
    std::filesystem::remove(path);
    CHECK(MlpNetwork::from_json(net.to_json()).parameters() == net.parameters());
}

TEST_CASE("adam minimizes a quadratic") {
    std::vector<double> x{3.0, -2.0};
    Adam adam(2, 0.05);
    for (int i = 0; i < 2000; ++i) {
        const std::vector<double> g{2.0 * (x[0] - 1.0), 2.0 * (x[1] + 0.5)};
        adam.step(x, g);
    }
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(x[1] == doctest::Approx(-0.5).epsilon(1e-3));
    CHECK(adam.steps_taken() == 2000);
}

TEST_CASE("phase losses") {
    const auto prob = fixture::random_problem(3, 17, 1.5);
    const auto pp = PhaseProblem::make(prob);
    REQUIRE(pp.phase == Phase::p1);
    std::vector<double> p(3);
    for (std::size_t k = 0; k < 3; ++k) p[k] = prob.p_min[k] * 1.05;

    BarrierConfig none{0.0, 1e-6, 200, 1e-13};
    CHECK(loss_p1(p, pp, none) == doctest::Approx(-pp.objective(p) / kLossRateScale).epsilon(1e-14));

    // Slack driven to zero: the floor keeps the loss finite.
    BarrierConfig barrier;
    std::vector<double> on_floor = prob.p_min;
    CHECK(std::isfinite(loss_p1(on_floor, pp, barrier)));

    std::vector<double> grad;
    loss_p1(p, pp, barrier, &grad);
    for (std::size_t k = 0; k < 3; ++k) {
        auto f = [&](double x) {
            auto q = p;
            q[k] = x;
            return loss_p1(q, pp, barrier);
        };
        const double fd = oracle::central_difference(f, p[k], 1e-6 * p[k]);
        CHECK(std::abs(grad[k] - fd) <= 1e-4 * std::abs(grad[k]));
    }
}

TEST_CASE("P2 loss only sees the unserved user") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto prob = fixture::random_problem(3, 300 + seed, 0.8);
        const auto part = feasibility_partition(prob.p_min, prob.w_norms_sq, prob.p_tot_w);
        if (part.admitted() != 2) continue;
        const auto pp = PhaseProblem::make(prob, part);
        REQUIRE(pp.phase == Phase::p2);
        std::size_t j = 0;
        while (pp.floor[j] > 0.0) ++j;

        std::vector<double> p = pp.floor;
        p[j] = 0.3 * std::sqrt(part.residual_budget_w / prob.w_norms_sq[j]);
        BarrierConfig none{0.0, 1e-6, 200, 1e-13};
        CHECK(loss_p2(p, pp, none) == doctest::Approx(-pp.objective(p) / kLossRateScale).epsilon(1e-14));

        std::vector<double> grad;
        BarrierConfig barrier;
        loss_p2(p, pp, barrier, &grad);
        for (std::size_t k = 0; k < 3; ++k) {
            if (k != j) CHECK(std::abs(grad[k]) < 1e-10);
        }
        auto f = [&](double x) {
            auto q = p;
            q[j] = x;
            return loss_p2(q, pp, barrier);
        };
        CHECK(grad[j] == doctest::Approx(oracle::central_difference(f, p[j], 1e-6 * p[j])).epsilon(1e-4));
    }
}

TEST_CASE("features and decoder") {
    const auto prob = fixture::random_problem(4, 3, 0.7);
    const auto pp = PhaseProblem::make(prob);
    const auto feats = problem_features(pp);
    CHECK(feats.size() == 3 * 4 + 1);
    const auto dec = Decoder::make(pp);
    for (std::size_t k = 0; k < 4; ++k) {
        if (pp.floor[k] > 0.0) CHECK(dec.scale[k] == 0.0);
    }
}

TEST_CASE("training a single user problem") {
    const auto prob = fixture::random_problem(1, 2, 3.0);
    const auto pp = PhaseProblem::make(prob);
    const auto res = train(pp, quick_config(1));
    const auto ref = oracle::ee_reference(prob);
    CHECK(res.feasible);
    CHECK(res.best_objective >= 0.99 * ref.ee);
    CHECK(res.max_violation_w <= 1e-9);
    CHECK(res.epochs_run - res.best_epoch <= TrainConfig{}.patience + 1);
}

TEST_CASE("training is deterministic") {
    const auto prob = fixture::random_problem(3, 8, 0.9);
    const auto pp = PhaseProblem::make(prob);
    TrainConfig cfg = quick_config(4);
    cfg.max_epochs = 300;
    const auto a = train(pp, cfg);
    const auto b = train(pp, cfg);
    CHECK(a.loss_history == b.loss_history);
    CHECK(a.p == b.p);
}

TEST_CASE("early stopping respects patience") {
    const auto prob = fixture::random_problem(2, 6, 1.4);
    TrainConfig cfg = quick_config(2);
    cfg.patience = 20;
    const auto res = train(PhaseProblem::make(prob), cfg);
    CHECK(res.epochs_run <= res.best_epoch + cfg.patience + 1);
}

TEST_CASE("training config validation") {
    TrainConfig cfg;
    cfg.patience = cfg.max_epochs;
    CHECK_THROWS(cfg.validate());
    cfg = TrainConfig{};
    cfg.step = 0.0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("unprojected training overshoots tight budgets") {
    // Tight means the budget binds at the numeric optimum. Instances whose
    // optimum is interior give the unprojected net no reason to cross it.
    std::size_t violations = 0;
    std::size_t used = 0;
    for (std::uint64_t seed = 0; used < 20; ++seed) {
        REQUIRE(seed < 500);
        const auto prob = fixture::random_problem(4, 1200 + seed, 0.6);
        if (prob.rf_spent(q3e(prob).p) < (1.0 - 1e-6) * prob.p_tot_w) continue;
        ++used;
        TrainConfig cfg = quick_config(seed + 1);
        cfg.use_scaling = false;
        const auto res = train(PhaseProblem::make(prob), cfg);
        if (!res.feasible) ++violations;
    }
    CHECK(violations > 6);
}

TEST_CASE("learned allocation is close to the numeric one") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t k = 1 + seed % 4;
        const auto prob = fixture::random_problem(k, 1500 + seed, 0.5 + 0.1 * double(seed));
        const auto numeric = q3e(prob);
        Q3eOptions opts;
        opts.backend = Backend::mlp;
        opts.train.seed = seed + 1;
        const auto learned = q3e(prob, opts);
        CHECK(learned.q_set == numeric.q_set);
        CHECK(oracle::face_objective(prob, learned.p) >= 0.95 * oracle::face_objective(prob, numeric.p));
        CHECK(learned.rf_spent_w <= prob.p_tot_w * (1.0 + 1e-12));
    }
}
