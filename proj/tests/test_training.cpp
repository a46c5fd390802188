#include "lgae/data.hpp"
#include "lgae/error.hpp"
#include "lgae/graph.hpp"
#include "lgae/linalg.hpp"
#include "lgae/training.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace lgae;

namespace {

struct Instance {
    GraphDataset dataset;
    SparseMatrix a_train;
    SparseMatrix s;
    ReconLossSpec spec;
    DenseMatrix x;
};

Instance make_instance(std::size_t n, std::size_t d, std::uint64_t seed) {
    Instance inst;
    inst.dataset = generate_synthetic(SyntheticKind::ErdosRenyi, n, 0.3, seed, d);
    inst.a_train = adjacency_from_edges(inst.dataset);
    inst.s = normalized_operator(inst.a_train);
    inst.spec = make_recon_spec(inst.a_train);
    inst.x = *inst.dataset.features;
    return inst;
}

ModelConfig config_for(Variant v, std::size_t input_dim, std::uint64_t seed) {
    ModelConfig cfg;
    cfg.variant = v;
    cfg.input_dim = input_dim;
    cfg.hidden_dims = is_linear_encoder(v) ? std::vector<std::size_t>{32, 16}
                                           : std::vector<std::size_t>{8, 4};
    cfg.k = 2;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_SUITE("training") {

TEST_CASE("analytic gradients match central finite differences for all variants") {
    for (const std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        const Instance inst = make_instance(10 + seed * 3, 4 + seed * 2, seed);
        for (const Variant v : {Variant::LGAE, Variant::LVGAE, Variant::GAE, Variant::VGAE}) {
            const ModelConfig cfg = config_for(v, inst.x.cols, seed + 17);
            ModelParams params = ModelParams::glorot(cfg);
            const bool gcn = !is_linear_encoder(v);
            DenseMatrix noise;
            const DenseMatrix* noise_ptr = nullptr;
            if (is_variational(v)) {
                noise = oracle::random_dense(inst.x.rows, cfg.latent_dim(), seed + 99);
                noise_ptr = &noise;
            }
            const oracle::GradCheckResult r = oracle::gradient_check(
                std::move(params), inst.x, gcn ? &inst.s : nullptr, noise_ptr, inst.spec);
            INFO("variant " << to_string(v) << " seed " << seed << " worst tensor "
                            << r.worst_tensor);
            CHECK(r.max_rel_err < 1e-4);
        }
    }
}

TEST_CASE("gradients stay exact for single-layer and three-layer stacks") {
    const Instance inst = make_instance(12, 5, 29);
    struct Case {
        Variant variant;
        std::vector<std::size_t> hidden;
        std::size_t k;
    };
    const Case cases[] = {
        {Variant::VGAE, {16}, 1},          // one GCN layer, split head only
        {Variant::GAE, {16}, 1},
        {Variant::VGAE, {64, 32, 16}, 3},  // deep progression
        {Variant::LVGAE, {16}, 1},         // linear straight to the latent
        {Variant::LGAE, {16, 8, 4}, 3},
    };
    for (const Case& c : cases) {
        ModelConfig cfg;
        cfg.variant = c.variant;
        cfg.input_dim = 5;
        cfg.hidden_dims = c.hidden;
        cfg.k = c.k;
        cfg.seed = 77;
        ModelParams params = ModelParams::glorot(cfg);
        const bool gcn = !is_linear_encoder(c.variant);
        DenseMatrix noise;
        const DenseMatrix* np = nullptr;
        if (is_variational(c.variant)) {
            noise = oracle::random_dense(12, cfg.latent_dim(), 78);
            np = &noise;
        }
        const oracle::GradCheckResult r = oracle::gradient_check(
            std::move(params), inst.x, gcn ? &inst.s : nullptr, np, inst.spec);
        INFO("variant " << to_string(c.variant) << " layers " << c.hidden.size());
        CHECK(r.max_rel_err < 1e-4);
    }
}

TEST_CASE("all-zero parameters are a stationary point for deterministic variants") {
    const Instance inst = make_instance(8, 5, 31);
    for (const Variant v : {Variant::LGAE, Variant::GAE}) {
        const ModelConfig cfg = config_for(v, 5, 32);
        ModelParams params = ModelParams::glorot(cfg);
        for (auto& [name, m] : params.tensors()) {
            for (double& x : m->data) x = 0.0;
        }
        ForwardCache cache;
        const bool gcn = !is_linear_encoder(v);
        forward(params, inst.x, gcn ? &inst.s : nullptr, nullptr, &cache);
        const ModelParams grads =
            backward(params, inst.x, gcn ? &inst.s : nullptr, cache, inst.spec);
        for (const auto& [name, m] : grads.tensors()) {
            for (double g : m->data) {
                CHECK(std::abs(g) < 1e-12);
            }
        }
    }
}

TEST_CASE("kl gradients follow the closed form") {
    const DenseMatrix mu = oracle::random_dense(5, 3, 33);
    const DenseMatrix ls = oracle::random_dense(5, 3, 34);
    DenseMatrix gmu(5, 3, 0.0), gls(5, 3, 0.0);
    kl_divergence_backward(mu, ls, gmu, gls);
    for (std::size_t i = 0; i < mu.data.size(); ++i) {
        CHECK(gmu.data[i] == doctest::Approx(mu.data[i] / 5.0).epsilon(1e-14));
        CHECK(gls.data[i] ==
              doctest::Approx((std::exp(2.0 * ls.data[i]) - 1.0) / 5.0).epsilon(1e-12));
    }

    // Against finite differences of the scalar.
    const double h = 1e-6;
    DenseMatrix mu2 = mu;
    mu2.data[4] += h;
    const double up = kl_divergence(mu2, ls);
    mu2.data[4] -= 2 * h;
    const double down = kl_divergence(mu2, ls);
    CHECK(gmu.data[4] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
    const ModelConfig cfg = config_for(Variant::LGAE, 5, 35);
    ModelParams params = ModelParams::glorot(cfg);
    const ModelParams before = params;
    const ModelParams grads = ModelParams::zeros_like(params);
    AdamState state = AdamState::zeros_like(params);
    TrainConfig tc;
    for (std::size_t t = 1; t <= 5; ++t) adam_step(params, grads, state, t, tc);
    const auto pt = params.tensors();
    const auto bt = before.tensors();
    for (std::size_t i = 0; i < pt.size(); ++i) {
        CHECK(pt[i].second->data == bt[i].second->data);
    }
}

TEST_CASE("adam approaches lr-sized steps under a constant gradient") {
    // Single scalar parameter driven by g = 1.
    ModelConfig cfg;
    cfg.variant = Variant::LGAE;
    cfg.input_dim = 1;
    cfg.hidden_dims = {1, 1};
    cfg.seed = 0;
    ModelParams params = ModelParams::glorot(cfg);
    for (auto& [name, m] : params.tensors()) {
        for (double& x : m->data) x = 0.0;
    }
    ModelParams grads = ModelParams::zeros_like(params);
    grads.weights[0](0, 0) = 1.0;

    AdamState state = AdamState::zeros_like(params);
    TrainConfig tc;
    tc.learning_rate = 0.01;
    double prev = 0.0;
    double step = 0.0;
    for (std::size_t t = 1; t <= 500; ++t) {
        adam_step(params, grads, state, t, tc);
        step = prev - params.weights[0](0, 0);
        prev = params.weights[0](0, 0);
    }
    CHECK(step == doctest::Approx(tc.learning_rate).epsilon(0.01));
}

TEST_CASE("adam reproduces three hand-computed scalar steps") {
    ModelConfig cfg;
    cfg.variant = Variant::LGAE;
    cfg.input_dim = 1;
    cfg.hidden_dims = {1, 1};
    cfg.seed = 0;
    ModelParams params = ModelParams::glorot(cfg);
    for (auto& [name, m] : params.tensors()) {
        for (double& x : m->data) x = 0.0;
    }
    ModelParams grads = ModelParams::zeros_like(params);
    grads.weights[0](0, 0) = 1.0;
    AdamState state = AdamState::zeros_like(params);
    TrainConfig tc;
    tc.learning_rate = 0.1;

    // theta_t for g = 1, lr = 0.1, betas (0.9, 0.999), eps = 1e-8.
    const double expected[3] = {-0.09999999900000002, -0.19999999799999935, -0.29999999699999935};
    for (std::size_t t = 1; t <= 3; ++t) {
        adam_step(params, grads, state, t, tc);
        CHECK(params.weights[0](0, 0) == doctest::Approx(expected[t - 1]).epsilon(1e-12));
    }
}

TEST_CASE("adam rejects non-finite gradients, naming the tensor") {
    const ModelConfig cfg = config_for(Variant::LGAE, 3, 36);
    ModelParams params = ModelParams::glorot(cfg);
    ModelParams grads = ModelParams::zeros_like(params);
    grads.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    AdamState state = AdamState::zeros_like(params);
    TrainConfig tc;
    try {
        adam_step(params, grads, state, 1, tc);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("W0") != std::string::npos);
    }
}

TEST_CASE("backward requires a populated cache") {
    const Instance inst = make_instance(6, 3, 37);
    const ModelParams params = ModelParams::glorot(config_for(Variant::LGAE, 3, 38));
    ForwardCache cache; // never filled
    CHECK_THROWS_AS(backward(params, inst.x, nullptr, cache, inst.spec), ContractError);
}

TEST_CASE("forward agrees with the public encoders") {
    const Instance inst = make_instance(9, 4, 39);
    for (const Variant v : {Variant::LGAE, Variant::LVGAE, Variant::GAE, Variant::VGAE}) {
        const ModelConfig cfg = config_for(v, 4, 40);
        const ModelParams params = ModelParams::glorot(cfg);
        const bool gcn = !is_linear_encoder(v);
        DenseMatrix noise;
        const DenseMatrix* np = nullptr;
        if (is_variational(v)) {
            noise = oracle::random_dense(9, cfg.latent_dim(), 41);
            np = &noise;
        }
        const LatentOutput a = forward(params, inst.x, gcn ? &inst.s : nullptr, np, nullptr);
        const LatentOutput b = gcn ? encode_gcn(inst.x, inst.s, params, np)
                                   : encode_linear(inst.x, params, np);
        CHECK(a.z.data == b.z.data);
    }
}

TEST_CASE("training the 2-node toy beats the flat-latent baseline") {
    GraphDataset ds;
    ds.num_nodes = 2;
    ds.edges = {{0, 1}};
    ds.name = "pair";
    ds.features = DenseMatrix::identity(2);

    EdgeSplit split;
    split.train_edges = ds.edges;

    ModelConfig mc = config_for(Variant::LGAE, 2, 42);
    TrainConfig tc;
    tc.epochs = 200;
    const TrainResult result = train(ds, split, *ds.features, mc, tc);
    // z = 0 scores every pair 0.5: loss ln 2.
    CHECK(result.report.recon_losses.back() < std::log(2.0));
    CHECK(result.report.recon_losses.size() == 200);
}

TEST_CASE("training is bitwise deterministic") {
    const GraphDataset ds = generate_synthetic(SyntheticKind::ErdosRenyi, 20, 0.25, 43, 6);
    const EdgeSplit split = split_edges(ds, 0.1, 0.2, 44);
    for (const Variant v : {Variant::LGAE, Variant::LVGAE, Variant::VGAE}) {
        ModelConfig mc = config_for(v, v == Variant::LGAE || v == Variant::LVGAE ? 6 : 6, 45);
        TrainConfig tc;
        tc.epochs = 25;
        tc.seed = 46;
        const DenseMatrix x = *ds.features;
        const TrainResult r1 = train(ds, split, x, mc, tc);
        const TrainResult r2 = train(ds, split, x, mc, tc);
        CHECK(r1.report.recon_losses == r2.report.recon_losses);
        CHECK(r1.report.kl_losses == r2.report.kl_losses);
        const auto t1 = r1.params.tensors();
        const auto t2 = r2.params.tensors();
        for (std::size_t i = 0; i < t1.size(); ++i) {
            CHECK(t1[i].second->data == t2[i].second->data); // bitwise
        }
    }
}

#ifdef _OPENMP
TEST_CASE("results do not depend on the thread count") {
    const GraphDataset ds = generate_synthetic(SyntheticKind::ErdosRenyi, 24, 0.25, 51, 5);
    const EdgeSplit split = split_edges(ds, 0.1, 0.2, 52);
    ModelConfig mc = config_for(Variant::LVGAE, 5, 53);
    TrainConfig tc;
    tc.epochs = 15;
    tc.seed = 54;

    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const TrainResult single = train(ds, split, *ds.features, mc, tc);
    omp_set_num_threads(saved > 1 ? saved : 2);
    const TrainResult multi = train(ds, split, *ds.features, mc, tc);
    omp_set_num_threads(saved);

    CHECK(single.report.recon_losses == multi.report.recon_losses);
    const auto t1 = single.params.tensors();
    const auto t2 = multi.params.tensors();
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(t1[i].second->data == t2[i].second->data); // bitwise
    }
}
#endif

TEST_CASE("trained loss beats the untrained loss on toy graphs") {
    std::size_t improved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GraphDataset ds = generate_synthetic(SyntheticKind::ErdosRenyi, 12, 0.3, seed, 4);
        EdgeSplit split;
        split.train_edges = ds.edges;
        ModelConfig mc = config_for(Variant::LGAE, 4, seed);
        TrainConfig tc;
        tc.epochs = 200;
        tc.seed = seed;
        const TrainResult r = train(ds, split, *ds.features, mc, tc);
        if (r.report.recon_losses.back() < r.report.recon_losses.front()) ++improved;
    }
    CHECK(improved >= 9);
}

TEST_CASE("validation metrics are recorded on the configured cadence") {
    const GraphDataset ds = generate_synthetic(SyntheticKind::ErdosRenyi, 30, 0.25, 47, 5);
    const EdgeSplit split = split_edges(ds, 0.1, 0.1, 48);
    ModelConfig mc = config_for(Variant::LGAE, 5, 49);
    TrainConfig tc;
    tc.epochs = 40;
    tc.eval_every = 10;
    const TrainResult r = train(ds, split, *ds.features, mc, tc);
    REQUIRE(r.report.val_metrics.size() == 4);
    CHECK(r.report.val_metrics[0].epoch == 10);
    CHECK(r.report.val_metrics[3].epoch == 40);
    for (const EvalPoint& p : r.report.val_metrics) {
        CHECK(p.auc >= 0.0);
        CHECK(p.auc <= 1.0);
        CHECK(p.ap >= 0.0);
        CHECK(p.ap <= 1.0);
    }
}

} // TEST_SUITE
