#include "lgae/training.hpp"

#include "lgae/error.hpp"
#include "lgae/linalg.hpp"
#include "lgae/rng.hpp"

#include <chrono>
#include <cmath>

namespace lgae {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("train config: learning_rate must be > 0");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
        throw ConfigError("train config: betas must lie in (0, 1)");
    }
    if (eval_every < 1) throw ConfigError("train config: eval_every must be >= 1");
}

const DenseMatrix& scoring_latents(const LatentOutput& out) {
    return out.mu.has_value() ? *out.mu : out.z;
}

LatentOutput forward(const ModelParams& params, const DenseMatrix& x, const SparseMatrix* s,
                     const DenseMatrix* noise, ForwardCache* cache) {
    const ModelConfig& cfg = params.config;
    const bool variational = is_variational(cfg.variant);
    const bool gcn = !is_linear_encoder(cfg.variant);
    if (gcn && s == nullptr) {
        throw ContractError("forward: GCN variants require the propagation operator");
    }
    if (x.cols != cfg.input_dim) {
        throw ShapeError("forward: input has " + std::to_string(x.cols) + " columns, config expects " +
                         std::to_string(cfg.input_dim));
    }

    const std::size_t layers = cfg.hidden_dims.size();
    const std::size_t shared = variational ? layers - 1 : layers;
    if (cache != nullptr) {
        cache->hidden.clear();
        cache->populated = false;
    }

    const auto apply_layer = [&](const DenseMatrix& in, const DenseMatrix& w,
                                 const DenseMatrix* bias) {
        DenseMatrix out = gcn ? spmm(*s, matmul(in, w)) : matmul(in, w);
        if (bias != nullptr && bias->data.size() > 0) {
            add_row_vector(out, std::span<const double>(bias->data));
        }
        return out;
    };

    DenseMatrix h;
    const DenseMatrix* cur = &x;
    for (std::size_t i = 0; i + 1 < layers; ++i) {
        h = apply_layer(*cur, params.weights[i], i < params.biases.size() ? &params.biases[i] : nullptr);
        for (double& v : h.data) v = v > 0.0 ? v : 0.0;
        if (cache != nullptr) cache->hidden.push_back(h);
        cur = &h;
    }

    LatentOutput out;
    if (!variational) {
        out.z = apply_layer(*cur, params.weights[shared - 1],
                            shared - 1 < params.biases.size() ? &params.biases[shared - 1] : nullptr);
        if (!out.z.all_finite()) throw NumericError("forward produced non-finite latents");
    } else {
        DenseMatrix mu = apply_layer(*cur, params.w_mu, params.b_mu.data.empty() ? nullptr : &params.b_mu);
        DenseMatrix log_sigma = apply_layer(*cur, params.w_log_sigma,
                                            params.b_log_sigma.data.empty() ? nullptr : &params.b_log_sigma);
        if (!mu.all_finite() || !log_sigma.all_finite()) {
            throw NumericError("forward produced non-finite posterior parameters");
        }
        if (noise != nullptr) {
            out.z = reparameterize(mu, log_sigma, *noise);
            if (!out.z.all_finite()) throw NumericError("forward produced non-finite latents");
            if (cache != nullptr) cache->noise = *noise;
        } else {
            out.z = mu;
            if (cache != nullptr) cache->noise = DenseMatrix(mu.rows, mu.cols, 0.0);
        }
        if (cache != nullptr) {
            cache->mu = mu;
            cache->log_sigma = log_sigma;
        }
        out.mu = std::move(mu);
        out.log_sigma = std::move(log_sigma);
    }
    if (cache != nullptr) {
        cache->z = out.z;
        cache->populated = true;
    }
    return out;
}

namespace {

// dP = dH ⊙ 1[activation > 0]
void relu_backward_inplace(DenseMatrix& grad, const DenseMatrix& activation) {
    for (std::size_t i = 0; i < grad.data.size(); ++i) {
        if (!(activation.data[i] > 0.0)) grad.data[i] = 0.0;
    }
}

} // namespace

ModelParams backward_with_loss(const ModelParams& params, const DenseMatrix& x,
                               const SparseMatrix* s, const ForwardCache& cache,
                               const ReconLossSpec& loss_spec, double* recon_out, double* kl_out) {
    if (!cache.populated) {
        throw ContractError("backward: forward cache not populated");
    }
    const ModelConfig& cfg = params.config;
    const bool variational = is_variational(cfg.variant);
    const bool gcn = !is_linear_encoder(cfg.variant);
    if (gcn && s == nullptr) {
        throw ContractError("backward: GCN variants require the propagation operator");
    }

    ModelParams grads = ModelParams::zeros_like(params);

    DenseMatrix dz;
    const double recon = reconstruction_loss(cache.z, loss_spec, &dz);
    if (recon_out != nullptr) *recon_out = recon;
    if (kl_out != nullptr) *kl_out = 0.0;

    const std::size_t layers = cfg.hidden_dims.size();
    const std::size_t shared = variational ? layers - 1 : layers;
    const auto layer_input = [&](std::size_t i) -> const DenseMatrix& {
        return i == 0 ? x : cache.hidden[i - 1];
    };

    // Gradient flowing into the activation that feeds the final layer.
    DenseMatrix d_hidden;

    if (!variational) {
        const DenseMatrix& a_last = layer_input(shared - 1);
        if (shared - 1 < grads.biases.size()) {
            grads.biases[shared - 1] = column_sums(dz); // bias sits outside the propagation
        }
        DenseMatrix dt = gcn ? spmm(*s, dz) : std::move(dz); // Sᵀ = S
        grads.weights[shared - 1] = matmul_at_b(a_last, dt);
        if (layers >= 2) {
            d_hidden = matmul_a_bt(dt, params.weights[shared - 1]);
        }
    } else {
        // Reparameterization path: z = mu + exp(log_sigma) ⊙ noise.
        DenseMatrix dmu = dz;
        DenseMatrix dls(dz.rows, dz.cols, 0.0);
        for (std::size_t i = 0; i < dz.data.size(); ++i) {
            dls.data[i] = dz.data[i] * cache.noise.data[i] * std::exp(cache.log_sigma.data[i]);
        }
        // Objective KL term: kl_divergence scaled by a further 1/n, the
        // weighting of the reference variational setup this reproduces.
        const double inv_n = 1.0 / static_cast<double>(cache.mu.rows);
        if (kl_out != nullptr) *kl_out = kl_divergence(cache.mu, cache.log_sigma) * inv_n;
        DenseMatrix kl_gmu(dz.rows, dz.cols, 0.0), kl_gls(dz.rows, dz.cols, 0.0);
        kl_divergence_backward(cache.mu, cache.log_sigma, kl_gmu, kl_gls);
        for (std::size_t i = 0; i < dz.data.size(); ++i) {
            dmu.data[i] += kl_gmu.data[i] * inv_n;
            dls.data[i] += kl_gls.data[i] * inv_n;
        }

        const DenseMatrix& a_last = layers >= 2 ? cache.hidden[layers - 2] : x;
        if (grads.b_mu.data.size() > 0) {
            grads.b_mu = column_sums(dmu);
            grads.b_log_sigma = column_sums(dls);
        }
        DenseMatrix dt_mu = gcn ? spmm(*s, dmu) : std::move(dmu);
        DenseMatrix dt_ls = gcn ? spmm(*s, dls) : std::move(dls);
        grads.w_mu = matmul_at_b(a_last, dt_mu);
        grads.w_log_sigma = matmul_at_b(a_last, dt_ls);
        if (layers >= 2) {
            d_hidden = matmul_a_bt(dt_mu, params.w_mu);
            const DenseMatrix d_ls_part = matmul_a_bt(dt_ls, params.w_log_sigma);
            for (std::size_t i = 0; i < d_hidden.data.size(); ++i) {
                d_hidden.data[i] += d_ls_part.data[i];
            }
        }
    }

    // Hidden layers, last to first.
    const std::size_t hidden_layers = variational ? shared : shared - 1;
    for (std::size_t idx = hidden_layers; idx-- > 0;) {
        relu_backward_inplace(d_hidden, cache.hidden[idx]);
        if (idx < grads.biases.size()) {
            grads.biases[idx] = column_sums(d_hidden);
        }
        DenseMatrix dt = gcn ? spmm(*s, d_hidden) : std::move(d_hidden);
        grads.weights[idx] = matmul_at_b(layer_input(idx), dt);
        if (idx > 0) {
            d_hidden = matmul_a_bt(dt, params.weights[idx]);
        }
    }
    return grads;
}

ModelParams backward(const ModelParams& params, const DenseMatrix& x, const SparseMatrix* s,
                     const ForwardCache& cache, const ReconLossSpec& loss_spec) {
    return backward_with_loss(params, x, s, cache, loss_spec, nullptr, nullptr);
}

AdamState AdamState::zeros_like(const ModelParams& params) {
    AdamState state;
    for (const auto& [name, m] : params.tensors()) {
        state.m.emplace_back(m->rows, m->cols, 0.0);
        state.v.emplace_back(m->rows, m->cols, 0.0);
    }
    return state;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, std::size_t t,
               const TrainConfig& config) {
    if (t < 1) throw ContractError("adam_step: t must be >= 1");
    auto tensors = params.tensors();
    const auto grad_tensors = grads.tensors();
    if (tensors.size() != grad_tensors.size() || tensors.size() != state.m.size()) {
        throw ShapeError("adam_step: params, grads and state disagree on tensor count");
    }

    const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        DenseMatrix& theta = *tensors[i].second;
        const DenseMatrix& g = *grad_tensors[i].second;
        if (!g.all_finite()) {
            throw NumericError("adam_step: non-finite gradient in tensor " + tensors[i].first);
        }
        DenseMatrix& m = state.m[i];
        DenseMatrix& v = state.v[i];
        for (std::size_t j = 0; j < theta.data.size(); ++j) {
            const double gj = g.data[j];
            m.data[j] = config.adam_beta1 * m.data[j] + (1.0 - config.adam_beta1) * gj;
            v.data[j] = config.adam_beta2 * v.data[j] + (1.0 - config.adam_beta2) * gj * gj;
            const double m_hat = m.data[j] / bc1;
            const double v_hat = v.data[j] / bc2;
            theta.data[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
        }
    }
}

TrainResult train(const GraphDataset& dataset, const EdgeSplit& split, const DenseMatrix& x_input,
                  const ModelConfig& model_config, const TrainConfig& train_config) {
    model_config.validate();
    train_config.validate();
    const auto t_start = std::chrono::steady_clock::now();

    GraphDataset train_graph;
    train_graph.num_nodes = dataset.num_nodes;
    train_graph.name = dataset.name + "/train";
    train_graph.edges = split.train_edges;
    const SparseMatrix a_train = adjacency_from_edges(train_graph);
    const ReconLossSpec loss_spec = make_recon_spec(a_train);

    const bool gcn = !is_linear_encoder(model_config.variant);
    SparseMatrix s_train;
    if (gcn) s_train = normalized_operator(a_train);
    const SparseMatrix* s_ptr = gcn ? &s_train : nullptr;

    if (x_input.rows != dataset.num_nodes) {
        throw ShapeError("train: input feature rows must equal the node count");
    }

    ModelParams params = ModelParams::glorot(model_config);
    AdamState adam = AdamState::zeros_like(params);

    const bool variational = is_variational(model_config.variant);
    Rng noise_rng(train_config.seed);
    DenseMatrix noise;
    if (variational) noise = DenseMatrix(dataset.num_nodes, model_config.latent_dim(), 0.0);

    TrainReport report;
    report.model_config = model_config;
    report.train_config = train_config;
    report.recon_losses.reserve(train_config.epochs);
    report.kl_losses.reserve(train_config.epochs);

    ForwardCache cache;
    for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
        if (variational) {
            for (double& v : noise.data) v = noise_rng.next_normal();
        }
        forward(params, x_input, s_ptr, variational ? &noise : nullptr, &cache);
        double recon = 0.0, kl = 0.0;
        const ModelParams grads =
            backward_with_loss(params, x_input, s_ptr, cache, loss_spec, &recon, &kl);
        report.recon_losses.push_back(recon);
        report.kl_losses.push_back(kl);
        adam_step(params, grads, adam, epoch, train_config);

        if (epoch % train_config.eval_every == 0 && !split.val_edges.empty() &&
            !split.val_negatives.empty()) {
            const LatentOutput readout = forward(params, x_input, s_ptr, nullptr, nullptr);
            const MetricResult val =
                evaluate_links(scoring_latents(readout), split.val_edges, split.val_negatives);
            report.val_metrics.push_back({epoch, val.auc, val.ap});
        }
    }

    if (!split.test_edges.empty() && !split.test_negatives.empty()) {
        const LatentOutput readout = forward(params, x_input, s_ptr, nullptr, nullptr);
        report.test_metrics =
            evaluate_links(scoring_latents(readout), split.test_edges, split.test_negatives);
    }

    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return TrainResult{std::move(params), std::move(report)};
}

} // namespace lgae
