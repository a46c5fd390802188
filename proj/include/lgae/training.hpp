#pragma once

#include "lgae/linkpred.hpp"
#include "lgae/models.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lgae {

struct TrainConfig {
    std::size_t epochs = 200;
    double learning_rate = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0; // variational noise stream
    std::size_t eval_every = 10;

    void validate() const;
};

// Everything backward() needs from the forward pass.
struct ForwardCache {
    // hidden[i] = ReLU activation that feeds layer i+1 (n × hidden_dims[i]).
    std::vector<DenseMatrix> hidden;
    // GCN only: propagated pre-activations are not needed, but the ReLU mask
    // comes from `hidden`; linear and GCN share this layout.
    DenseMatrix mu, log_sigma, noise; // variational only
    DenseMatrix z;
    bool populated = false;
};

// Forward pass with caching. `s` must be non-null for GCN variants and is
// ignored for linear ones. For variational variants `noise` must match the
// latent shape.
LatentOutput forward(const ModelParams& params, const DenseMatrix& x, const SparseMatrix* s,
                     const DenseMatrix* noise, ForwardCache* cache);

// Analytic gradients of the training objective w.r.t. every tensor, via the
// reparameterization path. The objective is reconstruction_loss plus, for
// variational variants, kl_divergence weighted by a further 1/n (the
// reference variational-autoencoder arrangement). Requires the cache written
// by forward().
ModelParams backward(const ModelParams& params, const DenseMatrix& x, const SparseMatrix* s,
                     const ForwardCache& cache, const ReconLossSpec& loss_spec);

// Same, but also reports the loss terms it computed on the way (the training
// loop wants loss and gradients out of a single pass over all node pairs).
ModelParams backward_with_loss(const ModelParams& params, const DenseMatrix& x,
                               const SparseMatrix* s, const ForwardCache& cache,
                               const ReconLossSpec& loss_spec, double* recon_out, double* kl_out);

// First/second moment estimates, one slot per tensor in tensors() order.
struct AdamState {
    std::vector<DenseMatrix> m;
    std::vector<DenseMatrix> v;

    static AdamState zeros_like(const ModelParams& params);
};

// One bias-corrected Adam update; t is the 1-based step index. Throws
// NumericError naming the offending tensor on non-finite gradients.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, std::size_t t,
               const TrainConfig& config);

struct EvalPoint {
    std::size_t epoch = 0;
    double auc = 0.0;
    double ap = 0.0;
};

struct TrainReport {
    std::vector<double> recon_losses; // one per epoch
    std::vector<double> kl_losses;    // zeros for deterministic variants
    std::vector<EvalPoint> val_metrics;
    MetricResult test_metrics;
    std::string checkpoint_ref; // filename, set once the params are saved
    double wall_time_seconds = 0.0;
    ModelConfig model_config;
    TrainConfig train_config;
};

struct TrainResult {
    ModelParams params;
    TrainReport report;
};

// Full-batch training on the TRAIN adjacency only. `x_input` is the
// pre-propagated X̄ for linear variants, or raw features / identity for GCN
// variants. Deterministic: identical inputs give bitwise-identical params.
TrainResult train(const GraphDataset& dataset, const EdgeSplit& split, const DenseMatrix& x_input,
                  const ModelConfig& model_config, const TrainConfig& train_config);

// Latents used for scoring: posterior mean for variational variants.
const DenseMatrix& scoring_latents(const LatentOutput& out);

} // namespace lgae
