#pragma once

#include "lgae/matrix.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lgae {

enum class Variant { LGAE, LVGAE, GAE, VGAE };

bool is_variational(Variant v);
// Linear variants consume pre-propagated features; GCN variants propagate
// inside every layer.
bool is_linear_encoder(Variant v);
std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ModelConfig {
    Variant variant = Variant::LGAE;
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims{32, 16};
    std::size_t k = 2; // hops: GCN layer count / preprocessing depth
    std::uint64_t seed = 0;

    std::size_t latent_dim() const { return hidden_dims.back(); }
    void validate() const;
};

// Hidden-layer progression a GCN encoder needs for k propagations:
// (..., 64, 32, 16), halving from the latent side. k in [1, 12].
std::vector<std::size_t> gcn_hidden_dims_for_k(std::size_t k);

// Trainable tensors for one encoder. Linear variants carry biases; GCN
// variants do not (the shapes are pinned by the audited counts). For
// variational variants the final layer is split into a (mu, log_sigma) pair
// sharing all earlier layers.
struct ModelParams {
    ModelConfig config;
    std::vector<DenseMatrix> weights; // deterministic: one per layer; variational: layers 0..L-2
    std::vector<DenseMatrix> biases;  // parallel to weights; empty vector when variant has none
    DenseMatrix w_mu, w_log_sigma;    // variational final layer
    DenseMatrix b_mu, b_log_sigma;    // variational final layer, linear variants only

    bool has_biases() const;

    // Glorot-uniform weights, zero biases, seeded.
    static ModelParams glorot(const ModelConfig& config);
    static ModelParams zeros_like(const ModelParams& other);

    // Named views over every tensor, in a fixed order (checkpoints, Adam
    // state and gradient bookkeeping all rely on it).
    std::vector<std::pair<std::string, DenseMatrix*>> tensors();
    std::vector<std::pair<std::string, const DenseMatrix*>> tensors() const;

    std::size_t scalar_count() const;
};

struct LatentOutput {
    DenseMatrix z;
    std::optional<DenseMatrix> mu;
    std::optional<DenseMatrix> log_sigma;
};

// z = mu + exp(log_sigma) ⊙ noise.
DenseMatrix reparameterize(const DenseMatrix& mu, const DenseMatrix& log_sigma,
                           const DenseMatrix& noise);

// Forward pass for L-GAE / L-VGAE on pre-propagated features. For the
// variational variant `noise` must be n×latent standard normal draws; a null
// noise reads out the posterior mean (z = mu).
LatentOutput encode_linear(const DenseMatrix& xbar, const ModelParams& params,
                           const DenseMatrix* noise = nullptr);

// Forward pass for GAE / VGAE: per layer H' = ReLU(S H W), final layer
// without the activation.
LatentOutput encode_gcn(const DenseMatrix& x, const SparseMatrix& s, const ModelParams& params,
                        const DenseMatrix* noise = nullptr);

// Â[i][j] = sigmoid(z_i · z_j), the full reconstructed edge-probability matrix.
DenseMatrix decode_inner_product(const DenseMatrix& z);

// Precomputed target and class weights for the reconstruction loss: the
// training adjacency plus self-loops, pos_weight = (n² − nnz)/nnz and
// norm = n²/(2(n² − nnz)). A target with no negative pairs falls back to
// pos_weight = 1, norm = 1.
struct ReconLossSpec {
    SparseMatrix target; // A_train + I
    double pos_weight = 1.0;
    double norm = 1.0;
};

ReconLossSpec make_recon_spec(const SparseMatrix& a_train);

// Weighted BCE over all n² pairs on the stable logits form
// max(x,0) − x·t + log(1 + exp(−|x|)). When grad_z is non-null it receives
// d(loss)/dZ. Single fused pass; never materializes the n×n logit matrix.
double reconstruction_loss(const DenseMatrix& z, const ReconLossSpec& spec,
                           DenseMatrix* grad_z = nullptr);
double reconstruction_loss(const DenseMatrix& z, const SparseMatrix& a_train);

// (−1/(2n)) Σ (1 + 2·log_sigma − mu² − exp(2·log_sigma)).
double kl_divergence(const DenseMatrix& mu, const DenseMatrix& log_sigma);

// Adds the KL gradients (mu/n and (exp(2·log_sigma) − 1)/n) into the buffers.
void kl_divergence_backward(const DenseMatrix& mu, const DenseMatrix& log_sigma,
                            DenseMatrix& grad_mu, DenseMatrix& grad_log_sigma);

// Trainable-parameter audit. Counts the config's own layer stack; GCN
// variants whose hidden_dims were not spelled out fall back to
// gcn_hidden_dims_for_k(config.k). Linear layers carry biases, GCN layers do
// not, and variational variants double the final layer.
std::size_t param_count(const ModelConfig& config);

// Checkpoint: magic "LGAEPARM", version, config echo, then per tensor
// (name length u32, name bytes, rows u64, cols u64, f64 little-endian data).
void save_params(const std::string& path, const ModelParams& params);
ModelParams load_params(const std::string& path);

} // namespace lgae
