#pragma once

#include "lgae/data.hpp"
#include "lgae/training.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lgae {

// Fully resolved configuration for one experiment (one variant, one stream,
// many training seeds over a fixed split).
struct RunConfig {
    std::string dataset_dir;
    Variant variant = Variant::LGAE;
    std::size_t k = 2;
    bool featureless = false;
    std::vector<std::size_t> hidden_dims{32, 16};
    double val_frac = 0.05;
    double test_frac = 0.10;
    std::uint64_t split_seed = 42;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::size_t epochs = 200;
    double learning_rate = 0.01;
    std::size_t eval_every = 10;
    std::string out_dir;   // empty = nothing written
    std::string cache_dir; // empty = no preprocessing cache
};

struct SeedResult {
    std::uint64_t seed = 0;
    TrainReport report;
};

struct AggregateResult {
    Variant variant = Variant::LGAE;
    bool featureless = false;
    double auc_mean = 0.0, auc_std = 0.0; // population std over seeds
    double ap_mean = 0.0, ap_std = 0.0;
    std::vector<SeedResult> per_seed;
};

// Input matrix for one stream: X̄ = S_train^k X for linear variants
// (featureless: S_train^k I, block-streamed), raw X or I for GCN variants.
DenseMatrix prepare_inputs(const GraphDataset& dataset, const EdgeSplit& split,
                           const RunConfig& config);

// Trains config.seeds runs over a fixed split and aggregates test metrics.
// When out_dir is set, writes split.txt, config.json, per-seed report_/
// checkpoint_ files, aggregate.json and timings.json.
AggregateResult run_experiment(const GraphDataset& dataset, const EdgeSplit& split,
                               const RunConfig& config);

// Convenience wrapper: load dataset, split with config.split_seed, run.
AggregateResult run_from_config(const RunConfig& config);

EdgeSplit make_split(const GraphDataset& dataset, const RunConfig& config);

// Table over k ∈ {1,2,3,7} per encoder family for a feature dimension,
// with reference tallies for the three citation dimensions when known.
std::string param_count_table(std::size_t feature_dim);

// Deterministic JSON text for a report (volatile timings excluded).
std::string report_to_json(const TrainReport& report);
std::string aggregate_to_json(const AggregateResult& agg, const RunConfig& config);

// Aligned text table shaped like the link-prediction results grid.
std::string replicate_table(const std::vector<AggregateResult>& rows);

} // namespace lgae
