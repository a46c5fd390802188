// lgae: linear graph auto-encoders with a precomputed propagation operator.
//
// Subcommands:
//   preprocess  compute and cache the smoothed feature matrix X̄ = S^k X
//   train       train one variant over a seed list, aggregate test AUC/AP
//   params      trainable-parameter table over k with the reference audit
//   replicate   all four variants in both feature streams, one table

#include "lgae/error.hpp"
#include "lgae/propagation.hpp"
#include "lgae/run.hpp"
#include "lgae/sha256.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

using namespace lgae;

struct CliOptions {
    RunConfig run;
    std::string variant_name = "lgae";
    std::size_t feature_dim = 0; // params subcommand
};

void add_common_flags(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--dataset", opts.run.dataset_dir, "dataset directory (edges.txt + manifest.txt)");
    cmd->add_option("--k", opts.run.k, "propagation hops")->capture_default_str();
    cmd->add_flag("--featureless", opts.run.featureless, "replace features with the identity stream");
    cmd->add_option("--epochs", opts.run.epochs, "training epochs")->capture_default_str();
    cmd->add_option("--lr", opts.run.learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--seeds", opts.run.seeds, "training seeds")->delimiter(',')->capture_default_str();
    cmd->add_option("--split-seed", opts.run.split_seed, "edge split seed")->capture_default_str();
    cmd->add_option("--val-frac", opts.run.val_frac, "validation edge fraction")->capture_default_str();
    cmd->add_option("--test-frac", opts.run.test_frac, "test edge fraction")->capture_default_str();
    cmd->add_option("--hidden", opts.run.hidden_dims, "encoder hidden dims")->delimiter(',');
    cmd->add_option("--eval-every", opts.run.eval_every, "validation cadence (epochs)")
        ->capture_default_str();
    cmd->add_option("--out", opts.run.out_dir, "output directory for reports and checkpoints");
    cmd->add_option("--cache-dir", opts.run.cache_dir, "propagation cache directory");
}

int cmd_preprocess(const CliOptions& opts) {
    const GraphDataset dataset = load_dataset(opts.run.dataset_dir);
    const DatasetManifest manifest = read_manifest(opts.run.dataset_dir);
    const std::string cache_dir =
        opts.run.cache_dir.empty() ? (std::filesystem::path(opts.run.dataset_dir) / "cache").string()
                                   : opts.run.cache_dir;

    if (!opts.run.featureless && !dataset.features.has_value()) {
        throw ConfigError("dataset has no features; pass --featureless");
    }
    const SparseMatrix s = normalized_operator(adjacency_from_edges(dataset));
    const auto t0 = std::chrono::steady_clock::now();
    const DenseMatrix* features = opts.run.featureless ? nullptr : &*dataset.features;
    const DenseMatrix xbar = propagate_cached(cache_dir, manifest.content_hash, s, features,
                                              opts.run.k, opts.run.featureless);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string file =
        xbar_cache_filename(manifest.content_hash, opts.run.k, opts.run.featureless);
    std::printf("smoothed %zu x %zu matrix (k=%zu, %s) in %.2fs\n", xbar.rows, xbar.cols, opts.run.k,
                opts.run.featureless ? "identity stream" : "features", seconds);
    std::printf("cache: %s\n", (std::filesystem::path(cache_dir) / file).string().c_str());
    return 0;
}

int cmd_train(CliOptions& opts) {
    opts.run.variant = variant_from_string(opts.variant_name);
    const AggregateResult agg = run_from_config(opts.run);
    std::printf("%s %s: test AUC %.2f +/- %.2f, AP %.2f +/- %.2f (%zu seeds)\n",
                to_string(agg.variant).c_str(), agg.featureless ? "identity" : "features",
                100.0 * agg.auc_mean, 100.0 * agg.auc_std, 100.0 * agg.ap_mean, 100.0 * agg.ap_std,
                agg.per_seed.size());
    if (!opts.run.out_dir.empty()) {
        std::printf("artifacts: %s\n", opts.run.out_dir.c_str());
    }
    return 0;
}

int cmd_params(const CliOptions& opts) {
    std::size_t dim = opts.feature_dim;
    if (dim == 0) {
        if (opts.run.dataset_dir.empty()) {
            throw ConfigError("params: pass --dim or --dataset");
        }
        const DatasetManifest manifest = read_manifest(opts.run.dataset_dir);
        dim = manifest.feature_dim > 0 ? manifest.feature_dim : manifest.num_nodes;
    }
    std::fputs(param_count_table(dim).c_str(), stdout);
    return 0;
}

int cmd_replicate(CliOptions& opts) {
    const GraphDataset dataset = load_dataset(opts.run.dataset_dir);
    const EdgeSplit split = make_split(dataset, opts.run);

    std::vector<AggregateResult> rows;
    for (const bool featureless : {true, false}) {
        if (!featureless && !dataset.features.has_value()) continue;
        for (const Variant variant : {Variant::GAE, Variant::VGAE, Variant::LGAE, Variant::LVGAE}) {
            RunConfig rc = opts.run;
            rc.variant = variant;
            rc.featureless = featureless;
            if (!rc.out_dir.empty()) {
                rc.out_dir = (std::filesystem::path(opts.run.out_dir) /
                              (to_string(variant) + (featureless ? "_identity" : "_features")))
                                 .string();
            }
            std::fprintf(stderr, "running %s (%s stream), %zu seeds...\n", to_string(variant).c_str(),
                         featureless ? "identity" : "features", rc.seeds.size());
            rows.push_back(run_experiment(dataset, split, rc));
        }
    }
    std::fputs(replicate_table(rows).c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"linear graph auto-encoders for link prediction"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; flags override it");

    CliOptions opts;

    CLI::App* preprocess = app.add_subcommand("preprocess", "compute and cache X̄ = S^k X");
    add_common_flags(preprocess, opts);
    preprocess->get_option("--dataset")->required();

    CLI::App* train = app.add_subcommand("train", "train one variant over a seed list");
    add_common_flags(train, opts);
    train->get_option("--dataset")->required();
    train->add_option("--variant", opts.variant_name, "lgae|lvgae|gae|vgae")
        ->required()
        ->check(CLI::IsMember({"lgae", "lvgae", "gae", "vgae"}));

    CLI::App* params = app.add_subcommand("params", "trainable-parameter audit table");
    add_common_flags(params, opts);
    params->add_option("--dim", opts.feature_dim, "feature dimension to tabulate");

    CLI::App* replicate = app.add_subcommand("replicate", "all variants, both streams");
    add_common_flags(replicate, opts);
    replicate->get_option("--dataset")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion") {
            return app.exit(e);
        }
        std::cerr << e.what() << "\n";
        return 2; // usage error
    }

    try {
        if (preprocess->parsed()) return cmd_preprocess(opts);
        if (train->parsed()) return cmd_train(opts);
        if (params->parsed()) return cmd_params(opts);
        if (replicate->parsed()) return cmd_replicate(opts);
    } catch (const lgae::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
