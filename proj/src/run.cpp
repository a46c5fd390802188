#include "lgae/run.hpp"

#include "lgae/error.hpp"
#include "lgae/propagation.hpp"
#include "lgae/rng.hpp"
#include "lgae/sha256.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lgae {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::size_t> resolve_hidden_dims(const RunConfig& config) {
    if (is_linear_encoder(config.variant)) return config.hidden_dims;
    if (config.hidden_dims.size() == config.k) return config.hidden_dims;
    const std::vector<std::size_t> default_dims{32, 16};
    if (config.hidden_dims == default_dims) {
        return gcn_hidden_dims_for_k(config.k); // grow the encoder with k
    }
    throw ConfigError("GCN encoders need one hidden dim per hop: got " +
                      std::to_string(config.hidden_dims.size()) + " dims for k = " +
                      std::to_string(config.k));
}

// Cache key covering exactly what the smoothed matrix depends on: the
// subgraph being propagated and the feature source.
std::string propagation_content_hash(const GraphDataset& dataset, const EdgeSplit& split,
                                     bool featureless) {
    Sha256 h;
    std::string header = "n=" + std::to_string(dataset.num_nodes) + ";train-edges;";
    h.update(header);
    for (const auto& [u, v] : split.train_edges) {
        const std::string line = std::to_string(u) + " " + std::to_string(v) + "\n";
        h.update(line);
    }
    if (featureless) {
        h.update(std::string("features=identity"));
    } else {
        const DenseMatrix& f = *dataset.features;
        h.update(std::string("features=dense;" + std::to_string(f.rows) + "x" +
                             std::to_string(f.cols) + ";"));
        h.update(f.data.data(), f.data.size() * sizeof(double));
    }
    return h.hex_digest();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("short write to " + path);
}

json config_to_json(const RunConfig& config) {
    return json{{"dataset_dir", config.dataset_dir},
                {"variant", to_string(config.variant)},
                {"k", config.k},
                {"featureless", config.featureless},
                {"hidden_dims", config.hidden_dims},
                {"val_frac", config.val_frac},
                {"test_frac", config.test_frac},
                {"split_seed", config.split_seed},
                {"seeds", config.seeds},
                {"epochs", config.epochs},
                {"learning_rate", config.learning_rate},
                {"eval_every", config.eval_every}};
}

} // namespace

EdgeSplit make_split(const GraphDataset& dataset, const RunConfig& config) {
    return split_edges(dataset, config.val_frac, config.test_frac,
                       derive_seed(config.split_seed, "split"));
}

DenseMatrix prepare_inputs(const GraphDataset& dataset, const EdgeSplit& split,
                           const RunConfig& config) {
    if (!config.featureless && !dataset.features.has_value()) {
        throw ConfigError("dataset '" + dataset.name +
                          "' has no features; use the featureless stream");
    }

    if (!is_linear_encoder(config.variant)) {
        // GCN variants propagate inside the encoder.
        return config.featureless ? identity_features(dataset.num_nodes) : *dataset.features;
    }

    GraphDataset train_graph;
    train_graph.num_nodes = dataset.num_nodes;
    train_graph.name = dataset.name + "/train";
    train_graph.edges = split.train_edges;
    const SparseMatrix s = normalized_operator(adjacency_from_edges(train_graph));

    const std::string content_hash =
        config.cache_dir.empty() ? std::string()
                                 : propagation_content_hash(dataset, split, config.featureless);
    return propagate_cached(config.cache_dir, content_hash, s,
                            config.featureless ? nullptr : &*dataset.features, config.k,
                            config.featureless);
}

AggregateResult run_experiment(const GraphDataset& dataset, const EdgeSplit& split,
                               const RunConfig& config) {
    const DenseMatrix x_input = prepare_inputs(dataset, split, config);
    const std::vector<std::size_t> hidden = resolve_hidden_dims(config);

    const bool writing = !config.out_dir.empty();
    if (writing) {
        fs::create_directories(config.out_dir);
        write_text_file((fs::path(config.out_dir) / "config.json").string(),
                        config_to_json(config).dump(2) + "\n");
        save_split((fs::path(config.out_dir) / "split.txt").string(), split);
    }

    AggregateResult agg;
    agg.variant = config.variant;
    agg.featureless = config.featureless;

    json timings = json::object();
    timings["per_seed"] = json::array();
    double total_seconds = 0.0;

    for (const std::uint64_t seed : config.seeds) {
        ModelConfig mc;
        mc.variant = config.variant;
        mc.input_dim = x_input.cols;
        mc.hidden_dims = hidden;
        mc.k = config.k;
        mc.seed = derive_seed(seed, "init");

        TrainConfig tc;
        tc.epochs = config.epochs;
        tc.learning_rate = config.learning_rate;
        tc.seed = derive_seed(seed, "noise");
        tc.eval_every = config.eval_every;

        TrainResult result = train(dataset, split, x_input, mc, tc);

        if (writing) {
            const std::string ckpt = "checkpoint_" + std::to_string(seed) + ".bin";
            save_params((fs::path(config.out_dir) / ckpt).string(), result.params);
            result.report.checkpoint_ref = ckpt;
            write_text_file((fs::path(config.out_dir) / ("report_" + std::to_string(seed) + ".json")).string(),
                            report_to_json(result.report) + "\n");
            timings["per_seed"].push_back(
                json{{"seed", seed}, {"wall_time_seconds", result.report.wall_time_seconds}});
        }
        total_seconds += result.report.wall_time_seconds;
        agg.per_seed.push_back(SeedResult{seed, std::move(result.report)});
    }

    const auto mean_std = [&](auto metric) {
        double mean = 0.0;
        for (const SeedResult& r : agg.per_seed) mean += metric(r);
        mean /= static_cast<double>(agg.per_seed.size());
        double var = 0.0;
        for (const SeedResult& r : agg.per_seed) {
            const double d = metric(r) - mean;
            var += d * d;
        }
        var /= static_cast<double>(agg.per_seed.size()); // population std
        return std::pair<double, double>(mean, std::sqrt(var));
    };
    if (!agg.per_seed.empty()) {
        std::tie(agg.auc_mean, agg.auc_std) =
            mean_std([](const SeedResult& r) { return r.report.test_metrics.auc; });
        std::tie(agg.ap_mean, agg.ap_std) =
            mean_std([](const SeedResult& r) { return r.report.test_metrics.ap; });
    }

    if (writing) {
        write_text_file((fs::path(config.out_dir) / "aggregate.json").string(),
                        aggregate_to_json(agg, config) + "\n");
        timings["total_seconds"] = total_seconds;
        write_text_file((fs::path(config.out_dir) / "timings.json").string(), timings.dump(2) + "\n");
    }
    return agg;
}

AggregateResult run_from_config(const RunConfig& config) {
    const GraphDataset dataset = load_dataset(config.dataset_dir);
    const EdgeSplit split = make_split(dataset, config);
    return run_experiment(dataset, split, config);
}

// --- reporting ---------------------------------------------------------------

std::string report_to_json(const TrainReport& report) {
    json j;
    j["model_config"] = json{{"variant", to_string(report.model_config.variant)},
                             {"input_dim", report.model_config.input_dim},
                             {"hidden_dims", report.model_config.hidden_dims},
                             {"k", report.model_config.k},
                             {"seed", report.model_config.seed}};
    j["train_config"] = json{{"epochs", report.train_config.epochs},
                             {"learning_rate", report.train_config.learning_rate},
                             {"adam_beta1", report.train_config.adam_beta1},
                             {"adam_beta2", report.train_config.adam_beta2},
                             {"adam_eps", report.train_config.adam_eps},
                             {"seed", report.train_config.seed},
                             {"eval_every", report.train_config.eval_every}};
    j["provenance"] = json{{"learning_rate", report.train_config.learning_rate},
                           {"weight_decay", "none"},
                           {"validation_used_for_selection", false},
                           {"full_batch", true}};
    j["losses"] = json{{"reconstruction", report.recon_losses}, {"kl", report.kl_losses}};
    j["val_metrics"] = json::array();
    for (const EvalPoint& p : report.val_metrics) {
        j["val_metrics"].push_back(json{{"epoch", p.epoch}, {"auc", p.auc}, {"ap", p.ap}});
    }
    j["test_metrics"] = json{{"auc", report.test_metrics.auc},
                             {"ap", report.test_metrics.ap},
                             {"n_pos", report.test_metrics.n_pos},
                             {"n_neg", report.test_metrics.n_neg}};
    j["checkpoint"] = report.checkpoint_ref;
    return j.dump(2);
}

std::string aggregate_to_json(const AggregateResult& agg, const RunConfig& config) {
    json j;
    j["config"] = config_to_json(config);
    j["auc_mean"] = agg.auc_mean;
    j["auc_std"] = agg.auc_std;
    j["ap_mean"] = agg.ap_mean;
    j["ap_std"] = agg.ap_std;
    j["per_seed"] = json::array();
    for (const SeedResult& r : agg.per_seed) {
        j["per_seed"].push_back(json{{"seed", r.seed},
                                     {"test_auc", r.report.test_metrics.auc},
                                     {"test_ap", r.report.test_metrics.ap}});
    }
    return j.dump(2);
}

// --- parameter audit ---------------------------------------------------------

namespace {

struct ReferenceEntry {
    std::size_t dim;
    Variant variant;
    std::size_t k;
    std::size_t count;
    bool consistent; // false: known discrepancy, excluded from the audit
};

// Reference tallies for the three citation-network feature dimensions. The
// VGAE k=2 entries are 2048 above what the (32,16) progression yields and
// are flagged rather than audited.
constexpr ReferenceEntry kReference[] = {
    {1433, Variant::LGAE, 1, 46416, true},    {1433, Variant::LGAE, 2, 46416, true},
    {1433, Variant::LGAE, 3, 46416, true},    {1433, Variant::LGAE, 7, 46416, true},
    {1433, Variant::LVGAE, 1, 46944, true},   {1433, Variant::LVGAE, 2, 46944, true},
    {1433, Variant::LVGAE, 3, 46944, true},   {1433, Variant::LVGAE, 7, 46944, true},
    {1433, Variant::VGAE, 1, 45856, true},    {1433, Variant::VGAE, 2, 48928, false},
    {1433, Variant::VGAE, 3, 94784, true},    {1433, Variant::VGAE, 7, 2166784, true},
    {3703, Variant::LGAE, 1, 119056, true},   {3703, Variant::LGAE, 2, 119056, true},
    {3703, Variant::LGAE, 3, 119056, true},   {3703, Variant::LGAE, 7, 119056, true},
    {3703, Variant::LVGAE, 1, 119584, true},  {3703, Variant::LVGAE, 2, 119584, true},
    {3703, Variant::LVGAE, 3, 119584, true},  {3703, Variant::LVGAE, 7, 119584, true},
    {3703, Variant::VGAE, 1, 118496, true},   {3703, Variant::VGAE, 2, 121568, false},
    {3703, Variant::VGAE, 3, 240064, true},   {3703, Variant::VGAE, 7, 4491264, true},
    {500, Variant::LGAE, 1, 16560, true},     {500, Variant::LGAE, 2, 16560, true},
    {500, Variant::LGAE, 3, 16560, true},     {500, Variant::LGAE, 7, 16560, true},
    {500, Variant::LVGAE, 1, 17088, true},    {500, Variant::LVGAE, 2, 17088, true},
    {500, Variant::LVGAE, 3, 17088, true},    {500, Variant::LVGAE, 7, 17088, true},
    {500, Variant::VGAE, 1, 16000, true},     {500, Variant::VGAE, 2, 19072, false},
    {500, Variant::VGAE, 3, 35072, true},     {500, Variant::VGAE, 7, 1211392, true},
};

std::size_t audited_count(Variant variant, std::size_t dim, std::size_t k) {
    ModelConfig cfg;
    cfg.variant = variant;
    cfg.input_dim = dim;
    cfg.k = k;
    if (!is_linear_encoder(variant)) cfg.hidden_dims = gcn_hidden_dims_for_k(k);
    return param_count(cfg);
}

} // namespace

std::string param_count_table(std::size_t feature_dim) {
    const std::size_t ks[] = {1, 2, 3, 7};
    std::ostringstream out;
    out << "Trainable parameter counts (input dim " << feature_dim << ")\n\n";
    char line[160];
    std::snprintf(line, sizeof(line), "  %-8s %10s %10s %10s %10s\n", "method", "k=1", "k=2", "k=3",
                  "k=7");
    out << line;
    for (const Variant v : {Variant::LGAE, Variant::LVGAE, Variant::GAE, Variant::VGAE}) {
        std::string name = to_string(v);
        for (char& c : name) c = static_cast<char>(std::toupper(c));
        if (name[0] == 'L') name.insert(1, "-");
        out << "  " << name << std::string(name.size() < 8 ? 8 - name.size() : 1, ' ');
        for (const std::size_t k : ks) {
            std::snprintf(line, sizeof(line), " %10zu", audited_count(v, feature_dim, k));
            out << line;
        }
        out << '\n';
    }

    bool have_reference = false;
    std::size_t matched = 0, audited = 0;
    for (const ReferenceEntry& e : kReference) {
        if (e.dim != feature_dim) continue;
        have_reference = true;
        if (!e.consistent) continue;
        ++audited;
        if (audited_count(e.variant, e.dim, e.k) == e.count) ++matched;
    }
    if (have_reference) {
        out << "\n  reference audit (dim " << feature_dim << "): " << matched << "/" << audited
            << " entries match exactly.\n";
        out << "  note: reference VGAE k=2 tallies run 2048 above the (32,16) progression\n"
               "  and cannot be derived from the stated layer sizes; they are flagged and\n"
               "  excluded from the audit.\n";
    }
    return out.str();
}

std::string replicate_table(const std::vector<AggregateResult>& rows) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "  %-8s %-10s %-16s %-16s\n", "method", "stream", "AUC", "AP");
    out << line;
    for (const AggregateResult& r : rows) {
        std::string name = to_string(r.variant);
        for (char& c : name) c = static_cast<char>(std::toupper(c));
        if (name[0] == 'L') name.insert(1, "-");
        char auc_s[32], ap_s[32];
        std::snprintf(auc_s, sizeof(auc_s), "%.2f +/- %.2f", 100.0 * r.auc_mean, 100.0 * r.auc_std);
        std::snprintf(ap_s, sizeof(ap_s), "%.2f +/- %.2f", 100.0 * r.ap_mean, 100.0 * r.ap_std);
        std::snprintf(line, sizeof(line), "  %-8s %-10s %-16s %-16s\n", name.c_str(),
                      r.featureless ? "identity" : "features", auc_s, ap_s);
        out << line;
    }
    return out.str();
}

} // namespace lgae
