#include "lgae/linkpred.hpp"

#include "lgae/error.hpp"
#include "lgae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

namespace lgae {

namespace {

std::uint64_t pack(std::uint32_t u, std::uint32_t v) {
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

} // namespace

EdgeSplit split_edges(const GraphDataset& dataset, double val_frac, double test_frac,
                      std::uint64_t seed) {
    dataset.validate();
    if (val_frac < 0.0 || test_frac < 0.0 || val_frac + test_frac >= 1.0) {
        throw ContractError("split_edges: need 0 <= val_frac + test_frac < 1");
    }
    const std::size_t m = dataset.edges.size();
    const std::size_t n_val = static_cast<std::size_t>(val_frac * static_cast<double>(m) + 1e-9);
    const std::size_t n_test = static_cast<std::size_t>(test_frac * static_cast<double>(m) + 1e-9);
    if ((val_frac > 0.0 && n_val == 0) || (test_frac > 0.0 && n_test == 0)) {
        throw ContractError("split_edges: graph has too few edges for a non-empty split");
    }
    // val_frac + test_frac < 1 guarantees n_val + n_test < m whenever m > 0,
    // so the training set is never emptied by the split.

    EdgeSplit split;
    split.seed = seed;

    std::vector<Edge> shuffled = dataset.edges;
    Rng rng(seed);
    for (std::size_t i = shuffled.size(); i > 1; --i) { // Fisher-Yates
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(shuffled[i - 1], shuffled[j]);
    }
    split.val_edges.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.test_edges.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_val),
                            shuffled.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
    split.train_edges.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_val + n_test),
                             shuffled.end());
    std::sort(split.train_edges.begin(), split.train_edges.end());

    // Negatives: rejection against the full graph, shared duplicate pool
    // across val and test.
    std::unordered_set<std::uint64_t> forbidden;
    forbidden.reserve(m * 2 + (n_val + n_test) * 2);
    for (const auto& [u, v] : dataset.edges) forbidden.insert(pack(u, v));

    const std::uint64_t n = dataset.num_nodes;
    const std::size_t max_attempts = 1000 * dataset.num_nodes;
    std::size_t attempts = 0;
    const auto sample_negatives = [&](std::size_t count, std::vector<Edge>& out) {
        out.reserve(count);
        while (out.size() < count) {
            if (attempts >= max_attempts) {
                throw SamplingError("split_edges: negative sampling exhausted " +
                                    std::to_string(max_attempts) + " attempts (graph too dense)");
            }
            ++attempts;
            const auto a = static_cast<std::uint32_t>(rng.next_below(n));
            const auto b = static_cast<std::uint32_t>(rng.next_below(n));
            if (a == b) continue;
            const Edge e{std::min(a, b), std::max(a, b)};
            if (!forbidden.insert(pack(e.first, e.second)).second) continue;
            out.push_back(e);
        }
    };
    sample_negatives(n_val, split.val_negatives);
    sample_negatives(n_test, split.test_negatives);
    return split;
}

std::vector<double> score_edges(const DenseMatrix& z, std::span<const Edge> pairs) {
    std::vector<double> scores;
    scores.reserve(pairs.size());
    for (const auto& [u, v] : pairs) {
        if (u >= z.rows || v >= z.rows) {
            throw RangeError("score_edges: node index out of range");
        }
        const double* zu = z.row(u);
        const double* zv = z.row(v);
        double x = 0.0;
        for (std::size_t l = 0; l < z.cols; ++l) x += zu[l] * zv[l];
        const double e = std::exp(-std::abs(x));
        scores.push_back(x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e));
    }
    return scores;
}

double auc(std::span<const double> pos_scores, std::span<const double> neg_scores) {
    if (pos_scores.empty() || neg_scores.empty()) {
        throw ContractError("auc: both score lists must be non-empty");
    }
    std::vector<double> neg(neg_scores.begin(), neg_scores.end());
    std::sort(neg.begin(), neg.end());

    // wins = #{(p, n) : p > n}, ties counted separately; both exact integers.
    std::uint64_t wins = 0, ties = 0;
    for (const double p : pos_scores) {
        const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
        const auto hi = std::upper_bound(lo, neg.end(), p);
        wins += static_cast<std::uint64_t>(lo - neg.begin());
        ties += static_cast<std::uint64_t>(hi - lo);
    }
    const double pairs = static_cast<double>(pos_scores.size()) * static_cast<double>(neg.size());
    return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) / pairs;
}

double average_precision(std::span<const double> pos_scores, std::span<const double> neg_scores) {
    if (pos_scores.empty() || neg_scores.empty()) {
        throw ContractError("average_precision: both score lists must be non-empty");
    }
    struct Item {
        double score;
        bool positive;
    };
    std::vector<Item> items;
    items.reserve(pos_scores.size() + neg_scores.size());
    for (double s : pos_scores) items.push_back({s, true});
    for (double s : neg_scores) items.push_back({s, false});
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.positive < b.positive; // negatives first on ties
    });

    const double n_pos = static_cast<double>(pos_scores.size());
    double ap = 0.0;
    std::size_t cum_pos = 0;
    for (std::size_t rank = 1; rank <= items.size(); ++rank) {
        if (items[rank - 1].positive) {
            ++cum_pos;
            const double precision = static_cast<double>(cum_pos) / static_cast<double>(rank);
            ap += precision / n_pos; // delta recall = 1/n_pos per positive
        }
    }
    return ap;
}

MetricResult evaluate_links(const DenseMatrix& z, std::span<const Edge> positives,
                            std::span<const Edge> negatives) {
    const std::vector<double> pos = score_edges(z, positives);
    const std::vector<double> neg = score_edges(z, negatives);
    MetricResult r;
    r.n_pos = pos.size();
    r.n_neg = neg.size();
    r.auc = auc(pos, neg);
    r.ap = average_precision(pos, neg);
    return r;
}

namespace {

void write_section(std::ofstream& out, const char* header, const std::vector<Edge>& edges) {
    out << header << '\n';
    for (const auto& [u, v] : edges) out << u << ' ' << v << '\n';
}

} // namespace

void save_split(const std::string& path, const EdgeSplit& split) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write split file: " + path);
    write_section(out, "TRAIN", split.train_edges);
    write_section(out, "VAL", split.val_edges);
    write_section(out, "VAL_NEG", split.val_negatives);
    write_section(out, "TEST", split.test_edges);
    write_section(out, "TEST_NEG", split.test_negatives);
    if (!out) throw IoError("short write to split file: " + path);
}

EdgeSplit load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open split file: " + path);
    EdgeSplit split;
    std::vector<Edge>* section = nullptr;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line == "TRAIN") {
            section = &split.train_edges;
        } else if (line == "VAL") {
            section = &split.val_edges;
        } else if (line == "VAL_NEG") {
            section = &split.val_negatives;
        } else if (line == "TEST") {
            section = &split.test_edges;
        } else if (line == "TEST_NEG") {
            section = &split.test_negatives;
        } else {
            if (section == nullptr) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": pair before any section");
            }
            std::uint32_t u = 0, v = 0;
            if (std::sscanf(line.c_str(), "%u %u", &u, &v) != 2) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": expected 'u v'");
            }
            section->emplace_back(u, v);
        }
    }
    return split;
}

} // namespace lgae
