#pragma once

#include "lgae/graph.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lgae {

// Disjoint positive edge sets plus frozen negative samples. Only
// train_edges build the training adjacency and operator.
struct EdgeSplit {
    std::vector<Edge> train_edges;
    std::vector<Edge> val_edges;
    std::vector<Edge> test_edges;
    std::vector<Edge> val_negatives;
    std::vector<Edge> test_negatives;
    std::uint64_t seed = 0;
};

struct MetricResult {
    double auc = 0.0;
    double ap = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

// Uniform positive sampling without replacement (floor(frac·m) per split),
// negatives by rejection against the FULL edge set; no self-loops, no
// duplicates, one negative per positive. Deterministic per seed.
EdgeSplit split_edges(const GraphDataset& dataset, double val_frac, double test_frac,
                      std::uint64_t seed);

// sigmoid(z_u · z_v) per pair.
std::vector<double> score_edges(const DenseMatrix& z, std::span<const Edge> pairs);

// Mann-Whitney statistic: P(pos > neg), ties counted 1/2. Rank-based,
// O((m+n) log(m+n)).
double auc(std::span<const double> pos_scores, std::span<const double> neg_scores);

// Area under the precision-recall curve from the ranked list; ties order
// negatives first so the reported value never benefits from tie luck.
double average_precision(std::span<const double> pos_scores, std::span<const double> neg_scores);

MetricResult evaluate_links(const DenseMatrix& z, std::span<const Edge> positives,
                            std::span<const Edge> negatives);

// Text form: sections TRAIN / VAL / VAL_NEG / TEST / TEST_NEG, one "u v" per
// line. Enables exact reruns and cross-implementation comparison.
void save_split(const std::string& path, const EdgeSplit& split);
EdgeSplit load_split(const std::string& path);

} // namespace lgae
