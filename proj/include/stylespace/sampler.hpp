#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stylespace/graph.hpp"

namespace stylespace::sampler {

enum class PairLabel { positive, negative };
enum class Strategy { naive, strategic, holdout };

struct Pair {
    std::string a;
    std::string b;
    PairLabel label = PairLabel::positive;

    bool operator==(const Pair&) const = default;
};

struct SamplerConfig {
    Strategy strategy = Strategy::strategic;
    std::string holdout_category;  // required when strategy == holdout
    int negatives_per_positive_train = 16;
    double test_negative_ratio = 1.0;  // 1.0 gives the 50:50 evaluation mix
    int target_positive_count = 0;
    std::uint64_t seed = 0;
};

struct SampleResult {
    std::vector<Pair> pairs;
    std::vector<std::string> notes;  // shortfalls, replacement fallbacks
};

struct PairDataset {
    std::vector<Pair> train;
    std::vector<Pair> validation;
    std::vector<Pair> test;
    SamplerConfig config;
    std::vector<std::string> notes;
};

// Positive pairs restricted to heterogeneous dyads (endpoints from different
// categories), balanced across categories as far as edge availability allows.
// Samples without replacement until candidates exhaust, then with replacement
// (noted in the result).
SampleResult sample_positives_strategic(const graph::Catalog& catalog,
                                        const std::vector<std::string>& pool,
                                        int count, std::uint64_t seed);

// Positive pairs drawn uniformly from the edges within the pool, same- or
// cross-category alike.
SampleResult sample_positives_naive(const graph::Catalog& catalog,
                                    const std::vector<std::string>& pool,
                                    int count, std::uint64_t seed);

// Distinct unordered non-edge pairs, uniform over the pool. A shortfall is
// recorded when fewer than count such pairs exist.
SampleResult sample_negatives(const graph::Catalog& catalog,
                              const std::vector<std::string>& pool,
                              int count, std::uint64_t seed);

// Assembles train/validation/test pair sets under the configured strategy.
// Validation and test positive targets scale with pool size relative to
// train; both use test_negative_ratio. Under holdout, train pairs never touch
// the holdout category and every validation/test pair touches it.
PairDataset build_pair_dataset(const graph::Catalog& catalog,
                               const graph::ItemSplit& split,
                               const SamplerConfig& config);

void save_pairs_csv(const PairDataset& dataset, const std::string& path);
PairDataset load_pairs_csv(const std::string& path);

}  // namespace stylespace::sampler
