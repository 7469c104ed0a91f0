#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "stylespace/graph.hpp"

namespace stylespace::synth {

struct SynthConfig {
    int num_categories = 2;
    int items_per_category = 2;
    int latent_dim = 2;        // planted style dimension
    int feature_dim = 8;
    double feature_noise = 0.0;      // std of additive Gaussian noise
    double edge_bandwidth = 0.25;    // sigma: style-distance scale for edge probability
    double edges_per_item = 2.0;     // target average degree
    double label_noise_rate = 0.0;   // fraction of items relabeled at random
    std::uint64_t seed = 0;
    // Test hook: skip the random lift and emit features = style (+) one-hot
    // directly; requires feature_dim == latent_dim + num_categories.
    bool identity_lift = false;
};

struct GeneratedCatalog {
    graph::Catalog catalog;
    // Generation-time metadata, not part of the catalog files: category each
    // item was generated under, and which items the label noise relabeled.
    std::unordered_map<std::string, std::string> generated_category;
    std::vector<std::string> relabeled_ids;
};

// Plants a latent style per item (uniform on the unit cube), lifts
// style (+) one-hot(category) through a fixed random affine map into feature
// space with additive noise, and wires cross-category edges with probability
// proportional to exp(-||style_a - style_b||^2 / sigma^2), calibrated to hit
// the target average degree. Label noise then reassigns categories without
// touching features, producing the falsely-labeled items robust retrieval is
// meant to skip.
GeneratedCatalog generate_catalog(const SynthConfig& config);

// "cat00", "cat01", ...
std::string category_name(int index);

}  // namespace stylespace::synth
