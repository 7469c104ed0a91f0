#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stylespace/vec.hpp"

namespace stylespace::graph {

struct Item {
    std::string id;
    std::string category;
    Vec features;
    std::optional<Vec> planted_style;  // ground truth, synthetic catalogs only
};

using Edge = std::pair<std::string, std::string>;  // normalized: first < second

// Item catalog plus the undirected co-occurrence relation. Immutable after
// construction; items are kept sorted by id and edges normalized/deduplicated.
class Catalog {
public:
    Catalog() = default;

    // Validates all invariants: unique ids, consistent feature dimension,
    // finite features, edge endpoints present, no self edges, planted styles
    // present for all items or none.
    static Catalog build(std::vector<Item> items, std::vector<Edge> edges);

    const std::vector<Item>& items() const { return items_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t feature_dim() const { return feature_dim_; }
    bool empty() const { return items_.empty(); }

    const Item* find(const std::string& id) const;
    const Item& at(const std::string& id) const;  // throws LookupError
    bool has_item(const std::string& id) const { return by_id_.count(id) > 0; }
    bool has_edge(const std::string& a, const std::string& b) const;
    bool has_planted_styles() const;

    // Sorted unique category names.
    std::vector<std::string> categories() const;

private:
    std::vector<Item> items_;
    std::vector<Edge> edges_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_set<std::string> edge_keys_;
    std::size_t feature_dim_ = 0;
};

struct ItemSplit {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
    std::uint64_t seed = 0;
    std::array<double, 3> ratios{0.0, 0.0, 0.0};
};

// items_path: JSON Lines, one {"id","category","features",["style"]} per line.
// edges_path: CSV with header "a,b"; may be empty to load an edgeless catalog.
Catalog load_catalog(const std::string& items_path, const std::string& edges_path);

// Drops items with empty categories, then items whose (category, features)
// duplicate an earlier id; edges incident to dropped items go with them.
Catalog clean(const Catalog& catalog);

// Stratified per category with largest-remainder rounding; the assignment is
// a function of (seed, sorted ids) only. Categories with fewer than 3 items
// go wholly to train and a warning is recorded.
ItemSplit split_items(const Catalog& catalog, const std::array<double, 3>& ratios,
                      std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

void save_items_jsonl(const Catalog& catalog, const std::string& path);
void save_edges_csv(const Catalog& catalog, const std::string& path);
void save_split(const ItemSplit& split, const std::string& path);
ItemSplit load_split(const std::string& path);

FeatureMap feature_map(const Catalog& catalog);

}  // namespace stylespace::graph
