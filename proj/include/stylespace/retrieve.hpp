#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "stylespace/embed.hpp"
#include "stylespace/graph.hpp"
#include "stylespace/vec.hpp"

namespace stylespace::retrieve {

struct KMeansResult {
    std::vector<Vec> centroids;
    std::vector<int> assignments;
    double objective = 0.0;                // final within-cluster sum of squares
    int iterations = 0;
    std::vector<double> objective_trace;   // objective after each assignment pass
    std::vector<std::string> notes;
};

// Lloyd's algorithm with deterministic k-means++ seeding. Empty clusters are
// re-seeded with the point farthest from its centroid. k larger than the
// point count is clamped with a note; ties always resolve to the lowest index.
KMeansResult kmeans(const std::vector<Vec>& points, int k, std::uint64_t seed,
                    int max_iters = 100);

// argmin over centroids of the Euclidean distance; ties to the lowest index.
int nearest_centroid(const Vec& style, const std::vector<Vec>& centroids);

struct CategoryIndex {
    std::vector<std::string> ids;     // sorted
    std::vector<Vec> styles;          // parallel to ids
    std::vector<Vec> centroids;
    std::vector<int> assignments;     // parallel to ids
};

// Per-category embedded items with k-means structure. Immutable once built;
// retrievals are pure reads.
struct StyleIndex {
    std::map<std::string, CategoryIndex> categories;
    std::size_t style_dim = 0;

    const CategoryIndex& category(const std::string& name) const;  // LookupError
    const Vec* style_of(const std::string& id) const;              // nullptr if absent
    const std::string* category_of(const std::string& id) const;

private:
    friend StyleIndex build_style_index(const graph::Catalog&, const embed::ProjectionModel&,
                                        int, std::uint64_t, int, std::vector<std::string>*);
    friend StyleIndex load_index(const std::string&);
    void rebuild_id_lookup();
    std::unordered_map<std::string, std::pair<std::string, std::size_t>> id_lookup_;
};

StyleIndex build_style_index(const graph::Catalog& catalog, const embed::ProjectionModel& model,
                             int k, std::uint64_t seed, int max_iters = 100,
                             std::vector<std::string>* notes = nullptr);

// The robust three-step lookup: route the query to the target category's
// nearest centroid, restrict to the n items closest to that centroid, then
// return the candidate closest to the query. Mislabeled outliers far from
// every centroid never enter the candidate set.
std::string robust_retrieve(const Vec& query_style, const StyleIndex& index,
                            const std::string& target_category, int n);

struct OutfitSpec {
    std::vector<std::string> categories;  // >= 2, pairwise distinct
};

struct Outfit {
    std::string query;
    std::map<std::string, std::string> members;  // category -> item id
};

// Fills every non-query category of the spec via robust_retrieve. The query's
// style comes from the index when present, otherwise from embedding its
// catalog features.
Outfit generate_outfit(const std::string& query_id, const OutfitSpec& spec,
                       const StyleIndex& index, const embed::ProjectionModel& model,
                       const graph::Catalog& catalog, int n);

struct ClusterPair {
    int cluster_a = 0;
    int cluster_b = 0;
    double distance = 0.0;
};

struct ClusterAffinity {
    ClusterPair closest;
    ClusterPair farthest;
};

// Closest and most distant centroid pairs between two categories; ties by
// lowest (i, j).
ClusterAffinity cluster_pair_affinity(const StyleIndex& index, const std::string& cat_a,
                                      const std::string& cat_b);

void save_index(const StyleIndex& index, const std::string& path);
StyleIndex load_index(const std::string& path);

std::vector<OutfitSpec> load_outfit_specs(const std::string& path);

}  // namespace stylespace::retrieve
