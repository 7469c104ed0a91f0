#include "stylespace/retrieve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "stylespace/errors.hpp"
#include "stylespace/io_util.hpp"
#include "stylespace/rng.hpp"

namespace stylespace::retrieve {

namespace {

double wcss(const std::vector<Vec>& points, const std::vector<Vec>& centroids,
            const std::vector<int>& assignments) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        total += squared_distance(points[i], centroids[assignments[i]]);
    }
    return total;
}

std::vector<int> assign_all(const std::vector<Vec>& points, const std::vector<Vec>& centroids) {
    std::vector<int> a(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        a[i] = nearest_centroid(points[i], centroids);
    }
    return a;
}

std::vector<Vec> kmeanspp_init(const std::vector<Vec>& points, int k, Rng& rng) {
    std::vector<Vec> centroids;
    centroids.reserve(k);
    std::vector<bool> chosen(points.size(), false);
    const std::size_t first = rng.index(points.size());
    centroids.push_back(points[first]);
    chosen[first] = true;

    std::vector<double> d2(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        d2[i] = squared_distance(points[i], centroids[0]);
    }
    while (static_cast<int>(centroids.size()) < k) {
        double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = points.size();
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double run = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                run += d2[i];
                if (run > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == points.size()) {  // numerical tail
                for (std::size_t i = points.size(); i-- > 0;) {
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        }
        if (pick == points.size()) {
            // every remaining point duplicates a chosen centroid
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
            if (pick == points.size()) pick = 0;
        }
        chosen[pick] = true;
        centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < points.size(); ++i) {
            d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
        }
    }
    return centroids;
}

}  // namespace

int nearest_centroid(const Vec& style, const std::vector<Vec>& centroids) {
    if (centroids.empty()) throw EmptyInputError("nearest_centroid: no centroids");
    int best = 0;
    double best_d = squared_distance(style, centroids[0]);
    for (std::size_t i = 1; i < centroids.size(); ++i) {
        const double d = squared_distance(style, centroids[i]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

KMeansResult kmeans(const std::vector<Vec>& points, int k, std::uint64_t seed, int max_iters) {
    if (k <= 0) throw ConfigError("kmeans: k must be positive");
    if (points.empty()) throw EmptyInputError("kmeans: no points");
    for (const Vec& p : points) {
        if (!all_finite(p)) throw NumericError("kmeans: non-finite point");
        if (p.size() != points.front().size()) {
            throw DimensionError("kmeans: inconsistent point dimensions");
        }
    }

    KMeansResult result;
    if (static_cast<std::size_t>(k) > points.size()) {
        result.notes.push_back("kmeans: k=" + std::to_string(k) + " clamped to " +
                               std::to_string(points.size()) + " points");
        k = static_cast<int>(points.size());
    }

    Rng rng(mix_seed(seed, "kmeans"));
    result.centroids = kmeanspp_init(points, k, rng);
    result.assignments = assign_all(points, result.centroids);
    result.objective_trace.push_back(wcss(points, result.centroids, result.assignments));

    for (int iter = 0; iter < max_iters; ++iter) {
        // update step: means of non-empty clusters
        std::vector<Vec> sums(k, Vec(points.front().size(), 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const int c = result.assignments[i];
            ++counts[c];
            for (std::size_t d = 0; d < points[i].size(); ++d) sums[c][d] += points[i][d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
            result.centroids[c] = std::move(sums[c]);
        }
        // re-seed empty clusters with the point farthest from its centroid;
        // no point is assigned to an empty cluster, so the objective cannot rise
        std::vector<bool> taken(points.size(), false);
        for (int c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = points.size();
            double far_d = -1.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (taken[i]) continue;
                const double d = squared_distance(points[i], result.centroids[result.assignments[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far == points.size()) break;
            taken[far] = true;
            result.centroids[c] = points[far];
        }

        std::vector<int> next = assign_all(points, result.centroids);
        result.objective_trace.push_back(wcss(points, result.centroids, next));
        result.iterations = iter + 1;
        const bool stable = next == result.assignments;
        result.assignments = std::move(next);
        if (stable) break;
    }
    result.objective = result.objective_trace.back();
    return result;
}

const CategoryIndex& StyleIndex::category(const std::string& name) const {
    auto it = categories.find(name);
    if (it == categories.end()) {
        throw LookupError("category '" + name + "' is not indexed");
    }
    return it->second;
}

const Vec* StyleIndex::style_of(const std::string& id) const {
    auto it = id_lookup_.find(id);
    if (it == id_lookup_.end()) return nullptr;
    return &categories.at(it->second.first).styles[it->second.second];
}

const std::string* StyleIndex::category_of(const std::string& id) const {
    auto it = id_lookup_.find(id);
    if (it == id_lookup_.end()) return nullptr;
    return &it->second.first;
}

void StyleIndex::rebuild_id_lookup() {
    id_lookup_.clear();
    for (const auto& [cat, ci] : categories) {
        for (std::size_t i = 0; i < ci.ids.size(); ++i) {
            id_lookup_.emplace(ci.ids[i], std::make_pair(cat, i));
        }
    }
}

StyleIndex build_style_index(const graph::Catalog& catalog, const embed::ProjectionModel& model,
                             int k, std::uint64_t seed, int max_iters,
                             std::vector<std::string>* notes) {
    if (k <= 0) throw ConfigError("build_style_index: k must be positive");
    if (catalog.empty()) throw EmptyInputError("build_style_index: empty catalog");

    StyleIndex index;
    index.style_dim = model.output_dim;
    for (const graph::Item& item : catalog.items()) {  // sorted by id
        CategoryIndex& ci = index.categories[item.category];
        ci.ids.push_back(item.id);
        ci.styles.push_back(embed::embed(model, item.features));
    }
    for (auto& [cat, ci] : index.categories) {
        KMeansResult km = kmeans(ci.styles, k, mix_seed(seed, "index/" + cat), max_iters);
        if (notes) {
            for (auto& n : km.notes) notes->push_back("category '" + cat + "': " + n);
        }
        ci.centroids = std::move(km.centroids);
        ci.assignments = std::move(km.assignments);
    }
    index.rebuild_id_lookup();
    return index;
}

std::string robust_retrieve(const Vec& query_style, const StyleIndex& index,
                            const std::string& target_category, int n) {
    if (n < 1) throw ConfigError("robust_retrieve: n must be >= 1");
    const CategoryIndex& ci = index.category(target_category);
    if (ci.ids.empty()) {
        throw LookupError("category '" + target_category + "' has no indexed items");
    }

    const int c_star = nearest_centroid(query_style, ci.centroids);
    const Vec& centroid = ci.centroids[c_star];

    // n items nearest the centroid, ties by id
    std::vector<std::size_t> order(ci.ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> to_centroid(ci.ids.size());
    for (std::size_t i = 0; i < ci.ids.size(); ++i) {
        to_centroid[i] = squared_distance(ci.styles[i], centroid);
    }
    const std::size_t take = std::min<std::size_t>(n, order.size());
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&](std::size_t x, std::size_t y) {
                          if (to_centroid[x] != to_centroid[y]) {
                              return to_centroid[x] < to_centroid[y];
                          }
                          return ci.ids[x] < ci.ids[y];
                      });

    std::size_t best = order[0];
    double best_d = squared_distance(ci.styles[best], query_style);
    for (std::size_t i = 1; i < take; ++i) {
        const std::size_t cand = order[i];
        const double d = squared_distance(ci.styles[cand], query_style);
        if (d < best_d || (d == best_d && ci.ids[cand] < ci.ids[best])) {
            best_d = d;
            best = cand;
        }
    }
    return ci.ids[best];
}

Outfit generate_outfit(const std::string& query_id, const OutfitSpec& spec,
                       const StyleIndex& index, const embed::ProjectionModel& model,
                       const graph::Catalog& catalog, int n) {
    if (spec.categories.size() < 2) {
        throw ConfigError("outfit spec needs at least 2 categories");
    }
    {
        auto sorted = spec.categories;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw ConfigError("outfit spec categories must be distinct");
        }
    }
    const graph::Item& query = catalog.at(query_id);
    if (std::find(spec.categories.begin(), spec.categories.end(), query.category) ==
        spec.categories.end()) {
        throw ConfigError("query category '" + query.category + "' is not in the outfit spec");
    }

    const Vec* indexed = index.style_of(query_id);
    const Vec style = indexed ? *indexed : embed::embed(model, query.features);

    Outfit outfit;
    outfit.query = query_id;
    for (const std::string& cat : spec.categories) {
        if (cat == query.category) continue;
        outfit.members[cat] = robust_retrieve(style, index, cat, n);
    }
    return outfit;
}

ClusterAffinity cluster_pair_affinity(const StyleIndex& index, const std::string& cat_a,
                                      const std::string& cat_b) {
    const CategoryIndex& a = index.category(cat_a);
    const CategoryIndex& b = index.category(cat_b);
    if (a.centroids.empty() || b.centroids.empty()) {
        throw EmptyInputError("cluster_pair_affinity: category without centroids");
    }
    ClusterAffinity out;
    double best = std::numeric_limits<double>::infinity();
    double worst = -1.0;
    for (std::size_t i = 0; i < a.centroids.size(); ++i) {
        for (std::size_t j = 0; j < b.centroids.size(); ++j) {
            const double d = distance(a.centroids[i], b.centroids[j]);
            if (d < best) {
                best = d;
                out.closest = {static_cast<int>(i), static_cast<int>(j), d};
            }
            if (d > worst) {
                worst = d;
                out.farthest = {static_cast<int>(i), static_cast<int>(j), d};
            }
        }
    }
    return out;
}

void save_index(const StyleIndex& index, const std::string& path) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [cat, ci] : index.categories) {
        nlohmann::json items = nlohmann::json::array();
        for (std::size_t i = 0; i < ci.ids.size(); ++i) {
            items.push_back({{"id", ci.ids[i]},
                             {"style", ci.styles[i]},
                             {"cluster", ci.assignments[i]}});
        }
        j[cat] = {{"k", ci.centroids.size()},
                  {"centroids", ci.centroids},
                  {"items", std::move(items)}};
    }
    atomic_write(path, j.dump(2) + "\n");
}

StyleIndex load_index(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        StyleIndex index;
        for (auto& [cat, obj] : j.items()) {
            CategoryIndex ci;
            ci.centroids = obj.at("centroids").get<std::vector<Vec>>();
            for (const auto& item : obj.at("items")) {
                ci.ids.push_back(item.at("id").get<std::string>());
                ci.styles.push_back(item.at("style").get<Vec>());
                ci.assignments.push_back(item.at("cluster").get<int>());
            }
            if (!ci.styles.empty()) index.style_dim = ci.styles.front().size();
            index.categories.emplace(cat, std::move(ci));
        }
        index.rebuild_id_lookup();
        return index;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::vector<OutfitSpec> load_outfit_specs(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        std::vector<OutfitSpec> specs;
        for (const auto& arr : j.at("outfits")) {
            OutfitSpec spec;
            spec.categories = arr.get<std::vector<std::string>>();
            specs.push_back(std::move(spec));
        }
        return specs;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace stylespace::retrieve
