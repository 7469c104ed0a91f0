#include "stylespace/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "stylespace/errors.hpp"
#include "stylespace/io_util.hpp"
#include "stylespace/rng.hpp"

namespace stylespace::sampler {

namespace {

using graph::Edge;

std::string pair_key(const std::string& a, const std::string& b) {
    return a + '\x1f' + b;
}

std::unordered_set<std::string> to_set(const std::vector<std::string>& pool) {
    return {pool.begin(), pool.end()};
}

// Edges with both endpoints inside the pool, in catalog (sorted) order.
std::vector<Edge> edges_within(const graph::Catalog& catalog,
                               const std::unordered_set<std::string>& pool) {
    std::vector<Edge> out;
    for (const Edge& e : catalog.edges()) {
        if (pool.count(e.first) && pool.count(e.second)) out.push_back(e);
    }
    return out;
}

bool heterogeneous(const graph::Catalog& catalog, const Edge& e) {
    return catalog.at(e.first).category != catalog.at(e.second).category;
}

// Balanced draw over heterogeneous candidate edges. Edges are grouped by
// their unordered category pair; categories take turns (scarcest first) and
// each turn serves the category's least-served partner group. This equalizes
// per-category positive counts as far as availability allows and is fully
// deterministic for a given seed.
SampleResult strategic_from_candidates(std::vector<Edge> candidates,
                                       const graph::Catalog& catalog,
                                       int count, std::uint64_t seed) {
    SampleResult result;
    if (count < 0) throw ConfigError("positive count must be nonnegative");
    if (count == 0) return result;
    if (candidates.empty()) {
        throw EmptyInputError("no heterogeneous positive candidates in pool");
    }

    struct Group {
        std::string cat_a, cat_b;  // cat_a < cat_b
        std::vector<Edge> edges;
        std::size_t next = 0;  // cursor into the shuffled edge list
        std::size_t emitted = 0;
    };
    std::map<std::string, Group> groups;
    for (Edge& e : candidates) {
        std::string ca = catalog.at(e.first).category;
        std::string cb = catalog.at(e.second).category;
        if (cb < ca) std::swap(ca, cb);
        Group& g = groups[ca + '\x1f' + cb];
        g.cat_a = ca;
        g.cat_b = cb;
        g.edges.push_back(std::move(e));
    }
    for (auto& [key, g] : groups) {
        Rng rng(mix_seed(seed, "strategic/group/" + key));
        rng.shuffle(g.edges);
    }

    std::map<std::string, std::vector<Group*>> groups_of;  // category -> its groups
    std::map<std::string, std::size_t> incident;
    for (auto& [key, g] : groups) {
        groups_of[g.cat_a].push_back(&g);
        groups_of[g.cat_b].push_back(&g);
        incident[g.cat_a] += g.edges.size();
        incident[g.cat_b] += g.edges.size();
    }
    std::vector<std::string> turn_order;
    for (const auto& [cat, n] : incident) turn_order.push_back(cat);
    std::sort(turn_order.begin(), turn_order.end(), [&](const auto& x, const auto& y) {
        if (incident[x] != incident[y]) return incident[x] < incident[y];
        return x < y;
    });

    auto pick_group = [&](const std::string& cat, bool need_unused) -> Group* {
        Group* best = nullptr;
        for (Group* g : groups_of[cat]) {
            if (need_unused && g->next >= g->edges.size()) continue;
            if (!best || g->emitted < best->emitted) best = g;
            // groups_of is ordered by group key, so equal emit counts keep
            // the lexicographically first partner
        }
        return best;
    };

    const int want = count;
    // Phase 1: without replacement.
    bool progress = true;
    while (static_cast<int>(result.pairs.size()) < want && progress) {
        progress = false;
        for (const std::string& cat : turn_order) {
            if (static_cast<int>(result.pairs.size()) >= want) break;
            Group* g = pick_group(cat, true);
            if (!g) continue;
            const Edge& e = g->edges[g->next++];
            ++g->emitted;
            result.pairs.push_back({e.first, e.second, PairLabel::positive});
            progress = true;
        }
    }
    // Phase 2: candidates exhausted, continue with replacement.
    if (static_cast<int>(result.pairs.size()) < want) {
        result.notes.push_back("positives: " + std::to_string(candidates.size()) +
                               " distinct candidates exhausted; sampled " +
                               std::to_string(want - result.pairs.size()) +
                               " with replacement");
        Rng rng(mix_seed(seed, "strategic/replacement"));
        while (static_cast<int>(result.pairs.size()) < want) {
            for (const std::string& cat : turn_order) {
                if (static_cast<int>(result.pairs.size()) >= want) break;
                Group* g = pick_group(cat, false);
                const Edge& e = g->edges[rng.index(g->edges.size())];
                ++g->emitted;
                result.pairs.push_back({e.first, e.second, PairLabel::positive});
            }
        }
    }
    return result;
}

// Distinct non-edge pairs containing at least one item of required_category
// (used for holdout evaluation sets). The candidate space is small enough to
// enumerate exactly.
SampleResult negatives_touching_category(const graph::Catalog& catalog,
                                         const std::vector<std::string>& pool,
                                         const std::string& required_category,
                                         int count, std::uint64_t seed) {
    SampleResult result;
    if (count < 0) throw ConfigError("negative count must be nonnegative");
    if (count == 0) return result;
    auto pool_set = to_set(pool);
    std::vector<std::string> sorted_pool(pool_set.begin(), pool_set.end());
    std::sort(sorted_pool.begin(), sorted_pool.end());

    std::vector<Edge> candidates;
    for (std::size_t i = 0; i < sorted_pool.size(); ++i) {
        const bool i_holdout = catalog.at(sorted_pool[i]).category == required_category;
        for (std::size_t j = i + 1; j < sorted_pool.size(); ++j) {
            if (!i_holdout && catalog.at(sorted_pool[j]).category != required_category) continue;
            if (catalog.has_edge(sorted_pool[i], sorted_pool[j])) continue;
            candidates.emplace_back(sorted_pool[i], sorted_pool[j]);
        }
    }
    Rng rng(mix_seed(seed, "negatives/holdout"));
    rng.shuffle(candidates);
    if (static_cast<int>(candidates.size()) < count) {
        result.notes.push_back("negatives: shortfall, only " +
                               std::to_string(candidates.size()) + " of " +
                               std::to_string(count) + " available");
    }
    const std::size_t take = std::min<std::size_t>(candidates.size(), count);
    for (std::size_t i = 0; i < take; ++i) {
        result.pairs.push_back({candidates[i].first, candidates[i].second, PairLabel::negative});
    }
    return result;
}

std::size_t count_strategic_candidates(const graph::Catalog& catalog,
                                       const std::unordered_set<std::string>& pool,
                                       const std::string& touching_category) {
    std::size_t n = 0;
    for (const Edge& e : catalog.edges()) {
        if (!pool.count(e.first) || !pool.count(e.second)) continue;
        if (!heterogeneous(catalog, e)) continue;
        if (!touching_category.empty() &&
            catalog.at(e.first).category != touching_category &&
            catalog.at(e.second).category != touching_category) {
            continue;
        }
        ++n;
    }
    return n;
}

const char* split_name(int s) {
    return s == 0 ? "train" : (s == 1 ? "val" : "test");
}

}  // namespace

SampleResult sample_positives_strategic(const graph::Catalog& catalog,
                                        const std::vector<std::string>& pool,
                                        int count, std::uint64_t seed) {
    auto pool_set = to_set(pool);
    std::vector<Edge> candidates;
    for (Edge& e : edges_within(catalog, pool_set)) {
        if (heterogeneous(catalog, e)) candidates.push_back(std::move(e));
    }
    return strategic_from_candidates(std::move(candidates), catalog, count, seed);
}

SampleResult sample_positives_naive(const graph::Catalog& catalog,
                                    const std::vector<std::string>& pool,
                                    int count, std::uint64_t seed) {
    SampleResult result;
    if (count < 0) throw ConfigError("positive count must be nonnegative");
    if (count == 0) return result;
    auto candidates = edges_within(catalog, to_set(pool));
    if (candidates.empty()) {
        throw EmptyInputError("no positive candidates: pool contains no edges");
    }
    Rng rng(mix_seed(seed, "naive/shuffle"));
    rng.shuffle(candidates);
    const std::size_t take = std::min<std::size_t>(candidates.size(), count);
    for (std::size_t i = 0; i < take; ++i) {
        result.pairs.push_back({candidates[i].first, candidates[i].second, PairLabel::positive});
    }
    if (static_cast<int>(take) < count) {
        result.notes.push_back("positives: " + std::to_string(candidates.size()) +
                               " distinct candidates exhausted; sampled " +
                               std::to_string(count - take) + " with replacement");
        Rng rep(mix_seed(seed, "naive/replacement"));
        while (static_cast<int>(result.pairs.size()) < count) {
            const Edge& e = candidates[rep.index(candidates.size())];
            result.pairs.push_back({e.first, e.second, PairLabel::positive});
        }
    }
    return result;
}

SampleResult sample_negatives(const graph::Catalog& catalog,
                              const std::vector<std::string>& pool,
                              int count, std::uint64_t seed) {
    SampleResult result;
    if (count < 0) throw ConfigError("negative count must be nonnegative");
    auto pool_set = to_set(pool);
    if (pool_set.size() < 2) {
        throw ConfigError("sample_negatives: pool must contain at least 2 items");
    }
    if (count == 0) return result;

    std::vector<std::string> ids(pool_set.begin(), pool_set.end());
    std::sort(ids.begin(), ids.end());
    const std::size_t n = ids.size();
    const std::size_t all_pairs = n * (n - 1) / 2;
    const std::size_t within_edges = edges_within(catalog, pool_set).size();
    const std::size_t possible = all_pairs - within_edges;

    if (possible == 0) {
        result.notes.push_back("negatives: shortfall, no non-edge pairs available");
        return result;
    }

    Rng rng(mix_seed(seed, "negatives"));
    auto enumerate_and_take = [&](std::size_t take) {
        std::vector<Edge> candidates;
        candidates.reserve(possible);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!catalog.has_edge(ids[i], ids[j])) candidates.emplace_back(ids[i], ids[j]);
            }
        }
        rng.shuffle(candidates);
        for (std::size_t i = 0; i < take; ++i) {
            result.pairs.push_back({candidates[i].first, candidates[i].second,
                                    PairLabel::negative});
        }
    };

    if (static_cast<std::size_t>(count) >= possible) {
        if (static_cast<std::size_t>(count) > possible) {
            result.notes.push_back("negatives: shortfall, only " + std::to_string(possible) +
                                   " of " + std::to_string(count) + " available");
        }
        enumerate_and_take(possible);
        return result;
    }
    if (static_cast<std::size_t>(count) * 2 >= possible) {
        enumerate_and_take(count);
        return result;
    }

    // Sparse regime: rejection sampling with a deterministic enumeration
    // fallback if the attempt budget runs out.
    std::unordered_set<std::string> used;
    const std::size_t budget = 50u * static_cast<std::size_t>(count) + 1000u;
    std::size_t attempts = 0;
    while (result.pairs.size() < static_cast<std::size_t>(count) && attempts < budget) {
        ++attempts;
        std::size_t i = rng.index(n);
        std::size_t j = rng.index(n - 1);
        if (j >= i) ++j;
        const std::string& a = ids[std::min(i, j)];
        const std::string& b = ids[std::max(i, j)];
        if (catalog.has_edge(a, b)) continue;
        if (!used.insert(pair_key(a, b)).second) continue;
        result.pairs.push_back({a, b, PairLabel::negative});
    }
    if (result.pairs.size() < static_cast<std::size_t>(count)) {
        result.pairs.clear();
        enumerate_and_take(count);
    }
    return result;
}

PairDataset build_pair_dataset(const graph::Catalog& catalog,
                               const graph::ItemSplit& split,
                               const SamplerConfig& config) {
    if (config.target_positive_count < 1) {
        throw ConfigError("target_positive_count must be positive");
    }
    if (config.negatives_per_positive_train < 1) {
        throw ConfigError("negatives_per_positive_train must be positive");
    }
    if (!(config.test_negative_ratio > 0.0)) {
        throw ConfigError("test_negative_ratio must be positive");
    }
    const bool holdout = config.strategy == Strategy::holdout;
    if (holdout) {
        if (config.holdout_category.empty()) {
            throw ConfigError("holdout strategy requires holdout_category");
        }
        const auto cats = catalog.categories();
        if (std::find(cats.begin(), cats.end(), config.holdout_category) == cats.end()) {
            throw LookupError("holdout category '" + config.holdout_category +
                              "' not present in catalog");
        }
    }

    PairDataset ds;
    ds.config = config;

    std::vector<std::string> train_pool;
    for (const std::string& id : split.train) {
        if (holdout && catalog.at(id).category == config.holdout_category) continue;
        train_pool.push_back(id);
    }

    // Train positives at the full target; duplicates (with a note) once the
    // distinct candidates run out.
    SampleResult pos;
    const std::uint64_t train_pos_seed = mix_seed(config.seed, "train/pos");
    if (config.strategy == Strategy::naive) {
        pos = sample_positives_naive(catalog, train_pool, config.target_positive_count,
                                     train_pos_seed);
    } else {
        pos = sample_positives_strategic(catalog, train_pool, config.target_positive_count,
                                         train_pos_seed);
    }
    for (auto& note : pos.notes) ds.notes.push_back("train " + note);
    const int train_neg_count =
        static_cast<int>(pos.pairs.size()) * config.negatives_per_positive_train;
    SampleResult neg = sample_negatives(catalog, train_pool, train_neg_count,
                                        mix_seed(config.seed, "train/neg"));
    for (auto& note : neg.notes) ds.notes.push_back("train " + note);
    ds.train = std::move(pos.pairs);
    ds.train.insert(ds.train.end(), neg.pairs.begin(), neg.pairs.end());

    // Validation and test mirror evaluation: positive targets scale with pool
    // size, negatives follow test_negative_ratio. Targets are capped at the
    // number of distinct candidates so evaluation pairs stay unique.
    const std::vector<std::string>* pools[2] = {&split.validation, &split.test};
    std::vector<Pair>* outputs[2] = {&ds.validation, &ds.test};
    for (int s = 0; s < 2; ++s) {
        const std::vector<std::string>& pool_ids = *pools[s];
        const char* name = split_name(s + 1);
        if (pool_ids.empty()) continue;

        std::vector<std::string> pool(pool_ids.begin(), pool_ids.end());
        long long target = std::llround(static_cast<double>(config.target_positive_count) *
                                        static_cast<double>(pool.size()) /
                                        static_cast<double>(std::max<std::size_t>(
                                            1, split.train.size())));
        if (target <= 0) continue;

        auto pool_set = to_set(pool);
        std::size_t available;
        if (config.strategy == Strategy::naive) {
            available = edges_within(catalog, pool_set).size();
        } else {
            available = count_strategic_candidates(
                catalog, pool_set, holdout ? config.holdout_category : std::string());
        }
        if (static_cast<std::size_t>(target) > available) {
            ds.notes.push_back(std::string(name) + " positives: target " +
                               std::to_string(target) + " capped at " +
                               std::to_string(available) + " distinct candidates");
            target = static_cast<long long>(available);
        }
        if (target == 0) continue;

        const std::uint64_t pos_seed = mix_seed(config.seed, std::string(name) + "/pos");
        SampleResult p;
        if (config.strategy == Strategy::naive) {
            p = sample_positives_naive(catalog, pool, static_cast<int>(target), pos_seed);
        } else if (!holdout) {
            p = sample_positives_strategic(catalog, pool, static_cast<int>(target), pos_seed);
        } else {
            std::vector<Edge> candidates;
            for (Edge& e : edges_within(catalog, pool_set)) {
                if (!heterogeneous(catalog, e)) continue;
                if (catalog.at(e.first).category != config.holdout_category &&
                    catalog.at(e.second).category != config.holdout_category) {
                    continue;
                }
                candidates.push_back(std::move(e));
            }
            p = strategic_from_candidates(std::move(candidates), catalog,
                                          static_cast<int>(target), pos_seed);
        }
        for (auto& note : p.notes) ds.notes.push_back(std::string(name) + " " + note);

        const int neg_count = static_cast<int>(
            std::llround(static_cast<double>(p.pairs.size()) * config.test_negative_ratio));
        const std::uint64_t neg_seed = mix_seed(config.seed, std::string(name) + "/neg");
        SampleResult ng;
        if (holdout) {
            ng = negatives_touching_category(catalog, pool, config.holdout_category,
                                             neg_count, neg_seed);
        } else {
            ng = sample_negatives(catalog, pool, neg_count, neg_seed);
        }
        for (auto& note : ng.notes) ds.notes.push_back(std::string(name) + " " + note);

        *outputs[s] = std::move(p.pairs);
        outputs[s]->insert(outputs[s]->end(), ng.pairs.begin(), ng.pairs.end());
    }
    return ds;
}

void save_pairs_csv(const PairDataset& dataset, const std::string& path) {
    std::string out = "a,b,label,split\n";
    auto emit = [&](const std::vector<Pair>& pairs, const char* split) {
        for (const Pair& p : pairs) {
            out += csv_escape(p.a);
            out += ',';
            out += csv_escape(p.b);
            out += ',';
            out += p.label == PairLabel::positive ? "pos" : "neg";
            out += ',';
            out += split;
            out += '\n';
        }
    };
    emit(dataset.train, "train");
    emit(dataset.validation, "val");
    emit(dataset.test, "test");
    atomic_write(path, out);
}

PairDataset load_pairs_csv(const std::string& path) {
    PairDataset ds;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (lineno == 1) {
            if (fields != std::vector<std::string>{"a", "b", "label", "split"}) {
                throw ParseError(path + ":1: expected header \"a,b,label,split\"");
            }
            continue;
        }
        if (fields.size() != 4) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 4 fields");
        }
        Pair p;
        p.a = fields[0];
        p.b = fields[1];
        if (fields[2] == "pos") p.label = PairLabel::positive;
        else if (fields[2] == "neg") p.label = PairLabel::negative;
        else throw ParseError(path + ":" + std::to_string(lineno) +
                              ": label must be pos or neg, got '" + fields[2] + "'");
        if (fields[3] == "train") ds.train.push_back(std::move(p));
        else if (fields[3] == "val") ds.validation.push_back(std::move(p));
        else if (fields[3] == "test") ds.test.push_back(std::move(p));
        else throw ParseError(path + ":" + std::to_string(lineno) +
                              ": split must be train, val or test, got '" + fields[3] + "'");
    }
    return ds;
}

}  // namespace stylespace::sampler
