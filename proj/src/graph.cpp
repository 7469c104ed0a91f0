#include "stylespace/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include <json.hpp>

#include "stylespace/errors.hpp"
#include "stylespace/io_util.hpp"
#include "stylespace/rng.hpp"

namespace stylespace::graph {

namespace {

std::string edge_key(const std::string& a, const std::string& b) {
    return a + '\x1f' + b;
}

Edge normalize_edge(std::string a, std::string b) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
}

}  // namespace

Catalog Catalog::build(std::vector<Item> items, std::vector<Edge> edges) {
    Catalog c;
    std::sort(items.begin(), items.end(),
              [](const Item& x, const Item& y) { return x.id < y.id; });

    bool first = true;
    bool planted = false;
    for (std::size_t i = 0; i < items.size(); ++i) {
        Item& it = items[i];
        if (it.id.empty()) {
            throw IntegrityError("item with empty id");
        }
        if (!all_finite(it.features)) {
            throw NumericError("non-finite feature value for item '" + it.id + "'");
        }
        if (it.planted_style && !all_finite(*it.planted_style)) {
            throw NumericError("non-finite planted style for item '" + it.id + "'");
        }
        if (first) {
            c.feature_dim_ = it.features.size();
            planted = it.planted_style.has_value();
            first = false;
        } else {
            if (it.features.size() != c.feature_dim_) {
                throw DimensionError("item '" + it.id + "' has " +
                                     std::to_string(it.features.size()) +
                                     " features, expected " + std::to_string(c.feature_dim_));
            }
            if (it.planted_style.has_value() != planted) {
                throw IntegrityError("planted styles must be present for every item or none "
                                     "(first mismatch at item '" + it.id + "')");
            }
        }
        if (!c.by_id_.emplace(it.id, i).second) {
            throw IntegrityError("duplicate item id '" + it.id + "'");
        }
    }
    c.items_ = std::move(items);

    std::vector<Edge> normalized;
    normalized.reserve(edges.size());
    for (auto& e : edges) {
        if (e.first == e.second) {
            throw IntegrityError("self edge on item '" + e.first + "'");
        }
        Edge n = normalize_edge(std::move(e.first), std::move(e.second));
        if (!c.by_id_.count(n.first)) {
            throw IntegrityError("edge references unknown item '" + n.first + "'");
        }
        if (!c.by_id_.count(n.second)) {
            throw IntegrityError("edge references unknown item '" + n.second + "'");
        }
        normalized.push_back(std::move(n));
    }
    std::sort(normalized.begin(), normalized.end());
    normalized.erase(std::unique(normalized.begin(), normalized.end()), normalized.end());
    for (const auto& e : normalized) {
        c.edge_keys_.insert(edge_key(e.first, e.second));
    }
    c.edges_ = std::move(normalized);
    return c;
}

const Item* Catalog::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &items_[it->second];
}

const Item& Catalog::at(const std::string& id) const {
    const Item* it = find(id);
    if (!it) throw LookupError("unknown item id '" + id + "'");
    return *it;
}

bool Catalog::has_edge(const std::string& a, const std::string& b) const {
    if (b < a) return edge_keys_.count(edge_key(b, a)) > 0;
    return edge_keys_.count(edge_key(a, b)) > 0;
}

bool Catalog::has_planted_styles() const {
    return !items_.empty() && items_.front().planted_style.has_value();
}

std::vector<std::string> Catalog::categories() const {
    std::vector<std::string> cats;
    for (const auto& it : items_) cats.push_back(it.category);
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    return cats;
}

Catalog load_catalog(const std::string& items_path, const std::string& edges_path) {
    std::vector<Item> items;
    {
        std::istringstream in(read_file(items_path));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(items_path + ":" + std::to_string(lineno) + ": " + e.what());
            }
            try {
                Item it;
                it.id = j.at("id").get<std::string>();
                it.category = j.value("category", std::string());
                it.features = j.at("features").get<Vec>();
                if (j.contains("style")) {
                    it.planted_style = j.at("style").get<Vec>();
                }
                items.push_back(std::move(it));
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(items_path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    std::vector<Edge> edges;
    if (!edges_path.empty()) {
        std::istringstream in(read_file(edges_path));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto fields = csv_split(line);
            if (lineno == 1) {
                if (fields.size() != 2 || fields[0] != "a" || fields[1] != "b") {
                    throw ParseError(edges_path + ":1: expected header \"a,b\"");
                }
                continue;
            }
            if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
                throw ParseError(edges_path + ":" + std::to_string(lineno) +
                                 ": expected two non-empty fields");
            }
            edges.emplace_back(fields[0], fields[1]);
        }
    }
    return Catalog::build(std::move(items), std::move(edges));
}

Catalog clean(const Catalog& catalog) {
    std::vector<Item> kept;
    std::unordered_set<std::string> kept_ids;
    std::unordered_set<std::string> seen_content;
    for (const Item& it : catalog.items()) {  // sorted by id, so first id wins
        if (it.category.empty()) continue;
        std::string key = it.category;
        key += '\x1f';
        for (double v : it.features) {
            const double norm = v + 0.0;  // collapse -0.0 into +0.0
            char buf[sizeof(double)];
            std::memcpy(buf, &norm, sizeof(double));
            key.append(buf, sizeof(double));
        }
        if (!seen_content.insert(key).second) continue;
        kept_ids.insert(it.id);
        kept.push_back(it);
    }
    std::vector<Edge> edges;
    for (const Edge& e : catalog.edges()) {
        if (kept_ids.count(e.first) && kept_ids.count(e.second)) {
            edges.push_back(e);
        }
    }
    return Catalog::build(std::move(kept), std::move(edges));
}

ItemSplit split_items(const Catalog& catalog, const std::array<double, 3>& ratios,
                      std::uint64_t seed, std::vector<std::string>* warnings) {
    if (catalog.empty()) {
        throw EmptyInputError("split_items: empty catalog");
    }
    double total = 0.0;
    for (double r : ratios) {
        if (!(r >= 0.0)) throw ConfigError("split_items: ratios must be nonnegative");
        total += r;
    }
    if (!(total > 0.0)) throw ConfigError("split_items: ratios must sum to a positive value");

    std::map<std::string, std::vector<std::string>> by_category;
    for (const Item& it : catalog.items()) {
        by_category[it.category].push_back(it.id);  // already id-sorted
    }

    ItemSplit split;
    split.seed = seed;
    split.ratios = ratios;
    for (auto& [category, ids] : by_category) {
        const std::size_t n = ids.size();
        if (n < 3) {
            if (warnings) {
                warnings->push_back("category '" + category + "' has only " +
                                    std::to_string(n) + " item(s); assigned wholly to train");
            }
            for (auto& id : ids) split.train.push_back(std::move(id));
            continue;
        }
        // Largest-remainder counts; remainder ties go to the earlier split
        // (train, then validation, then test).
        std::array<std::size_t, 3> counts{};
        std::array<double, 3> remainders{};
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double quota = static_cast<double>(n) * ratios[s] / total;
            counts[s] = static_cast<std::size_t>(std::floor(quota));
            remainders[s] = quota - static_cast<double>(counts[s]);
            assigned += counts[s];
        }
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            if (remainders[x] != remainders[y]) return remainders[x] > remainders[y];
            return x < y;
        });
        for (std::size_t leftover = n - assigned, i = 0; i < leftover; ++i) {
            ++counts[order[i % 3]];
        }

        Rng rng(mix_seed(seed, "split/" + category));
        rng.shuffle(ids);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < counts[0]; ++i) split.train.push_back(ids[pos++]);
        for (std::size_t i = 0; i < counts[1]; ++i) split.validation.push_back(ids[pos++]);
        for (std::size_t i = 0; i < counts[2]; ++i) split.test.push_back(ids[pos++]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

void save_items_jsonl(const Catalog& catalog, const std::string& path) {
    std::string out;
    for (const Item& it : catalog.items()) {
        nlohmann::json j;
        j["id"] = it.id;
        j["category"] = it.category;
        j["features"] = it.features;
        if (it.planted_style) j["style"] = *it.planted_style;
        out += j.dump();
        out += '\n';
    }
    atomic_write(path, out);
}

void save_edges_csv(const Catalog& catalog, const std::string& path) {
    std::string out = "a,b\n";
    for (const Edge& e : catalog.edges()) {
        out += csv_escape(e.first);
        out += ',';
        out += csv_escape(e.second);
        out += '\n';
    }
    atomic_write(path, out);
}

void save_split(const ItemSplit& split, const std::string& path) {
    nlohmann::json j;
    j["train"] = split.train;
    j["validation"] = split.validation;
    j["test"] = split.test;
    j["seed"] = split.seed;
    j["ratios"] = split.ratios;
    atomic_write(path, j.dump(2) + "\n");
}

ItemSplit load_split(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        ItemSplit s;
        s.train = j.at("train").get<std::vector<std::string>>();
        s.validation = j.at("validation").get<std::vector<std::string>>();
        s.test = j.at("test").get<std::vector<std::string>>();
        s.seed = j.value("seed", 0ull);
        if (j.contains("ratios")) {
            auto r = j.at("ratios").get<std::vector<double>>();
            if (r.size() == 3) s.ratios = {r[0], r[1], r[2]};
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

FeatureMap feature_map(const Catalog& catalog) {
    FeatureMap m;
    m.reserve(catalog.items().size());
    for (const Item& it : catalog.items()) {
        m.emplace(it.id, it.features);
    }
    return m;
}

}  // namespace stylespace::graph
