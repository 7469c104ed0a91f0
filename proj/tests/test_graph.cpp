#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "stylespace/errors.hpp"
#include "stylespace/graph.hpp"
#include "stylespace/io_util.hpp"
#include "test_helpers.hpp"

using namespace stylespace;
using namespace testutil;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::set<std::string> as_set(const std::vector<std::string>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("load_catalog basic construction and edge normalization") {
    TempDir dir("load");
    write_file(dir.file("items.jsonl"),
               R"({"id":"x","category":"shirt","features":[1.0,2.0]})"
               "\n"
               R"({"id":"y","category":"pants","features":[0.5,0.0]})"
               "\n"
               R"({"id":"z","category":"shoes","features":[3.0,4.0]})"
               "\n");
    write_file(dir.file("edges.csv"), "a,b\nx,y\ny,z\n");
    auto cat = graph::load_catalog(dir.file("items.jsonl"), dir.file("edges.csv"));
    CHECK(cat.items().size() == 3);
    CHECK(cat.edges().size() == 2);
    CHECK(cat.feature_dim() == 2);

    SUBCASE("reversed duplicate edges collapse to one normalized edge") {
        write_file(dir.file("edges.csv"), "a,b\nx,y\ny,x\n");
        auto c = graph::load_catalog(dir.file("items.jsonl"), dir.file("edges.csv"));
        REQUIRE(c.edges().size() == 1);
        CHECK(c.edges()[0].first == "x");
        CHECK(c.edges()[0].second == "y");
    }
    SUBCASE("edge referencing an unknown id names it") {
        write_file(dir.file("edges.csv"), "a,b\nx,w\n");
        CHECK_THROWS_WITH_AS(graph::load_catalog(dir.file("items.jsonl"), dir.file("edges.csv")),
                             doctest::Contains("'w'"), IntegrityError);
    }
    SUBCASE("malformed item line reports the line number") {
        write_file(dir.file("items.jsonl"),
                   R"({"id":"x","category":"shirt","features":[1.0,2.0]})"
                   "\nnot json\n");
        CHECK_THROWS_WITH_AS(graph::load_catalog(dir.file("items.jsonl"), ""),
                             doctest::Contains(":2"), ParseError);
    }
    SUBCASE("inconsistent feature lengths raise a dimension error") {
        write_file(dir.file("items.jsonl"),
                   R"({"id":"x","category":"shirt","features":[1.0,2.0]})"
                   "\n"
                   R"({"id":"y","category":"pants","features":[1.0]})"
                   "\n");
        CHECK_THROWS_AS(graph::load_catalog(dir.file("items.jsonl"), ""), DimensionError);
    }
    SUBCASE("duplicate ids are rejected") {
        write_file(dir.file("items.jsonl"),
                   R"({"id":"x","category":"shirt","features":[1.0]})"
                   "\n"
                   R"({"id":"x","category":"pants","features":[2.0]})"
                   "\n");
        CHECK_THROWS_AS(graph::load_catalog(dir.file("items.jsonl"), ""), IntegrityError);
    }
    SUBCASE("self edges are rejected") {
        write_file(dir.file("edges.csv"), "a,b\nx,x\n");
        CHECK_THROWS_AS(graph::load_catalog(dir.file("items.jsonl"), dir.file("edges.csv")),
                        IntegrityError);
    }
    SUBCASE("items round-trip through save_items_jsonl/save_edges_csv") {
        graph::save_items_jsonl(cat, dir.file("out.jsonl"));
        graph::save_edges_csv(cat, dir.file("out.csv"));
        auto again = graph::load_catalog(dir.file("out.jsonl"), dir.file("out.csv"));
        CHECK(again.items().size() == cat.items().size());
        CHECK(again.edges() == cat.edges());
    }
}

TEST_CASE("clean removes unlabeled items and feature duplicates") {
    SUBCASE("empty category goes away with its edges") {
        auto cat = catalog({item("a", "", {1.0}), item("b", "shirt", {2.0})},
                           {{"a", "b"}});
        auto cleaned = graph::clean(cat);
        CHECK(cleaned.items().size() == 1);
        CHECK(cleaned.items()[0].id == "b");
        CHECK(cleaned.edges().empty());
    }
    SUBCASE("identical category and features keep the smaller id") {
        auto cat = catalog({item("b", "shirt", {1.0, 2.0}), item("a", "shirt", {1.0, 2.0}),
                            item("c", "pants", {1.0, 2.0})},
                           {{"b", "c"}});
        auto cleaned = graph::clean(cat);
        REQUIRE(cleaned.items().size() == 2);
        CHECK(cleaned.items()[0].id == "a");
        CHECK(cleaned.items()[1].id == "c");
        CHECK(cleaned.edges().empty());  // b was removed, its edge with it
    }
    SUBCASE("an already-clean catalog is unchanged and clean is idempotent") {
        auto cat = catalog({item("a", "shirt", {1.0}), item("b", "pants", {2.0})},
                           {{"a", "b"}});
        auto once = graph::clean(cat);
        CHECK(once.items().size() == 2);
        CHECK(once.edges().size() == 1);
        auto twice = graph::clean(once);
        CHECK(twice.items().size() == once.items().size());
        CHECK(twice.edges() == once.edges());
    }
}

TEST_CASE("split_items stratification and determinism") {
    SUBCASE("100 items in one category at 80:1:19") {
        std::vector<graph::Item> items;
        for (int i = 0; i < 100; ++i) {
            items.push_back(item("i" + std::to_string(1000 + i), "shirt", {double(i)}));
        }
        auto cat = catalog(std::move(items), {});
        auto split = graph::split_items(cat, {80, 1, 19}, 7);
        CHECK(split.train.size() == 80);
        CHECK(split.validation.size() == 1);
        CHECK(split.test.size() == 19);
    }
    SUBCASE("degenerate ratio 1:0:0 puts everything in train") {
        std::vector<graph::Item> items;
        for (int i = 0; i < 10; ++i) {
            items.push_back(item("i" + std::to_string(i), "shirt", {double(i)}));
        }
        auto cat = catalog(std::move(items), {});
        auto split = graph::split_items(cat, {1, 0, 0}, 3);
        CHECK(split.train.size() == 10);
        CHECK(split.validation.empty());
        CHECK(split.test.empty());
    }
    SUBCASE("two 50-item categories at 4:1:5 give 20/5/25 each, reruns identical") {
        std::vector<graph::Item> items;
        for (int i = 0; i < 50; ++i) {
            items.push_back(item("s" + std::to_string(100 + i), "shirt", {double(i)}));
            items.push_back(item("p" + std::to_string(100 + i), "pants", {double(i)}));
        }
        auto cat = catalog(std::move(items), {});
        auto split = graph::split_items(cat, {4, 1, 5}, 42);
        auto count_prefix = [](const std::vector<std::string>& ids, char c) {
            return std::count_if(ids.begin(), ids.end(),
                                 [c](const std::string& id) { return id[0] == c; });
        };
        CHECK(split.train.size() == 40);
        CHECK(split.validation.size() == 10);
        CHECK(split.test.size() == 50);
        CHECK(count_prefix(split.train, 's') == 20);
        CHECK(count_prefix(split.validation, 's') == 5);
        CHECK(count_prefix(split.test, 's') == 25);
        CHECK(count_prefix(split.train, 'p') == 20);

        auto rerun = graph::split_items(cat, {4, 1, 5}, 42);
        CHECK(rerun.train == split.train);
        CHECK(rerun.validation == split.validation);
        CHECK(rerun.test == split.test);

        auto other_seed = graph::split_items(cat, {4, 1, 5}, 43);
        CHECK(other_seed.train != split.train);
    }
    SUBCASE("largest remainder: 10 items at 1:1:1 gives 4/3/3") {
        std::vector<graph::Item> items;
        for (int i = 0; i < 10; ++i) {
            items.push_back(item("i" + std::to_string(i), "shirt", {double(i)}));
        }
        auto cat = catalog(std::move(items), {});
        auto split = graph::split_items(cat, {1, 1, 1}, 0);
        CHECK(split.train.size() == 4);
        CHECK(split.validation.size() == 3);
        CHECK(split.test.size() == 3);
    }
    SUBCASE("tiny categories go wholly to train with a warning") {
        auto cat = catalog({item("a", "hat", {1.0}), item("b", "hat", {2.0}),
                            item("c", "shirt", {3.0}), item("d", "shirt", {4.0}),
                            item("e", "shirt", {5.0})},
                           {});
        std::vector<std::string> warnings;
        auto split = graph::split_items(cat, {1, 1, 1}, 0, &warnings);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("hat") != std::string::npos);
        auto train = as_set(split.train);
        CHECK(train.count("a") == 1);
        CHECK(train.count("b") == 1);
    }
    SUBCASE("empty catalog raises") {
        graph::Catalog cat;
        CHECK_THROWS_AS(graph::split_items(cat, {1, 1, 1}, 0), EmptyInputError);
    }
    SUBCASE("splits partition the catalog and stratify within +-1") {
        std::vector<graph::Item> items;
        Rng rng(99);
        const char* cats[] = {"shirt", "pants", "shoes"};
        const int sizes[] = {37, 23, 11};
        for (int c = 0; c < 3; ++c) {
            for (int i = 0; i < sizes[c]; ++i) {
                items.push_back(item(std::string(cats[c]) + std::to_string(100 + i), cats[c],
                                     {rng.uniform()}));
            }
        }
        auto cat = catalog(std::move(items), {});
        const std::array<double, 3> ratios{3, 2, 5};
        auto split = graph::split_items(cat, ratios, 5);

        std::set<std::string> all;
        for (const auto* part : {&split.train, &split.validation, &split.test}) {
            for (const auto& id : *part) {
                CHECK(all.insert(id).second);  // disjoint
            }
        }
        CHECK(all.size() == cat.items().size());  // covering

        for (int c = 0; c < 3; ++c) {
            const std::vector<std::string>* parts[3] = {&split.train, &split.validation,
                                                        &split.test};
            for (int s = 0; s < 3; ++s) {
                const double quota = sizes[c] * ratios[s] / 10.0;
                const auto got = std::count_if(
                    parts[s]->begin(), parts[s]->end(),
                    [&](const std::string& id) { return id.rfind(cats[c], 0) == 0; });
                CHECK(std::abs(static_cast<double>(got) - quota) <= 1.0);
            }
        }
    }
    SUBCASE("split round-trips through splits.json") {
        std::vector<graph::Item> items;
        for (int i = 0; i < 20; ++i) {
            items.push_back(item("i" + std::to_string(i), "shirt", {double(i)}));
        }
        auto cat = catalog(std::move(items), {});
        auto split = graph::split_items(cat, {8, 1, 1}, 11);
        TempDir dir("split");
        graph::save_split(split, dir.file("splits.json"));
        auto loaded = graph::load_split(dir.file("splits.json"));
        CHECK(loaded.train == split.train);
        CHECK(loaded.validation == split.validation);
        CHECK(loaded.test == split.test);
        CHECK(loaded.seed == split.seed);
    }
}
