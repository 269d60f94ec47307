#include <doctest.h>

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ganimals/error.hpp"
#include "ganimals/taxonomy.hpp"
#include "support.hpp"

using namespace ganimals;
using test_support::bundled;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string csv_text() { return slurp(default_data_dir() / "taxonomy.csv"); }
std::string cores_text() { return slurp(default_data_dir() / "cores.json"); }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::ParseError;
}

std::string drop_line(const std::string& text, std::size_t line) {
    std::stringstream in(text);
    std::string out, l;
    for (std::size_t i = 0; std::getline(in, l); ++i)
        if (i != line)
            out += l + "\n";
    return out;
}

} // namespace

TEST_CASE("bundled taxonomy has 396 categories and 118 dogs in one species") {
    const auto& tax = bundled();
    CHECK(tax.size() == 396);
    std::set<std::string> dog_species;
    std::size_t dogs = 0;
    for (const auto& c : tax.categories())
        if (c.is_dog) {
            ++dogs;
            dog_species.insert(c.species_id);
        }
    CHECK(dogs == 118);
    CHECK(dog_species.size() == 1);
}

TEST_CASE("species partition the categories") {
    const auto& tax = bundled();
    std::size_t total = 0;
    std::set<CategoryId> seen;
    for (const auto& [species, ids] : tax.species()) {
        total += ids.size();
        for (auto id : ids) {
            CHECK(tax.at(id).species_id == species);
            CHECK(seen.insert(id).second);
        }
        if (tax.at(ids.front()).is_dog)
            CHECK(ids.size() == 118);
    }
    CHECK(total == 396);
}

TEST_CASE("cores") {
    const auto& tax = bundled();
    for (auto id : categories_in_core(tax, "canine"))
        CHECK(tax.at(id).is_dog);
    for (auto core : kAllCores)
        CHECK_FALSE(tax.categories_in_core(core).empty());
    CHECK_FALSE(categories_in_core(tax, "wildcard").empty());
    CHECK(code_of([&] { categories_in_core(tax, "feline"); }) == ErrorCode::UnknownCore);
}

TEST_CASE("core pair index covers the upper triangle") {
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) {
            const auto idx = core_pair_index(kAllCores[i], kAllCores[j]);
            CHECK(idx == core_pair_index(kAllCores[j], kAllCores[i]));
            seen.insert(idx);
        }
    CHECK(seen.size() == 10);
    CHECK(*seen.rbegin() == 9);
}

TEST_CASE("malformed inputs") {
    const auto csv = csv_text();
    const auto cores = cores_text();
    SUBCASE("one category removed") {
        CHECK(code_of([&] { parse_taxonomy(drop_line(csv, 5), cores); }) == ErrorCode::ValidationError);
    }
    SUBCASE("duplicate id") {
        std::string dup = csv;
        const auto first_row_end = dup.find('\n', dup.find('\n') + 1);
        const auto second_row = dup.substr(dup.find('\n') + 1, first_row_end - dup.find('\n'));
        dup += second_row;
        CHECK(code_of([&] { parse_taxonomy(dup, cores); }) == ErrorCode::ValidationError);
    }
    SUBCASE("wrong header") {
        CHECK(code_of([&] { parse_taxonomy("id,name\n" + drop_line(csv, 0), cores); }) == ErrorCode::ParseError);
    }
    SUBCASE("short row") {
        CHECK(code_of([&] { parse_taxonomy(csv + "999,x,y\n", cores); }) == ErrorCode::ParseError);
    }
    SUBCASE("unknown core name") {
        auto j = nlohmann::json::parse(cores);
        j["feline"] = j["canine"];
        CHECK(code_of([&] { parse_taxonomy(csv, j.dump()); }) == ErrorCode::ValidationError);
    }
    SUBCASE("dangling core id") {
        auto j = nlohmann::json::parse(cores);
        j["wildcard"].push_back(999);
        CHECK(code_of([&] { parse_taxonomy(csv, j.dump()); }) == ErrorCode::ValidationError);
    }
    SUBCASE("missing core") {
        auto j = nlohmann::json::parse(cores);
        j.erase("bird");
        CHECK(code_of([&] { parse_taxonomy(csv, j.dump()); }) == ErrorCode::ValidationError);
    }
    SUBCASE("cores not json") {
        CHECK(code_of([&] { parse_taxonomy(csv, "{nope"); }) == ErrorCode::ParseError);
    }
}

TEST_CASE("serialize then parse is the identity") {
    const auto& tax = bundled();
    const auto again = parse_taxonomy(serialize_taxonomy_csv(tax), serialize_cores_json(tax));
    CHECK(again == tax);

    test_support::TempDir dir;
    {
        std::ofstream(dir.path() / "t.csv") << serialize_taxonomy_csv(tax);
        std::ofstream(dir.path() / "c.json") << serialize_cores_json(tax);
    }
    CHECK(load_taxonomy(dir.path() / "t.csv", dir.path() / "c.json") == tax);
}

TEST_CASE("small taxonomies are allowed when the size check is off") {
    std::vector<Category> cats = {{1, "a", "sa", false, false}, {2, "b", "sb", true, false},
                                  {3, "c", "sc", false, true}, {4, "d", "sd", false, false},
                                  {5, "e", "se", false, false}};
    std::vector<CoreDefinition> cores;
    for (std::size_t i = 0; i < 5; ++i)
        cores.push_back({kAllCores[i], {static_cast<CategoryId>(i + 1)}});
    std::array<double, 10> w{};
    w.fill(1.0);
    Taxonomy small(cats, cores, w, false);
    CHECK(small.size() == 5);
    CHECK(small.species().size() == 5);
    CHECK_THROWS_AS(Taxonomy(cats, cores, w, true), Error);
    CHECK(code_of([&] { small.at(42); }) == ErrorCode::UnknownCategory);
}
