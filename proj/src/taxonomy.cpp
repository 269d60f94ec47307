#include "ganimals/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ganimals/error.hpp"

#ifndef GANIMALS_DEFAULT_DATA_DIR
#define GANIMALS_DEFAULT_DATA_DIR "data"
#endif

namespace ganimals {

using nlohmann::json;

std::string_view to_string(Core core) noexcept {
    switch (core) {
    case Core::Aquatic: return "aquatic";
    case Core::Canine: return "canine";
    case Core::Bird: return "bird";
    case Core::Megafauna: return "megafauna";
    case Core::Wildcard: return "wildcard";
    }
    return "?";
}

Core parse_core(std::string_view name) {
    for (Core c : kAllCores)
        if (to_string(c) == name)
            return c;
    fail(ErrorCode::UnknownCore, "unknown core '" + std::string(name) + "'");
}

std::size_t core_pair_index(Core a, Core b) {
    auto i = static_cast<std::size_t>(a);
    auto j = static_cast<std::size_t>(b);
    if (i == j)
        fail(ErrorCode::PreconditionViolation, "core pair needs two distinct cores");
    if (i > j)
        std::swap(i, j);
    // Row-major upper triangle of the 5x5 matrix.
    return i * 5 - i * (i + 1) / 2 + (j - i - 1);
}

Taxonomy::Taxonomy(std::vector<Category> categories,
                   std::vector<CoreDefinition> cores,
                   std::array<double, 10> core_pair_weights,
                   bool require_canonical_size)
    : categories_(std::move(categories)),
      cores_(std::move(cores)),
      pair_weights_(core_pair_weights) {
    std::sort(categories_.begin(), categories_.end(),
              [](const Category& a, const Category& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        const auto& c = categories_[i];
        if (c.id < 0 || c.id > 999)
            fail(ErrorCode::ValidationError, "category id out of ImageNet range: " + std::to_string(c.id));
        if (c.species_id.empty())
            fail(ErrorCode::ValidationError, "category " + std::to_string(c.id) + " has no species");
        if (!index_.emplace(c.id, i).second)
            fail(ErrorCode::ValidationError, "duplicate category id " + std::to_string(c.id));
    }

    std::map<std::string, std::vector<CategoryId>> groups;
    std::set<std::string> dog_species;
    std::size_t dogs = 0;
    for (const auto& c : categories_) {
        groups[c.species_id].push_back(c.id);
        if (c.is_dog) {
            ++dogs;
            dog_species.insert(c.species_id);
        }
    }
    species_.assign(groups.begin(), groups.end());

    if (dog_species.size() > 1)
        fail(ErrorCode::ValidationError, "dog categories span more than one species");
    if (!dog_species.empty() && groups[*dog_species.begin()].size() != dogs)
        fail(ErrorCode::ValidationError, "dog species contains non-dog categories");
    if (require_canonical_size) {
        if (categories_.size() != kExpectedCategories)
            fail(ErrorCode::ValidationError, "expected " + std::to_string(kExpectedCategories) +
                                                 " categories, found " + std::to_string(categories_.size()));
        if (dogs != kExpectedDogs)
            fail(ErrorCode::ValidationError, "expected " + std::to_string(kExpectedDogs) +
                                                 " dog categories, found " + std::to_string(dogs));
    }

    std::array<bool, 5> seen{};
    for (auto& def : cores_) {
        auto slot = static_cast<std::size_t>(def.core);
        if (seen[slot])
            fail(ErrorCode::ValidationError, "core '" + std::string(to_string(def.core)) + "' defined twice");
        seen[slot] = true;
        std::sort(def.category_ids.begin(), def.category_ids.end());
        def.category_ids.erase(std::unique(def.category_ids.begin(), def.category_ids.end()),
                               def.category_ids.end());
        if (def.category_ids.empty())
            fail(ErrorCode::ValidationError, "core '" + std::string(to_string(def.core)) + "' is empty");
        for (CategoryId id : def.category_ids)
            if (!contains(id))
                fail(ErrorCode::ValidationError, "core '" + std::string(to_string(def.core)) +
                                                     "' lists unknown category " + std::to_string(id));
    }
    for (Core c : kAllCores)
        if (!seen[static_cast<std::size_t>(c)])
            fail(ErrorCode::ValidationError, "core '" + std::string(to_string(c)) + "' missing");
    std::sort(cores_.begin(), cores_.end(),
              [](const CoreDefinition& a, const CoreDefinition& b) { return a.core < b.core; });

    double total = 0.0;
    for (double w : pair_weights_) {
        if (!(w >= 0.0) || !std::isfinite(w))
            fail(ErrorCode::ValidationError, "core pair weights must be finite and non-negative");
        total += w;
    }
    if (!(total > 0.0))
        fail(ErrorCode::ValidationError, "core pair weights sum to zero");
}

const Category& Taxonomy::at(CategoryId id) const {
    auto it = index_.find(id);
    if (it == index_.end())
        fail(ErrorCode::UnknownCategory, "unknown category " + std::to_string(id));
    return categories_[it->second];
}

const std::vector<CategoryId>& Taxonomy::categories_in_core(Core core) const {
    return cores_[static_cast<std::size_t>(core)].category_ids;
}

const std::vector<CategoryId>& categories_in_core(const Taxonomy& taxonomy, std::string_view core_name) {
    return taxonomy.categories_in_core(parse_core(core_name));
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

bool parse_flag(const std::string& text, std::size_t line_no) {
    if (text == "1" || text == "true")
        return true;
    if (text == "0" || text == "false")
        return false;
    fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad boolean '" + text + "'");
}

std::string pair_key(Core a, Core b) {
    return std::string(to_string(a)) + "+" + std::string(to_string(b));
}

} // namespace

Taxonomy parse_taxonomy(std::string_view csv_text, std::string_view cores_json_text,
                        bool require_canonical_size) {
    std::istringstream in{std::string(csv_text)};
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        fail(ErrorCode::ParseError, "taxonomy file is empty");
    ++line_no;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "id,name,species_id,is_dog,is_insect")
        fail(ErrorCode::ParseError, "unexpected taxonomy header '" + line + "'");

    std::vector<Category> categories;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = split_row(line);
        if (fields.size() != 5)
            fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 5 fields");
        Category c;
        char* end = nullptr;
        long id = std::strtol(fields[0].c_str(), &end, 10);
        if (fields[0].empty() || *end != '\0')
            fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad id '" + fields[0] + "'");
        c.id = static_cast<CategoryId>(id);
        c.name = fields[1];
        c.species_id = fields[2];
        c.is_dog = parse_flag(fields[3], line_no);
        c.is_insect = parse_flag(fields[4], line_no);
        categories.push_back(std::move(c));
    }

    json doc;
    try {
        doc = json::parse(cores_json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, std::string("cores file: ") + e.what());
    }
    if (!doc.is_object())
        fail(ErrorCode::ParseError, "cores file must be a JSON object");

    std::vector<CoreDefinition> cores;
    std::array<double, 10> weights;
    weights.fill(1.0);
    for (const auto& [key, value] : doc.items()) {
        if (key.starts_with("_")) {
            if (key == "_pair_weights") {
                if (!value.is_object())
                    fail(ErrorCode::ParseError, "_pair_weights must be an object");
                for (const auto& [pair, w] : value.items()) {
                    auto plus = pair.find('+');
                    if (plus == std::string::npos || !w.is_number())
                        fail(ErrorCode::ParseError, "bad pair weight entry '" + pair + "'");
                    Core a = parse_core(pair.substr(0, plus));
                    Core b = parse_core(pair.substr(plus + 1));
                    weights[core_pair_index(a, b)] = w.get<double>();
                }
            }
            continue;
        }
        Core core;
        try {
            core = parse_core(key);
        } catch (const Error& e) {
            fail(ErrorCode::ValidationError, e.what());
        }
        if (!value.is_array())
            fail(ErrorCode::ParseError, "core '" + key + "' must be an array of ids");
        CoreDefinition def{core, {}};
        for (const auto& id : value) {
            if (!id.is_number_integer())
                fail(ErrorCode::ParseError, "core '" + key + "' contains a non-integer id");
            def.category_ids.push_back(id.get<CategoryId>());
        }
        cores.push_back(std::move(def));
    }
    return Taxonomy(std::move(categories), std::move(cores), weights, require_canonical_size);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::ParseError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

Taxonomy load_taxonomy(const std::filesystem::path& taxonomy_csv,
                       const std::filesystem::path& cores_json,
                       bool require_canonical_size) {
    return parse_taxonomy(read_file(taxonomy_csv), read_file(cores_json), require_canonical_size);
}

std::string serialize_taxonomy_csv(const Taxonomy& taxonomy) {
    std::string out = "id,name,species_id,is_dog,is_insect\n";
    for (const auto& c : taxonomy.categories()) {
        out += std::to_string(c.id) + "," + c.name + "," + c.species_id + "," +
               (c.is_dog ? "1" : "0") + "," + (c.is_insect ? "1" : "0") + "\n";
    }
    return out;
}

std::string serialize_cores_json(const Taxonomy& taxonomy) {
    json doc = json::object();
    for (const auto& def : taxonomy.cores())
        doc[std::string(to_string(def.core))] = def.category_ids;
    json weights = json::object();
    for (std::size_t i = 0; i < kAllCores.size(); ++i)
        for (std::size_t j = i + 1; j < kAllCores.size(); ++j)
            weights[pair_key(kAllCores[i], kAllCores[j])] =
                taxonomy.core_pair_weights()[core_pair_index(kAllCores[i], kAllCores[j])];
    doc["_pair_weights"] = weights;
    return doc.dump(2) + "\n";
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("GANIMALS_TAXONOMY_DIR"))
        return env;
    return GANIMALS_DEFAULT_DATA_DIR;
}

Taxonomy load_default_taxonomy() {
    auto dir = default_data_dir();
    return load_taxonomy(dir / "taxonomy.csv", dir / "cores.json");
}

} // namespace ganimals
