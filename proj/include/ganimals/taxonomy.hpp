#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ganimals {

using CategoryId = int;

inline constexpr std::size_t kExpectedCategories = 396;
inline constexpr std::size_t kExpectedDogs = 118;

struct Category {
    CategoryId id = 0;
    std::string name;
    std::string species_id;
    bool is_dog = false;
    bool is_insect = false;

    friend bool operator==(const Category&, const Category&) = default;
};

enum class Core { Aquatic, Canine, Bird, Megafauna, Wildcard };

inline constexpr std::array<Core, 5> kAllCores = {
    Core::Aquatic, Core::Canine, Core::Bird, Core::Megafauna, Core::Wildcard};

std::string_view to_string(Core core) noexcept;
/// Throws UnknownCore.
Core parse_core(std::string_view name);

struct CoreDefinition {
    Core core = Core::Aquatic;
    std::vector<CategoryId> category_ids; // sorted, unique

    friend bool operator==(const CoreDefinition&, const CoreDefinition&) = default;
};

/// Index of an unordered core pair among the C(5,2) = 10 pairs.
std::size_t core_pair_index(Core a, Core b);

/// The animal-category universe. Immutable once constructed.
class Taxonomy {
public:
    /// Validates every invariant; throws ValidationError. When
    /// `require_canonical_size` is false the 396/118 counts are not enforced,
    /// which lets tests build small toy universes.
    Taxonomy(std::vector<Category> categories,
             std::vector<CoreDefinition> cores,
             std::array<double, 10> core_pair_weights,
             bool require_canonical_size = true);

    const std::vector<Category>& categories() const noexcept { return categories_; }
    const std::vector<CoreDefinition>& cores() const noexcept { return cores_; }
    const std::array<double, 10>& core_pair_weights() const noexcept { return pair_weights_; }

    /// Species ids in sorted order, each with its member category ids.
    const std::vector<std::pair<std::string, std::vector<CategoryId>>>& species() const noexcept {
        return species_;
    }

    std::size_t size() const noexcept { return categories_.size(); }
    bool contains(CategoryId id) const noexcept { return index_.contains(id); }
    /// Throws UnknownCategory.
    const Category& at(CategoryId id) const;
    const std::vector<CategoryId>& categories_in_core(Core core) const;

    friend bool operator==(const Taxonomy& a, const Taxonomy& b) {
        return a.categories_ == b.categories_ && a.cores_ == b.cores_ &&
               a.pair_weights_ == b.pair_weights_;
    }

private:
    std::vector<Category> categories_;
    std::vector<CoreDefinition> cores_;
    std::array<double, 10> pair_weights_{};
    std::unordered_map<CategoryId, std::size_t> index_;
    std::vector<std::pair<std::string, std::vector<CategoryId>>> species_;
};

Taxonomy load_taxonomy(const std::filesystem::path& taxonomy_csv,
                       const std::filesystem::path& cores_json,
                       bool require_canonical_size = true);

Taxonomy parse_taxonomy(std::string_view csv_text, std::string_view cores_json_text,
                        bool require_canonical_size = true);

/// Throws UnknownCore for names outside the five cores.
const std::vector<CategoryId>& categories_in_core(const Taxonomy& taxonomy,
                                                  std::string_view core_name);

std::string serialize_taxonomy_csv(const Taxonomy& taxonomy);
std::string serialize_cores_json(const Taxonomy& taxonomy);

/// Location of the bundled data files (compile-time default, overridable with
/// GANIMALS_TAXONOMY_DIR env var).
std::filesystem::path default_data_dir();
Taxonomy load_default_taxonomy();

} // namespace ganimals
