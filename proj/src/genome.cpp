#include "ganimals/genome.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "ganimals/error.hpp"

namespace ganimals {

std::string_view to_string(Generation g) noexcept {
    switch (g) {
    case Generation::G0: return "G0";
    case Generation::G1: return "G1";
    case Generation::G2: return "G2";
    }
    return "?";
}

Generation parse_generation(std::string_view text) {
    if (text == "G0") return Generation::G0;
    if (text == "G1") return Generation::G1;
    if (text == "G2") return Generation::G2;
    fail(ErrorCode::ParseError, "unknown generation '" + std::string(text) + "'");
}

namespace {

void check_truncation(double truncation) {
    if (!(truncation > 0.0 && truncation <= 1.0))
        fail(ErrorCode::TruncationOutOfRange,
             "truncation must lie in (0, 1], got " + format_real(truncation));
}

bool arity_matches(Generation g, std::size_t n) {
    switch (g) {
    case Generation::G0: return n == 1;
    case Generation::G1: return n == 2;
    case Generation::G2: return n == 3 || n == 4;
    }
    return false;
}

} // namespace

Genome::Genome(std::vector<Component> components, double truncation,
               std::uint64_t noise_seed, Generation generation)
    : components_(std::move(components)),
      truncation_(truncation),
      noise_seed_(noise_seed),
      generation_(generation) {
    check_truncation(truncation_);
    std::sort(components_.begin(), components_.end(),
              [](const Component& a, const Component& b) { return a.category < b.category; });
    double total = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        const auto& c = components_[i];
        if (!(c.weight > 0.0) || !std::isfinite(c.weight))
            fail(ErrorCode::ValidationError, "component weights must be positive");
        if (i > 0 && components_[i - 1].category == c.category)
            fail(ErrorCode::ValidationError, "duplicate category " + std::to_string(c.category));
        total += c.weight;
    }
    if (std::abs(total - 1.0) > kWeightTolerance)
        fail(ErrorCode::ValidationError, "component weights sum to " + format_real(total));
    if (!arity_matches(generation_, components_.size()))
        fail(ErrorCode::ValidationError,
             std::string(to_string(generation_)) + " genome cannot have " +
                 std::to_string(components_.size()) + " components");
}

bool Genome::has_category(CategoryId id) const noexcept {
    return weight_of(id) > 0.0;
}

double Genome::weight_of(CategoryId id) const noexcept {
    auto it = std::lower_bound(components_.begin(), components_.end(), id,
                               [](const Component& c, CategoryId v) { return c.category < v; });
    return (it != components_.end() && it->category == id) ? it->weight : 0.0;
}

std::uint64_t default_noise_rule(std::uint64_t seed_a, std::uint64_t seed_b) noexcept {
    const std::uint64_t lo = std::min(seed_a, seed_b);
    const std::uint64_t hi = std::max(seed_a, seed_b);
    return mix64(mix64(mix64(lo) ^ hi) ^ kNoiseSalt);
}

double default_truncation_rule(double a, double b) noexcept {
    return (a + b) / 2.0;
}

Genome make_g0(const Taxonomy& taxonomy, CategoryId category, double truncation,
               std::uint64_t noise_seed) {
    taxonomy.at(category);
    check_truncation(truncation);
    return Genome({{category, 1.0}}, truncation, noise_seed, Generation::G0);
}

Genome make_g1(const Taxonomy& taxonomy, CategoryId a, CategoryId b, double truncation,
               std::uint64_t noise_seed) {
    taxonomy.at(a);
    taxonomy.at(b);
    if (a == b)
        fail(ErrorCode::SameCategory, "cannot blend category " + std::to_string(a) + " with itself");
    return Genome({{a, 0.5}, {b, 0.5}}, truncation, noise_seed, Generation::G1);
}

Genome breed_pair(const Genome& a, const Genome& b, NoiseRule noise_rule,
                  TruncationRule truncation_rule) {
    if (a.generation() != Generation::G0 || b.generation() != Generation::G0)
        fail(ErrorCode::WrongGeneration, "breed_pair takes two G0 parents");
    const CategoryId ca = a.components().front().category;
    const CategoryId cb = b.components().front().category;
    if (ca == cb)
        fail(ErrorCode::SameCategory, "parents share category " + std::to_string(ca));
    return Genome({{ca, 0.5}, {cb, 0.5}},
                  truncation_rule(a.truncation(), b.truncation()),
                  noise_rule(a.noise_seed(), b.noise_seed()), Generation::G1);
}

Genome breed_quad(const Genome& a, const Genome& b, NoiseRule noise_rule,
                  TruncationRule truncation_rule) {
    if (a.generation() != Generation::G1 || b.generation() != Generation::G1)
        fail(ErrorCode::WrongGeneration, "breed_quad takes two G1 parents");
    if (a == b)
        fail(ErrorCode::IdenticalParents, "cannot breed a ganimal with itself");

    std::map<CategoryId, double> merged;
    for (const auto* parent : {&a, &b})
        for (const auto& c : parent->components())
            merged[c.category] += c.weight / 2.0;
    if (merged.size() < 3)
        fail(ErrorCode::IdenticalParents, "parents blend the same category pair");

    std::vector<Component> components;
    components.reserve(merged.size());
    for (const auto& [id, w] : merged)
        components.push_back({id, w});
    return Genome(std::move(components), truncation_rule(a.truncation(), b.truncation()),
                  noise_rule(a.noise_seed(), b.noise_seed()), Generation::G2);
}

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string canonical_serialization(const Genome& genome) {
    std::string out = "v1|trunc=" + format_real(genome.truncation()) +
                      "|seed=" + std::to_string(genome.noise_seed()) + "|";
    bool first = true;
    for (const auto& c : genome.components()) {
        if (!first)
            out += ",";
        first = false;
        out += std::to_string(c.category) + ":" + format_real(c.weight);
    }
    return out;
}

GanimalId canonical_id(const Genome& genome) {
    return {sha256(canonical_serialization(genome))};
}

SpaceCounts count_space(std::uint64_t n) {
    if (n == 0)
        fail(ErrorCode::PreconditionViolation, "count_space needs at least one category");
    using u128 = unsigned __int128;
    const u128 g1 = static_cast<u128>(n) * (n - 1) / 2;
    if (g1 > UINT64_MAX)
        fail(ErrorCode::PreconditionViolation, "G1 count overflows 64 bits");
    const u128 g2 = g1 == 0 ? 0 : g1 * (g1 - 1) / 2;
    if (g2 > UINT64_MAX)
        fail(ErrorCode::PreconditionViolation, "G2 count overflows 64 bits");
    return {n, static_cast<std::uint64_t>(g1), static_cast<std::uint64_t>(g2)};
}

} // namespace ganimals
