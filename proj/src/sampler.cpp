#include "ganimals/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ganimals/error.hpp"

namespace ganimals {

std::string_view to_string(Procedure p) noexcept {
    switch (p) {
    case Procedure::Recipe: return "recipe";
    case Procedure::Uniform: return "uniform";
    case Procedure::Stratified: return "stratified";
    case Procedure::Leaderboard: return "leaderboard";
    }
    return "?";
}

Procedure parse_procedure(std::string_view text) {
    for (auto p : {Procedure::Recipe, Procedure::Uniform, Procedure::Stratified, Procedure::Leaderboard})
        if (to_string(p) == text)
            return p;
    fail(ErrorCode::ParseError, "unknown procedure '" + std::string(text) + "'");
}

std::string_view to_string(Characteristic c) noexcept {
    switch (c) {
    case Characteristic::Cute: return "cute";
    case Characteristic::Creepy: return "creepy";
    case Characteristic::Realistic: return "realistic";
    case Characteristic::Memorable: return "memorable";
    }
    return "?";
}

Characteristic parse_characteristic(std::string_view text) {
    for (auto c : kAllCharacteristics)
        if (to_string(c) == text)
            return c;
    fail(ErrorCode::UnknownMetric, "unknown characteristic '" + std::string(text) + "'");
}

void PolicyMix::validate() const {
    const std::array<double, 4> p = {p_recipe, p_uniform, p_stratified, p_leaderboard};
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0))
            fail(ErrorCode::InvalidMix, "mixture probabilities must lie in [0, 1]");
    const double total = p[0] + p[1] + p[2] + p[3];
    if (std::abs(total - 1.0) > 1e-9)
        fail(ErrorCode::InvalidMix, "mixture probabilities sum to " + format_real(total));
}

Procedure choose_procedure(Rng& rng, const PolicyMix& mix) {
    mix.validate();
    static constexpr std::array<Procedure, 4> kOrder = {
        Procedure::Recipe, Procedure::Uniform, Procedure::Stratified, Procedure::Leaderboard};
    const std::array<double, 4> p = {mix.p_recipe, mix.p_uniform, mix.p_stratified, mix.p_leaderboard};
    const double u = rng.uniform01();
    double edge = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0)
            continue;
        last = i;
        edge += p[i];
        if (u < edge)
            return kOrder[i];
    }
    // Rounding slack (sum within 1e-9 of 1) goes to the last non-empty arm.
    return kOrder[last];
}

CategoryPair sample_uniform_pair(Rng& rng, const Taxonomy& taxonomy) {
    const auto& cats = taxonomy.categories();
    const std::uint64_t n = cats.size();
    if (n < 2)
        fail(ErrorCode::PreconditionViolation, "uniform pair needs at least two categories");
    const auto i = rng.below(n);
    auto j = rng.below(n - 1);
    if (j >= i)
        ++j;
    return {cats[i].id, cats[j].id};
}

CategoryPair sample_stratified_pair(Rng& rng, const Taxonomy& taxonomy) {
    const auto& species = taxonomy.species();
    const std::uint64_t s = species.size();
    if (s < 2)
        fail(ErrorCode::PreconditionViolation, "stratified pair needs at least two species");
    const auto i = rng.below(s);
    auto j = rng.below(s - 1);
    if (j >= i)
        ++j;
    const auto& a = species[i].second;
    const auto& b = species[j].second;
    const CategoryId first = a[rng.below(a.size())];
    const CategoryId second = b[rng.below(b.size())];
    return {first, second};
}

CategoryPair sample_recipe_pair(Rng& rng, const Taxonomy& taxonomy) {
    const auto& weights = taxonomy.core_pair_weights();
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double u = rng.uniform01() * total;
    std::size_t chosen = weights.size();
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0)
            continue;
        chosen = k;
        if (u < weights[k])
            break;
        u -= weights[k];
    }

    Core first = Core::Aquatic, second = Core::Aquatic;
    for (std::size_t i = 0; i < kAllCores.size(); ++i)
        for (std::size_t j = i + 1; j < kAllCores.size(); ++j)
            if (core_pair_index(kAllCores[i], kAllCores[j]) == chosen) {
                first = kAllCores[i];
                second = kAllCores[j];
            }

    const auto& a = taxonomy.categories_in_core(first);
    const auto& b = taxonomy.categories_in_core(second);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const CategoryId x = a[rng.below(a.size())];
        const CategoryId y = b[rng.below(b.size())];
        if (x != y)
            return {x, y};
    }
    fail(ErrorCode::PreconditionViolation,
         "cores '" + std::string(to_string(first)) + "' and '" + std::string(to_string(second)) +
             "' cannot produce two distinct categories");
}

const GanimalId& sample_leaderboard(Rng& rng, std::span<const GanimalId> leaderboard, std::size_t k) {
    if (leaderboard.empty())
        fail(ErrorCode::EmptyLeaderboard, "leaderboard is empty");
    if (k == 0)
        fail(ErrorCode::PreconditionViolation, "leaderboard K must be positive");
    const std::uint64_t top = std::min<std::uint64_t>(k, leaderboard.size());
    // Ticket t in [0, K(K+1)/2): rank r owns K - r + 1 consecutive tickets.
    std::uint64_t ticket = rng.below(top * (top + 1) / 2);
    for (std::uint64_t r = 0; r < top; ++r) {
        const std::uint64_t share = top - r;
        if (ticket < share)
            return leaderboard[r];
        ticket -= share;
    }
    return leaderboard[top - 1];
}

DiscoveryResult next_discovery(Rng& rng, const Taxonomy& taxonomy,
                               const Leaderboards& world_leaderboards,
                               const DiscoveryOptions& options) {
    DiscoveryResult result;
    result.procedure = choose_procedure(rng, options.mix);

    if (result.procedure == Procedure::Leaderboard) {
        const auto c = kAllCharacteristics[rng.below(kAllCharacteristics.size())];
        result.characteristic = c;
        const auto& board = world_leaderboards[static_cast<std::size_t>(c)];
        if (!board.empty()) {
            result.outcome = sample_leaderboard(rng, board, options.leaderboard_k);
            return result;
        }
        result.procedure = Procedure::Uniform;
    }

    CategoryPair pair;
    switch (result.procedure) {
    case Procedure::Recipe: pair = sample_recipe_pair(rng, taxonomy); break;
    case Procedure::Stratified: pair = sample_stratified_pair(rng, taxonomy); break;
    default: pair = sample_uniform_pair(rng, taxonomy); break;
    }
    const std::uint64_t seed = rng.next_u64();
    result.outcome = make_g1(taxonomy, pair.first, pair.second, options.truncation, seed);
    return result;
}

} // namespace ganimals
