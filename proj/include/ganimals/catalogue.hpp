#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ganimals/ecology.hpp"
#include "ganimals/genome.hpp"
#include "ganimals/sampler.hpp"
#include "ganimals/taxonomy.hpp"

namespace ganimals {

enum class Feature {
    Head, Eyes, Mouth, Nose, Legs, Hair, Scales, Feathers, LivesUnderwater, BiggerThanHousecat
};
inline constexpr std::size_t kFeatureCount = 10;

enum class Metric { Compassion, Empathy, Cute, Memorable, Realistic, Creepy };
inline constexpr std::size_t kMetricCount = 6;

inline constexpr int kRatingMin = 1;
inline constexpr int kRatingMax = 7;

std::string_view to_string(Feature f) noexcept;
std::string_view to_string(Metric m) noexcept;
/// Throws UnknownFeature.
Feature parse_feature(std::string_view name);
/// Throws UnknownMetric.
Metric parse_metric(std::string_view name);
Metric metric_for(Characteristic c) noexcept;
std::optional<Characteristic> characteristic_for(Metric m) noexcept;

struct MorphologyAnnotation {
    std::array<std::optional<bool>, kFeatureCount> answers{};

    std::optional<bool>& operator[](Feature f) { return answers[static_cast<std::size_t>(f)]; }
    const std::optional<bool>& operator[](Feature f) const { return answers[static_cast<std::size_t>(f)]; }
    bool any_answered() const noexcept;

    friend bool operator==(const MorphologyAnnotation&, const MorphologyAnnotation&) = default;
};

struct SubjectiveRating {
    std::array<std::optional<int>, kMetricCount> values{};

    std::optional<int>& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
    const std::optional<int>& operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }
    bool any_answered() const noexcept;

    friend bool operator==(const SubjectiveRating&, const SubjectiveRating&) = default;
};

struct AnnotationRecord {
    std::string user_id;
    GanimalId ganimal_id;
    WorldId world_id = 0;
    std::int64_t timestamp = 0;
    std::optional<MorphologyAnnotation> morphology;
    std::optional<SubjectiveRating> ratings;

    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

nlohmann::json to_json(const AnnotationRecord& record);
/// Reads the body shape used by the API and the event log. Unknown feature or
/// metric keys are rejected; rating values must be integers.
AnnotationRecord annotation_from_json(const nlohmann::json& j);

struct AnnotationAck {
    GanimalId ganimal_id;
    std::vector<Metric> metrics;   // ratings touched by this record
    std::vector<Feature> features; // morphology answers touched by this record
};

struct Consensus {
    std::optional<double> fraction_true;
    std::size_t n = 0;
};

struct GroupComparison {
    std::string metric;
    std::string predicate;
    std::size_t n_with = 0;
    std::size_t n_without = 0;
    double mean_with = 0.0;
    double mean_without = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0;
};

nlohmann::json to_json(const GroupComparison& g);

/// Shipped group predicates. Either holds when any genome component carries
/// the taxonomy flag, regardless of its weight.
bool contains_dog(const Genome& genome, const Taxonomy& taxonomy);
bool contains_insect(const Genome& genome, const Taxonomy& taxonomy);

using GenomePredicate = bool (*)(const Genome&, const Taxonomy&);
/// "contains_dog" or "contains_insect"; throws UnknownPredicate.
GenomePredicate parse_predicate(std::string_view name);

/// Citizen-science annotations. Each (user, ganimal, metric or feature) keeps
/// only its latest answer: the highest timestamp wins and equal timestamps
/// resolve to the larger value, so the result does not depend on arrival
/// order.
class AnnotationStore {
public:
    void register_ganimal(const GanimalId& id);
    bool knows(const GanimalId& id) const noexcept { return known_.contains(id); }

    /// Content checks only (EmptyRecord, RatingOutOfRange); lists what the
    /// record would touch.
    static AnnotationAck validate(const AnnotationRecord& record);

    /// Throws UnknownGanimal, EmptyRecord or RatingOutOfRange.
    AnnotationAck record_annotation(const AnnotationRecord& record);

    /// Mean of distinct users' latest values; nullopt without ratings.
    std::optional<double> mean_rating(const GanimalId& id, Metric metric) const;
    std::optional<double> mean_rating_in_world(WorldId world, const GanimalId& id, Metric metric) const;
    /// Every ganimal rated on `metric` by users of `world`.
    std::map<GanimalId, double> world_means(WorldId world, Metric metric) const;
    /// Every ganimal rated on `metric` anywhere.
    std::map<GanimalId, double> global_means(Metric metric) const;

    Consensus morphology_consensus(const GanimalId& id, Feature feature) const;

    /// Welch comparison of per-ganimal mean ratings between ganimals that
    /// satisfy `in_group` and those that don't. Throws InsufficientData when
    /// either side has fewer than two rated ganimals.
    GroupComparison group_compare(Metric metric, std::string_view predicate_name,
                                  const std::function<bool(const GanimalId&)>& in_group) const;

    std::size_t record_count() const noexcept { return records_; }

    nlohmann::json to_json() const;
    static AnnotationStore from_json(const nlohmann::json& j);

    friend bool operator==(const AnnotationStore&, const AnnotationStore&) = default;

private:
    template <typename T>
    struct Stamped {
        T value{};
        std::int64_t timestamp = 0;

        friend bool operator==(const Stamped&, const Stamped&) = default;
    };

    struct UserEntry {
        WorldId world = 0;
        std::array<std::optional<Stamped<int>>, kMetricCount> ratings{};
        std::array<std::optional<Stamped<bool>>, kFeatureCount> morphology{};

        friend bool operator==(const UserEntry&, const UserEntry&) = default;
    };

    std::optional<double> mean_over(const GanimalId& id, Metric metric,
                                    std::optional<WorldId> world) const;

    std::set<GanimalId> known_;
    std::map<GanimalId, std::map<std::string, UserEntry>> entries_;
    std::size_t records_ = 0;
};

} // namespace ganimals
