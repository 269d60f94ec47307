#include "ganimals/catalogue.hpp"

#include <nlohmann/json.hpp>

#include "ganimals/error.hpp"
#include "ganimals/stats.hpp"

namespace ganimals {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "has_head", "has_eyes", "has_mouth", "has_nose", "has_legs",
    "has_hair", "has_scales", "has_feathers", "lives_underwater", "bigger_than_housecat"};

constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "compassion", "empathy", "cute", "memorable", "realistic", "creepy"};

} // namespace

std::string_view to_string(Feature f) noexcept {
    return kFeatureNames[static_cast<std::size_t>(f)];
}

std::string_view to_string(Metric m) noexcept {
    return kMetricNames[static_cast<std::size_t>(m)];
}

Feature parse_feature(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (kFeatureNames[i] == name)
            return static_cast<Feature>(i);
    fail(ErrorCode::UnknownFeature, "unknown morphology feature '" + std::string(name) + "'");
}

Metric parse_metric(std::string_view name) {
    for (std::size_t i = 0; i < kMetricCount; ++i)
        if (kMetricNames[i] == name)
            return static_cast<Metric>(i);
    fail(ErrorCode::UnknownMetric, "unknown rating metric '" + std::string(name) + "'");
}

Metric metric_for(Characteristic c) noexcept {
    switch (c) {
    case Characteristic::Cute: return Metric::Cute;
    case Characteristic::Creepy: return Metric::Creepy;
    case Characteristic::Realistic: return Metric::Realistic;
    case Characteristic::Memorable: return Metric::Memorable;
    }
    return Metric::Cute;
}

std::optional<Characteristic> characteristic_for(Metric m) noexcept {
    switch (m) {
    case Metric::Cute: return Characteristic::Cute;
    case Metric::Creepy: return Characteristic::Creepy;
    case Metric::Realistic: return Characteristic::Realistic;
    case Metric::Memorable: return Characteristic::Memorable;
    default: return std::nullopt;
    }
}

bool MorphologyAnnotation::any_answered() const noexcept {
    for (const auto& a : answers)
        if (a)
            return true;
    return false;
}

bool SubjectiveRating::any_answered() const noexcept {
    for (const auto& v : values)
        if (v)
            return true;
    return false;
}

json to_json(const AnnotationRecord& record) {
    json j;
    j["user_id"] = record.user_id;
    j["ganimal_id"] = record.ganimal_id.hex();
    j["world_id"] = record.world_id;
    j["timestamp"] = record.timestamp;
    if (record.morphology) {
        json m = json::object();
        for (std::size_t i = 0; i < kFeatureCount; ++i)
            if (record.morphology->answers[i])
                m[std::string(kFeatureNames[i])] = *record.morphology->answers[i];
        j["morphology"] = m;
    }
    if (record.ratings) {
        json r = json::object();
        for (std::size_t i = 0; i < kMetricCount; ++i)
            if (record.ratings->values[i])
                r[std::string(kMetricNames[i])] = *record.ratings->values[i];
        j["ratings"] = r;
    }
    return j;
}

AnnotationRecord annotation_from_json(const json& j) {
    if (!j.is_object())
        fail(ErrorCode::BadRequest, "annotation must be a JSON object");
    AnnotationRecord r;
    try {
        if (j.contains("user_id"))
            r.user_id = j.at("user_id").get<std::string>();
        if (j.contains("ganimal_id"))
            r.ganimal_id = GanimalId::from_hex(j.at("ganimal_id").get<std::string>());
        if (j.contains("world_id"))
            r.world_id = j.at("world_id").get<WorldId>();
        if (j.contains("timestamp"))
            r.timestamp = j.at("timestamp").get<std::int64_t>();
    } catch (const json::exception& e) {
        fail(ErrorCode::BadRequest, std::string("malformed annotation: ") + e.what());
    } catch (const Error& e) {
        fail(ErrorCode::BadRequest, e.what());
    }
    if (j.contains("morphology") && !j.at("morphology").is_null()) {
        const auto& m = j.at("morphology");
        if (!m.is_object())
            fail(ErrorCode::BadRequest, "morphology must be an object");
        MorphologyAnnotation morph;
        for (const auto& [key, value] : m.items()) {
            const Feature f = parse_feature(key);
            if (value.is_null())
                continue;
            if (!value.is_boolean())
                fail(ErrorCode::BadRequest, "morphology answer '" + key + "' must be a boolean");
            morph[f] = value.get<bool>();
        }
        r.morphology = morph;
    }
    if (j.contains("ratings") && !j.at("ratings").is_null()) {
        const auto& m = j.at("ratings");
        if (!m.is_object())
            fail(ErrorCode::BadRequest, "ratings must be an object");
        SubjectiveRating ratings;
        for (const auto& [key, value] : m.items()) {
            const Metric metric = parse_metric(key);
            if (value.is_null())
                continue;
            if (!value.is_number_integer())
                fail(ErrorCode::BadRequest, "rating '" + key + "' must be an integer");
            const auto v = value.get<std::int64_t>();
            if (v < kRatingMin || v > kRatingMax)
                fail(ErrorCode::RatingOutOfRange,
                     "rating '" + key + "' must lie in 1..7, got " + std::to_string(v));
            ratings[metric] = static_cast<int>(v);
        }
        r.ratings = ratings;
    }
    return r;
}

json to_json(const GroupComparison& g) {
    return json{{"metric", g.metric},
                {"predicate", g.predicate},
                {"n_with", g.n_with},
                {"n_without", g.n_without},
                {"mean_with", g.mean_with},
                {"mean_without", g.mean_without},
                {"t_statistic", g.t_statistic},
                {"p_value", g.p_value}};
}

bool contains_dog(const Genome& genome, const Taxonomy& taxonomy) {
    for (const auto& c : genome.components())
        if (taxonomy.at(c.category).is_dog)
            return true;
    return false;
}

bool contains_insect(const Genome& genome, const Taxonomy& taxonomy) {
    for (const auto& c : genome.components())
        if (taxonomy.at(c.category).is_insect)
            return true;
    return false;
}

GenomePredicate parse_predicate(std::string_view name) {
    if (name == "contains_dog")
        return &contains_dog;
    if (name == "contains_insect")
        return &contains_insect;
    fail(ErrorCode::UnknownPredicate, "unknown predicate '" + std::string(name) + "'");
}

void AnnotationStore::register_ganimal(const GanimalId& id) {
    known_.insert(id);
}

namespace {

template <typename Slot, typename T>
bool overwrite(Slot& slot, T value, std::int64_t timestamp) {
    if (slot && (slot->timestamp > timestamp ||
                 (slot->timestamp == timestamp && slot->value >= value)))
        return false;
    slot.emplace();
    slot->value = value;
    slot->timestamp = timestamp;
    return true;
}

} // namespace

AnnotationAck AnnotationStore::validate(const AnnotationRecord& record) {
    const bool has_morph = record.morphology && record.morphology->any_answered();
    const bool has_ratings = record.ratings && record.ratings->any_answered();
    if (!has_morph && !has_ratings)
        fail(ErrorCode::EmptyRecord, "annotation answers nothing");
    AnnotationAck ack{record.ganimal_id, {}, {}};
    if (has_ratings)
        for (std::size_t i = 0; i < kMetricCount; ++i)
            if (const auto& v = record.ratings->values[i]) {
                if (*v < kRatingMin || *v > kRatingMax)
                    fail(ErrorCode::RatingOutOfRange, "rating must lie in 1..7, got " + std::to_string(*v));
                ack.metrics.push_back(static_cast<Metric>(i));
            }
    if (has_morph)
        for (std::size_t i = 0; i < kFeatureCount; ++i)
            if (record.morphology->answers[i])
                ack.features.push_back(static_cast<Feature>(i));
    return ack;
}

AnnotationAck AnnotationStore::record_annotation(const AnnotationRecord& record) {
    if (!knows(record.ganimal_id))
        fail(ErrorCode::UnknownGanimal, "unknown ganimal " + record.ganimal_id.hex());
    auto ack = validate(record);
    auto& entry = entries_[record.ganimal_id][record.user_id];
    entry.world = record.world_id;
    for (Metric m : ack.metrics) {
        const auto i = static_cast<std::size_t>(m);
        overwrite(entry.ratings[i], *record.ratings->values[i], record.timestamp);
    }
    for (Feature f : ack.features) {
        const auto i = static_cast<std::size_t>(f);
        overwrite(entry.morphology[i], *record.morphology->answers[i], record.timestamp);
    }
    ++records_;
    return ack;
}

std::optional<double> AnnotationStore::mean_over(const GanimalId& id, Metric metric,
                                                 std::optional<WorldId> world) const {
    auto it = entries_.find(id);
    if (it == entries_.end())
        return std::nullopt;
    const auto slot = static_cast<std::size_t>(metric);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [user, entry] : it->second) {
        if (world && entry.world != *world)
            continue;
        if (const auto& v = entry.ratings[slot]) {
            sum += v->value;
            ++n;
        }
    }
    if (n == 0)
        return std::nullopt;
    return sum / static_cast<double>(n);
}

std::optional<double> AnnotationStore::mean_rating(const GanimalId& id, Metric metric) const {
    return mean_over(id, metric, std::nullopt);
}

std::optional<double> AnnotationStore::mean_rating_in_world(WorldId world, const GanimalId& id,
                                                            Metric metric) const {
    return mean_over(id, metric, world);
}

std::map<GanimalId, double> AnnotationStore::world_means(WorldId world, Metric metric) const {
    std::map<GanimalId, double> out;
    for (const auto& [id, users] : entries_)
        if (auto m = mean_over(id, metric, world))
            out.emplace(id, *m);
    return out;
}

std::map<GanimalId, double> AnnotationStore::global_means(Metric metric) const {
    std::map<GanimalId, double> out;
    for (const auto& [id, users] : entries_)
        if (auto m = mean_over(id, metric, std::nullopt))
            out.emplace(id, *m);
    return out;
}

Consensus AnnotationStore::morphology_consensus(const GanimalId& id, Feature feature) const {
    Consensus c;
    auto it = entries_.find(id);
    if (it == entries_.end())
        return c;
    const auto slot = static_cast<std::size_t>(feature);
    std::size_t yes = 0;
    for (const auto& [user, entry] : it->second) {
        if (const auto& v = entry.morphology[slot]) {
            ++c.n;
            yes += v->value ? 1 : 0;
        }
    }
    if (c.n > 0)
        c.fraction_true = static_cast<double>(yes) / static_cast<double>(c.n);
    return c;
}

GroupComparison AnnotationStore::group_compare(
    Metric metric, std::string_view predicate_name,
    const std::function<bool(const GanimalId&)>& in_group) const {
    std::vector<double> with, without;
    for (const auto& [id, m] : global_means(metric))
        (in_group(id) ? with : without).push_back(m);
    if (with.size() < 2 || without.size() < 2)
        fail(ErrorCode::InsufficientData,
             "need at least two rated ganimals on each side (have " + std::to_string(with.size()) +
                 " with, " + std::to_string(without.size()) + " without)");
    const auto w = welch_t_test(with, without);
    GroupComparison g;
    g.metric = std::string(to_string(metric));
    g.predicate = std::string(predicate_name);
    g.n_with = with.size();
    g.n_without = without.size();
    g.mean_with = w.mean_a;
    g.mean_without = w.mean_b;
    g.t_statistic = w.t_statistic;
    g.p_value = w.p_value;
    return g;
}

json AnnotationStore::to_json() const {
    json j;
    json known = json::array();
    for (const auto& id : known_)
        known.push_back(id.hex());
    j["known"] = known;
    json entries = json::object();
    for (const auto& [id, users] : entries_) {
        json per_user = json::object();
        for (const auto& [user, e] : users) {
            json ratings = json::object();
            for (std::size_t i = 0; i < kMetricCount; ++i)
                if (e.ratings[i])
                    ratings[std::string(kMetricNames[i])] = {e.ratings[i]->value, e.ratings[i]->timestamp};
            json morph = json::object();
            for (std::size_t i = 0; i < kFeatureCount; ++i)
                if (e.morphology[i])
                    morph[std::string(kFeatureNames[i])] = {e.morphology[i]->value, e.morphology[i]->timestamp};
            per_user[user] = {{"world", e.world}, {"ratings", ratings}, {"morphology", morph}};
        }
        entries[id.hex()] = per_user;
    }
    j["entries"] = entries;
    j["records"] = records_;
    return j;
}

AnnotationStore AnnotationStore::from_json(const json& j) {
    AnnotationStore s;
    for (const auto& id : j.at("known"))
        s.known_.insert(GanimalId::from_hex(id.get<std::string>()));
    for (const auto& [id, users] : j.at("entries").items()) {
        auto& per_user = s.entries_[GanimalId::from_hex(id)];
        for (const auto& [user, e] : users.items()) {
            UserEntry entry;
            entry.world = e.at("world").get<WorldId>();
            for (const auto& [metric, v] : e.at("ratings").items()) {
                auto& slot = entry.ratings[static_cast<std::size_t>(parse_metric(metric))];
                slot.emplace();
                slot->value = v.at(0).get<int>();
                slot->timestamp = v.at(1).get<std::int64_t>();
            }
            for (const auto& [feature, v] : e.at("morphology").items()) {
                auto& slot = entry.morphology[static_cast<std::size_t>(parse_feature(feature))];
                slot.emplace();
                slot->value = v.at(0).get<bool>();
                slot->timestamp = v.at(1).get<std::int64_t>();
            }
            per_user.emplace(user, entry);
        }
    }
    s.records_ = j.at("records").get<std::size_t>();
    return s;
}

} // namespace ganimals
