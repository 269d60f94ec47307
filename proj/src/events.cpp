#include "ganimals/events.hpp"

#include <array>
#include <sstream>

#include "ganimals/error.hpp"

namespace ganimals {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 8> kKindNames = {
    "UserAssigned", "WorldCreated", "GanimalDiscovered", "GanimalBred",
    "Fed", "Annotated", "Ticked", "Named"};

} // namespace

std::string_view to_string(EventKind kind) noexcept {
    return kKindNames[static_cast<std::size_t>(kind)];
}

EventKind parse_event_kind(std::string_view text) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == text)
            return static_cast<EventKind>(i);
    fail(ErrorCode::ParseError, "unknown event kind '" + std::string(text) + "'");
}

json to_json(const Event& e) {
    return json{{"seq", e.sequence_no}, {"ts", e.timestamp}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

Event event_from_json(const json& j) {
    try {
        return {j.at("seq").get<std::uint64_t>(), j.at("ts").get<std::int64_t>(),
                parse_event_kind(j.at("kind").get<std::string>()), j.at("payload")};
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed event: ") + e.what());
    }
}

EventLog::EventLog(const std::filesystem::path& file) : path_(file) {
    if (file.has_parent_path())
        std::filesystem::create_directories(file.parent_path());
    std::uintmax_t keep = 0;
    if (std::filesystem::exists(file)) {
        std::ifstream in(file, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();
        std::size_t pos = 0;
        while (pos < text.size()) {
            const auto nl = text.find('\n', pos);
            const bool complete = nl != std::string::npos;
            const std::string line = text.substr(pos, complete ? nl - pos : std::string::npos);
            Event event;
            try {
                event = event_from_json(json::parse(line));
            } catch (const std::exception&) {
                if (!complete) {
                    repaired_tail_ = true;
                    break;
                }
                fail(ErrorCode::ParseError, "corrupt event log line " + std::to_string(events_.size() + 1));
            }
            if (event.sequence_no != events_.size() + 1)
                fail(ErrorCode::ParseError, "event log sequence gap at " + std::to_string(event.sequence_no));
            events_.push_back(std::move(event));
            if (!complete) {
                // Parsed but unterminated: keep it and terminate on the next append.
                keep = text.size();
                pos = text.size();
                out_.open(file, std::ios::binary | std::ios::app);
                out_ << '\n';
                out_.flush();
                break;
            }
            pos = nl + 1;
            keep = pos;
        }
        if (repaired_tail_)
            std::filesystem::resize_file(file, keep);
    }
    if (!out_.is_open())
        out_.open(file, std::ios::binary | std::ios::app);
    if (!out_)
        fail(ErrorCode::ConfigError, "cannot open event log " + file.string());
}

const Event& EventLog::append(std::int64_t timestamp, EventKind kind, json payload) {
    Event event{last_sequence() + 1, timestamp, kind, std::move(payload)};
    if (path_) {
        out_ << to_json(event).dump() << '\n';
        out_.flush();
        if (!out_)
            fail(ErrorCode::ConfigError, "failed to append to event log");
    }
    events_.push_back(std::move(event));
    return events_.back();
}

} // namespace ganimals
