#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ganimals {

enum class EventKind { UserAssigned, WorldCreated, GanimalDiscovered, GanimalBred, Fed, Annotated, Ticked, Named };

std::string_view to_string(EventKind kind) noexcept;
EventKind parse_event_kind(std::string_view text);

struct Event {
    std::uint64_t sequence_no = 0;
    std::int64_t timestamp = 0;
    EventKind kind = EventKind::UserAssigned;
    nlohmann::json payload;

    friend bool operator==(const Event&, const Event&) = default;
};

nlohmann::json to_json(const Event& event);
Event event_from_json(const nlohmann::json& j);

/// Append-only JSON-lines event stream with a total order. Sequence numbers
/// start at 1 and are contiguous.
///
/// When file-backed, opening replays the existing lines. A final line that
/// was torn by a crash (no trailing newline, unparseable) is cut off; damage
/// anywhere else raises ParseError.
class EventLog {
public:
    EventLog() = default;
    explicit EventLog(const std::filesystem::path& file);

    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    /// Stamps the next sequence number, persists, and returns the stored event.
    const Event& append(std::int64_t timestamp, EventKind kind, nlohmann::json payload);

    const std::vector<Event>& events() const noexcept { return events_; }
    std::uint64_t last_sequence() const noexcept { return events_.empty() ? 0 : events_.back().sequence_no; }
    std::size_t size() const noexcept { return events_.size(); }
    const std::optional<std::filesystem::path>& file() const noexcept { return path_; }
    /// True when opening found and removed a torn final line.
    bool repaired_tail() const noexcept { return repaired_tail_; }

private:
    std::optional<std::filesystem::path> path_;
    std::ofstream out_;
    std::vector<Event> events_;
    bool repaired_tail_ = false;
};

} // namespace ganimals
