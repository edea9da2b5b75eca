#pragma once

#include <chrono>
#include <compare>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace itgan::logs {

// Calendar date, ordered chronologically.
struct Date {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    auto operator<=>(const Date&) const = default;

    std::chrono::sys_days to_sys_days() const;
    static Date from_sys_days(std::chrono::sys_days d);
    bool is_weekend() const;
    Date plus_days(int n) const;
    // "MM/DD/YYYY"
    std::string to_string() const;
    static Date parse(std::string_view text);
};

struct DateTime {
    Date date;
    unsigned hour = 0;
    unsigned minute = 0;
    unsigned second = 0;

    auto operator<=>(const DateTime&) const = default;

    // "MM/DD/YYYY HH:MM:SS"
    std::string to_string() const;
    // Strict parse; throws ParseError-coded itgan::Error on any deviation
    // or on an impossible calendar date.
    static DateTime parse(std::string_view text);
};

enum class EventKind { Logon, Logoff, DeviceConnect, DeviceDisconnect, FileCopy, EmailSend, HttpVisit };

// One tag per source file.
enum class Stream { Logon, Device, File, Email, Http };

inline constexpr Stream kAllStreams[] = {Stream::Logon, Stream::Device, Stream::File, Stream::Email,
                                         Stream::Http};

std::string_view stream_file_name(Stream s);
const std::vector<std::string>& stream_columns(Stream s);
Stream stream_of(EventKind kind);

struct FilePayload {
    std::string filename;
    std::string extension;  // lowercase, without the dot; empty when absent
    std::string content;
};

struct EmailPayload {
    std::string to;
    std::string cc;
    std::string bcc;
    std::string from;
    std::string size;
    std::string attachments;
    std::string content;

    long attachment_count() const;
};

struct HttpPayload {
    std::string url;
    std::string content;
};

using Payload = std::variant<std::monostate, FilePayload, EmailPayload, HttpPayload>;

struct LogEvent {
    std::string id;
    DateTime timestamp;
    std::string user;
    std::string pc;
    EventKind kind = EventKind::Logon;
    Payload payload;
};

struct UserDayKey {
    std::string user;
    Date date;

    auto operator<=>(const UserDayKey&) const = default;
};

using Buckets = std::map<UserDayKey, std::vector<LogEvent>>;

std::string extension_of(std::string_view filename);

std::vector<LogEvent> parse_log_stream(std::istream& in, Stream stream, const std::string& source_name);
std::vector<LogEvent> parse_log_file(const std::filesystem::path& path, Stream stream);

// Renders an event back into the column order of its stream schema.
std::vector<std::string> event_fields(const LogEvent& ev);
void write_log_stream(std::ostream& out, Stream stream, const std::vector<LogEvent>& events);
void write_log_file(const std::filesystem::path& path, Stream stream, const std::vector<LogEvent>& events);

// Groups events by (user, calendar date).  Within a bucket events are sorted
// by timestamp; ties keep stream order (logon, device, file, email, http)
// then file order.
Buckets bucket_events(std::vector<std::vector<LogEvent>> per_stream);
Buckets scan_corpus(const std::filesystem::path& dir);

}  // namespace itgan::logs
