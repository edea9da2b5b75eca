#include "itgan/logs.hpp"

#include "itgan/common.hpp"
#include "itgan/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace itgan::logs {

namespace {

unsigned parse_digits(std::string_view text, std::size_t pos, std::size_t len, bool& ok) {
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) {
            ok = false;
            return 0;
        }
        v = v * 10 + static_cast<unsigned>(text[i] - '0');
    }
    return v;
}

[[noreturn]] void parse_error(const std::string& source, std::size_t line, const std::string& msg) {
    fail(ErrorCode::Parse, source + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

std::chrono::sys_days Date::to_sys_days() const {
    return std::chrono::sys_days{std::chrono::year_month_day{
        std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}}};
}

Date Date::from_sys_days(std::chrono::sys_days d) {
    std::chrono::year_month_day ymd{d};
    return Date{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day())};
}

bool Date::is_weekend() const {
    std::chrono::weekday wd{to_sys_days()};
    return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

Date Date::plus_days(int n) const { return from_sys_days(to_sys_days() + std::chrono::days{n}); }

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", month, day, year);
    return buf;
}

Date Date::parse(std::string_view text) {
    bool ok = text.size() == 10 && text[2] == '/' && text[5] == '/';
    Date d;
    d.month = parse_digits(text, 0, 2, ok);
    d.day = parse_digits(text, 3, 2, ok);
    d.year = static_cast<int>(parse_digits(text, 6, 4, ok));
    if (!ok) fail(ErrorCode::Parse, "malformed date '" + std::string(text) + "'");
    std::chrono::year_month_day ymd{std::chrono::year{d.year}, std::chrono::month{d.month}, std::chrono::day{d.day}};
    if (!ymd.ok()) fail(ErrorCode::Parse, "invalid calendar date '" + std::string(text) + "'");
    return d;
}

std::string DateTime::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, " %02u:%02u:%02u", hour, minute, second);
    return date.to_string() + buf;
}

DateTime DateTime::parse(std::string_view text) {
    if (text.size() != 19 || text[10] != ' ' || text[13] != ':' || text[16] != ':')
        fail(ErrorCode::Parse, "malformed timestamp '" + std::string(text) + "'");
    DateTime dt;
    dt.date = Date::parse(text.substr(0, 10));
    bool ok = true;
    dt.hour = parse_digits(text, 11, 2, ok);
    dt.minute = parse_digits(text, 14, 2, ok);
    dt.second = parse_digits(text, 17, 2, ok);
    if (!ok || dt.hour > 23 || dt.minute > 59 || dt.second > 59)
        fail(ErrorCode::Parse, "invalid time of day in '" + std::string(text) + "'");
    return dt;
}

std::string_view stream_file_name(Stream s) {
    switch (s) {
        case Stream::Logon: return "logon.csv";
        case Stream::Device: return "device.csv";
        case Stream::File: return "file.csv";
        case Stream::Email: return "email.csv";
        case Stream::Http: return "http.csv";
    }
    return "";
}

const std::vector<std::string>& stream_columns(Stream s) {
    static const std::vector<std::string> logon{"id", "date", "user", "pc", "activity"};
    static const std::vector<std::string> file{"id", "date", "user", "pc", "filename", "content"};
    static const std::vector<std::string> email{"id", "date", "user", "pc", "to", "cc",
                                                "bcc", "from", "size", "attachments", "content"};
    static const std::vector<std::string> http{"id", "date", "user", "pc", "url", "content"};
    switch (s) {
        case Stream::Logon:
        case Stream::Device: return logon;
        case Stream::File: return file;
        case Stream::Email: return email;
        case Stream::Http: return http;
    }
    return logon;
}

Stream stream_of(EventKind kind) {
    switch (kind) {
        case EventKind::Logon:
        case EventKind::Logoff: return Stream::Logon;
        case EventKind::DeviceConnect:
        case EventKind::DeviceDisconnect: return Stream::Device;
        case EventKind::FileCopy: return Stream::File;
        case EventKind::EmailSend: return Stream::Email;
        case EventKind::HttpVisit: return Stream::Http;
    }
    return Stream::Logon;
}

long EmailPayload::attachment_count() const {
    long v = 0;
    auto [ptr, ec] = std::from_chars(attachments.data(), attachments.data() + attachments.size(), v);
    if (ec != std::errc() || ptr != attachments.data() + attachments.size()) return 0;
    return v;
}

std::string extension_of(std::string_view filename) {
    auto slash = filename.find_last_of("/\\");
    if (slash != std::string_view::npos) filename.remove_prefix(slash + 1);
    auto dot = filename.find_last_of('.');
    if (dot == std::string_view::npos || dot + 1 == filename.size()) return {};
    std::string ext(filename.substr(dot + 1));
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

std::vector<LogEvent> parse_log_stream(std::istream& in, Stream stream, const std::string& source) {
    std::string line;
    if (!csv::read_line(in, line)) parse_error(source, 1, "missing header row");
    const auto header = csv::split_record(line);
    const auto& required = stream_columns(stream);
    std::vector<std::size_t> col(required.size());
    for (std::size_t r = 0; r < required.size(); ++r) {
        auto it = std::find(header.begin(), header.end(), required[r]);
        if (it == header.end()) parse_error(source, 1, "header is missing required column '" + required[r] + "'");
        col[r] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<LogEvent> events;
    std::size_t lineno = 1;
    while (csv::read_line(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = csv::split_record(line);
        auto get = [&](std::size_t r) -> const std::string& {
            if (col[r] >= fields.size()) parse_error(source, lineno, "missing column '" + required[r] + "'");
            return fields[col[r]];
        };
        LogEvent ev;
        ev.id = get(0);
        try {
            ev.timestamp = DateTime::parse(get(1));
        } catch (const Error& e) {
            parse_error(source, lineno, e.what());
        }
        ev.user = get(2);
        ev.pc = get(3);
        if (ev.user.empty()) parse_error(source, lineno, "empty user");
        switch (stream) {
            case Stream::Logon: {
                const auto& a = get(4);
                if (a == "Logon") ev.kind = EventKind::Logon;
                else if (a == "Logoff") ev.kind = EventKind::Logoff;
                else parse_error(source, lineno, "unknown logon activity '" + a + "'");
                break;
            }
            case Stream::Device: {
                const auto& a = get(4);
                if (a == "Connect") ev.kind = EventKind::DeviceConnect;
                else if (a == "Disconnect") ev.kind = EventKind::DeviceDisconnect;
                else parse_error(source, lineno, "unknown device activity '" + a + "'");
                break;
            }
            case Stream::File: {
                ev.kind = EventKind::FileCopy;
                FilePayload p{get(4), extension_of(get(4)), get(5)};
                ev.payload = std::move(p);
                break;
            }
            case Stream::Email: {
                ev.kind = EventKind::EmailSend;
                EmailPayload p{get(4), get(5), get(6), get(7), get(8), get(9), get(10)};
                ev.payload = std::move(p);
                break;
            }
            case Stream::Http: {
                ev.kind = EventKind::HttpVisit;
                ev.payload = HttpPayload{get(4), get(5)};
                break;
            }
        }
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<LogEvent> parse_log_file(const std::filesystem::path& path, Stream stream) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open log file " + path.string());
    return parse_log_stream(in, stream, path.string());
}

std::vector<std::string> event_fields(const LogEvent& ev) {
    std::vector<std::string> f{ev.id, ev.timestamp.to_string(), ev.user, ev.pc};
    switch (ev.kind) {
        case EventKind::Logon: f.emplace_back("Logon"); break;
        case EventKind::Logoff: f.emplace_back("Logoff"); break;
        case EventKind::DeviceConnect: f.emplace_back("Connect"); break;
        case EventKind::DeviceDisconnect: f.emplace_back("Disconnect"); break;
        case EventKind::FileCopy: {
            const auto& p = std::get<FilePayload>(ev.payload);
            f.push_back(p.filename);
            f.push_back(p.content);
            break;
        }
        case EventKind::EmailSend: {
            const auto& p = std::get<EmailPayload>(ev.payload);
            f.insert(f.end(), {p.to, p.cc, p.bcc, p.from, p.size, p.attachments, p.content});
            break;
        }
        case EventKind::HttpVisit: {
            const auto& p = std::get<HttpPayload>(ev.payload);
            f.push_back(p.url);
            f.push_back(p.content);
            break;
        }
    }
    return f;
}

void write_log_stream(std::ostream& out, Stream stream, const std::vector<LogEvent>& events) {
    out << csv::join_record(stream_columns(stream)) << '\n';
    for (const auto& ev : events) {
        if (stream_of(ev.kind) != stream) fail(ErrorCode::InvalidArgument, "event " + ev.id + " does not belong to " +
                                                                              std::string(stream_file_name(stream)));
        out << csv::join_record(event_fields(ev)) << '\n';
    }
}

void write_log_file(const std::filesystem::path& path, Stream stream, const std::vector<LogEvent>& events) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    write_log_stream(out, stream, events);
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

Buckets bucket_events(std::vector<std::vector<LogEvent>> per_stream) {
    Buckets buckets;
    for (auto& events : per_stream)
        for (auto& ev : events) {
            UserDayKey key{ev.user, ev.timestamp.date};
            buckets[key].push_back(std::move(ev));
        }
    for (auto& [key, list] : buckets)
        std::stable_sort(list.begin(), list.end(),
                         [](const LogEvent& a, const LogEvent& b) { return a.timestamp < b.timestamp; });
    return buckets;
}

Buckets scan_corpus(const std::filesystem::path& dir) {
    std::vector<std::vector<LogEvent>> per_stream;
    for (Stream s : kAllStreams) per_stream.push_back(parse_log_file(dir / stream_file_name(s), s));
    return bucket_events(std::move(per_stream));
}

}  // namespace itgan::logs
