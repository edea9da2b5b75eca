#include "itgan/corpusgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>

namespace itgan::corpusgen {

namespace {

using logs::DateTime;
using logs::EventKind;
using logs::LogEvent;

constexpr std::array<const char*, 24> kBenignWords = {
    "news",    "weather", "sports",  "football", "recipe",  "travel",  "music",   "movie",
    "science", "health",  "finance", "market",   "stock",   "garden",  "history", "photo",
    "review",  "forum",   "video",   "software", "update",  "library", "meeting", "project"};

constexpr std::array<const char*, 10> kBenignSites = {
    "http://www.bbc.co.uk/news",   "http://www.cnn.com/world",     "http://www.espn.com/scores",
    "http://www.amazon.com/books", "http://www.wikipedia.org/wiki", "http://www.youtube.com/watch",
    "http://www.weather.com/today", "http://www.reddit.com/r/tech", "http://www.github.com/explore",
    "http://www.nytimes.com/section"};

constexpr std::array<const char*, 4> kJobSites = {"http://www.monster.com/jobs", "http://www.indeed.com/search",
                                                   "http://www.careerbuilder.com/apply",
                                                   "http://www.linkedin.com/jobs"};

constexpr std::array<const char*, 3> kHackSites = {"http://www.hackforums.net/thread",
                                                    "http://www.exploit-db.com/search",
                                                    "http://www.keyloggers.org/download"};

constexpr std::array<const char*, 7> kDocExtensions = {"doc", "docx", "pdf", "txt", "xlsx", "pptx", "zip"};
constexpr std::array<const char*, 3> kExeExtensions = {"exe", "bat", "msi"};

constexpr const char* kDomain = "dtaa.com";
constexpr std::array<const char*, 4> kExternalDomains = {"gmail.com", "yahoo.com", "hotmail.com", "comcast.net"};

template <class Array>
const char* pick(const Array& a, Rng& rng) {
    return a[rng.index(a.size())];
}

std::string pc_id(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "PC-%04zu", index);
    return buf;
}

DateTime at(const logs::Date& d, unsigned hour, unsigned minute, unsigned second) {
    return DateTime{d, hour, minute, second};
}

DateTime work_time(const logs::Date& d, Rng& rng) {
    return at(d, 8 + static_cast<unsigned>(rng.index(10)), static_cast<unsigned>(rng.index(60)),
              static_cast<unsigned>(rng.index(60)));
}

DateTime late_time(const logs::Date& d, Rng& rng) {
    // 18:00-23:59 or 00:00-06:59
    unsigned hour = rng.bernoulli(0.6) ? 18 + static_cast<unsigned>(rng.index(6)) : static_cast<unsigned>(rng.index(7));
    return at(d, hour, static_cast<unsigned>(rng.index(60)), static_cast<unsigned>(rng.index(60)));
}

DateTime some_time(const logs::Date& d, Rng& rng, double late_prob) {
    return rng.bernoulli(late_prob) ? late_time(d, rng) : work_time(d, rng);
}

LogEvent make_event(const DayContext& ctx, const std::string& pc, EventKind kind, DateTime ts) {
    LogEvent ev;
    ev.timestamp = ts;
    ev.user = ctx.key.user;
    ev.pc = pc;
    ev.kind = kind;
    return ev;
}

std::string words(Rng& rng, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out.push_back(' ');
        out += pick(kBenignWords, rng);
    }
    return out;
}

// Mixes `n` benign words with `k` terms drawn from a keyword corpus.
std::string words_with_terms(Rng& rng, std::size_t n, const features::TokenSet& terms, std::size_t k) {
    std::vector<std::string> pool(terms.begin(), terms.end());
    std::string out = words(rng, n);
    for (std::size_t i = 0; i < k; ++i) {
        out.push_back(' ');
        out += pool[rng.index(pool.size())];
    }
    return out;
}

void add_session(std::vector<LogEvent>& events, const DayContext& ctx, const std::string& pc, DateTime start) {
    events.push_back(make_event(ctx, pc, EventKind::Logon, start));
    DateTime end = start;
    end.hour = std::min(23u, start.hour + 1);
    if (end.hour == start.hour) end.minute = std::min(59u, start.minute + 1);
    events.push_back(make_event(ctx, pc, EventKind::Logoff, end));
}

void add_device(std::vector<LogEvent>& events, const DayContext& ctx, const std::string& pc, DateTime ts) {
    events.push_back(make_event(ctx, pc, EventKind::DeviceConnect, ts));
    DateTime off = ts;
    off.minute = std::min(59u, ts.minute + 5);
    events.push_back(make_event(ctx, pc, EventKind::DeviceDisconnect, off));
}

void add_file(std::vector<LogEvent>& events, const DayContext& ctx, DateTime ts, const std::string& ext, Rng& rng) {
    auto ev = make_event(ctx, ctx.home_pc, EventKind::FileCopy, ts);
    char name[64];
    std::snprintf(name, sizeof name, "R:\\%s\\file%04zu.%s", ctx.key.user.c_str(), rng.index(10000), ext.c_str());
    ev.payload = logs::FilePayload{name, logs::extension_of(name), words(rng, 3)};
    events.push_back(std::move(ev));
}

void add_email(std::vector<LogEvent>& events, const DayContext& ctx, DateTime ts, bool external, long attachments,
               Rng& rng) {
    auto ev = make_event(ctx, ctx.home_pc, EventKind::EmailSend, ts);
    char to[64];
    if (external) std::snprintf(to, sizeof to, "contact%zu@%s", rng.index(500), pick(kExternalDomains, rng));
    else std::snprintf(to, sizeof to, "%s@%s", user_id(rng.index(1000)).c_str(), kDomain);
    logs::EmailPayload p;
    p.to = to;
    p.from = ctx.email;
    p.size = std::to_string(5000 + rng.index(40000) + static_cast<std::size_t>(attachments) * 100000);
    p.attachments = std::to_string(attachments);
    p.content = words(rng, 6);
    ev.payload = std::move(p);
    events.push_back(std::move(ev));
}

void add_http(std::vector<LogEvent>& events, const DayContext& ctx, DateTime ts, std::string url, std::string content) {
    auto ev = make_event(ctx, ctx.home_pc, EventKind::HttpVisit, ts);
    ev.payload = logs::HttpPayload{std::move(url), std::move(content)};
    events.push_back(std::move(ev));
}

struct UserProfile {
    std::string id;
    std::string pc;
    std::string email;
    double logon, device, file, email_rate, http;
    double late_prob;
    double job_interest;
    double leak_reading = 0.0;  // daily chance of a benign wikileaks visit
    double admin = 0.0;         // daily chance of admin work across PCs
    double research = 0.0;      // per-visit chance of a security site
    // benign users whose routine occasionally reproduces a whole scenario
    // signature (liaison with a leak site, release engineer, pen tester)
    std::optional<Scenario> decoy;
    double decoy_rate = 0.0;
};

std::vector<LogEvent> baseline_day(const UserProfile& u, const DayContext& ctx, const BaselineRates& rates, Rng& rng) {
    std::vector<LogEvent> events;
    const logs::Date& d = ctx.key.date;
    const bool weekend = d.is_weekend();
    if (!rng.bernoulli(weekend ? 0.06 : 0.97)) return events;
    const double scale = weekend ? 0.4 : 1.0;

    const int logons = std::max(1, rng.poisson(u.logon * rates.logon * scale));
    for (int i = 0; i < logons; ++i) {
        const std::string& pc = rng.bernoulli(0.02) ? pc_id(rng.index(ctx.n_pcs)) : u.pc;
        add_session(events, ctx, pc, some_time(d, rng, u.late_prob));
    }
    const int devices = rng.poisson(u.device * rates.device * scale);
    for (int i = 0; i < devices; ++i) add_device(events, ctx, u.pc, some_time(d, rng, u.late_prob));
    const int files = devices > 0 ? rng.poisson(u.file * rates.file * scale) : 0;
    for (int i = 0; i < files; ++i) {
        const std::string ext = rng.bernoulli(0.03) ? pick(kExeExtensions, rng) : pick(kDocExtensions, rng);
        add_file(events, ctx, some_time(d, rng, u.late_prob), ext, rng);
    }
    const int emails = rng.poisson(u.email_rate * rates.email * scale);
    for (int i = 0; i < emails; ++i) {
        const long att = rng.bernoulli(0.25) ? 1 + static_cast<long>(rng.index(2)) : 0;
        add_email(events, ctx, some_time(d, rng, u.late_prob), rng.bernoulli(0.08), att, rng);
    }
    const int visits = rng.poisson(u.http * rates.http * scale);
    for (int i = 0; i < visits; ++i) {
        const DateTime ts = some_time(d, rng, u.late_prob);
        if (rng.bernoulli(u.job_interest))
            add_http(events, ctx, ts, pick(kJobSites, rng), words_with_terms(rng, 4, features::default_d1().terms, 1));
        else if (rng.bernoulli(0.002 + u.research))
            add_http(events, ctx, ts, pick(kHackSites, rng), words_with_terms(rng, 4, features::default_d2().terms, 1));
        else
            add_http(events, ctx, ts, pick(kBenignSites, rng), words(rng, 3 + rng.index(4)));
    }
    if (rng.bernoulli(u.leak_reading))
        add_http(events, ctx, some_time(d, rng, u.late_prob), "http://wikileaks.org/news", words(rng, 4));
    if (rng.bernoulli(u.admin)) {
        const std::size_t hosts = 1 + rng.index(2);
        for (std::size_t i = 0; i < hosts; ++i) add_session(events, ctx, pc_id(rng.index(ctx.n_pcs)), some_time(d, rng, 0.2));
        add_device(events, ctx, u.pc, work_time(d, rng));
        const std::size_t copies = 1 + rng.index(3);
        for (std::size_t i = 0; i < copies; ++i) add_file(events, ctx, some_time(d, rng, 0.2), pick(kExeExtensions, rng), rng);
    }
    return events;
}

std::size_t scenario_share(Scenario s, std::size_t total) {
    // S1 40%, S2 45%, S3 the rest (the scarcest class)
    const auto s1 = static_cast<std::size_t>(std::llround(0.40 * static_cast<double>(total)));
    const auto s2 = static_cast<std::size_t>(std::llround(0.45 * static_cast<double>(total)));
    switch (s) {
        case Scenario::S1: return s1;
        case Scenario::S2: return s2;
        case Scenario::S3: return total - std::min(total, s1 + s2);
    }
    return 0;
}

}  // namespace

std::string user_id(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "U%04zu", index);
    return buf;
}

void CorpusConfig::validate() const {
    require(n_users >= 1 && n_days >= 1, "corpus needs at least one user and one day");
    require(overlap >= 0.0, "overlap must be non-negative");
    require(rates.logon >= 0 && rates.device >= 0 && rates.file >= 0 && rates.email >= 0 && rates.http >= 0,
            "baseline rates must be non-negative");
    std::map<std::size_t, Scenario> owner;
    for (const auto& w : insiders) {
        require(w.user < n_users, "insider user index out of range");
        require(w.length >= 1 && w.start_day < n_days && w.start_day + w.length <= n_days,
                "insider window must lie within [0, n_days)");
        auto [it, inserted] = owner.emplace(w.user, w.scenario);
        require(inserted || it->second == w.scenario, "scenario user sets must be disjoint");
    }
}

std::vector<InsiderWindow> default_insider_plan(std::size_t n_users, std::size_t n_days, double fraction,
                                                std::uint64_t seed) {
    require(fraction >= 0.0 && fraction < 0.5, "malicious fraction must lie in [0, 0.5)");
    const auto total = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(n_users) * static_cast<double>(n_days)));
    Rng rng(derive_seed(seed, 0x1d));
    std::vector<std::size_t> users(n_users);
    std::iota(users.begin(), users.end(), 0);
    std::shuffle(users.begin(), users.end(), rng.engine());
    std::size_t next_user = 0;

    struct LengthRange {
        std::size_t lo, hi;
    };
    const std::map<Scenario, LengthRange> ranges{
        {Scenario::S1, {5, 12}}, {Scenario::S2, {6, 14}}, {Scenario::S3, {3, 6}}};

    std::vector<InsiderWindow> plan;
    for (Scenario s : {Scenario::S1, Scenario::S2, Scenario::S3}) {
        std::size_t remaining = scenario_share(s, total);
        const auto range = ranges.at(s);
        while (remaining > 0) {
            if (next_user >= n_users) fail(ErrorCode::InvalidArgument, "not enough users for the insider plan");
            std::size_t len = range.lo + rng.index(range.hi - range.lo + 1);
            len = std::min({len, remaining, n_days});
            const std::size_t start = rng.index(n_days - len + 1);
            plan.push_back(InsiderWindow{s, users[next_user++], start, len});
            remaining -= len;
        }
    }
    return plan;
}

CorpusConfig default_config(std::size_t n_users, std::size_t n_days, std::uint64_t seed, double fraction) {
    CorpusConfig c;
    c.n_users = n_users;
    c.n_days = n_days;
    c.seed = seed;
    c.insiders = default_insider_plan(n_users, n_days, fraction, seed);
    return c;
}

std::vector<LogEvent> plant_scenario(std::vector<LogEvent> events, Scenario scenario, Rng& rng,
                                     const DayContext& ctx) {
    const logs::Date& d = ctx.key.date;
    switch (scenario) {
        case Scenario::S1: {
            // exfiltration: after-hours logon, removable media, wikileaks, job hunting
            add_session(events, ctx, ctx.home_pc, late_time(d, rng));
            if (rng.bernoulli(0.5)) add_device(events, ctx, ctx.home_pc, some_time(d, rng, 0.5));
            add_http(events, ctx, some_time(d, rng, 0.5), "http://wikileaks.org/submit", words(rng, 4));
            if (rng.bernoulli(0.5))
                add_http(events, ctx, some_time(d, rng, 0.3), pick(kJobSites, rng),
                         words_with_terms(rng, 3, features::default_d1().terms, 1 + rng.index(2)));
            break;
        }
        case Scenario::S2: {
            // sabotage: executables and documents onto removable media, mail out
            add_device(events, ctx, ctx.home_pc, some_time(d, rng, 0.3));
            const std::size_t copies = 2 + rng.index(2);
            for (std::size_t i = 0; i < copies; ++i) {
                const std::string ext = i == 0 || rng.bernoulli(0.5) ? pick(kExeExtensions, rng) : pick(kDocExtensions, rng);
                add_file(events, ctx, some_time(d, rng, 0.3), ext, rng);
            }
            if (rng.bernoulli(0.5))
                add_email(events, ctx, some_time(d, rng, 0.3), true, 1 + static_cast<long>(rng.index(2)), rng);
            break;
        }
        case Scenario::S3: {
            // IP theft: keylogger research, logons on a colleague's PC, late device use
            std::string other = ctx.home_pc;
            while (ctx.n_pcs > 1 && other == ctx.home_pc) other = pc_id(rng.index(ctx.n_pcs));
            if (other == ctx.home_pc) other = ctx.home_pc + "-B";
            add_session(events, ctx, other, some_time(d, rng, 0.5));
            add_session(events, ctx, ctx.home_pc, work_time(d, rng));
            if (rng.bernoulli(0.5)) add_device(events, ctx, other, some_time(d, rng, 0.5));
            add_http(events, ctx, some_time(d, rng, 0.5), pick(kHackSites, rng),
                     words_with_terms(rng, 3, features::default_d2().terms, 1 + rng.index(2)));
            break;
        }
    }
    return events;
}

std::size_t GenerationResult::total_events() const {
    std::size_t n = 0;
    for (const auto& [s, c] : counts) n += c;
    return n;
}

double GenerationResult::malicious_fraction() const {
    if (truth.empty()) return 0.0;
    std::size_t bad = 0;
    for (const auto& [key, label] : truth) bad += label != 0;
    return static_cast<double>(bad) / static_cast<double>(truth.size());
}

GenerationResult generate_corpus(const CorpusConfig& config, const std::filesystem::path& out) {
    config.validate();
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) fail(ErrorCode::Io, "cannot create corpus directory " + out.string() + ": " + ec.message());

    Rng rng(config.seed);
    const std::size_t n_pcs = std::max<std::size_t>(config.n_users, 2);

    std::vector<UserProfile> users;
    for (std::size_t u = 0; u < config.n_users; ++u) {
        auto jitter = [&] { return std::exp(0.3 * rng.normal()); };
        UserProfile p;
        p.id = user_id(u);
        p.pc = pc_id(u);
        p.email = p.id + "@" + kDomain;
        p.logon = jitter();
        p.device = rng.bernoulli(0.3) ? 2.0 * jitter() : 0.3 * jitter();
        p.file = jitter();
        p.email_rate = jitter();
        p.http = jitter();
        p.late_prob = rng.bernoulli(0.1) ? 0.08 : 0.015;
        p.job_interest = rng.bernoulli(0.15) ? 0.03 : 0.002;
        const double o = config.overlap;
        p.leak_reading = rng.bernoulli(0.10) ? std::min(1.0, 0.30 * o) : 0.0;
        p.admin = rng.bernoulli(0.08) ? std::min(1.0, 0.60 * o) : 0.0;
        p.research = rng.bernoulli(0.08) ? std::min(1.0, 0.10 * o) : 0.0;
        const double r = rng.uniform();
        if (r < 0.15) {
            p.decoy = r < 0.05 ? Scenario::S1 : r < 0.10 ? Scenario::S2 : Scenario::S3;
            p.decoy_rate = std::min(1.0, 0.2 * o);
        }
        users.push_back(std::move(p));
    }

    std::map<std::pair<std::size_t, std::size_t>, Scenario> planted;
    for (const auto& w : config.insiders)
        for (std::size_t d = w.start_day; d < w.start_day + w.length; ++d) planted[{w.user, d}] = w.scenario;

    GenerationResult result;
    std::map<logs::Stream, std::vector<LogEvent>> streams;
    for (std::size_t day = 0; day < config.n_days; ++day) {
        const logs::Date date = config.start.plus_days(static_cast<int>(day));
        for (std::size_t u = 0; u < config.n_users; ++u) {
            const UserProfile& user = users[u];
            DayContext ctx{logs::UserDayKey{user.id, date}, user.pc, user.email, n_pcs};
            auto events = baseline_day(user, ctx, config.rates, rng);
            if (user.decoy && rng.bernoulli(user.decoy_rate))
                events = plant_scenario(std::move(events), *user.decoy, rng, ctx);
            int label = 0;
            if (auto it = planted.find({u, day}); it != planted.end()) {
                events = plant_scenario(std::move(events), it->second, rng, ctx);
                label = static_cast<int>(it->second);
            }
            result.truth[ctx.key] = label;
            for (auto& ev : events) streams[logs::stream_of(ev.kind)].push_back(std::move(ev));
        }
    }

    for (logs::Stream s : logs::kAllStreams) {
        auto& events = streams[s];
        std::stable_sort(events.begin(), events.end(), [](const LogEvent& a, const LogEvent& b) {
            return std::tie(a.timestamp, a.user) < std::tie(b.timestamp, b.user);
        });
        const char prefix = "LDFEH"[static_cast<int>(s)];
        for (std::size_t i = 0; i < events.size(); ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "{%c%08zu}", prefix, i + 1);
            events[i].id = id;
        }
        logs::write_log_file(out / logs::stream_file_name(s), s, events);
        result.counts[s] = events.size();
    }
    features::write_ground_truth(out / "labels.csv", result.truth);
    return result;
}

}  // namespace itgan::corpusgen
