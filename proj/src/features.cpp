#include "itgan/features.hpp"

#include "itgan/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

namespace itgan::features {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        fail(ErrorCode::Parse, where + ": not a finite number '" + s + "'");
    return v;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string domain_of(std::string_view address) {
    auto at = address.find('@');
    if (at == std::string_view::npos) return {};
    return lower(address.substr(at + 1));
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool has_external_recipient(const logs::EmailPayload& p) {
    const std::string sender = domain_of(trim(p.from));
    for (const std::string* field : {&p.to, &p.cc, &p.bcc}) {
        std::string_view rest = *field;
        while (!rest.empty()) {
            auto sep = rest.find(';');
            std::string addr = trim(rest.substr(0, sep));
            if (!addr.empty() && domain_of(addr) != sender) return true;
            if (sep == std::string_view::npos) break;
            rest.remove_prefix(sep + 1);
        }
    }
    return false;
}

std::string url_host(std::string_view url) {
    auto scheme = url.find("://");
    if (scheme != std::string_view::npos) url.remove_prefix(scheme + 3);
    auto end = url.find_first_of("/:?#");
    return lower(url.substr(0, end));
}

bool is_wikileaks(std::string_view url) {
    const std::string host = url_host(url);
    constexpr std::string_view site = "wikileaks.org";
    if (host == site) return true;
    return host.size() > site.size() && host.ends_with(site) && host[host.size() - site.size() - 1] == '.';
}

}  // namespace

std::size_t feature_index(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (name == kFeatureNames[i]) return i;
    fail(ErrorCode::InvalidArgument, "unknown feature '" + std::string(name) + "'");
}

bool is_after_hours(const logs::DateTime& ts) { return ts.hour < 8 || ts.hour >= 18; }

bool is_executable_extension(std::string_view ext) {
    static const std::set<std::string, std::less<>> exts{"exe", "bat", "cmd", "com", "msi", "scr", "dll", "ps1"};
    return exts.contains(lower(ext));
}

KeywordCorpus KeywordCorpus::from_terms(std::string name, const std::vector<std::string>& terms) {
    KeywordCorpus c{std::move(name), {}};
    for (const auto& t : terms) {
        std::string term = lower(trim(t));
        if (!term.empty()) c.terms.insert(std::move(term));
    }
    if (c.terms.empty()) fail(ErrorCode::InvalidArgument, "keyword corpus " + c.name + " is empty");
    return c;
}

KeywordCorpus KeywordCorpus::load(const std::filesystem::path& path, std::string name) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open keyword corpus " + path.string());
    std::vector<std::string> terms;
    std::string line;
    while (csv::read_line(in, line)) terms.push_back(line);
    return from_terms(std::move(name), terms);
}

const KeywordCorpus& default_d1() {
    static const KeywordCorpus c = KeywordCorpus::from_terms(
        "D1", {"job", "career", "hiring", "resume", "interview", "vacancy", "recruiter", "salary"});
    return c;
}

const KeywordCorpus& default_d2() {
    static const KeywordCorpus c = KeywordCorpus::from_terms(
        "D2", {"keylogger", "password", "crack", "hack", "exploit", "sniffer", "backdoor", "breach"});
    return c;
}

double jaccard(const TokenSet& x, const TokenSet& y) {
    if (x.empty() && y.empty()) return 0.0;
    std::size_t common = 0;
    auto a = x.begin();
    auto b = y.begin();
    while (a != x.end() && b != y.end()) {
        if (*a < *b) ++a;
        else if (*b < *a) ++b;
        else {
            ++common;
            ++a;
            ++b;
        }
    }
    return static_cast<double>(common) / static_cast<double>(x.size() + y.size() - common);
}

TokenSet extract_keywords(std::string_view text) {
    TokenSet out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 3) out.insert(cur);
        cur.clear();
    };
    for (char c : text) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) cur.push_back(static_cast<char>(std::tolower(uc)));
        else flush();
    }
    flush();
    return out;
}

UserDayVector extract_features(const logs::UserDayKey& key, const std::vector<logs::LogEvent>& events,
                               const KeywordCorpus& d1, const KeywordCorpus& d2) {
    using logs::EventKind;
    UserDayVector v;
    v.key = key;
    auto& f = v.values;
    std::set<std::string> logon_pcs;
    std::set<std::string> files;
    TokenSet keywords;
    for (const auto& ev : events) {
        if (ev.user != key.user || ev.timestamp.date != key.date)
            fail(ErrorCode::InvalidArgument, "event " + ev.id + " does not belong to user-day " + key.user + " " +
                                                 key.date.to_string());
        const bool late = is_after_hours(ev.timestamp);
        switch (ev.kind) {
            case EventKind::Logon:
                f[L1] += 1;
                if (late) f[L3] += 1;
                if (key.date.is_weekend()) f[L4] += 1;
                logon_pcs.insert(ev.pc);
                break;
            case EventKind::Logoff:
                f[L2] += 1;
                logon_pcs.insert(ev.pc);
                break;
            case EventKind::DeviceConnect:
                f[U1] += 1;
                if (late) f[U2] += 1;
                break;
            case EventKind::DeviceDisconnect: f[U3] += 1; break;
            case EventKind::FileCopy: {
                const auto& p = std::get<logs::FilePayload>(ev.payload);
                f[F1] += 1;
                if (late) f[F2] += 1;
                files.insert(p.filename);
                if (is_executable_extension(p.extension)) f[F4] += 1;
                break;
            }
            case EventKind::EmailSend: {
                const auto& p = std::get<logs::EmailPayload>(ev.payload);
                f[E1] += 1;
                if (has_external_recipient(p)) f[E2] += 1;
                const long att = p.attachment_count();
                if (att > 0) {
                    f[E3] += 1;
                    f[E4] += static_cast<double>(att);
                }
                break;
            }
            case EventKind::HttpVisit: {
                const auto& p = std::get<logs::HttpPayload>(ev.payload);
                f[W1] += 1;
                if (is_wikileaks(p.url)) f[H1] += 1;
                keywords.merge(extract_keywords(p.content));
                break;
            }
        }
    }
    f[L5] = static_cast<double>(logon_pcs.size());
    f[F3] = static_cast<double>(files.size());
    f[H2] = jaccard(keywords, d1.terms);
    f[H3] = jaccard(keywords, d2.terms);
    return v;
}

std::vector<UserDayVector> extract_all(const logs::Buckets& buckets, const KeywordCorpus& d1,
                                       const KeywordCorpus& d2) {
    std::vector<UserDayVector> out;
    out.reserve(buckets.size());
    for (const auto& [key, events] : buckets) out.push_back(extract_features(key, events, d1, d2));
    return out;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open labels file " + path.string());
    std::string line;
    if (!csv::read_line(in, line) || csv::split_record(line) != std::vector<std::string>{"user", "date", "label"})
        fail(ErrorCode::Parse, path.string() + ":1: expected header user,date,label");
    GroundTruth truth;
    std::size_t lineno = 1;
    while (csv::read_line(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = csv::split_record(line);
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (f.size() < 3) fail(ErrorCode::Parse, where + ": expected 3 columns");
        try {
            truth[logs::UserDayKey{f[0], logs::Date::parse(f[1])}] = parse_label(f[2]);
        } catch (const Error& e) {
            fail(ErrorCode::Parse, where + ": " + e.what());
        }
    }
    return truth;
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "user,date,label\n";
    for (const auto& [key, label] : truth)
        out << csv::escape(key.user) << ',' << key.date.to_string() << ',' << label_name(label) << '\n';
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

std::string_view role_name(Role r) {
    switch (r) {
        case Role::Original: return "Original";
        case Role::Train: return "Train";
        case Role::Test: return "Test";
        case Role::Synthetic: return "Synthetic";
        case Role::Augment: return "Augment";
    }
    return "";
}

void Dataset::validate() const {
    if (static_cast<std::size_t>(matrix.rows()) != labels.size())
        fail(ErrorCode::InvalidArgument, "dataset matrix has " + std::to_string(matrix.rows()) + " rows but " +
                                             std::to_string(labels.size()) + " labels");
    if (users.size() != labels.size() || dates.size() != labels.size())
        fail(ErrorCode::InvalidArgument, "dataset row tags do not match row count");
}

std::map<int, std::size_t> Dataset::class_counts() const {
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    return counts;
}

Dataset Dataset::select(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.matrix.resize(static_cast<Eigen::Index>(idx.size()), matrix.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.matrix.row(static_cast<Eigen::Index>(i)) = matrix.row(static_cast<Eigen::Index>(idx[i]));
        out.labels.push_back(labels[idx[i]]);
        out.users.push_back(users[idx[i]]);
        out.dates.push_back(dates[idx[i]]);
    }
    out.scaler = scaler;
    out.role = role;
    return out;
}

void Dataset::append(const Dataset& other) {
    if (rows() > 0 && other.rows() > 0 && other.matrix.cols() != matrix.cols())
        fail(ErrorCode::InvalidArgument, "cannot append datasets with different feature counts");
    if (other.rows() == 0) return;
    Matrix joined(matrix.rows() + other.matrix.rows(), other.matrix.cols());
    if (matrix.rows() > 0) joined.topRows(matrix.rows()) = matrix;
    joined.bottomRows(other.matrix.rows()) = other.matrix;
    matrix = std::move(joined);
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    users.insert(users.end(), other.users.begin(), other.users.end());
    dates.insert(dates.end(), other.dates.begin(), other.dates.end());
}

Dataset make_dataset(Matrix matrix, std::vector<int> labels, Role role) {
    Dataset ds;
    ds.matrix = std::move(matrix);
    ds.labels = std::move(labels);
    const bool synthetic = role == Role::Synthetic;
    ds.users.assign(ds.labels.size(), synthetic ? "synthetic" : "");
    ds.dates.assign(ds.labels.size(), "");
    ds.role = role;
    ds.validate();
    return ds;
}

Dataset label_days(const std::vector<UserDayVector>& vectors, const GroundTruth& truth) {
    Dataset ds;
    ds.matrix.resize(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(kFeatureCount));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const auto& v = vectors[i];
        auto it = truth.find(v.key);
        if (it == truth.end())
            fail(ErrorCode::InvalidArgument,
                 "user-day " + v.key.user + " " + v.key.date.to_string() + " is missing from the ground truth");
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            ds.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.values[j];
        ds.labels.push_back(it->second);
        ds.users.push_back(v.key.user);
        ds.dates.push_back(v.key.date.to_string());
    }
    ds.role = Role::Original;
    return ds;
}

Dataset featurize_corpus(const std::filesystem::path& dir, const GroundTruth& truth, const KeywordCorpus& d1,
                         const KeywordCorpus& d2) {
    const auto buckets = logs::scan_corpus(dir);
    for (const auto& [key, events] : buckets)
        if (!truth.contains(key))
            fail(ErrorCode::InvalidArgument,
                 "user-day " + key.user + " " + key.date.to_string() + " is missing from the ground truth");
    std::vector<UserDayVector> vectors;
    vectors.reserve(truth.size());
    static const std::vector<logs::LogEvent> kEmpty;
    for (const auto& [key, label] : truth) {
        auto it = buckets.find(key);
        vectors.push_back(extract_features(key, it == buckets.end() ? kEmpty : it->second, d1, d2));
    }
    return label_days(vectors, truth);
}

Scaler fit_scaler(const Dataset& train) {
    if (train.rows() == 0) fail(ErrorCode::InvalidArgument, "cannot fit a scaler on an empty dataset");
    if (train.role != Role::Train) fail(ErrorCode::InvalidArgument, "scaler must be fit on the training split");
    Scaler s;
    for (Eigen::Index j = 0; j < train.matrix.cols(); ++j) {
        s.min.push_back(train.matrix.col(j).minCoeff());
        s.max.push_back(train.matrix.col(j).maxCoeff());
    }
    return s;
}

Dataset apply_scaler(const Dataset& ds, const Scaler& scaler) {
    if (ds.rows() == 0) fail(ErrorCode::InvalidArgument, "cannot scale an empty dataset");
    if (scaler.min.size() != ds.cols() || scaler.max.size() != ds.cols())
        fail(ErrorCode::InvalidArgument, "scaler width does not match dataset");
    Dataset out = ds;
    for (Eigen::Index j = 0; j < out.matrix.cols(); ++j) {
        const double lo = scaler.min[static_cast<std::size_t>(j)];
        const double span = scaler.max[static_cast<std::size_t>(j)] - lo;
        for (Eigen::Index i = 0; i < out.matrix.rows(); ++i) {
            double& x = out.matrix(i, j);
            x = span > 0 ? std::clamp((x - lo) / span, 0.0, 1.0) : 0.0;
        }
    }
    out.scaler = scaler;
    return out;
}

Split stratified_split(const Dataset& ds, double test_frac, std::uint64_t seed) {
    ds.validate();
    if (!(test_frac > 0.0 && test_frac < 1.0)) fail(ErrorCode::InvalidArgument, "test fraction must lie in (0, 1)");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < ds.rows(); ++i) by_class[ds.labels[i]].push_back(i);
    Rng rng(seed);
    std::vector<std::size_t> train_idx, test_idx;
    for (auto& [label, idx] : by_class) {
        if (idx.size() < 2)
            fail(ErrorCode::InvalidArgument,
                 "class " + std::to_string(label) + " has a single sample and cannot be stratified");
        auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * test_frac));
        n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
        std::shuffle(idx.begin(), idx.end(), rng.engine());
        test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    Split s{ds.select(train_idx), ds.select(test_idx)};
    s.train.role = Role::Train;
    s.test.role = Role::Test;
    return s;
}

void write_features_csv(const std::filesystem::path& path, const Dataset& ds) {
    ds.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    if (ds.cols() != kFeatureCount)
        fail(ErrorCode::InvalidArgument, "features.csv requires exactly 20 feature columns");
    out << "user,date";
    for (const char* n : kFeatureNames) out << ',' << n;
    out << ",label\n";
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        out << csv::escape(ds.users[i]) << ',' << ds.dates[i];
        for (Eigen::Index j = 0; j < ds.matrix.cols(); ++j)
            out << ',' << format_double(ds.matrix(static_cast<Eigen::Index>(i), j));
        out << ',' << label_name(ds.labels[i]) << '\n';
    }
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

Dataset read_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::string line;
    std::vector<std::string> expected{"user", "date"};
    for (const char* n : kFeatureNames) expected.emplace_back(n);
    expected.emplace_back("label");
    if (!csv::read_line(in, line) || csv::split_record(line) != expected)
        fail(ErrorCode::Parse, path.string() + ":1: unexpected features.csv header");
    std::vector<std::vector<double>> rows;
    Dataset ds;
    std::size_t lineno = 1;
    while (csv::read_line(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = csv::split_record(line);
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (f.size() != expected.size()) fail(ErrorCode::Parse, where + ": expected 23 columns");
        std::vector<double> row;
        for (std::size_t j = 0; j < kFeatureCount; ++j) row.push_back(parse_double(f[2 + j], where));
        rows.push_back(std::move(row));
        ds.users.push_back(f[0]);
        ds.dates.push_back(f[1]);
        try {
            ds.labels.push_back(parse_label(f.back()));
        } catch (const Error& e) {
            fail(ErrorCode::Parse, where + ": " + e.what());
        }
    }
    ds.matrix.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kFeatureCount));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            ds.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return ds;
}

void write_scaler_csv(const std::filesystem::path& path, const Scaler& scaler) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "feature,min,max\n";
    for (std::size_t j = 0; j < scaler.min.size(); ++j) {
        std::string name = j < kFeatureCount ? kFeatureNames[j] : "f" + std::to_string(j);
        out << name << ',' << format_double(scaler.min[j]) << ',' << format_double(scaler.max[j]) << '\n';
    }
}

Scaler read_scaler_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::string line;
    csv::read_line(in, line);
    Scaler s;
    while (csv::read_line(in, line)) {
        if (line.empty()) continue;
        auto f = csv::split_record(line);
        if (f.size() != 3) fail(ErrorCode::Parse, path.string() + ": expected feature,min,max");
        s.min.push_back(parse_double(f[1], path.string()));
        s.max.push_back(parse_double(f[2], path.string()));
    }
    return s;
}

}  // namespace itgan::features
