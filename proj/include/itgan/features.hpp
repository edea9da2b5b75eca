#pragma once

#include "itgan/common.hpp"
#include "itgan/logs.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace itgan::features {

using TokenSet = std::set<std::string>;

inline constexpr std::size_t kFeatureCount = 20;

// Column order of the daily behavior vector.
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "L1", "L2", "L3", "L4", "L5", "U1", "U2", "U3", "F1", "F2",
    "F3", "F4", "E1", "E2", "E3", "E4", "H1", "H2", "H3", "W1"};

enum Feature : std::size_t {
    L1, L2, L3, L4, L5, U1, U2, U3, F1, F2, F3, F4, E1, E2, E3, E4, H1, H2, H3, W1
};

std::size_t feature_index(std::string_view name);

// Working hours are [08:00, 18:00); anything else is after-hours.
bool is_after_hours(const logs::DateTime& ts);
bool is_executable_extension(std::string_view ext);

struct KeywordCorpus {
    std::string name;
    TokenSet terms;

    static KeywordCorpus from_terms(std::string name, const std::vector<std::string>& terms);
    // One term per line; blank lines ignored.
    static KeywordCorpus load(const std::filesystem::path& path, std::string name);
};

const KeywordCorpus& default_d1();
const KeywordCorpus& default_d2();

double jaccard(const TokenSet& x, const TokenSet& y);
TokenSet extract_keywords(std::string_view text);

struct UserDayVector {
    logs::UserDayKey key;
    std::array<double, kFeatureCount> values{};
    int label = -1;
};

UserDayVector extract_features(const logs::UserDayKey& key, const std::vector<logs::LogEvent>& events,
                               const KeywordCorpus& d1, const KeywordCorpus& d2);

std::vector<UserDayVector> extract_all(const logs::Buckets& buckets, const KeywordCorpus& d1,
                                       const KeywordCorpus& d2);

using GroundTruth = std::map<logs::UserDayKey, int>;

GroundTruth load_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth);

// Per-feature min-max scaler.
struct Scaler {
    std::vector<double> min;
    std::vector<double> max;

    bool operator==(const Scaler&) const = default;
};

enum class Role { Original, Train, Test, Synthetic, Augment };

std::string_view role_name(Role r);

// Row-major feature matrix with one class index per row.  Row tags carry the
// (user, date) provenance of real rows; synthetic rows carry user
// "synthetic" and an empty date.
struct Dataset {
    Matrix matrix;
    std::vector<int> labels;
    std::vector<std::string> users;
    std::vector<std::string> dates;
    std::optional<Scaler> scaler;
    Role role = Role::Original;

    std::size_t rows() const { return labels.size(); }
    std::size_t cols() const { return static_cast<std::size_t>(matrix.cols()); }
    void validate() const;
    std::map<int, std::size_t> class_counts() const;
    Dataset select(const std::vector<std::size_t>& rows) const;
    void append(const Dataset& other);
};

Dataset make_dataset(Matrix matrix, std::vector<int> labels, Role role);

Dataset label_days(const std::vector<UserDayVector>& vectors, const GroundTruth& truth);

// Featurizes a corpus directory against its ground truth.  Every ground-truth
// user-day gets a row (empty days become all-zero vectors); events of a
// user-day missing from the ground truth are an error.
Dataset featurize_corpus(const std::filesystem::path& dir, const GroundTruth& truth, const KeywordCorpus& d1,
                         const KeywordCorpus& d2);

Scaler fit_scaler(const Dataset& train);
Dataset apply_scaler(const Dataset& ds, const Scaler& scaler);

struct Split {
    Dataset train;
    Dataset test;
};

Split stratified_split(const Dataset& ds, double test_frac, std::uint64_t seed);

// features.csv: user,date,<20 features>,label
void write_features_csv(const std::filesystem::path& path, const Dataset& ds);
Dataset read_features_csv(const std::filesystem::path& path);
void write_scaler_csv(const std::filesystem::path& path, const Scaler& scaler);
Scaler read_scaler_csv(const std::filesystem::path& path);

}  // namespace itgan::features
