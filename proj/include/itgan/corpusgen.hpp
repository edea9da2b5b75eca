#pragma once

#include "itgan/common.hpp"
#include "itgan/features.hpp"
#include "itgan/logs.hpp"

#include <filesystem>
#include <map>
#include <vector>

namespace itgan::corpusgen {

enum class Scenario { S1 = 1, S2 = 2, S3 = 3 };

struct InsiderWindow {
    Scenario scenario = Scenario::S1;
    std::size_t user = 0;
    std::size_t start_day = 0;
    std::size_t length = 1;
};

// Weekday mean daily counts per event kind; weekends use a fraction of these.
struct BaselineRates {
    double logon = 1.3;
    double device = 0.25;
    double file = 1.0;
    double email = 3.0;
    double http = 8.0;
};

struct CorpusConfig {
    std::size_t n_users = 200;
    std::size_t n_days = 120;
    std::uint64_t seed = 7;
    std::vector<InsiderWindow> insiders;
    BaselineRates rates;
    logs::Date start{2010, 1, 4};
    // Scales benign lookalike behaviour (occasional wikileaks readers, admins
    // moving executables between PCs, security researchers).  0 = none.
    double overlap = 1.0;

    void validate() const;
};

// Fraction of user-days covered by the default insider plan.
inline constexpr double kDefaultMaliciousFraction = 0.013;

// Spreads round(fraction * users * days) malicious user-days over S1/S2/S3
// insiders with disjoint user sets.
std::vector<InsiderWindow> default_insider_plan(std::size_t n_users, std::size_t n_days, double fraction,
                                                std::uint64_t seed);

CorpusConfig default_config(std::size_t n_users, std::size_t n_days, std::uint64_t seed,
                            double fraction = kDefaultMaliciousFraction);

std::string user_id(std::size_t index);

struct DayContext {
    logs::UserDayKey key;
    std::string home_pc;
    std::string email;
    std::size_t n_pcs = 1;
};

// Adds the scenario's signature events to one user-day.
std::vector<logs::LogEvent> plant_scenario(std::vector<logs::LogEvent> events, Scenario scenario, Rng& rng,
                                           const DayContext& ctx);

struct GenerationResult {
    features::GroundTruth truth;
    std::map<logs::Stream, std::size_t> counts;

    std::size_t total_events() const;
    double malicious_fraction() const;
};

// Writes logon/device/file/email/http.csv and labels.csv into `out`.
GenerationResult generate_corpus(const CorpusConfig& config, const std::filesystem::path& out);

}  // namespace itgan::corpusgen
