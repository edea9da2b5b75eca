#pragma once

#include "itgan/common.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace itgan::config {

// Flat `key = value` settings in a TOML subset: '#' comments, bare or quoted
// strings, numbers, booleans and ["a", "b"] string lists.  Lists are stored
// comma-joined.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_kv(std::string_view text, const std::string& source = "<config>");
KeyValues load_kv(const std::filesystem::path& path);

enum class TaskMode { Multiclass, BinaryPerScenario };

struct RunConfig {
    std::string corpus;  // existing corpus directory; empty = generate one
    std::size_t users = 200;
    std::size_t days = 120;
    double malicious_fraction = 0.013;
    double overlap = 1.0;
    std::string d1;  // keyword corpus files; empty = built-in lists
    std::string d2;
    double test_frac = 0.3;
    std::vector<std::string> augmentations{"real", "ros", "smote", "cgan"};
    std::vector<std::string> models{"rf", "xgb", "mlp", "cnn1d"};
    TaskMode mode = TaskMode::Multiclass;
    std::string out = "itgan-out";
    std::uint64_t seed = 1;

    std::size_t smote_k = 5;
    std::size_t cgan_epochs = 300;
    std::size_t cgan_batch = 64;
    std::size_t rf_trees = 100;
    std::size_t xgb_rounds = 100;
    std::size_t xgb_depth = 4;
    std::size_t nn_epochs = 100;
    std::size_t nn_batch = 64;
    double nn_lr = 1e-3;
    bool viz = true;
    std::size_t tsne_points = 400;
    std::size_t tsne_iters = 500;
    std::size_t threads = 1;

    void validate() const;
};

struct KeyInfo {
    const char* key;
    const char* help;
};

// Every recognised key, in canonical order.
const std::vector<KeyInfo>& known_keys();

// Applies key/value pairs on top of `base`; unknown keys are an error.
RunConfig apply(RunConfig base, const KeyValues& kv);

// Canonical key = value listing of every setting except those that do not
// influence results (out, threads).  The config hash is taken over this.
KeyValues canonical(const RunConfig& c);
std::string to_text(const KeyValues& kv);

std::string mode_name(TaskMode m);

}  // namespace itgan::config
