#include "itgan/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace itgan::config {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        else if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
    }
    return std::string(line);
}

std::string unquote(const std::string& v, const std::string& where) {
    if (v.size() >= 2 && v.front() == '"') {
        if (v.back() != '"') fail(ErrorCode::Parse, where + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (!v.empty() && v.front() == '"') fail(ErrorCode::Parse, where + ": unterminated string");
    return v;
}

std::string parse_value(const std::string& raw, const std::string& where) {
    if (raw.empty()) fail(ErrorCode::Parse, where + ": missing value");
    if (raw.front() != '[') return unquote(raw, where);
    if (raw.back() != ']') fail(ErrorCode::Parse, where + ": unterminated list");
    std::string out;
    std::stringstream items(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(items, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (!out.empty()) out += ',';
        out += unquote(item, where);
    }
    return out;
}

std::string where_of(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line); }

std::size_t to_size(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        fail(ErrorCode::InvalidArgument, "config key '" + key + "' expects a non-negative integer, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        fail(ErrorCode::InvalidArgument, "config key '" + key + "' expects an unsigned integer, got '" + v + "'");
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        fail(ErrorCode::InvalidArgument, "config key '" + key + "' expects a number, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(ErrorCode::InvalidArgument, "config key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
    return out;
}

std::string num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

}  // namespace

KeyValues parse_kv(std::string_view text, const std::string& source) {
    KeyValues out;
    std::stringstream in{std::string(text)};
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        const std::string where = where_of(source, no);
        if (body.front() == '[' && body.find('=') == std::string::npos)
            fail(ErrorCode::Parse, where + ": tables are not supported; use flat keys");
        const auto eq = body.find('=');
        if (eq == std::string::npos) fail(ErrorCode::Parse, where + ": expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        if (key.empty()) fail(ErrorCode::Parse, where + ": empty key");
        if (out.count(key)) fail(ErrorCode::Parse, where + ": duplicate key '" + key + "'");
        out[key] = parse_value(trim(std::string_view(body).substr(eq + 1)), where);
    }
    return out;
}

KeyValues load_kv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_kv(ss.str(), path.string());
}

const std::vector<KeyInfo>& known_keys() {
    static const std::vector<KeyInfo> keys = {
        {"corpus", "existing corpus directory (empty = generate)"},
        {"users", "generated corpus: user count"},
        {"days", "generated corpus: day count"},
        {"malicious-fraction", "generated corpus: malicious user-day fraction"},
        {"overlap", "generated corpus: benign lookalike strength"},
        {"d1", "keyword file for the job-hunting corpus"},
        {"d2", "keyword file for the hacking corpus"},
        {"test-frac", "held-out test fraction"},
        {"augmentations", "list from real, ros, smote, cgan"},
        {"models", "list from rf, xgb, mlp, cnn1d"},
        {"mode", "multiclass or binary-per-scenario"},
        {"out", "output directory"},
        {"seed", "global seed"},
        {"smote-k", "SMOTE neighbour count"},
        {"cgan-epochs", "CGAN training epochs"},
        {"cgan-batch", "CGAN batch size"},
        {"rf-trees", "random forest size"},
        {"xgb-rounds", "boosting rounds"},
        {"xgb-depth", "boosted tree depth"},
        {"nn-epochs", "MLP and 1D-CNN epochs"},
        {"nn-batch", "MLP and 1D-CNN batch size"},
        {"nn-lr", "MLP and 1D-CNN learning rate"},
        {"viz", "emit the diagnostics bundle"},
        {"tsne-points", "t-SNE subsample size"},
        {"tsne-iters", "t-SNE iterations"},
        {"threads", "worker threads for forest training"},
    };
    return keys;
}

RunConfig apply(RunConfig c, const KeyValues& kv) {
    std::set<std::string> known;
    for (const auto& k : known_keys()) known.insert(k.key);
    for (const auto& [key, v] : kv) {
        if (!known.count(key)) fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
        if (key == "corpus") c.corpus = v;
        else if (key == "users") c.users = to_size(key, v);
        else if (key == "days") c.days = to_size(key, v);
        else if (key == "malicious-fraction") c.malicious_fraction = to_double(key, v);
        else if (key == "overlap") c.overlap = to_double(key, v);
        else if (key == "d1") c.d1 = v;
        else if (key == "d2") c.d2 = v;
        else if (key == "test-frac") c.test_frac = to_double(key, v);
        else if (key == "augmentations") c.augmentations = to_list(v);
        else if (key == "models") c.models = to_list(v);
        else if (key == "mode") {
            if (v == "multiclass") c.mode = TaskMode::Multiclass;
            else if (v == "binary-per-scenario") c.mode = TaskMode::BinaryPerScenario;
            else fail(ErrorCode::InvalidArgument, "mode must be multiclass or binary-per-scenario, got '" + v + "'");
        } else if (key == "out") c.out = v;
        else if (key == "seed") c.seed = to_u64(key, v);
        else if (key == "smote-k") c.smote_k = to_size(key, v);
        else if (key == "cgan-epochs") c.cgan_epochs = to_size(key, v);
        else if (key == "cgan-batch") c.cgan_batch = to_size(key, v);
        else if (key == "rf-trees") c.rf_trees = to_size(key, v);
        else if (key == "xgb-rounds") c.xgb_rounds = to_size(key, v);
        else if (key == "xgb-depth") c.xgb_depth = to_size(key, v);
        else if (key == "nn-epochs") c.nn_epochs = to_size(key, v);
        else if (key == "nn-batch") c.nn_batch = to_size(key, v);
        else if (key == "nn-lr") c.nn_lr = to_double(key, v);
        else if (key == "viz") c.viz = to_bool(key, v);
        else if (key == "tsne-points") c.tsne_points = to_size(key, v);
        else if (key == "tsne-iters") c.tsne_iters = to_size(key, v);
        else if (key == "threads") c.threads = to_size(key, v);
    }
    return c;
}

void RunConfig::validate() const {
    static const std::set<std::string> augs{"real", "ros", "smote", "cgan"};
    static const std::set<std::string> mods{"rf", "xgb", "mlp", "cnn1d"};
    require(!augmentations.empty(), "augmentation list must not be empty");
    require(!models.empty(), "model list must not be empty");
    std::set<std::string> seen;
    for (const auto& a : augmentations) {
        require(augs.count(a) > 0, "unknown augmentation '" + a + "' (expected real, ros, smote or cgan)");
        require(seen.insert("a:" + a).second, "augmentation '" + a + "' listed twice");
    }
    for (const auto& m : models) {
        require(mods.count(m) > 0, "unknown model '" + m + "' (expected rf, xgb, mlp or cnn1d)");
        require(seen.insert("m:" + m).second, "model '" + m + "' listed twice");
    }
    require(test_frac > 0.0 && test_frac < 1.0, "test-frac must lie in (0, 1)");
    if (corpus.empty()) require(users >= 1 && days >= 1, "generated corpus needs users >= 1 and days >= 1");
    require(smote_k >= 1, "smote-k must be at least 1");
    require(cgan_epochs >= 1 && cgan_batch >= 1, "cgan-epochs and cgan-batch must be positive");
    require(rf_trees >= 1 && xgb_rounds >= 1 && xgb_depth >= 1, "forest sizes must be positive");
    require(nn_epochs >= 1 && nn_batch >= 1 && nn_lr > 0.0, "nn-epochs, nn-batch and nn-lr must be positive");
    require(overlap >= 0.0, "overlap must be non-negative");
    require(!out.empty(), "out must name a directory");
}

std::string mode_name(TaskMode m) { return m == TaskMode::Multiclass ? "multiclass" : "binary-per-scenario"; }

KeyValues canonical(const RunConfig& c) {
    KeyValues kv;
    kv["corpus"] = c.corpus;
    kv["users"] = std::to_string(c.users);
    kv["days"] = std::to_string(c.days);
    kv["malicious-fraction"] = num(c.malicious_fraction);
    kv["overlap"] = num(c.overlap);
    kv["d1"] = c.d1;
    kv["d2"] = c.d2;
    kv["test-frac"] = num(c.test_frac);
    kv["augmentations"] = join(c.augmentations);
    kv["models"] = join(c.models);
    kv["mode"] = mode_name(c.mode);
    kv["seed"] = std::to_string(c.seed);
    kv["smote-k"] = std::to_string(c.smote_k);
    kv["cgan-epochs"] = std::to_string(c.cgan_epochs);
    kv["cgan-batch"] = std::to_string(c.cgan_batch);
    kv["rf-trees"] = std::to_string(c.rf_trees);
    kv["xgb-rounds"] = std::to_string(c.xgb_rounds);
    kv["xgb-depth"] = std::to_string(c.xgb_depth);
    kv["nn-epochs"] = std::to_string(c.nn_epochs);
    kv["nn-batch"] = std::to_string(c.nn_batch);
    kv["nn-lr"] = num(c.nn_lr);
    kv["viz"] = c.viz ? "true" : "false";
    kv["tsne-points"] = std::to_string(c.tsne_points);
    kv["tsne-iters"] = std::to_string(c.tsne_iters);
    return kv;
}

std::string to_text(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = \"" + v + "\"\n";
    return out;
}

}  // namespace itgan::config
