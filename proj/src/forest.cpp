#include "itgan/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

namespace itgan::forest {

namespace {

std::size_t infer_classes(const features::Dataset& ds, std::size_t n_classes) {
    if (ds.rows() == 0) fail(ErrorCode::InvalidArgument, "cannot train on an empty dataset");
    ds.validate();
    const int top = *std::max_element(ds.labels.begin(), ds.labels.end());
    if (*std::min_element(ds.labels.begin(), ds.labels.end()) < 0) fail(ErrorCode::InvalidArgument, "negative class label");
    if (n_classes == 0) n_classes = static_cast<std::size_t>(top) + 1;
    if (static_cast<std::size_t>(top) >= n_classes) fail(ErrorCode::InvalidArgument, "class label exceeds class count");
    if (ds.class_counts().size() < 2) fail(ErrorCode::InvalidArgument, "training data needs at least two classes");
    return n_classes;
}

struct Candidate {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = 0.0;
};

}  // namespace

const TreeNode& Tree::leaf_for(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    const TreeNode* n = &nodes.front();
    while (!n->is_leaf()) n = &nodes[static_cast<std::size_t>(row(n->feature) <= n->threshold ? n->left : n->right)];
    return *n;
}

std::size_t Tree::depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

double gini(const std::vector<double>& counts) {
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (n <= 0.0) return 0.0;
    double sq = 0.0;
    for (double c : counts) sq += (c / n) * (c / n);
    return 1.0 - sq;
}

int argmax(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = static_cast<int>(i);
    return best;
}

std::vector<std::vector<std::size_t>> presort(const Matrix& x) {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
        auto& idx = out[static_cast<std::size_t>(f)];
        idx.resize(static_cast<std::size_t>(x.rows()));
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
        });
    }
    return out;
}

Tree build_gini_tree(const Matrix& x, const std::vector<int>& y, const std::vector<double>& weights,
                     const std::vector<std::vector<std::size_t>>& sorted, std::size_t n_classes,
                     std::size_t max_depth, std::size_t min_leaf, std::size_t mtry, Rng& rng) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
    const std::size_t K = n_classes;
    mtry = std::clamp<std::size_t>(mtry, 1, d);
    const double min_w = static_cast<double>(std::max<std::size_t>(min_leaf, 1));

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<std::vector<double>> counts(1, std::vector<double>(K, 0.0));
    std::vector<int> pos(n, -1);
    for (std::size_t r = 0; r < n; ++r)
        if (weights[r] > 0) {
            pos[r] = 0;
            counts[0][static_cast<std::size_t>(y[r])] += weights[r];
        }

    std::vector<int> frontier{0};
    std::size_t depth = 0;
    std::vector<std::size_t> perm(d);
    while (!frontier.empty()) {
        std::vector<int> slot_of(tree.nodes.size(), -1);
        std::vector<int> active;
        for (int nd : frontier) {
            const auto& c = counts[static_cast<std::size_t>(nd)];
            const double total = std::accumulate(c.begin(), c.end(), 0.0);
            const bool pure = std::count_if(c.begin(), c.end(), [](double v) { return v > 0; }) <= 1;
            if ((max_depth == 0 || depth < max_depth) && !pure && total >= 2 * min_w) {
                slot_of[static_cast<std::size_t>(nd)] = static_cast<int>(active.size());
                active.push_back(nd);
            }
        }
        if (active.empty()) break;
        const std::size_t A = active.size();

        std::vector<char> selected(A * d, 0);
        for (std::size_t s = 0; s < A; ++s) {
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t i = 0; i < mtry; ++i) std::swap(perm[i], perm[i + rng.index(d - i)]);
            for (std::size_t i = 0; i < mtry; ++i) selected[s * d + perm[i]] = 1;
        }

        std::vector<double> totals(A), parent_sq(A);
        for (std::size_t s = 0; s < A; ++s) {
            const auto& c = counts[static_cast<std::size_t>(active[s])];
            totals[s] = std::accumulate(c.begin(), c.end(), 0.0);
            for (double v : c) parent_sq[s] += v * v;
        }

        std::vector<Candidate> best(A);
        std::vector<double> left(A * K), n_left(A), last(A);
        std::vector<char> has_last(A);
        for (std::size_t f = 0; f < d; ++f) {
            std::fill(left.begin(), left.end(), 0.0);
            std::fill(n_left.begin(), n_left.end(), 0.0);
            std::fill(has_last.begin(), has_last.end(), 0);
            for (std::size_t r : sorted[f]) {
                const int nd = pos[r];
                if (nd < 0) continue;
                const int si = slot_of[static_cast<std::size_t>(nd)];
                if (si < 0) continue;
                const auto s = static_cast<std::size_t>(si);
                if (!selected[s * d + f]) continue;
                const double v = x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f));
                if (has_last[s] && v > last[s]) {
                    const double nl = n_left[s], nr = totals[s] - nl;
                    if (nl >= min_w && nr >= min_w) {
                        const auto& c = counts[static_cast<std::size_t>(nd)];
                        double sql = 0.0, sqr = 0.0;
                        for (std::size_t k = 0; k < K; ++k) {
                            const double l = left[s * K + k];
                            sql += l * l;
                            sqr += (c[k] - l) * (c[k] - l);
                        }
                        const double score = sql / nl + sqr / nr;
                        if (!best[s].found || score > best[s].score) best[s] = {true, f, 0.5 * (last[s] + v), score};
                    }
                }
                left[s * K + static_cast<std::size_t>(y[r])] += weights[r];
                n_left[s] += weights[r];
                last[s] = v;
                has_last[s] = 1;
            }
        }

        std::vector<int> next;
        std::vector<char> split(tree.nodes.size(), 0);
        for (std::size_t s = 0; s < A; ++s) {
            if (!best[s].found) continue;
            const double gain = (best[s].score - parent_sq[s] / totals[s]) / totals[s];
            if (gain <= 1e-12) continue;
            const auto nd = static_cast<std::size_t>(active[s]);
            const int l = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            counts.emplace_back(K, 0.0);
            counts.emplace_back(K, 0.0);
            auto& node = tree.nodes[nd];
            node.feature = static_cast<int>(best[s].feature);
            node.threshold = best[s].threshold;
            node.left = l;
            node.right = l + 1;
            split[nd] = 1;
            next.push_back(l);
            next.push_back(l + 1);
        }
        for (std::size_t r = 0; r < n; ++r) {
            const int nd = pos[r];
            if (nd < 0 || nd >= static_cast<int>(split.size()) || !split[static_cast<std::size_t>(nd)]) continue;
            const auto& node = tree.nodes[static_cast<std::size_t>(nd)];
            const int child = x(static_cast<Eigen::Index>(r), node.feature) <= node.threshold ? node.left : node.right;
            pos[r] = child;
            counts[static_cast<std::size_t>(child)][static_cast<std::size_t>(y[r])] += weights[r];
        }
        frontier = std::move(next);
        ++depth;
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i)
        if (tree.nodes[i].is_leaf()) tree.nodes[i].leaf = counts[i];
    return tree;
}

RfModel train_rf(const features::Dataset& train, const RfParams& params, std::size_t n_classes) {
    n_classes = infer_classes(train, n_classes);
    if (params.n_trees == 0) fail(ErrorCode::InvalidArgument, "random forest needs at least one tree");
    RfModel model;
    model.n_classes = n_classes;
    model.n_features = train.cols();
    const std::size_t mtry = params.mtry ? params.mtry
                                         : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                                                        std::sqrt(static_cast<double>(train.cols())))));
    const auto sorted = presort(train.matrix);
    model.trees.resize(params.n_trees);
    auto grow = [&](std::size_t t) {
        Rng rng(derive_seed(params.seed, t));
        std::vector<double> w(train.rows(), 0.0);
        for (std::size_t i = 0; i < train.rows(); ++i) w[rng.index(train.rows())] += 1.0;
        model.trees[t] = build_gini_tree(train.matrix, train.labels, w, sorted, n_classes, params.max_depth,
                                         params.min_leaf, mtry, rng);
    };
    const std::size_t threads = std::clamp<std::size_t>(params.threads, 1, params.n_trees);
    if (threads == 1) {
        for (std::size_t t = 0; t < params.n_trees; ++t) grow(t);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < params.n_trees; t += threads) grow(t);
            });
        for (auto& th : pool) th.join();
    }
    return model;
}

std::vector<std::vector<std::size_t>> vote_histograms(const RfModel& model, const Matrix& rows) {
    if (static_cast<std::size_t>(rows.cols()) != model.n_features)
        fail(ErrorCode::InvalidArgument, "row width does not match the forest");
    std::vector<std::vector<std::size_t>> votes(static_cast<std::size_t>(rows.rows()),
                                                std::vector<std::size_t>(model.n_classes, 0));
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        for (const auto& t : model.trees) {
            const auto& leaf = t.leaf_for(rows.row(i)).leaf;
            const auto best = std::max_element(leaf.begin(), leaf.end()) - leaf.begin();  // first max
            ++votes[static_cast<std::size_t>(i)][static_cast<std::size_t>(best)];
        }
    return votes;
}

std::vector<int> predict_rf(const RfModel& model, const Matrix& rows) {
    std::vector<int> out;
    for (const auto& v : vote_histograms(model, rows))
        out.push_back(static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()));
    return out;
}

double leaf_weight(double grad_sum, double hess_sum, double lambda) { return -grad_sum / (hess_sum + lambda); }

namespace {

Tree build_gbt_tree(const Matrix& x, const std::vector<double>& g, const std::vector<double>& h,
                    const std::vector<std::vector<std::size_t>>& sorted, const GbtParams& p) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<double> G{std::accumulate(g.begin(), g.end(), 0.0)};
    std::vector<double> H{std::accumulate(h.begin(), h.end(), 0.0)};
    std::vector<int> pos(n, 0);
    std::vector<int> frontier{0};
    for (std::size_t depth = 0; depth < p.max_depth && !frontier.empty(); ++depth) {
        std::vector<int> slot_of(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
        const std::size_t A = frontier.size();
        std::vector<Candidate> best(A);
        std::vector<double> gl(A), hl(A), last(A);
        std::vector<char> has_last(A);
        for (std::size_t f = 0; f < d; ++f) {
            std::fill(gl.begin(), gl.end(), 0.0);
            std::fill(hl.begin(), hl.end(), 0.0);
            std::fill(has_last.begin(), has_last.end(), 0);
            for (std::size_t r : sorted[f]) {
                const int nd = pos[r];
                if (nd < 0) continue;
                const int si = slot_of[static_cast<std::size_t>(nd)];
                if (si < 0) continue;
                const auto s = static_cast<std::size_t>(si);
                const double v = x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f));
                if (has_last[s] && v > last[s]) {
                    const double Gt = G[static_cast<std::size_t>(nd)], Ht = H[static_cast<std::size_t>(nd)];
                    const double gr = Gt - gl[s], hr = Ht - hl[s];
                    if (hl[s] >= p.min_child_weight && hr >= p.min_child_weight) {
                        const double gain = 0.5 * (gl[s] * gl[s] / (hl[s] + p.lambda) + gr * gr / (hr + p.lambda) -
                                                   Gt * Gt / (Ht + p.lambda));
                        if (!best[s].found || gain > best[s].score) best[s] = {true, f, 0.5 * (last[s] + v), gain};
                    }
                }
                gl[s] += g[r];
                hl[s] += h[r];
                last[s] = v;
                has_last[s] = 1;
            }
        }
        std::vector<int> next;
        std::vector<char> split(tree.nodes.size(), 0);
        for (std::size_t s = 0; s < A; ++s) {
            if (!best[s].found || best[s].score <= 1e-12) continue;
            const auto nd = static_cast<std::size_t>(frontier[s]);
            const int l = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            G.push_back(0.0);
            G.push_back(0.0);
            H.push_back(0.0);
            H.push_back(0.0);
            auto& node = tree.nodes[nd];
            node.feature = static_cast<int>(best[s].feature);
            node.threshold = best[s].threshold;
            node.left = l;
            node.right = l + 1;
            split[nd] = 1;
            next.push_back(l);
            next.push_back(l + 1);
        }
        for (std::size_t r = 0; r < n; ++r) {
            const int nd = pos[r];
            if (nd < 0 || nd >= static_cast<int>(split.size()) || !split[static_cast<std::size_t>(nd)]) continue;
            const auto& node = tree.nodes[static_cast<std::size_t>(nd)];
            const int child = x(static_cast<Eigen::Index>(r), node.feature) <= node.threshold ? node.left : node.right;
            pos[r] = child;
            G[static_cast<std::size_t>(child)] += g[r];
            H[static_cast<std::size_t>(child)] += h[r];
        }
        frontier = std::move(next);
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i)
        if (tree.nodes[i].is_leaf()) tree.nodes[i].leaf = {leaf_weight(G[i], H[i], p.lambda)};
    return tree;
}

double log_loss(const Matrix& probs, const std::vector<int>& y) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        total -= std::log(std::max(probs(i, y[static_cast<std::size_t>(i)]), 1e-15));
    return total / static_cast<double>(probs.rows());
}

}  // namespace

GbtModel train_gbt(const features::Dataset& train, const GbtParams& params, std::size_t n_classes) {
    n_classes = infer_classes(train, n_classes);
    if (params.rounds == 0) fail(ErrorCode::InvalidArgument, "boosting needs at least one round");
    GbtModel model;
    model.n_classes = n_classes;
    model.n_features = train.cols();
    model.eta = params.eta;
    const auto sorted = presort(train.matrix);
    const std::size_t n = train.rows();
    Matrix scores = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_classes));
    std::vector<double> g(n), h(n);
    for (std::size_t round = 0; round < params.rounds; ++round) {
        const Matrix probs = nn::softmax_rows(scores);
        std::vector<Tree> trees;
        for (std::size_t k = 0; k < n_classes; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
                g[i] = p - (train.labels[i] == static_cast<int>(k) ? 1.0 : 0.0);
                h[i] = std::max(2.0 * p * (1.0 - p), 1e-16);
            }
            trees.push_back(build_gbt_tree(train.matrix, g, h, sorted, params));
        }
        for (std::size_t k = 0; k < n_classes; ++k)
            for (std::size_t i = 0; i < n; ++i)
                scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) +=
                    params.eta * trees[k].leaf_for(train.matrix.row(static_cast<Eigen::Index>(i))).leaf[0];
        model.rounds.push_back(std::move(trees));
        model.train_loss.push_back(log_loss(nn::softmax_rows(scores), train.labels));
    }
    return model;
}

Matrix gbt_scores(const GbtModel& model, const Matrix& rows) {
    if (static_cast<std::size_t>(rows.cols()) != model.n_features)
        fail(ErrorCode::InvalidArgument, "row width does not match the boosted model");
    Matrix scores = Matrix::Zero(rows.rows(), static_cast<Eigen::Index>(model.n_classes));
    for (const auto& round : model.rounds)
        for (std::size_t k = 0; k < round.size(); ++k)
            for (Eigen::Index i = 0; i < rows.rows(); ++i)
                scores(i, static_cast<Eigen::Index>(k)) += model.eta * round[k].leaf_for(rows.row(i)).leaf[0];
    return scores;
}

Matrix predict_proba_gbt(const GbtModel& model, const Matrix& rows) { return nn::softmax_rows(gbt_scores(model, rows)); }

std::vector<int> predict_gbt(const GbtModel& model, const Matrix& rows) {
    const Matrix p = predict_proba_gbt(model, rows);
    std::vector<int> out;
    for (Eigen::Index i = 0; i < p.rows(); ++i) out.push_back(argmax(p.row(i)));
    return out;
}

void write_tree(nn::ContainerWriter& w, const Tree& t) {
    w.u64(t.nodes.size());
    for (const auto& n : t.nodes) {
        w.u32(static_cast<std::uint32_t>(n.feature + 1));
        w.f64(n.threshold);
        w.u32(static_cast<std::uint32_t>(n.left + 1));
        w.u32(static_cast<std::uint32_t>(n.right + 1));
        w.f64s(n.leaf);
    }
}

Tree read_tree(nn::ContainerReader& r) {
    Tree t;
    const auto n = r.u64();
    if (n == 0 || n > (1u << 26)) fail(ErrorCode::Parse, "corrupt tree in container");
    for (std::uint64_t i = 0; i < n; ++i) {
        TreeNode node;
        node.feature = static_cast<int>(r.u32()) - 1;
        node.threshold = r.f64();
        node.left = static_cast<int>(r.u32()) - 1;
        node.right = static_cast<int>(r.u32()) - 1;
        node.leaf = r.f64s();
        if (!node.is_leaf() && (node.left <= 0 || node.right <= 0 || static_cast<std::uint64_t>(node.left) >= n ||
                                static_cast<std::uint64_t>(node.right) >= n))
            fail(ErrorCode::Parse, "corrupt tree links in container");
        t.nodes.push_back(std::move(node));
    }
    return t;
}

void save_rf(const RfModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    nn::ContainerWriter w(out, "rf");
    w.u64(m.n_classes);
    w.u64(m.n_features);
    w.u64(m.trees.size());
    for (const auto& t : m.trees) write_tree(w, t);
    if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

RfModel load_rf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    nn::ContainerReader r(in);
    if (r.kind() != "rf") fail(ErrorCode::Parse, path + " is not a random forest model");
    RfModel m;
    m.n_classes = r.u64();
    m.n_features = r.u64();
    const auto n = r.u64();
    if (n > (1u << 20)) fail(ErrorCode::Parse, "corrupt tree count");
    for (std::uint64_t i = 0; i < n; ++i) m.trees.push_back(read_tree(r));
    return m;
}

void save_gbt(const GbtModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    nn::ContainerWriter w(out, "xgb");
    w.u64(m.n_classes);
    w.u64(m.n_features);
    w.f64(m.eta);
    w.f64s(m.train_loss);
    w.u64(m.rounds.size());
    for (const auto& round : m.rounds)
        for (const auto& t : round) write_tree(w, t);
    if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

GbtModel load_gbt(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    nn::ContainerReader r(in);
    if (r.kind() != "xgb") fail(ErrorCode::Parse, path + " is not a boosted-tree model");
    GbtModel m;
    m.n_classes = r.u64();
    m.n_features = r.u64();
    m.eta = r.f64();
    m.train_loss = r.f64s();
    const auto rounds = r.u64();
    if (rounds > (1u << 20) || m.n_classes > 1024) fail(ErrorCode::Parse, "corrupt boosted model");
    for (std::uint64_t i = 0; i < rounds; ++i) {
        std::vector<Tree> round;
        for (std::size_t k = 0; k < m.n_classes; ++k) round.push_back(read_tree(r));
        m.rounds.push_back(std::move(round));
    }
    return m;
}

}  // namespace itgan::forest
