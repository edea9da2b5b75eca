#include "itgan/viz.hpp"

#include "itgan/csv.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace itgan::viz {

namespace {

double quantile(std::vector<double> sorted_values, double q) {
    const double pos = q * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted_values.size() - 1);
    return sorted_values[lo] + (pos - static_cast<double>(lo)) * (sorted_values[hi] - sorted_values[lo]);
}

std::string num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

Curve kde_curve(const std::vector<double>& values, std::size_t grid_points) {
    if (values.empty()) fail(ErrorCode::InvalidArgument, "kde needs at least one value");
    if (grid_points < 2) fail(ErrorCode::InvalidArgument, "kde grid needs at least two points");
    for (double v : values)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "kde input contains a non-finite value");
    std::vector<double> s = values;
    std::sort(s.begin(), s.end());
    Curve c;
    if (s.front() == s.back()) {
        c.spike = true;
        c.grid = {s.front()};
        c.density = {1.0};
        return c;
    }
    const double n = static_cast<double>(s.size());
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    const double sigma = std::sqrt(var / (n - 1.0));
    const double iqr = quantile(s, 0.75) - quantile(s, 0.25);
    const double spread = iqr > 0.0 ? std::min(sigma, iqr / 1.34) : sigma;
    const double h = 0.9 * spread * std::pow(n, -0.2);
    c.bandwidth = h;
    const double lo = s.front() - 3.0 * h, hi = s.back() + 3.0 * h;
    const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
    c.grid.resize(grid_points);
    c.density.resize(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        // interpolate from both ends so the grid is exactly symmetric
        const double t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
        const double x = t < 0.5 ? lo + t * (hi - lo) : hi - (1.0 - t) * (hi - lo);
        double d = 0.0;
        for (double v : s) {
            const double u = (x - v) / h;
            d += std::exp(-0.5 * u * u);
        }
        c.grid[i] = x;
        c.density[i] = d * norm;
    }
    return c;
}

double integrate(const Curve& c) {
    if (c.spike) return c.density.front();
    double total = 0.0;
    for (std::size_t i = 1; i < c.grid.size(); ++i)
        total += 0.5 * (c.density[i] + c.density[i - 1]) * (c.grid[i] - c.grid[i - 1]);
    return total;
}

Pca pca_project(const Matrix& data, std::size_t k) {
    if (data.rows() < 2) fail(ErrorCode::InvalidArgument, "pca needs at least two rows");
    if (k > static_cast<std::size_t>(data.cols()))
        fail(ErrorCode::InvalidArgument, "pca: k exceeds the feature count");
    Pca out;
    out.mean = data.colwise().mean();
    const Matrix centered = data.rowwise() - out.mean;
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) fail(ErrorCode::Internal, "pca eigendecomposition failed");
    const auto d = data.cols();
    out.components.resize(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        // Eigen sorts ascending; flip to descending
        const Eigen::Index src = d - 1 - j;
        out.eigenvalues.push_back(std::max(0.0, solver.eigenvalues()(src)));
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index big = 0;
        for (Eigen::Index i = 1; i < d; ++i)
            if (std::abs(v(i)) > std::abs(v(big)) + 1e-12) big = i;
        if (v(big) < 0) v = -v;
        out.components.col(j) = v;
    }
    out.projected = centered * out.components.leftCols(static_cast<Eigen::Index>(k));
    return out;
}

Matrix tsne_affinities(const Matrix& data, double perplexity) {
    const Eigen::Index n = data.rows();
    const Eigen::VectorXd sq = data.rowwise().squaredNorm();
    Matrix dist = (-2.0 * data * data.transpose()).colwise() + sq;
    dist.rowwise() += sq.transpose();
    dist = dist.cwiseMax(0.0);
    const double target = std::log(perplexity);
    Matrix p = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1.0, lo = -1.0, hi = -1.0;  // negative = unbounded
        for (int it = 0; it < 50; ++it) {
            double sum = 0.0, dsum = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                const double e = std::exp(-dist(i, j) * beta);
                p(i, j) = e;
                sum += e;
                dsum += dist(i, j) * e;
            }
            if (sum <= 0.0) {  // beta far too large
                hi = beta;
                beta = lo < 0 ? beta / 2.0 : (beta + lo) / 2.0;
                continue;
            }
            const double entropy = std::log(sum) + beta * dsum / sum;
            p.row(i) /= sum;
            const double diff = entropy - target;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0) {
                lo = beta;
                beta = hi < 0 ? beta * 2.0 : (beta + hi) / 2.0;
            } else {
                hi = beta;
                beta = lo < 0 ? beta / 2.0 : (beta + lo) / 2.0;
            }
        }
        p(i, i) = 0.0;
        const double s = p.row(i).sum();
        if (s > 0) p.row(i) /= s;
    }
    Matrix joint = (p + p.transpose()) / (2.0 * static_cast<double>(n));
    return joint;
}

namespace {

// Student-t numerators with a zero diagonal.
Matrix t_kernel(const Matrix& y) {
    const Eigen::VectorXd sq = y.rowwise().squaredNorm();
    Matrix d = (-2.0 * y * y.transpose()).colwise() + sq;
    d.rowwise() += sq.transpose();
    Matrix num = (1.0 + d.cwiseMax(0.0).array()).inverse().matrix();
    num.diagonal().setZero();
    return num;
}

double kl_divergence(const Matrix& p, const Matrix& num) {
    const double z = num.sum();
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (i == j || p(i, j) <= 0.0) continue;
            const double q = std::max(num(i, j) / z, 1e-300);
            kl += p(i, j) * std::log(p(i, j) / q);
        }
    return kl;
}

}  // namespace

Tsne tsne_embed(const Matrix& data, const TsneParams& params) {
    const Eigen::Index n = data.rows();
    if (n < 4) fail(ErrorCode::InvalidArgument, "t-SNE needs at least 4 rows");
    if (params.perplexity <= 0) fail(ErrorCode::InvalidArgument, "perplexity must be positive");
    Tsne out;
    out.perplexity = params.perplexity;
    if (static_cast<double>(n) < 3.0 * params.perplexity) {
        out.perplexity = static_cast<double>(n - 1) / 3.0;
        warn("t-SNE perplexity lowered to " + num(out.perplexity) + " for " + std::to_string(n) + " rows");
    }
    const Matrix p = tsne_affinities(data, out.perplexity);

    Matrix y(n, 2);
    if (data.cols() >= 2) {
        y = pca_project(data, 2).projected;
    } else {
        y.col(0) = data.col(0).array() - data.col(0).mean();
        y.col(1).setZero();
    }
    Rng rng(params.seed);
    for (Eigen::Index c = 0; c < 2; ++c) {
        const double sd = std::sqrt((y.col(c).array() - y.col(c).mean()).square().sum() / static_cast<double>(n));
        if (sd > 1e-12) {
            y.col(c) *= 1e-4 / sd;
        } else {  // degenerate axis: seeded jitter
            for (Eigen::Index i = 0; i < n; ++i) y(i, c) = 1e-4 * rng.normal();
        }
    }
    out.initial_kl = kl_divergence(p, t_kernel(y));

    Matrix update = Matrix::Zero(n, 2), gains = Matrix::Ones(n, 2);
    for (std::size_t it = 0; it < params.iterations; ++it) {
        const double exag = it < params.exaggeration_until ? params.exaggeration : 1.0;
        const double momentum = it < params.momentum_switch ? params.momentum_initial : params.momentum_final;
        const Matrix num = t_kernel(y);
        const double z = num.sum();
        // W_ij = (exag * P_ij - Q_ij) * num_ij; grad_i = 4 sum_j W_ij (y_i - y_j)
        const Matrix w = ((exag * p).array() - num.array() / z).matrix().cwiseProduct(num);
        const Eigen::VectorXd wsum = w.rowwise().sum();
        const Matrix grad = 4.0 * (wsum.asDiagonal() * y - w * y);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index c = 0; c < 2; ++c) {
                const bool same = (grad(i, c) > 0) == (update(i, c) > 0);
                gains(i, c) = std::max(0.01, same ? gains(i, c) * 0.8 : gains(i, c) + 0.2);
            }
        update = momentum * update - params.learning_rate * gains.cwiseProduct(grad);
        y += update;
        y.rowwise() -= y.colwise().mean();
    }
    out.final_kl = kl_divergence(p, t_kernel(y));
    if (!y.allFinite()) fail(ErrorCode::Internal, "t-SNE diverged");
    out.embedding = std::move(y);
    return out;
}

std::string csv_sidecar_path(const std::string& svg_path) {
    return std::filesystem::path(svg_path).replace_extension(".csv").string();
}

void export_plot(const std::vector<Series>& series, PlotKind kind, const std::string& svg_path,
                 const std::string& title) {
    if (series.empty()) fail(ErrorCode::InvalidArgument, "nothing to plot");
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) fail(ErrorCode::InvalidArgument, "series '" + s.name + "' has mismatched x/y");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                fail(ErrorCode::InvalidArgument, "series '" + s.name + "' has a non-finite point");
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!(xmin <= xmax)) xmin = xmax = 0.0;
    if (!(ymin <= ymax)) ymin = ymax = 0.0;
    if (kind == PlotKind::Kde) ymin = std::min(ymin, 0.0);
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }

    constexpr double W = 640, H = 420, L = 50, R = 150, T = 30, B = 40;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << L << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << xml_escape(title)
        << "</text>\n"
        << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"black\"/>\n"
        << "<text x=\"" << L << "\" y=\"" << H - 20 << "\" font-family=\"sans-serif\" font-size=\"10\">"
        << fixed(xmin) << "</text>\n"
        << "<text x=\"" << W - R << "\" y=\"" << H - 20 << "\" font-family=\"sans-serif\" font-size=\"10\" "
        << "text-anchor=\"end\">" << fixed(xmax) << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = palette[si % std::size(palette)];
        svg << "<g class=\"series\" data-name=\"" << xml_escape(s.name) << "\">\n";
        if (kind == PlotKind::Kde) {
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) svg << (i ? " " : "") << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i]));
            svg << "\"/>\n";
        } else {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                svg << "<circle cx=\"" << fixed(px(s.x[i])) << "\" cy=\"" << fixed(py(s.y[i])) << "\" r=\"2\" fill=\""
                    << color << "\" fill-opacity=\"0.6\"/>\n";
        }
        svg << "</g>\n";
        const double ly = T + 15 + 18 * static_cast<double>(si);
        svg << "<rect x=\"" << W - R + 10 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << color
            << "\"/><text x=\"" << W - R + 25 << "\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"11\">"
            << xml_escape(s.name) << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(svg_path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + svg_path);
    out << svg.str();
    if (!out) fail(ErrorCode::Io, "write failed for " + svg_path);

    const auto csv_path = csv_sidecar_path(svg_path);
    std::ofstream c(csv_path, std::ios::binary);
    if (!c) fail(ErrorCode::Io, "cannot write " + csv_path);
    c << "series,x,y\n";
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            c << csv::join_record({s.name, num(s.x[i]), num(s.y[i])}) << '\n';
    if (!c) fail(ErrorCode::Io, "write failed for " + csv_path);
}

}  // namespace itgan::viz
