#pragma once

#include "itgan/common.hpp"

#include <string>
#include <vector>

namespace itgan::viz {

struct Curve {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
    bool spike = false;  // constant input: a single unit-mass point at the value
};

// Gaussian KDE with Silverman's bandwidth; the grid spans [min - 3h, max + 3h].
// Constant input yields the spike representation: grid {v}, density {1}.
Curve kde_curve(const std::vector<double>& values, std::size_t grid_points = 256);

// Trapezoid rule; spike curves integrate to their single mass.
double integrate(const Curve& c);

struct Pca {
    Matrix projected;                  // n x k
    std::vector<double> eigenvalues;   // all of them, descending
    Matrix components;                 // d x d, column j = j-th principal axis
    Eigen::RowVectorXd mean;
};

// Covariance uses the n - 1 denominator.
Pca pca_project(const Matrix& data, std::size_t k = 2);

struct TsneParams {
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double learning_rate = 200.0;
    double exaggeration = 12.0;
    std::size_t exaggeration_until = 250;
    double momentum_initial = 0.5;
    double momentum_final = 0.8;
    std::size_t momentum_switch = 250;
    std::uint64_t seed = 0;
};

struct Tsne {
    Matrix embedding;  // n x 2
    double initial_kl = 0.0;
    double final_kl = 0.0;
    double perplexity = 0.0;  // after any automatic lowering
};

// Symmetrized joint affinities P (sums to 1) for the given perplexity.
Matrix tsne_affinities(const Matrix& data, double perplexity);

Tsne tsne_embed(const Matrix& data, const TsneParams& params);

enum class PlotKind { Kde, Scatter };

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

// Writes an SVG and a CSV sidecar (path with .csv extension) holding the
// plotted points as series,x,y rows.
void export_plot(const std::vector<Series>& series, PlotKind kind, const std::string& svg_path,
                 const std::string& title = "");

std::string csv_sidecar_path(const std::string& svg_path);

}  // namespace itgan::viz
