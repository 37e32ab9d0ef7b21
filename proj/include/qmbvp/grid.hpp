#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "qmbvp/errors.hpp"

namespace qmbvp {

/// Uniform time grid on [0, T] with N intervals (N+1 nodes).
struct Grid {
    double T = 1.0;
    int N = 2;

    Grid() = default;
    Grid(double horizon, int intervals) : T(horizon), N(intervals) {
        if (!(T > 0.0)) throw PreconditionError("Grid: horizon must be positive");
        if (N < 2) throw PreconditionError("Grid: need at least 2 intervals");
    }

    [[nodiscard]] double step() const { return T / N; }
    [[nodiscard]] double node(int k) const { return (k == N) ? T : T * k / N; }
    [[nodiscard]] int num_nodes() const { return N + 1; }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.T == b.T && a.N == b.N;
    }
};

/// Vector-valued path sampled on a grid, piecewise-linear between nodes.
class VecPath {
public:
    VecPath() = default;
    VecPath(Grid grid, int dim, double fill = 0.0)
        : grid_(grid), dim_(dim), values_(static_cast<size_t>(grid.num_nodes()) * dim, fill) {
        if (dim < 1) throw PreconditionError("VecPath: dim must be >= 1");
    }

    [[nodiscard]] const Grid& grid() const { return grid_; }
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] int num_nodes() const { return grid_.num_nodes(); }

    [[nodiscard]] std::span<double> at(int k) {
        return {values_.data() + static_cast<size_t>(k) * dim_, static_cast<size_t>(dim_)};
    }
    [[nodiscard]] std::span<const double> at(int k) const {
        return {values_.data() + static_cast<size_t>(k) * dim_, static_cast<size_t>(dim_)};
    }
    [[nodiscard]] double operator()(int k, int c) const {
        return values_[static_cast<size_t>(k) * dim_ + c];
    }
    [[nodiscard]] double& operator()(int k, int c) {
        return values_[static_cast<size_t>(k) * dim_ + c];
    }

    /// Linear interpolation at an arbitrary time in [0, T].
    void value_at(double t, std::span<double> out) const;
    [[nodiscard]] std::vector<double> value_at(double t) const;

    [[nodiscard]] bool all_finite() const;

    [[nodiscard]] const std::vector<double>& raw() const { return values_; }

private:
    Grid grid_;
    int dim_ = 0;
    std::vector<double> values_;
};

/// The central state object: an (x, y) trajectory pair on a shared grid.
struct PathPair {
    VecPath x;
    VecPath y;

    PathPair() = default;
    PathPair(VecPath x_path, VecPath y_path) : x(std::move(x_path)), y(std::move(y_path)) {
        if (!(x.grid() == y.grid()))
            throw ShapeError("PathPair: x and y must share a grid");
    }

    [[nodiscard]] const Grid& grid() const { return x.grid(); }
};

/// Boundary data: x prescribed at t = 0, y prescribed at t = T.
struct BoundaryData {
    std::vector<double> x_bar;
    std::vector<double> y_bar;
};

void require_same_shape(const VecPath& u, const VecPath& v);
void require_same_shape(const PathPair& a, const PathPair& b);

/// Componentwise u <= v + slack at every node.
bool leq_path(const VecPath& u, const VecPath& v, double slack);
bool leq_pair(const PathPair& a, const PathPair& b, double slack);

/// Nodewise componentwise minimum of two pairs.
PathPair pointwise_min(const PathPair& a, const PathPair& b);

/// Sup norm of the nodewise difference.
double sup_distance(const VecPath& u, const VecPath& v);
double sup_distance(const PathPair& a, const PathPair& b);

/// CSV with header "t,x1,...,xm,y1,...,yn", one row per node, %.17g precision.
void write_csv(const PathPair& pair, std::ostream& os);
PathPair read_csv(std::istream& is);

}  // namespace qmbvp
