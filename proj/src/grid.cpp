#include "qmbvp/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace qmbvp {

void VecPath::value_at(double t, std::span<double> out) const {
    const double h = grid_.step();
    double pos = t / h;
    int k = static_cast<int>(pos);
    k = std::clamp(k, 0, grid_.N - 1);
    const double w = (t - grid_.node(k)) / h;
    auto a = at(k);
    auto b = at(k + 1);
    for (int c = 0; c < dim_; ++c) out[c] = (1.0 - w) * a[c] + w * b[c];
}

std::vector<double> VecPath::value_at(double t) const {
    std::vector<double> out(dim_);
    value_at(t, out);
    return out;
}

bool VecPath::all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
}

void require_same_shape(const VecPath& u, const VecPath& v) {
    if (u.dim() != v.dim()) throw ShapeError("paths differ in dimension");
    if (!(u.grid() == v.grid())) throw ShapeError("paths differ in grid");
}

void require_same_shape(const PathPair& a, const PathPair& b) {
    require_same_shape(a.x, b.x);
    require_same_shape(a.y, b.y);
}

bool leq_path(const VecPath& u, const VecPath& v, double slack) {
    require_same_shape(u, v);
    const auto& ru = u.raw();
    const auto& rv = v.raw();
    for (size_t i = 0; i < ru.size(); ++i)
        if (!(ru[i] <= rv[i] + slack)) return false;
    return true;
}

bool leq_pair(const PathPair& a, const PathPair& b, double slack) {
    return leq_path(a.x, b.x, slack) && leq_path(a.y, b.y, slack);
}

PathPair pointwise_min(const PathPair& a, const PathPair& b) {
    require_same_shape(a, b);
    PathPair out = a;
    auto combine = [](VecPath& dst, const VecPath& src) {
        for (int k = 0; k < dst.num_nodes(); ++k)
            for (int c = 0; c < dst.dim(); ++c)
                dst(k, c) = std::min(dst(k, c), src(k, c));
    };
    combine(out.x, b.x);
    combine(out.y, b.y);
    return out;
}

double sup_distance(const VecPath& u, const VecPath& v) {
    require_same_shape(u, v);
    double d = 0.0;
    const auto& ru = u.raw();
    const auto& rv = v.raw();
    for (size_t i = 0; i < ru.size(); ++i) d = std::max(d, std::fabs(ru[i] - rv[i]));
    return d;
}

double sup_distance(const PathPair& a, const PathPair& b) {
    return std::max(sup_distance(a.x, b.x), sup_distance(a.y, b.y));
}

namespace {
void print_g17(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}
}  // namespace

void write_csv(const PathPair& pair, std::ostream& os) {
    os << "t";
    for (int c = 0; c < pair.x.dim(); ++c) os << ",x" << (c + 1);
    for (int c = 0; c < pair.y.dim(); ++c) os << ",y" << (c + 1);
    os << "\n";
    const Grid& g = pair.grid();
    for (int k = 0; k <= g.N; ++k) {
        print_g17(os, g.node(k));
        for (int c = 0; c < pair.x.dim(); ++c) {
            os << ",";
            print_g17(os, pair.x(k, c));
        }
        for (int c = 0; c < pair.y.dim(); ++c) {
            os << ",";
            print_g17(os, pair.y(k, c));
        }
        os << "\n";
    }
}

PathPair read_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw ShapeError("csv: empty input");
    int m = 0, n = 0;
    {
        std::stringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) {
            if (col.rfind('x', 0) == 0) ++m;
            else if (col.rfind('y', 0) == 0) ++n;
        }
    }
    if (m < 1 || n < 1) throw ShapeError("csv: header lacks x/y columns");
    std::vector<double> times;
    std::vector<double> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string cell;
        int idx = 0;
        while (std::getline(ls, cell, ',')) {
            double v = std::stod(cell);
            if (idx == 0) times.push_back(v);
            else rows.push_back(v);
            ++idx;
        }
        if (idx != 1 + m + n) throw ShapeError("csv: row width mismatch");
    }
    const int nodes = static_cast<int>(times.size());
    if (nodes < 3) throw ShapeError("csv: need at least 3 nodes");
    Grid grid(times.back(), nodes - 1);
    VecPath x(grid, m), y(grid, n);
    for (int k = 0; k < nodes; ++k) {
        for (int c = 0; c < m; ++c) x(k, c) = rows[static_cast<size_t>(k) * (m + n) + c];
        for (int c = 0; c < n; ++c) y(k, c) = rows[static_cast<size_t>(k) * (m + n) + m + c];
    }
    return {std::move(x), std::move(y)};
}

}  // namespace qmbvp
