#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace maho {

/// Uniform rectangular grid, endpoints included on both axes.
struct Grid2D {
    int nx = 0, ny = 0;
    double x_min = 0, x_max = 0;
    double y_min = 0, y_max = 0;

    static Grid2D centered(double half_width, int n) {
        return {n, n, -half_width, half_width, -half_width, half_width};
    }

    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dy() const { return (y_max - y_min) / (ny - 1); }
    double x(int i) const { return x_min + i * dx(); }
    double y(int j) const { return y_min + j * dy(); }
    std::size_t size() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }
    bool operator==(const Grid2D&) const = default;
};

inline void validate(const Grid2D& g) {
    if (g.nx < 2 || g.ny < 2)
        throw std::invalid_argument("Grid2D: need at least 2 points per axis");
    if (!(g.x_max > g.x_min) || !(g.y_max > g.y_min))
        throw std::invalid_argument("Grid2D: extents must be increasing");
}

/// Complex field sampled on a Grid2D. Storage is row-major with y fastest:
/// index = ix * ny + iy.
struct WaveField {
    Grid2D grid;
    std::vector<std::complex<double>> data;

    explicit WaveField() = default;
    explicit WaveField(const Grid2D& g) : grid(g), data(g.size()) { validate(g); }

    std::complex<double>& at(int ix, int iy) {
        return data[static_cast<std::size_t>(ix) * grid.ny + iy];
    }
    const std::complex<double>& at(int ix, int iy) const {
        return data[static_cast<std::size_t>(ix) * grid.ny + iy];
    }
};

/// Composite trapezoid weight for index i on an axis of n points.
inline double trapezoid_weight(int i, int n) {
    return (i == 0 || i == n - 1) ? 0.5 : 1.0;
}

/// <a|b> with the 2D trapezoid rule.
inline std::complex<double> inner_product(const WaveField& a, const WaveField& b) {
    if (!(a.grid == b.grid))
        throw std::invalid_argument("inner_product: fields live on different grids");
    std::complex<double> acc = 0.0;
    for (int ix = 0; ix < a.grid.nx; ++ix) {
        const double wx = trapezoid_weight(ix, a.grid.nx);
        for (int iy = 0; iy < a.grid.ny; ++iy) {
            const double wy = trapezoid_weight(iy, a.grid.ny);
            acc += wx * wy * std::conj(a.at(ix, iy)) * b.at(ix, iy);
        }
    }
    return acc * a.grid.dx() * a.grid.dy();
}

/// L2 norm of the field under the trapezoid rule.
inline double field_norm(const WaveField& f) {
    return std::sqrt(std::abs(inner_product(f, f)));
}

/// Fraction of total probability sitting in the outermost `cells` grid
/// lines of the boundary frame. Large values mean the state has reached the
/// edge and the finite window is no longer faithful.
inline double edge_probability_fraction(const WaveField& f, int cells = 3) {
    double total = 0.0, edge = 0.0;
    for (int ix = 0; ix < f.grid.nx; ++ix) {
        const double wx = trapezoid_weight(ix, f.grid.nx);
        const bool x_edge = ix < cells || ix >= f.grid.nx - cells;
        for (int iy = 0; iy < f.grid.ny; ++iy) {
            const double wy = trapezoid_weight(iy, f.grid.ny);
            const double p = wx * wy * std::norm(f.at(ix, iy));
            total += p;
            if (x_edge || iy < cells || iy >= f.grid.ny - cells) edge += p;
        }
    }
    return total > 0.0 ? edge / total : 0.0;
}

} // namespace maho
