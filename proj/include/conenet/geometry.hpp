#pragma once

// Decision regions of a single neuron a = g(w·x + b).
//
//   C+  = { x : g(w·x + b) > 0 }   a half-space for ReLU-like g, a hyperstrip
//                                   0 < w·x + b < delta for cone-like g
//   C-  = { x : g(w·x + b) < 0 }
//   B(g) = { x : g(w·x + b) = 0 }   one hyperplane, or two parallel ones for cones

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "conenet/activations.hpp"
#include "conenet/error.hpp"
#include "conenet/network.hpp"

namespace conenet {

inline constexpr double kDefaultBoundaryTol = 1e-9;

class NeuronGeometry {
public:
    NeuronGeometry(std::vector<double> w, double b, Activation activation)
        : w_(std::move(w)), b_(b), activation_(activation) {
        bool nonzero = false;
        for (double v : w_) {
            if (!std::isfinite(v)) throw ValidationError("neuron weights must be finite");
            nonzero = nonzero || v != 0.0;
        }
        if (!nonzero) throw ValidationError("neuron weight vector must have a nonzero entry");
        if (!std::isfinite(b_)) throw ValidationError("neuron bias must be finite");
        validate(activation_);
    }

    [[nodiscard]] std::span<const double> weights() const noexcept { return w_; }
    [[nodiscard]] double bias() const noexcept { return b_; }
    [[nodiscard]] const Activation& activation() const noexcept { return activation_; }
    [[nodiscard]] std::size_t dim() const noexcept { return w_.size(); }

    /// z = w·x + b
    [[nodiscard]] double pre_activation(std::span<const double> x) const {
        if (x.size() != w_.size()) {
            throw DimensionError("point has dimension " + std::to_string(x.size()) + ", neuron expects " +
                                 std::to_string(w_.size()));
        }
        double z = b_;
        for (std::size_t i = 0; i < x.size(); ++i) z += w_[i] * x[i];
        return z;
    }

private:
    std::vector<double> w_;
    double b_;
    Activation activation_;
};

/// Numeric codes double as raster class indices (see raster_regions).
enum class RegionLabel : std::uint8_t { NegativeSet = 0, Boundary = 1, PositiveSet = 2 };

[[nodiscard]] inline std::string_view region_name(RegionLabel label) {
    switch (label) {
        case RegionLabel::NegativeSet: return "negative";
        case RegionLabel::Boundary: return "boundary";
        case RegionLabel::PositiveSet: return "positive";
    }
    return "?";
}

inline RegionLabel classify_point(const NeuronGeometry& geom, std::span<const double> x,
                                  double boundary_tol = kDefaultBoundaryTol) {
    if (!(boundary_tol >= 0.0)) throw ValidationError("boundary_tol must be >= 0");
    const double g = forward(geom.activation(), geom.pre_activation(x));
    if (std::abs(g) <= boundary_tol) return RegionLabel::Boundary;
    return g > 0.0 ? RegionLabel::PositiveSet : RegionLabel::NegativeSet;
}

/// The plane { x : w·x + b = level }.
struct Hyperplane {
    std::vector<double> normal;
    double bias = 0.0;
    double level = 0.0;
};

/// Boundary planes in the neuron's own (w, b) frame. Cone kinds give the two
/// planes at the ends of positive_interval; every other kind with a zero gives
/// the single plane w·x + b = 0.
inline std::vector<Hyperplane> boundary_hyperplanes(const NeuronGeometry& geom) {
    const auto& act = geom.activation();
    std::vector<double> normal(geom.weights().begin(), geom.weights().end());
    if (auto strip = positive_interval(act)) {
        return {Hyperplane{normal, geom.bias(), strip->first}, Hyperplane{normal, geom.bias(), strip->second}};
    }
    if (act.kind == Kind::Sigmoid || act.kind == Kind::Softplus) {
        throw NoBoundaryError(std::string(kind_name(act.kind)) + " is never zero, so the neuron has no boundary");
    }
    return {Hyperplane{std::move(normal), geom.bias(), 0.0}};
}

struct Bounds {
    double xmin = 0.0;
    double xmax = 1.0;
    double ymin = 0.0;
    double ymax = 1.0;
};

/// Row-major label grid. Row 0 is the top edge (y = ymax), column 0 the left edge
/// (x = xmin), so the grid reads like an image of the plane.
struct RegionGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t class_count = 0;
    std::vector<std::size_t> cells;

    [[nodiscard]] std::size_t at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
};

namespace detail {
inline void check_raster_args(const Bounds& bounds, std::size_t resolution) {
    if (resolution < 2) throw ValidationError("raster resolution must be at least 2");
    if (!(bounds.xmin < bounds.xmax) || !(bounds.ymin < bounds.ymax) || !std::isfinite(bounds.xmin) ||
        !std::isfinite(bounds.xmax) || !std::isfinite(bounds.ymin) || !std::isfinite(bounds.ymax)) {
        throw DomainError("raster bounds do not form a nonempty rectangle");
    }
}
}  // namespace detail

/// Lattice coordinate `index` of `resolution` evenly spaced samples on [lo, hi], endpoints included.
[[nodiscard]] inline double lattice(double lo, double hi, std::size_t index, std::size_t resolution) {
    return lo + (hi - lo) * static_cast<double>(index) / static_cast<double>(resolution - 1);
}

[[nodiscard]] inline std::pair<double, double> raster_point(const Bounds& bounds, std::size_t row, std::size_t col,
                                                            std::size_t resolution) {
    return {lattice(bounds.xmin, bounds.xmax, col, resolution),
            lattice(bounds.ymax, bounds.ymin, row, resolution)};
}

/// Cells carry RegionLabel codes (class_count 3).
inline RegionGrid raster_regions(const NeuronGeometry& geom, const Bounds& bounds, std::size_t resolution,
                                 double boundary_tol = kDefaultBoundaryTol) {
    detail::check_raster_args(bounds, resolution);
    if (geom.dim() != 2) throw DimensionError("raster_regions needs a 2-input neuron");
    RegionGrid grid{resolution, resolution, 3, std::vector<std::size_t>(resolution * resolution)};
    for (std::size_t r = 0; r < resolution; ++r) {
        for (std::size_t c = 0; c < resolution; ++c) {
            const auto [x, y] = raster_point(bounds, r, c, resolution);
            const double p[2] = {x, y};
            grid.cells[r * resolution + c] = static_cast<std::size_t>(classify_point(geom, p, boundary_tol));
        }
    }
    return grid;
}

/// Cells carry the network's argmax class.
inline RegionGrid raster_regions(const Network& net, const Bounds& bounds, std::size_t resolution) {
    detail::check_raster_args(bounds, resolution);
    if (net.input_dim() != 2) throw DimensionError("raster_regions needs a 2-input network");
    Matrix points(2, resolution * resolution);
    for (std::size_t r = 0; r < resolution; ++r) {
        for (std::size_t c = 0; c < resolution; ++c) {
            const auto [x, y] = raster_point(bounds, r, c, resolution);
            points(0, r * resolution + c) = x;
            points(1, r * resolution + c) = y;
        }
    }
    return RegionGrid{resolution, resolution, net.class_count(), predict_classes(net, points)};
}

}  // namespace conenet
