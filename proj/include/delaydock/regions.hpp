#pragma once

// Critical-boundary curves and classified stability grids in the (h, b),
// (h, k), (h, m) planes. Boundaries are direct evaluations of the critical
// delay, which is explicit in every parameter; no contouring is involved.

#include <string>
#include <utility>
#include <vector>

#include "delaydock/io.hpp"
#include "delaydock/pade.hpp"
#include "delaydock/pole_location.hpp"
#include "delaydock/plant.hpp"

namespace delaydock {

/// Parameter carried on the y axis of a stability plane (x axis is always h).
enum class PlaneAxis { Damping, Stiffness, Mass };

inline const char* to_string(PlaneAxis a) {
    switch (a) {
        case PlaneAxis::Damping: return "b";
        case PlaneAxis::Stiffness: return "k";
        default: return "m";
    }
}

enum class Method { PoleLocation, Pade };

inline const char* to_string(Method m) { return m == Method::Pade ? "pade" : "pole-location"; }

namespace detail {

inline PlantParams substitute(const PlantParams& base, PlaneAxis axis, double y) {
    switch (axis) {
        case PlaneAxis::Damping: return base.with_b(y);
        case PlaneAxis::Stiffness: return base.with_k(y);
        default: return base.with_m(y);
    }
}

inline double boundary_delay(const PlantParams& p, Method method) {
    // pade_critical_delay throws for b = 0; the caller records the skip
    if (method == Method::Pade) return pade_critical_delay(p);
    return critical_delay(p);
}

}  // namespace detail

/// Critical boundary in one (h, y) plane: points (h_c, y) sampled over the
/// y range, sorted by h. Out-of-domain samples are skipped and recorded in
/// `warnings`.
struct BoundaryCurve {
    PlaneAxis y_axis;
    Method method;
    PlantParams fixed;  ///< supplies the two held parameters (y field unused)
    std::vector<std::pair<double, double>> points;  ///< (h, y)
    std::vector<std::string> warnings;
};

inline BoundaryCurve boundary_curve(PlaneAxis y_axis, const PlantParams& fixed, double y_from,
                                    double y_to, int samples, Method method) {
    if (samples < 2) throw std::domain_error("boundary_curve: need samples >= 2");
    if (!(y_from <= y_to)) throw std::domain_error("boundary_curve: need y_from <= y_to");
    BoundaryCurve curve{y_axis, method, fixed, {}, {}};
    curve.points.resize(static_cast<std::size_t>(samples),
                        {std::numeric_limits<double>::quiet_NaN(), 0.0});
    io::parallel_for(static_cast<std::size_t>(samples), [&](std::size_t i) {
        const double y = y_from + (y_to - y_from) * static_cast<double>(i) / (samples - 1);
        try {
            const PlantParams p = detail::substitute(fixed, y_axis, y);
            curve.points[i] = {detail::boundary_delay(p, method), y};
        } catch (const std::exception&) {
            curve.points[i] = {std::numeric_limits<double>::quiet_NaN(), y};
        }
    });
    std::vector<std::pair<double, double>> kept;
    kept.reserve(curve.points.size());
    for (const auto& pt : curve.points) {
        if (std::isfinite(pt.first))
            kept.push_back(pt);
        else
            curve.warnings.push_back(std::string("skipped out-of-domain sample ") +
                                     to_string(y_axis) + "=" + io::csv_num(pt.second));
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    curve.points = std::move(kept);
    return curve;
}

/// CSV for one curve: columns h,<y>.
inline std::string to_csv(const BoundaryCurve& curve) {
    std::string out = std::string("h,") + to_string(curve.y_axis) + "\n";
    for (const auto& [h, y] : curve.points) out += io::csv_num(h) + "," + io::csv_num(y) + "\n";
    return out;
}

/// Stability verdicts over an (h, y) rectangle, row-major with h fastest.
struct StabilityGrid {
    PlaneAxis y_axis;
    Method method;
    std::vector<double> h_values;
    std::vector<double> y_values;
    std::vector<Stability> cells;  ///< size nx*ny, index = iy*nx + ix

    Stability at(int ix, int iy) const { return cells[static_cast<std::size_t>(iy) * h_values.size() + ix]; }
};

inline StabilityGrid classify_grid(const PlantParams& fixed, double h_from, double h_to, int nx,
                                   PlaneAxis y_axis, double y_from, double y_to, int ny,
                                   Method method) {
    if (nx < 2 || ny < 2) throw std::domain_error("classify_grid: need nx, ny >= 2");
    if (!(h_from <= h_to) || h_from < 0.0) throw std::domain_error("classify_grid: bad h range");
    StabilityGrid grid{y_axis, method, {}, {}, {}};
    for (int i = 0; i < nx; ++i)
        grid.h_values.push_back(h_from + (h_to - h_from) * static_cast<double>(i) / (nx - 1));
    for (int j = 0; j < ny; ++j)
        grid.y_values.push_back(y_from + (y_to - y_from) * static_cast<double>(j) / (ny - 1));
    grid.cells.resize(static_cast<std::size_t>(nx) * ny);
    io::parallel_for(grid.cells.size(), [&](std::size_t idx) {
        const int ix = static_cast<int>(idx % static_cast<std::size_t>(nx));
        const int iy = static_cast<int>(idx / static_cast<std::size_t>(nx));
        const PlantParams p =
            detail::substitute(fixed.with_h(grid.h_values[ix]), y_axis, grid.y_values[iy]);
        grid.cells[idx] = (method == Method::Pade ? classify_pade(p) : classify(p)).state;
    });
    return grid;
}

/// CSV for a grid: columns h,<y>,verdict with verdict in {S,N,U}; rows in
/// cell order (h fastest).
inline std::string to_csv(const StabilityGrid& grid) {
    std::string out = std::string("h,") + to_string(grid.y_axis) + ",verdict\n";
    for (std::size_t iy = 0; iy < grid.y_values.size(); ++iy)
        for (std::size_t ix = 0; ix < grid.h_values.size(); ++ix) {
            out += io::csv_num(grid.h_values[ix]) + "," + io::csv_num(grid.y_values[iy]) + ",";
            out += verdict_code(grid.cells[iy * grid.h_values.size() + ix]);
            out += '\n';
        }
    return out;
}

/// Family of boundary curves, one per value of a swept third parameter
/// (the sensitivity plots of the stability planes).
inline std::vector<std::pair<double, BoundaryCurve>> sensitivity_family(
    PlaneAxis y_axis, const PlantParams& fixed, double y_from, double y_to, int samples,
    PlaneAxis sweep_axis, const std::vector<double>& sweep_values, Method method) {
    if (sweep_values.empty()) throw std::domain_error("sensitivity_family: empty sweep list");
    if (sweep_axis == y_axis)
        throw std::domain_error("sensitivity_family: sweep axis must differ from y axis");
    std::vector<std::pair<double, BoundaryCurve>> family;
    family.reserve(sweep_values.size());
    for (double v : sweep_values) {
        const PlantParams base = detail::substitute(fixed, sweep_axis, v);
        family.emplace_back(v, boundary_curve(y_axis, base, y_from, y_to, samples, method));
    }
    return family;
}

/// Long-format CSV for a family: columns <sweep>,h,<y>.
inline std::string to_csv(const std::vector<std::pair<double, BoundaryCurve>>& family,
                          PlaneAxis sweep_axis) {
    std::string out;
    if (family.empty()) return out;
    out = std::string(to_string(sweep_axis)) + ",h," + to_string(family.front().second.y_axis) + "\n";
    for (const auto& [v, curve] : family)
        for (const auto& [h, y] : curve.points)
            out += io::csv_num(v) + "," + io::csv_num(h) + "," + io::csv_num(y) + "\n";
    return out;
}

}  // namespace delaydock
