#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "birkhoff/error.hpp"

namespace birkhoff {

struct ContractionOptions {
    // Common Lipschitz constant of every map, in [0, 1).
    double lipschitz = 0.5;
    double tol = 1e-10;
    std::size_t max_iterations = 100000;
    // Optional bound eps(k) >= sup distance between T_k and the limit map on the
    // region visited; when absent the maps are assumed to have settled.
    std::function<double(std::size_t)> deviation;
    bool keep_iterates = false;
};

template <class Point>
struct ContractionResult {
    Point limit;
    std::size_t iterations = 0;
    double error_bound = 0.0;
    std::vector<Point> iterates;
};

// Iterates x_k = T_k(x_{k-1}) for maps that are all lipschitz-contracting and
// converge uniformly to a limit map. Stops once the a-posteriori bound
//   (eps_k + L d(x_k, x_{k-1})) / (1 - L)
// on the distance to the limit map's fixed point drops below tol.
template <class Point, class MapSeq, class Distance>
ContractionResult<Point> iterate_varying_contractions(MapSeq&& maps, Point start, Distance&& distance,
                                                      const ContractionOptions& options = {}) {
    const double L = options.lipschitz;
    if (!(L >= 0.0) || !(L < 1.0)) throw ConfigError("contraction constant must lie in [0, 1)");
    if (!(options.tol > 0.0)) throw ConfigError("contraction tolerance must be positive");
    ContractionResult<Point> result{start, 0, 0.0, {}};
    if (options.keep_iterates) result.iterates.push_back(start);
    Point x = std::move(start);
    for (std::size_t k = 1; k <= options.max_iterations; ++k) {
        Point next = maps(k, x);
        const double step = distance(next, x);
        const double eps = options.deviation ? options.deviation(k) : 0.0;
        x = std::move(next);
        if (options.keep_iterates) result.iterates.push_back(x);
        const double bound = (eps + L * step) / (1.0 - L);
        result.iterations = k;
        result.error_bound = bound;
        if (bound < options.tol) {
            result.limit = x;
            return result;
        }
    }
    throw ConvergenceError("varying-contraction iteration did not settle within " +
                           std::to_string(options.max_iterations) + " steps");
}

}  // namespace birkhoff
