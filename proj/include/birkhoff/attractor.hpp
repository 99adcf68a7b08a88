#pragma once

#include <cstddef>
#include <array>
#include <functional>
#include <span>
#include <vector>

#include "birkhoff/bitmap.hpp"
#include "birkhoff/flow.hpp"
#include "birkhoff/geometry.hpp"
#include "birkhoff/grid_function.hpp"

namespace birkhoff {

// A map of the annulus acting in place on batches of lifted points. Points
// whose image cannot be computed come back as NaN.
struct AnnulusMap {
    std::function<void(std::span<double> theta, std::span<double> p, Direction direction)> apply;
    double period = 1.0;
};

AnnulusMap annulus_map(const TimeMap& map, std::size_t workers = 1);

enum class C0Method {
    // cell-level recursion on preimage hulls; an outer approximation
    cell_recursion,
    // a cell survives when its centre stays in the domain for n_max backward steps
    escape_time,
};

struct C0Options {
    std::size_t n_max = 60;
    C0Method method = C0Method::cell_recursion;
    // theta samples per boundary row for the absorbing check
    std::size_t boundary_samples = 4096;
    bool stop_at_fixpoint = true;
};

struct C0Result {
    AnnulusBitmap cells;
    std::size_t iterations = 0;
    bool fixpoint = false;
    std::vector<std::size_t> counts;  // occupied cells after each step
};

// Throws DomainNotAbsorbing unless the forward images of points on both p
// edges of the domain land strictly inside it.
void check_absorbing(const AnnulusMap& map, const BitmapGeometry& domain, std::size_t samples = 4096);

// Cells meeting the n_max-th image of the domain. With cell_recursion, step k
// keeps a cell when the preimage of the cell (the hull of its preimage
// corners) meets a cell kept at step k-1; non-finite corners are dropped.
// escape_time samples only cell centres, so thin sets with strong backward
// expansion come out empty.
C0Result compute_c0(const AnnulusMap& map, const BitmapGeometry& domain, const C0Options& options = {});

struct C1Result {
    AnnulusBitmap cells;
    AnnulusBitmap upper;  // complement component reached from the top edge
    AnnulusBitmap lower;  // complement component reached from the bottom edge
    // True when the two complement components are different, i.e. the set separates the annulus.
    bool separates = false;
    std::size_t pockets = 0;           // free cells reached from neither edge
    std::size_t pockets_resolved = 0;  // of those, labelled through the map
};

enum class HairRule {
    // keep cells whose square neighbourhood of the given radius meets both components
    adjacency,
    // keep cells equidistant (Chebyshev, within one cell) from both components, and
    // cells touching neither; works for bands several cells thick, where adjacency
    // with a small radius loses the band
    medial,
};

struct C1Options {
    HairRule rule = HairRule::medial;
    std::size_t radius = 1;  // adjacency rule only
    std::size_t pocket_steps = 12;
};

// Removes the cells of c0 that are not adherent to both the upper and the lower
// complementary component.
C1Result compute_c1(const AnnulusBitmap& c0, const C1Options& options = {});
// Same, but free pockets cut off from both edges (a thin channel closed at the
// grid scale) are first assigned to the component their backward images reach.
C1Result compute_c1(const AnnulusBitmap& c0, const AnnulusMap& map, const C1Options& options = {});

struct HausdorffResult {
    double forward = 0.0;   // sup over a of d(a, B)
    double backward = 0.0;  // sup over b of d(b, A)
    double distance = 0.0;
    Point2 forward_witness;
    Point2 backward_witness;
};

// Nearest-neighbour queries on a point set with x periodic (period 0 means not periodic).
class PointIndex {
public:
    PointIndex(std::vector<Point2> points, double period, double bucket);
    // Distance to the nearest indexed point and that point.
    std::pair<double, Point2> nearest(Point2 query) const;
    bool empty() const { return points_.empty(); }

private:
    std::size_t bucket_x(double x) const;
    std::vector<Point2> points_;
    double period_, bucket_;
    double x0_ = 0.0;
    double y0_ = 0.0;
    std::size_t nx_ = 1, ny_ = 1;
    std::vector<std::size_t> start_;  // CSR offsets per bucket
    std::vector<std::size_t> order_;
};

// Symmetric Hausdorff distance with x periodic of the given period (0: plain plane).
HausdorffResult hausdorff(std::span<const Point2> a, std::span<const Point2> b, double period);
// Between bitmaps, measured in theta/p units.
HausdorffResult hausdorff(const AnnulusBitmap& a, const AnnulusBitmap& b);
// Between bitmaps, in cell units (cell centres).
HausdorffResult hausdorff_cells(const AnnulusBitmap& a, const AnnulusBitmap& b);
// Between a bitmap and (theta, p) points, in cell units.
HausdorffResult hausdorff_cells(const AnnulusBitmap& a, std::span<const Point2> points);

// (theta, p) -> cell coordinates (theta and p in cell units from the grid origin).
Point2 to_cell_units(const BitmapGeometry& g, Point2 z);

struct InclusionResult {
    bool inside = true;
    double max_offset = 0.0;  // cell units
    Point2 worst;             // (x, D_c u) of the worst node
    std::size_t nodes_checked = 0;
    // Nodes farther than tol_cells, and the smallest and largest x among them.
    std::size_t offending_nodes = 0;
    double offending_lo = 0.0;
    double offending_hi = 0.0;
};

// Checks that (x_i, D_c u(x_i)) lies within tol_cells of an occupied cell for every node outside kink bands.
InclusionResult check_graph_in_attractor(const GridFunction& u, const AnnulusBitmap& c1, double tol_cells,
                                         const KinkOptions& kink_options = {});

}  // namespace birkhoff
