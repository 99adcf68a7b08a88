#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "birkhoff/attractor.hpp"
#include "birkhoff/bitmap.hpp"
#include "birkhoff/flow.hpp"
#include "birkhoff/grid_function.hpp"
#include "birkhoff/models.hpp"
#include "birkhoff/weakkam.hpp"

namespace birkhoff {

// ---- attractors of the bumped pendulum ------------------------------------

struct AttractorGrid {
    BitmapGeometry geometry{512, 512, 0.0, 1.0, -2.5, 2.5};
    double map_time = 2.0;
    double dt = 0.01;
    // Adaptive tolerances, used when the model carries a bump (fixed steps
    // are unstable inside a tall one).
    double rtol = 1e-8;
    double atol = 1e-10;
    std::size_t workers = 1;
    C0Options c0;
    C1Options c1;
};

// C1 of the time map of `model`, with pockets resolved through the map.
C1Result attractor_c1(const HamiltonianModel& model, const AttractorGrid& grid);

// Cells meeting the closed support ellipse of the model's bump (none without a bump).
AnnulusBitmap bump_cells(const HamiltonianModel& model, const BitmapGeometry& geometry);

struct BandComparison {
    std::size_t extra = 0;    // cells of `a` farther than `band` cells from `b`
    std::size_t missing = 0;  // cells of `b` farther than `band` cells from `a`
    double hausdorff_cells = 0.0;
    bool within_band = true;
};

BandComparison compare_bitmaps(const AnnulusBitmap& a, const AnnulusBitmap& b, std::size_t band = 1);

// ---- viscosity violation after a bump -------------------------------------

struct ViolationWitness {
    double x = 0.5;
    double y = 0.0;      // maximizer on the segment
    double value = 0.0;  // alpha u(x) + H1(x, y)
    double u_value = 0.0;
    double segment_lo = 0.0;  // right derivative of u at x
    double segment_hi = 0.0;  // left derivative
};

// Scans alpha u(x) + H1(x, y) over the superdifferential segment of u at its
// kink x (the focus of the model) and returns the maximizer. `attractor` is
// C1 of the unbumped model; the bump support must miss it and must meet the
// segment, otherwise ConstructionError.
ViolationWitness q1_violation_witness(const GridFunction& u, const HamiltonianModel& perturbed, double alpha,
                                      const AnnulusBitmap& attractor, std::size_t samples = 20001);

// ---- broken inclusion ------------------------------------------------------

struct InclusionBreakOptions {
    std::size_t n = 1024;  // nodes of the finite-difference solution
    double tol_cells = 2.0;
    AttractorGrid grid;
    FdOptions fd = [] {
        FdOptions o;
        o.local_viscosity = true;
        return o;
    }();
};

struct InclusionBreakReport {
    double height = 0.0;
    InclusionResult inclusion;
    SolveReport solve;
    BandComparison attractors;  // C1 of the bumped vs the plain model
    std::size_t pockets_plain = 0;
    std::size_t pockets_bumped = 0;
};

// Solves the discounted equation of `perturbed`, extracts C1 of both models
// and checks the graph of the solution's derivative against C1(perturbed).
InclusionBreakReport q2_inclusion_breaker(const HamiltonianModel& base, const HamiltonianModel& perturbed,
                                          double alpha, const InclusionBreakOptions& options = {});

nlohmann::json to_json(const ViolationWitness& w);
nlohmann::json to_json(const InclusionBreakReport& r);

// ---- a Hamiltonian whose attractor exceeds the forward closure -------------

struct Q3Spec {
    double f_half = 1.0;       // upper branch at x = 1/2
    double rise_end = 0.15;    // v+ rises from 0 to 1 on [0, rise_end]
    double plateau_end = 0.55;
    double cutoff = 0.7;       // v+ = 0 from here on
    double two_branch_end = 0.72;
    double blend_width = 0.1;
    double steepness = 12.0;         // exponential profiles between the branches
    double single_curvature = 1.0;   // fiber curvature where one branch is prescribed
    double smooth_width = 0.25;      // smooth maximum with the far field
    double far_start = 1.2;          // far field is flat for |p| below this
    double far_takeover = 2.2;       // and equals H for |p| above this
    double far_curvature = 0.0;      // 0: smallest value that takes over, times 1.25
    double p_range = 3.0;            // domain half-height and table extent

    // Throws ConfigError naming the offending field.
    void validate() const;
};

// Branch data shared by the construction and its checks.
class Q3Branches {
public:
    Q3Branches(const Q3Spec& spec, double alpha);

    double f_plus(double x) const;
    double df_plus(double x) const;
    double v_plus(double x) const;
    double energy_plus(double x) const;  // -alpha * integral_0^x f+
    double f_minus(double x) const { return -f_plus(1.0 - x); }
    double df_minus(double x) const { return df_plus(1.0 - x); }
    double v_minus(double x) const { return -v_plus(1.0 - x); }
    double energy_minus(double x) const { return energy_plus(1.0 - x); }
    // Mean slope of H between the branches.
    double mean_slope(double x) const;

    const Q3Spec& spec() const { return spec_; }
    double alpha() const { return alpha_; }

private:
    Q3Spec spec_;
    double alpha_;
    double amplitude_, omega_;
};

class Q3Surface;

struct Q3Model {
    Q3Spec spec;
    double alpha = 0.0;
    HamiltonianModel model;
    std::shared_ptr<const Q3Surface> surface;
    double far_curvature = 0.0;  // resolved value

    const Q3Branches& branches() const;
    TabulatedSurface tabulate(std::size_t nx, std::size_t np) const;
};

// Builds the model. Throws ConstructionError naming the first x where the
// branches cannot be joined convexly.
Q3Model q3_build(const Q3Spec& spec, double alpha);

// Smallest margin over (1/2, two_branch_end + blend_width] of the profile
// feasibility; positive when q3_build succeeds.
double q3_feasibility_margin(const Q3Spec& spec, double alpha);

// Returns spec unchanged when feasible; otherwise moves the cutoff (and the
// two-branch end with it) up from the seed to the smallest feasible value,
// found by bisection. Throws ConstructionError when nothing below 3/4 works.
Q3Spec q3_search_cutoffs(Q3Spec spec, double alpha);

struct Q3VerifyOptions {
    std::size_t samples = 2001;        // x samples for the branch checks
    double invariance_time = 10.0;
    double invariance_dt = 1e-3;
    std::size_t invariance_starts = 40;
    std::size_t table_nx = 256;
    std::size_t table_np = 241;
    double closure_time = 40.0;
    std::size_t closure_starts = 400;
    AttractorGrid grid = [] {
        AttractorGrid g;
        g.geometry = {256, 256, 0.0, 1.0, -3.0, 3.0};
        g.map_time = 1.0;
        return g;
    }();
    bool with_attractor = true;
    // The attractor is computed on a bicubic table of H (much cheaper per
    // step); 0 rows means the analytic surface.
    std::size_t attractor_table_nx = 1024;
    std::size_t attractor_table_np = 1201;
};

struct Q3Report {
    double h00 = 0.0;
    double h10 = 0.0;
    double kink_gap = 0.0;  // H(1/2, f+) - H(1/2, f-)
    double lyap_residual = 0.0;
    double cond1_margin = 0.0;
    double cond1_at = 0.0;
    double cond2_margin = 0.0;
    double cond2_at = 0.0;
    double min_second_difference = 0.0;
    double invariance_residual = 0.0;
    double far_field_x_spread = 0.0;  // variation in x of H where |p| >= far_takeover
    std::size_t closure_cells = 0;
    double closure_to_branches = 0.0;  // cells
    bool closure_disconnects = true;
    bool attractor_computed = false;
    bool attractor_disconnects = false;
    std::size_t attractor_cells = 0;

    bool passed() const;
};

Q3Report q3_verify(const Q3Model& model, const Q3VerifyOptions& options = {});
// Rasterized closure of the forward orbit of the graph of Du, u the
// solution built into the model (kink at 1/2 excluded).
AnnulusBitmap q3_forward_closure(const Q3Model& model, const BitmapGeometry& geometry, double time,
                                 std::size_t starts);
// The two branch arcs over [0, cutoff] and [1 - cutoff, 1], rasterized.
AnnulusBitmap q3_branch_cells(const Q3Model& model, const BitmapGeometry& geometry);

nlohmann::json to_json(const Q3Spec& spec);
Q3Spec q3_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Q3Report& report);

}  // namespace birkhoff
