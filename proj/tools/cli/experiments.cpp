#include "cli/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include "birkhoff/attractor.hpp"
#include "birkhoff/contraction.hpp"
#include "birkhoff/counterexamples.hpp"
#include "birkhoff/error.hpp"
#include "birkhoff/flow.hpp"
#include "birkhoff/gammagap.hpp"
#include "birkhoff/io.hpp"
#include "birkhoff/weakkam.hpp"
#include "cli/config.hpp"

namespace birkhoff::cli {

namespace {

namespace fs = std::filesystem;

struct Context {
    const json& cfg;
    fs::path dir;
    std::ostream& log;
    RunResult result;

    std::size_t workers() const { return cfg.at("workers").get<std::size_t>(); }
    std::string file(const std::string& name) {
        result.files.push_back(name);
        return (dir / name).string();
    }
};

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << j.dump(2) << '\n';
}

LoOptions lo_options(const json& s, std::size_t workers) {
    LoOptions o;
    o.tau = s.at("tau").get<double>();
    o.v_max = s.at("v_max").get<double>();
    o.tol = s.at("tol").get<double>();
    o.max_iterations = s.at("max_iterations").get<std::size_t>();
    o.workers = workers;
    return o;
}

FdOptions fd_options(const json& s, std::size_t workers) {
    FdOptions o;
    o.tol = s.at("tol").get<double>();
    o.local_viscosity = s.at("local_viscosity").get<bool>();
    o.momentum_bound = s.at("momentum_bound").get<double>();
    o.max_sweeps = s.at("max_sweeps").get<std::size_t>();
    o.workers = workers;
    return o;
}

std::pair<GridFunction, SolveReport> solve(const Context& c, const HamiltonianModel& model, double alpha,
                                           std::size_t n) {
    const auto method = c.cfg.at("method").get<std::string>();
    if (method == "lo") return solve_discounted_lo(model, alpha, n, lo_options(c.cfg.at("lo"), c.workers()));
    if (method == "fd") return solve_discounted_fd(model, alpha, n, fd_options(c.cfg.at("fd"), c.workers()));
    throw ConfigError("method must be 'lo' or 'fd', got '" + method + "'");
}

BitmapGeometry geometry_from(const json& g, double period) {
    return {g.at("n_theta").get<std::size_t>(), g.at("n_p").get<std::size_t>(), 0.0, period,
            g.at("p_min").get<double>(), g.at("p_max").get<double>()};
}

AttractorGrid attractor_grid(const json& g, double period, std::size_t workers) {
    AttractorGrid a;
    a.geometry = geometry_from(g, period);
    a.map_time = g.at("map_time").get<double>();
    a.dt = g.at("dt").get<double>();
    a.workers = workers;
    a.c0.n_max = g.at("n_max").get<std::size_t>();
    const auto method = g.at("c0_method").get<std::string>();
    if (method == "cell_recursion") a.c0.method = C0Method::cell_recursion;
    else if (method == "escape_time") a.c0.method = C0Method::escape_time;
    else throw ConfigError("grid.c0_method must be 'cell_recursion' or 'escape_time'");
    return a;
}

json kinks_json(const std::vector<Kink>& kinks) {
    json out = json::array();
    for (const auto& k : kinks) out.push_back({{"x", k.x}, {"left", k.left}, {"right", k.right}});
    return out;
}

bool pendulum_family(const HamiltonianModel& m) {
    return m.separable() && m.potential() && m.potential()->amplitude != 0.0;
}

// Shot branches and equilibria, the reference set for a pendulum attractor.
std::vector<Point2> heteroclinic_points(const HamiltonianModel& model) {
    std::vector<Point2> pts;
    for (Side s : {Side::left, Side::right}) {
        const auto c = shoot_heteroclinic(model, s).curve.resampled(20000);
        pts.insert(pts.end(), c.points.begin(), c.points.end());
    }
    pts.push_back({model.saddle_q(), 0.0});
    pts.push_back({model.focus_q(), 0.0});
    return pts;
}

io::SvgSeries cell_series(const AnnulusBitmap& b, const std::string& label, const std::string& color) {
    io::SvgSeries s{label, {}, {}, color, true};
    for (const auto& z : b.cell_centers()) {
        s.x.push_back(z.x);
        s.y.push_back(z.y);
    }
    return s;
}

void pendulum_attractor(Context& c) {
    const double alpha = c.cfg.at("alpha").get<double>();
    const auto model = model_from(c.cfg.at("model"), alpha);
    const AttractorGrid grid = attractor_grid(c.cfg.at("grid"), model.period(), c.workers());
    const TimeMap map(model, grid.map_time, grid.dt);
    const AnnulusMap annulus = annulus_map(map, grid.workers);
    const C0Result c0 = compute_c0(annulus, grid.geometry, grid.c0);
    const C1Result c1 = compute_c1(c0.cells, annulus, grid.c1);
    c0.cells.write_pbm(c.file("c0.pbm"));
    c1.cells.write_pbm(c.file("c1.pbm"));
    c1.cells.write_csv(c.file("c1.csv"));

    json& r = c.result.report;
    r["c0_cells"] = c0.cells.count();
    r["c0_iterations"] = c0.iterations;
    r["c0_fixpoint"] = c0.fixpoint;
    r["c1_cells"] = c1.cells.count();
    r["separates"] = c1.separates;
    r["pockets"] = c1.pockets;
    bool pass = c1.separates;
    std::vector<io::SvgSeries> plot{cell_series(c1.cells, "C1", "#1f77b4")};
    if (pendulum_family(model) && alpha > 0.0) {
        const auto ref = heteroclinic_points(model);
        const auto hd = hausdorff_cells(c1.cells, ref);
        const double tol = c.cfg.at("tol_cells").get<double>();
        r["hausdorff_to_branches_cells"] = hd.distance;
        r["tol_cells"] = tol;
        pass = pass && hd.distance <= tol;
        io::SvgSeries branches{"branches", {}, {}, "#d62728", false};
        io::CsvWriter csv(c.file("branches.csv"), {"theta", "p"});
        for (const auto& z : ref) {
            csv.row({z.x, z.y});
            branches.x.push_back(z.x);
            branches.y.push_back(z.y);
        }
        branches.points = true;
        plot.push_back(std::move(branches));
    }
    io::write_svg_plot(c.file("attractor.svg"), "attractor", plot, "theta", "p");
    c.result.passed = pass;
}

void solve_hj(Context& c) {
    const double alpha = c.cfg.at("alpha").get<double>();
    const auto model = model_from(c.cfg.at("model"), alpha);
    const auto n = c.cfg.at("n").get<std::size_t>();
    auto [u, rep] = solve(c, model, alpha, n);
    write_grid_function_csv(c.file("u.csv"), u);
    const double threshold = c.cfg.at("residual_factor").get<double>() / std::sqrt(static_cast<double>(n));
    json& r = c.result.report;
    r["method"] = rep.method;
    r["iterations"] = rep.iterations;
    r["final_change"] = rep.final_change;
    r["residual"] = rep.residual;
    r["residual_threshold"] = threshold;
    r["kinks"] = kinks_json(rep.kinks);
    io::SvgSeries s{"u", {}, {}, "#1f77b4", false};
    for (std::size_t i = 0; i < u.size(); ++i) {
        s.x.push_back(u.node(i));
        s.y.push_back(u[i]);
    }
    io::write_svg_plot(c.file("u.svg"), "discounted solution", {s}, "x", "u");
    c.result.passed = rep.residual <= threshold;
}

void inclusion_check(Context& c) {
    const double alpha = c.cfg.at("alpha").get<double>();
    const auto model = model_from(c.cfg.at("model"), alpha);
    const auto n = c.cfg.at("n").get<std::size_t>();
    auto [u, rep] = solve(c, model, alpha, n);
    const AttractorGrid grid = attractor_grid(c.cfg.at("grid"), model.period(), c.workers());
    const C1Result c1 = attractor_c1(model, grid);
    const double tol = c.cfg.at("tol_cells").get<double>();
    const InclusionResult in = check_graph_in_attractor(u, c1.cells, tol);
    write_grid_function_csv(c.file("u.csv"), u);
    c1.cells.write_pbm(c.file("c1.pbm"));
    json& r = c.result.report;
    r["verdict"] = in.inside;
    r["max_offset_cells"] = in.max_offset;
    r["tol_cells"] = tol;
    r["worst"] = {in.worst.x, in.worst.y};
    r["nodes_checked"] = in.nodes_checked;
    r["offending_nodes"] = in.offending_nodes;
    r["solve_residual"] = rep.residual;
    r["separates"] = c1.separates;
    io::SvgSeries graph{"(x, Du)", {}, {}, "#d62728", true};
    for (std::size_t i = 0; i < u.size(); ++i) {
        graph.x.push_back(u.node(i));
        graph.y.push_back(u.central_difference(i));
    }
    io::write_svg_plot(c.file("inclusion.svg"), "graph of Du against C1",
                       {cell_series(c1.cells, "C1", "#1f77b4"), graph}, "theta", "p");
    c.result.passed = in.inside;
}

void spiral_gap(Context& c) {
    const double alpha = c.cfg.at("alpha").get<double>();
    GapOptions opts;
    opts.shoot.truncate_time = c.cfg.at("truncate_time").get<double>();
    const double radius = c.cfg.at("search_radius").get<double>();
    if (radius > 0.0) opts.search_radius = radius;
    std::vector<GapMeasurement> rows;
    json& r = c.result.report;
    r["rows"] = json::array();
    bool pass = true;
    for (const auto& b : c.cfg.at("betas")) {
        if (!b.is_number()) throw ConfigError("betas must be numbers");
        const auto g = measure_gap(alpha, b.get<double>(), opts);
        const bool hard = g.area_energy >= g.bound_4;
        const bool near8 = std::abs(g.area_energy - g.bound_8) <= 0.15 * g.bound_8;
        const bool agree = std::abs(g.area_energy - g.area_shoelace) <= 0.02 * g.area_energy;
        pass = pass && hard && near8 && agree;
        r["rows"].push_back({{"alpha", g.alpha},
                             {"beta", g.beta},
                             {"area_energy", g.area_energy},
                             {"area_shoelace", g.area_shoelace},
                             {"bound_4", g.bound_4},
                             {"bound_8", g.bound_8},
                             {"crossing", {g.crossing.point.x, g.crossing.point.y}},
                             {"above_hard_bound", hard},
                             {"within_15pct_of_8", near8},
                             {"routes_agree_2pct", agree}});
        rows.push_back(g);
    }
    write_gap_table(c.file("gap.csv"), rows);
    io::SvgSeries area{"area", {}, {}, "#1f77b4", true}, b8{"8(1-b/a)", {}, {}, "#2ca02c", false},
        b4{"4(1-b/a)", {}, {}, "#d62728", false};
    for (const auto& g : rows) {
        area.x.push_back(g.beta);
        area.y.push_back(g.area_energy);
        b8.x.push_back(g.beta);
        b8.y.push_back(g.bound_8);
        b4.x.push_back(g.beta);
        b4.y.push_back(g.bound_4);
    }
    io::write_svg_plot(c.file("gap.svg"), "gap area", {area, b8, b4}, "beta", "area");
    c.result.passed = pass;
}

void limit_alpha(Context& c) {
    std::vector<double> alphas;
    for (const auto& a : c.cfg.at("alphas")) {
        if (!a.is_number()) throw ConfigError("alphas must be numbers");
        alphas.push_back(a.get<double>());
    }
    if (alphas.size() < 2) throw ConfigError("alphas needs at least two values");
    const auto model = model_from(c.cfg.at("model"), alphas.front());
    const auto n = c.cfg.at("n").get<std::size_t>();
    const auto res = vanishing_discount_driver(model, alphas, n, lo_options(c.cfg.at("lo"), c.workers()));
    json& r = c.result.report;
    r["critical_value"] = res.critical_value;
    r["gaps"] = res.gaps;
    bool decreasing = true;
    for (std::size_t k = 1; k < res.gaps.size(); ++k) decreasing = decreasing && res.gaps[k] < res.gaps[k - 1];
    r["strictly_decreasing"] = decreasing;
    io::CsvWriter gaps(c.file("gaps.csv"), {"alpha", "next_alpha", "sup_gap"});
    for (std::size_t k = 0; k < res.gaps.size(); ++k) gaps.row({alphas[k], alphas[k + 1], res.gaps[k]});
    std::vector<io::SvgSeries> plot;
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    for (std::size_t k = 0; k < res.entries.size(); ++k) {
        const auto& e = res.entries[k];
        io::SvgSeries s{"alpha=" + io::format_double(e.alpha), {}, {}, colors[k % 6], false};
        for (std::size_t i = 0; i < e.u.size(); ++i) {
            s.x.push_back(e.u.node(i));
            s.y.push_back(e.u[i]);
        }
        plot.push_back(std::move(s));
    }
    io::write_svg_plot(c.file("solutions.svg"), "discounted solutions", plot, "x", "u");
    c.result.passed = decreasing;
}

BumpSpec bump_from(const json& b) {
    return {b.at("x0").get<double>(), b.at("p0").get<double>(), b.at("radius_x").get<double>(),
            b.at("radius_p").get<double>(), b.at("height").get<double>()};
}

void counterexample(Context& c) {
    const auto question = c.cfg.at("question").get<std::string>();
    const double alpha = c.cfg.at("alpha").get<double>();
    json& r = c.result.report;
    r["question"] = question;
    if (question == "q1" || question == "q2") {
        const auto base = HamiltonianModel::appendix_pendulum(alpha);
        const BumpSpec bump = bump_from(c.cfg.at("bump"));
        const auto bumped = build_perturbed(base, bump);
        const AttractorGrid grid = attractor_grid(c.cfg.at("grid"), base.period(), c.workers());
        if (question == "q1") {
            LoOptions lo;
            lo.workers = c.workers();
            const auto u = solve_discounted_lo(base, alpha, c.cfg.at("n").get<std::size_t>(), lo).first;
            const C1Result c1 = attractor_c1(base, grid);
            c1.cells.write_pbm(c.file("c1.pbm"));
            const auto w = q1_violation_witness(u, bumped, alpha, c1.cells);
            r["witness"] = to_json(w);
            io::SvgSeries scan{"alpha u + H1", {}, {}, "#1f77b4", false};
            for (int k = 0; k <= 400; ++k) {
                const double y = w.segment_lo + (w.segment_hi - w.segment_lo) * k / 400.0;
                scan.x.push_back(y);
                scan.y.push_back(alpha * w.u_value + bumped.H({w.x, y}));
            }
            io::write_svg_plot(c.file("scan.svg"), "segment scan at the kink", {scan}, "y", "value");
            c.result.passed = bump.height > 0.0 ? w.value >= bump.height - 1.0 : w.value <= 1e-3;
        } else {
            InclusionBreakOptions o;
            o.n = c.cfg.at("fd_n").get<std::size_t>();
            o.tol_cells = c.cfg.at("tol_cells").get<double>();
            o.grid = grid;
            o.fd = fd_options(c.cfg.at("fd"), c.workers());
            const auto rep = q2_inclusion_breaker(base, bumped, alpha, o);
            r["inclusion"] = to_json(rep);
            c.result.passed = bump.height > 0.0
                                  ? !rep.inclusion.inside && rep.inclusion.max_offset > 10.0 && rep.attractors.within_band
                                  : rep.inclusion.inside;
        }
        return;
    }
    if (question != "q3") throw ConfigError("question must be q1, q2 or q3");
    const Q3Spec spec = q3_spec_from_json(c.cfg.at("construction"));
    const Q3Model m = q3_build(spec, alpha);
    const json& t = c.cfg.at("table");
    m.tabulate(t.at("nx").get<std::size_t>(), t.at("np").get<std::size_t>()).write_csv(c.file("hamiltonian.csv"));
    const json& v = c.cfg.at("verify");
    Q3VerifyOptions o;
    o.with_attractor = v.at("with_attractor").get<bool>();
    o.grid = attractor_grid(v.at("grid"), 1.0, c.workers());
    o.attractor_table_nx = v.at("attractor_table").at("nx").get<std::size_t>();
    o.attractor_table_np = v.at("attractor_table").at("np").get<std::size_t>();
    const Q3Report rep = q3_verify(m, o);
    q3_forward_closure(m, o.grid.geometry, o.closure_time, o.closure_starts).write_pbm(c.file("closure.pbm"));
    r["far_curvature"] = m.far_curvature;
    r["construction"] = to_json(spec);
    r["verification"] = to_json(rep);
    const auto& b = m.branches();
    io::SvgSeries up{"f+", {}, {}, "#1f77b4", false}, down{"f-", {}, {}, "#d62728", false};
    for (int k = 0; k <= 500; ++k) {
        const double x = spec.cutoff * k / 500.0;
        up.x.push_back(x);
        up.y.push_back(b.f_plus(x));
        down.x.push_back(1.0 - x);
        down.y.push_back(b.f_minus(1.0 - x));
    }
    io::write_svg_plot(c.file("branches.svg"), "branches", {up, down}, "x", "p");
    c.result.passed = rep.passed();
}

void property_suite(Context& c) {
    std::mt19937_64 rng(c.cfg.at("seed").get<std::uint64_t>());
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    json& r = c.result.report;

    // Lax-Oleinik: exact exp(-alpha tau) contraction.
    const auto model = HamiltonianModel::appendix_pendulum(0.5);
    const auto n = c.cfg.at("lo_n").get<std::size_t>();
    const double tau = c.cfg.at("lo_tau").get<double>();
    std::size_t lo_checked = 0, lo_violations = 0;
    double lo_worst = -INFINITY;
    for (const auto& a : c.cfg.at("lo_alphas")) {
        const double alpha = a.get<double>();
        const LaxOleinikOperator op(model, alpha, n, tau);
        for (std::size_t k = 0; k < c.cfg.at("lo_pairs").get<std::size_t>(); ++k) {
            std::vector<double> u1(n), u2(n), t1(n), t2(n);
            for (std::size_t i = 0; i < n; ++i) {
                u1[i] = unit(rng);
                u2[i] = unit(rng);
            }
            op.apply(u1, t1);
            op.apply(u2, t2);
            double before = 0.0, after = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                before = std::max(before, std::abs(u1[i] - u2[i]));
                after = std::max(after, std::abs(t1[i] - t2[i]));
            }
            const double excess = after - (std::exp(-alpha * tau) * before + 1e-12);
            lo_worst = std::max(lo_worst, excess);
            ++lo_checked;
            if (excess > 0.0) ++lo_violations;
        }
    }
    r["lax_oleinik"] = {{"pairs", lo_checked}, {"violations", lo_violations}, {"worst_excess", lo_worst}};

    // Lax-Friedrichs sweep: monotone in u.
    const auto sigma = momentum_lipschitz(model, n, 3.0);
    std::size_t fd_violations = 0;
    const auto fd_pairs = c.cfg.at("fd_pairs").get<std::size_t>();
    const double h = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < fd_pairs; ++k) {
        // Ordered states whose central differences stay within the momentum bound.
        std::vector<double> u1(n), u2(n);
        for (std::size_t i = 0; i < n; ++i) {
            u1[i] = 0.5 * h * unit(rng);
            u2[i] = u1[i] + 0.5 * h * std::abs(unit(rng));
        }
        const auto s1 = fd_sweep(model, 0.5, u1, sigma), s2 = fd_sweep(model, 0.5, u2, sigma);
        for (std::size_t i = 0; i < n; ++i)
            if (s1[i] > s2[i] + 1e-12) ++fd_violations;
    }
    r["fd_monotone"] = {{"pairs", fd_pairs}, {"violations", fd_violations}};

    // Varying affine contractions converging to a limit map.
    const auto d = c.cfg.at("contraction_dimension").get<std::size_t>();
    const auto sequences = c.cfg.at("contraction_sequences").get<std::size_t>();
    std::size_t cv = 0;
    double worst = 0.0;
    using Vec = std::vector<double>;
    auto sup = [](const Vec& a, const Vec& b) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    };
    for (std::size_t s = 0; s < sequences; ++s) {
        // Limit map x -> A x + b with row sums of |A| at most 1/2 (sup-norm contraction).
        std::vector<Vec> A(d, Vec(d));
        Vec b(d), pa(d * d), pb(d);
        for (auto& row : A) {
            double sum = 0.0;
            for (auto& v : row) sum += std::abs(v = unit(rng));
            for (auto& v : row) v *= 0.5 * std::abs(unit(rng)) / sum;
        }
        for (auto& v : b) v = 5.0 * unit(rng);
        for (auto& v : pa) v = unit(rng);
        for (auto& v : pb) v = unit(rng);
        // Perturbation of size 0.1 * 2^-k on A (row sums) and on b.
        auto maps = [&](std::size_t k, const Vec& x) {
            const double e = 0.1 * std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(k, 1000)));
            Vec y(d);
            for (std::size_t i = 0; i < d; ++i) {
                double acc = b[i] + e * pb[i];
                for (std::size_t j = 0; j < d; ++j) acc += (A[i][j] + e * pa[i * d + j] / d) * x[j];
                y[i] = acc;
            }
            return y;
        };
        // Fixed point of the limit map by Gaussian elimination on (I - A) x = b.
        std::vector<Vec> M(d, Vec(d + 1));
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) M[i][j] = (i == j ? 1.0 : 0.0) - A[i][j];
            M[i][d] = b[i];
        }
        for (std::size_t col = 0; col < d; ++col) {
            std::size_t piv = col;
            for (std::size_t i = col + 1; i < d; ++i)
                if (std::abs(M[i][col]) > std::abs(M[piv][col])) piv = i;
            std::swap(M[col], M[piv]);
            for (std::size_t i = 0; i < d; ++i) {
                if (i == col) continue;
                const double f = M[i][col] / M[col][col];
                for (std::size_t j = col; j <= d; ++j) M[i][j] -= f * M[col][j];
            }
        }
        Vec fixed(d);
        for (std::size_t i = 0; i < d; ++i) fixed[i] = M[i][d] / M[i][i];

        // Iterates stay in |x| <= R = (|b| + 0.1) / (1 - L) + |x0|; the maps
        // differ from the limit by at most 0.1 * 2^-k (1 + R) there.
        Vec start(d);
        for (auto& v : start) v = 10.0 * unit(rng);
        const double R = (5.0 + 0.1) / (1.0 - 0.6) + 10.0;
        ContractionOptions opt;
        opt.lipschitz = 0.6;
        opt.tol = 1e-9;
        opt.deviation = [R](std::size_t k) {
            return 0.1 * std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(k, 1000))) * (1.0 + R);
        };
        const auto res = iterate_varying_contractions(maps, start, sup, opt);
        const double err = sup(res.limit, fixed);
        worst = std::max(worst, err);
        if (err > 1e-6) ++cv;
    }
    r["varying_contractions"] = {
        {"sequences", sequences}, {"dimension", d}, {"violations", cv}, {"worst_distance", worst}};
    c.result.passed = lo_violations == 0 && fd_violations == 0 && cv == 0;
}

}  // namespace

RunResult run_experiment(const json& config, const std::string& out_dir, std::ostream& log) {
    fs::create_directories(out_dir);
    Context c{config, fs::path(out_dir), log, {}};
    const auto name = config.at("experiment").get<std::string>();
    log << "running " << name << '\n';
    if (name == "pendulum-attractor") pendulum_attractor(c);
    else if (name == "solve-hj") solve_hj(c);
    else if (name == "inclusion-check") inclusion_check(c);
    else if (name == "spiral-gap") spiral_gap(c);
    else if (name == "limit-alpha") limit_alpha(c);
    else if (name == "counterexample") counterexample(c);
    else if (name == "property-suite") property_suite(c);
    else throw ConfigError("unknown experiment '" + name + "'");
    c.result.report["passed"] = c.result.passed;
    return std::move(c.result);
}

int run_config(const json& user_config, std::ostream& log, std::ostream& err) {
    json resolved;
    try {
        resolved = resolve_config(user_config);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return exit_config;
    }
    const auto out_dir = resolved.at("output").get<std::string>();
    int code = exit_pass;
    json manifest = {{"experiment", resolved.at("experiment")}, {"config", resolved}};
    try {
        RunResult r = run_experiment(resolved, out_dir, log);
        write_json((fs::path(out_dir) / "report.json").string(), r.report);
        r.files.push_back("report.json");
        manifest["outputs"] = r.files;
        manifest["passed"] = r.passed;
        code = r.passed ? exit_pass : exit_check_failed;
        log << (r.passed ? "PASS" : "FAIL") << '\n';
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        manifest["error"] = e.what();
        code = exit_numerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        manifest["error"] = e.what();
        code = exit_config;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        manifest["error"] = e.what();
        code = exit_config;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "cannot write outputs: " << e.what() << '\n';
        return exit_config;
    }
    manifest["exit_code"] = code;
    try {
        write_json((fs::path(out_dir) / "manifest.json").string(), manifest);
    } catch (const Error& e) {
        err << e.what() << '\n';
        if (code == exit_pass) code = exit_config;
    }
    return code;
}

}  // namespace birkhoff::cli
