// Command-line front end: F_n tables, transition probabilities, kernels, joint distributions,
// the Airy_1 marginal, the kernel convergence scan and raw simulation output.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <tasep/tasep.hpp>

using namespace tasep;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    for (const auto& tok : split(s, ',')) {
        std::size_t used = 0;
        if constexpr (std::is_integral_v<T>) {
            long v = std::stol(tok, &used);
            out.push_back(static_cast<T>(v));
        } else {
            out.push_back(static_cast<T>(std::stod(tok, &used)));
        }
        if (used != tok.size()) throw CLI::ValidationError("malformed number '" + tok + "'");
    }
    return out;
}

std::string join(const std::vector<long>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
    return s;
}

struct Common {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
    double tolerance = 1e-8;
};

// Writes the table (to --out with a manifest sidecar, or stdout) and returns the exit status.
int finish(const Common& c, io::RunManifest& m, io::CsvTable& table, const io::Stopwatch& clock) {
    table.meta("version", io::tool_version);
    table.meta("command", m.command);
    table.meta("seed", std::to_string(c.seed));
    table.meta("tolerance", io::format_number(c.tolerance));
    table.meta("parameters", m.parameters.dump());
    std::string text = table.str();
    m.seed = c.seed;
    if (c.out.empty()) {
        std::cout << text;
    } else {
        io::write_output(c.out, text, m);
        m.wall_seconds = clock.seconds();
        io::write_manifest(c.out, m);
    }
    for (const auto& f : m.flags) std::cerr << "numerical flag: " << f << "\n";
    return m.flags.empty() ? 0 : 2;
}

ParticleConfig parse_config(const std::string& s) { return ParticleConfig(parse_list<long>(s)); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact formulas and simulation for the totally asymmetric simple exclusion process"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--seed", common.seed, "Random seed for Monte Carlo")->capture_default_str();
    app.add_option("--threads", common.threads, "Worker threads for Monte Carlo")->check(CLI::Range(1, 256))->capture_default_str();
    app.add_option("--out", common.out, "Output CSV path; a <path>.manifest.json sidecar is written next to it");
    app.add_option("--tolerance", common.tolerance, "Numerical tolerance for cross-checks and stabilization")
        ->check(CLI::PositiveNumber)->capture_default_str();

    io::Stopwatch clock;
    io::RunManifest manifest;
    int status = 0;

    // fn
    auto* fn = app.add_subcommand("fn", "Table of F_n(x, t)");
    long fn_n0 = -3, fn_n1 = 3, fn_x0 = -5, fn_x1 = 10;
    double fn_t = 1.0;
    fn->add_option("--n-min", fn_n0)->capture_default_str();
    fn->add_option("--n-max", fn_n1)->capture_default_str();
    fn->add_option("--x-min", fn_x0)->capture_default_str();
    fn->add_option("--x-max", fn_x1)->capture_default_str();
    fn->add_option("-t,--time", fn_t)->check(CLI::PositiveNumber)->capture_default_str();
    fn->callback([&] {
        manifest.command = "fn";
        manifest.parameters = {{"n_min", fn_n0}, {"n_max", fn_n1}, {"x_min", fn_x0}, {"x_max", fn_x1}, {"t", fn_t}};
        io::CsvTable table({"n", "x", "t", "value", "est_error"});
        for (long n = fn_n0; n <= fn_n1; ++n)
            for (long x = fn_x0; x <= fn_x1; ++x) {
                auto v = eval_F(n, x, fn_t);
                if (v.est_error > common.tolerance) manifest.flags.push_back("F error estimate above tolerance");
                table.row(n, x, fn_t, v.value, v.est_error);
            }
        status = finish(common, manifest, table, clock);
    });

    // green
    auto* green = app.add_subcommand("green", "Transition probability with the decomposition cross-check");
    std::string g_y, g_x;
    double g_t = 1.0;
    long g_window = 20;
    green->add_option("--y", g_y, "Initial positions, decreasing, comma separated")->required();
    green->add_option("--x", g_x, "Final positions, decreasing, comma separated")->required();
    green->add_option("-t,--time", g_t)->check(CLI::PositiveNumber)->capture_default_str();
    green->add_option("--window", g_window, "Auxiliary summation window (0 skips the cross-check)")->capture_default_str();
    green->callback([&] {
        manifest.command = "green";
        manifest.parameters = {{"y", g_y}, {"x", g_x}, {"t", g_t}, {"window", g_window}};
        auto y = parse_config(g_y), x = parse_config(g_x);
        io::CsvTable table({"y", "x", "t", "transition_probability", "decomposition_sum", "abs_diff"});
        double p = transition_probability(y, x, g_t);
        double d = std::nan("");
        if (g_window > 0) {
            if (y.size() > 4) throw CLI::ValidationError("green: the decomposition check needs at most 4 particles");
            d = decomposition_sum(y, x, g_t, g_window, common.tolerance);
            if (std::fabs(d - p) > common.tolerance) manifest.flags.push_back("decomposition disagrees");
        }
        table.row(join(y.positions(), ' '), join(x.positions(), ' '), g_t, p, d, std::fabs(d - p));
        status = finish(common, manifest, table, clock);
    });

    // kernel
    auto* kernel = app.add_subcommand("kernel", "Kernel values on a grid of labels and sites");
    std::string k_ic = "flat", k_y, k_n = "1,2", k_x = "-2,0,2";
    double k_t = 1.0;
    kernel->add_option("--ic", k_ic, "general or flat")->check(CLI::IsMember({"general", "flat"}))->capture_default_str();
    kernel->add_option("--y", k_y, "Initial positions for --ic general");
    kernel->add_option("--labels", k_n, "Particle labels")->capture_default_str();
    kernel->add_option("--sites", k_x, "Sites")->capture_default_str();
    kernel->add_option("-t,--time", k_t)->check(CLI::PositiveNumber)->capture_default_str();
    kernel->callback([&] {
        manifest.command = "kernel";
        manifest.parameters = {{"ic", k_ic}, {"y", k_y}, {"labels", k_n}, {"sites", k_x}, {"t", k_t}};
        auto ns = parse_list<int>(k_n);
        auto xs = parse_list<long>(k_x);
        std::function<double(LatticePoint, LatticePoint)> k;
        if (k_ic == "general") {
            if (k_y.empty()) throw CLI::ValidationError("kernel: --ic general needs --y");
            k = GeneralKernel(parse_config(k_y), k_t);
        } else {
            k = [&](LatticePoint p, LatticePoint q) {
                try {
                    return kernel_flat_checked(p, q, k_t, std::max(common.tolerance, 1e-10));
                } catch (const numerical_failure& e) {
                    manifest.flags.push_back(e.what());
                    return kernel_flat(p, q, k_t);
                }
            };
        }
        io::CsvTable table({"n1", "x1", "n2", "x2", "t", "value"});
        for (int n1 : ns)
            for (long x1 : xs)
                for (int n2 : ns)
                    for (long x2 : xs) table.row(n1, x1, n2, x2, k_t, k({n1, x1}, {n2, x2}));
        status = finish(common, manifest, table, clock);
    });

    // joint
    auto* joint = app.add_subcommand("joint", "P(x_label(t) >= a for each label): Fredholm determinant and/or Monte Carlo");
    std::string j_ic = "flat", j_y, j_labels = "1", j_method = "both";
    std::vector<std::string> j_grid{"-2;-1;0;1;2;3"};
    double j_t = 2.0;
    long j_reps = 100000;
    joint->add_option("--ic", j_ic, "general or flat (particle n starts at -2n)")
        ->check(CLI::IsMember({"general", "flat"}))->capture_default_str();
    joint->add_option("--y", j_y, "Initial positions for --ic general");
    joint->add_option("--labels", j_labels, "Increasing particle labels")->capture_default_str();
    joint->add_option("--thresholds", j_grid, "Threshold tuples separated by ';' (or repeat the option), entries by ','")
        ->take_all()
        ->capture_default_str();
    joint->add_option("--method", j_method)->check(CLI::IsMember({"exact", "mc", "both"}))->capture_default_str();
    joint->add_option("-t,--time", j_t)->check(CLI::PositiveNumber)->capture_default_str();
    joint->add_option("--replicas", j_reps)->check(CLI::PositiveNumber)->capture_default_str();
    joint->callback([&] {
        manifest.command = "joint";
        manifest.parameters = {{"ic", j_ic}, {"y", j_y}, {"labels", j_labels}, {"thresholds", j_grid},
                               {"method", j_method}, {"t", j_t}, {"replicas", j_reps}};
        auto labels = parse_list<int>(j_labels);
        std::vector<std::vector<long>> grid;
        for (const auto& chunk : j_grid)
            for (const auto& tup : split(chunk, ';')) {
                grid.push_back(parse_list<long>(tup));
                if (grid.back().size() != labels.size()) throw CLI::ValidationError("joint: threshold tuple length differs from labels");
            }
        const bool flat = j_ic == "flat";
        if (!flat && j_y.empty()) throw CLI::ValidationError("joint: --ic general needs --y");
        std::optional<ParticleConfig> y;
        if (!flat) y = parse_config(j_y);
        const bool do_exact = j_method != "mc", do_mc = j_method != "exact";

        BlockKernel kernel;
        InitialPosition init;
        if (do_exact) {
            if (flat) {
                kernel = as_block_kernel([t = j_t](LatticePoint p, LatticePoint q) { return kernel_flat(p, q, t); });
                init = [](int n) { return -2L * n; };
            } else {
                GeneralKernel g(*y, j_t);
                kernel = as_block_kernel(g);
                init = [yy = *y](int n) { return yy(n); };
            }
        }
        TrackedSamples samples;
        std::vector<int> sim_labels = labels;
        if (do_mc) {
            SimConfig cfg;
            if (flat) {
                for (int& l : sim_labels) l += 1;  // the simulator labels the particle at -2(k-1) as k
                cfg = SimConfig::flat_window(j_t, sim_labels, common.seed, j_reps);
            } else {
                cfg = SimConfig::finite(*y, j_t, common.seed, j_reps);
            }
            cfg.threads = common.threads;
            samples = sample_final_positions(cfg);
        }
        io::CsvTable table({"thresholds", "exact", "stabilization_delta", "mc", "se", "replicas", "abs_diff_over_se"});
        TruncationPolicy pol;
        pol.tolerance = common.tolerance;
        for (const auto& a : grid) {
            double ex = std::nan(""), delta = std::nan(""), mc = std::nan(""), se = std::nan(""), z = std::nan("");
            long reps = 0;
            if (do_exact) {
                auto r = joint_distribution_discrete(kernel, init, ThresholdSpec(labels, a), pol);
                ex = r.value;
                delta = r.stabilization_delta;
                if (r.flagged) manifest.flags.push_back("determinant not stabilized at thresholds " + join(a, ' '));
            }
            if (do_mc) {
                auto e = empirical_joint(samples, sim_labels, a);
                mc = e.value;
                se = e.stderr_;
                reps = e.replicas;
            }
            if (do_exact && do_mc) z = std::fabs(ex - mc) / std::max(se, 1.0 / static_cast<double>(reps));
            table.row(join(a, ' '), ex, delta, mc, se, reps, z);
        }
        status = finish(common, manifest, table, clock);
    });

    // f1
    auto* f1 = app.add_subcommand("f1", "det(1 - Ai(x + y)) on (s, infinity) over a grid of s");
    double f_s0 = -6, f_s1 = 4, f_ds = 0.25;
    int f_q = 40;
    f1->add_option("--s-min", f_s0)->capture_default_str();
    f1->add_option("--s-max", f_s1)->capture_default_str();
    f1->add_option("--step", f_ds)->check(CLI::PositiveNumber)->capture_default_str();
    f1->add_option("--order", f_q, "Gauss-Legendre nodes")->check(CLI::Range(20, 400))->capture_default_str();
    f1->callback([&] {
        manifest.command = "f1";
        manifest.parameters = {{"s_min", f_s0}, {"s_max", f_s1}, {"step", f_ds}, {"order", f_q}};
        io::CsvTable table({"s", "value", "stabilization_delta"});
        for (double s = f_s0; s <= f_s1 + 1e-12; s += f_ds) {
            auto r = joint_distribution_continuum(ContinuumThresholds({0.0}, {s}), f_q, common.tolerance);
            if (r.flagged) manifest.flags.push_back("quadrature not converged at s=" + io::format_number(s));
            table.row(s, r.value, r.stabilization_delta);
        }
        status = finish(common, manifest, table, clock);
    });

    // converge
    auto* conv = app.add_subcommand("converge", "Rescaled flat kernel against its Airy_1 limit");
    std::string c_t = "100,1000,10000";
    std::string c_pts = "0,0,0,0;0,-1,0,0.5;0,0,0.5,0;-0.25,0.5,0.25,-0.5;0,1,0,1";
    conv->add_option("--t-list", c_t)->capture_default_str();
    conv->add_option("--points", c_pts, "Point pairs u1,s1,u2,s2 separated by ';'")->capture_default_str();
    conv->callback([&] {
        manifest.command = "converge";
        manifest.parameters = {{"t_list", c_t}, {"points", c_pts}};
        std::vector<std::pair<ScaledPoint, ScaledPoint>> pts;
        for (const auto& p : split(c_pts, ';')) {
            auto v = parse_list<double>(p);
            if (v.size() != 4) throw CLI::ValidationError("converge: each point pair needs u1,s1,u2,s2");
            pts.push_back({{v[0], v[1]}, {v[2], v[3]}});
        }
        auto rows = convergence_scan(parse_list<double>(c_t), pts);
        io::CsvTable table({"t", "u1", "s1", "u2", "s2", "rescaled", "limit", "abs_err", "u1_eff", "s1_eff", "u2_eff",
                            "s2_eff", "label_collision"});
        for (const auto& r : rows) {
            table.row(r.t, r.p1.u, r.p1.s, r.p2.u, r.p2.s, r.rescaled, r.limit, r.abs_err, r.eff1.u, r.eff1.s, r.eff2.u,
                      r.eff2.s, r.label_collision);
            if (r.label_collision) manifest.flags.push_back("label collision after rounding");
        }
        if (!errors_non_increasing(rows, pts.size())) manifest.flags.push_back("errors not non-increasing in t");
        status = finish(common, manifest, table, clock);
    });

    // simulate
    auto* sim = app.add_subcommand("simulate", "Raw Monte Carlo final positions, optionally with event streams");
    std::string s_ic = "general", s_y = "0,-2", s_tracked = "1", s_events;
    double s_t = 1.0;
    long s_reps = 10;
    sim->add_option("--ic", s_ic, "general or flat (flat labels particle k at -2(k-1))")
        ->check(CLI::IsMember({"general", "flat"}))->capture_default_str();
    sim->add_option("--y", s_y, "Initial positions for --ic general")->capture_default_str();
    sim->add_option("--tracked", s_tracked, "Observed labels in flat mode")->capture_default_str();
    sim->add_option("-t,--time", s_t)->check(CLI::NonNegativeNumber)->capture_default_str();
    sim->add_option("--replicas", s_reps)->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--events", s_events, "Also write every jump as JSON lines to this path");
    sim->callback([&] {
        manifest.command = "simulate";
        manifest.parameters = {{"ic", s_ic}, {"y", s_y}, {"tracked", s_tracked}, {"t", s_t}, {"replicas", s_reps},
                               {"events", s_events}};
        SimConfig cfg = s_ic == "flat" ? SimConfig::flat_window(s_t, parse_list<int>(s_tracked), common.seed, s_reps)
                                       : SimConfig::finite(parse_config(s_y), s_t, common.seed, s_reps);
        cfg.threads = common.threads;
        auto samples = sample_final_positions(cfg);
        std::vector<std::string> header{"replica", "valid"};
        for (int l : samples.labels) header.push_back("x" + std::to_string(l));
        io::CsvTable table(header);
        for (long r = 0; r < s_reps; ++r) {
            std::vector<std::string> cells{std::to_string(r), samples.valid[r] ? "1" : "0"};
            for (long x : samples.positions[r]) cells.push_back(std::to_string(x));
            table.row_cells(std::move(cells));
        }
        if (samples.invalid > 0) manifest.flags.push_back(std::to_string(samples.invalid) + " replicas reached the window boundary");
        if (!s_events.empty()) {
            std::ostringstream ev;
            for (long r = 0; r < s_reps; ++r) {
                auto rec = simulate(cfg, r);
                for (const auto& e : rec.events)
                    ev << nlohmann::json{{"replica", r}, {"time", e.time}, {"label", e.label}, {"from", e.from}}.dump() << "\n";
            }
            io::write_output(s_events, ev.str(), manifest);
        }
        status = finish(common, manifest, table, clock);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const numerical_failure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return status;
}
