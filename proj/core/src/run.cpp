#include "nfpc/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "nfpc/error.hpp"
#include "nfpc/philox.hpp"

namespace nfpc {

using json = nlohmann::ordered_json;

std::optional<Subcommand> parse_subcommand(const std::string& name) {
    if (name == "solve") return Subcommand::solve;
    if (name == "mc-compare") return Subcommand::mc_compare;
    if (name == "grad-check") return Subcommand::grad_check;
    if (name == "forward-only") return Subcommand::forward_only;
    return std::nullopt;
}

std::string to_string(Subcommand cmd) {
    switch (cmd) {
        case Subcommand::solve: return "solve";
        case Subcommand::mc_compare: return "mc-compare";
        case Subcommand::grad_check: return "grad-check";
        case Subcommand::forward_only: return "forward-only";
    }
    return "unknown";
}

namespace {

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", t);
    return buf;
}

int step_index(const GridSpec& g, double t) {
    return std::clamp(static_cast<int>(std::lround(t / g.dt())), 0, g.steps);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    os << text;
}

json cost_json(const CostBreakdown& c) {
    return {{"running", c.running}, {"terminal", c.terminal}, {"penalty", c.penalty}, {"total", c.total}};
}

json density_json(const DensityTrajectory& rho) {
    return {{"substeps", rho.substeps},
            {"max_mass_drift", rho.max_mass_drift},
            {"step_mass_drift", rho.step_mass_drift},
            {"min_value", rho.min_value},
            {"max_boundary_mass", rho.max_boundary_mass}};
}

void append(std::vector<std::string>& out, const std::vector<std::string>& more, const std::string& prefix) {
    for (const auto& w : more) out.push_back(prefix + w);
}

void write_trajectories(const std::filesystem::path& dir, const Scenario& sc, const DensityTrajectory* rho,
                        const AdjointTrajectory* p) {
    const GridSpec& g = sc.problem.grid;
    for (double t : sc.output_checkpoints) {
        const int n = step_index(g, t);
        const std::string tag = time_tag(g.time(n));
        if (rho) write_csv((dir / ("density_t" + tag + ".csv")).string(), rho->at(n));
        if (p) write_csv((dir / ("adjoint_t" + tag + ".csv")).string(), p->at(n));
    }
}

void write_sweep_csv(const std::filesystem::path& path, const SweepReport& sweep) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    os << "iteration,cost,running,terminal,penalty,residual,step_norm,relaxation,halvings,cost_increase\n";
    char buf[512];
    for (const auto& r : sweep.history) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n", r.index, r.cost.total,
                      r.cost.running, r.cost.terminal, r.cost.penalty, r.residual, r.step_norm, r.relaxation,
                      r.halvings, r.cost_increase ? 1 : 0);
        os << buf;
    }
}

json sweep_json(const SweepReport& s) {
    return {{"iterations", s.iterations},
            {"termination", to_string(s.reason)},
            {"residual", s.residual},
            {"total_halvings", s.total_halvings},
            {"monotonicity_violations", s.monotonicity_violations},
            {"initial_cost", cost_json(s.history.front().cost)},
            {"cost", cost_json(s.cost)}};
}

/// Entries uniform in [-a, a] * M0; signs flipped where u + eps v would leave [0, M0].
OmegaField random_direction(const ControlField& u, const GradCheckConfig& cfg) {
    PhiloxStream rng(cfg.seed, 0);
    const double eps_max = *std::max_element(cfg.eps.begin(), cfg.eps.end());
    OmegaField v{u.omega(), std::vector<double>(u.size())};
    for (std::size_t j = 0; j < u.size(); ++j) {
        double d = cfg.amplitude * u.bound() * (2.0 * rng.uniform() - 1.0);
        const double moved = u[j] + eps_max * d;
        if (moved < 0.0 || moved > u.bound()) d = -d;
        v.values[j] = d;
    }
    return v;
}

}  // namespace

int run(Subcommand cmd, const Scenario& sc, const RunOptions& options) {
    std::filesystem::create_directories(options.out_dir);
    const auto& dir = options.out_dir;
    const ControlProblem& problem = sc.problem;
    const GridSpec& g = problem.grid;

    McConfig mc = sc.monte_carlo;
    GradCheckConfig gc = sc.grad_check;
    if (options.seed) mc.seed = gc.seed = *options.seed;
    if (options.threads) mc.threads = *options.threads;

    json report = json::object();
    report["status"] = "ok";
    report["subcommand"] = to_string(cmd);
    report["scenario"] = sc.name;
    report["config"] = json::parse(sc.resolved_config);
    report["operator"] = {{"name", problem.op->name()}, {"sup_bound", problem.s_max()}};
    json timings = json::object();
    std::vector<std::string> warnings = sc.warnings;
    int status = exit_ok;
    Stopwatch clock;

    if (cmd == Subcommand::forward_only) {
        const ControlField& u = sc.initial_control;
        const StateEvaluation state = evaluate_state(problem, u);
        timings["forward"] = clock.lap();
        report["operator"]["sup_Su"] = state.Su.max();
        report["forward"] = density_json(state.rho);
        report["cost"] = cost_json(state.cost);
        append(warnings, state.rho.warnings, "forward: ");
        write_csv((dir / "control.csv").string(), u.zero_extended());
        write_trajectories(dir, sc, &state.rho, nullptr);
    } else if (cmd == Subcommand::grad_check) {
        const ControlField& u = sc.initial_control;
        const OmegaField v = random_direction(u, gc);
        const DirectionalCheckReport check = directional_derivative_check(problem, u, v, gc.eps);
        timings["grad_check"] = clock.lap();
        json rows = json::array();
        std::ofstream os(dir / "gradcheck.csv");
        if (!os) throw Error("cannot write " + (dir / "gradcheck.csv").string());
        os << "eps,finite_difference,predicted,relative_mismatch\n";
        char buf[256];
        for (const auto& r : check.rows) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.eps, r.finite_difference, r.predicted,
                          r.relative_mismatch);
            os << buf;
            rows.push_back({{"eps", r.eps},
                            {"finite_difference", r.finite_difference},
                            {"predicted", r.predicted},
                            {"relative_mismatch", r.relative_mismatch}});
        }
        bool decreasing = true;
        for (std::size_t i = 0; i + 1 < check.rows.size(); ++i)
            if (check.rows[i + 1].relative_mismatch >= check.rows[i].relative_mismatch) decreasing = false;
        if (!decreasing) warnings.push_back("grad-check: mismatch does not decrease monotonically with eps");
        report["grad_check"] = {{"predicted", check.predicted},
                                {"rows", rows},
                                {"observed_order", check.observed_order},
                                {"mismatch_decreasing", decreasing}};
        write_csv((dir / "control.csv").string(), u.zero_extended());
    } else {
        const SweepReport sweep = fb_sweep(problem, sc.sweep, sc.initial_control);
        timings["sweep"] = clock.lap();
        report["operator"]["sup_Su"] = sweep.Su.max();
        report["sweep"] = sweep_json(sweep);
        report["forward"] = density_json(sweep.density);
        append(warnings, sweep.density.warnings, "forward: ");
        append(warnings, sweep.adjoint.warnings, "adjoint: ");
        if (sweep.reason == Termination::max_iter) warnings.push_back("sweep: stopped at max_iter before converging");
        if (sweep.monotonicity_violations > 0)
            warnings.push_back("sweep: cost increased in " + std::to_string(sweep.monotonicity_violations) +
                               " iteration(s) after all halvings");
        write_csv((dir / "control.csv").string(), sweep.control.zero_extended());
        write_trajectories(dir, sc, &sweep.density, &sweep.adjoint);
        write_sweep_csv(dir / "sweep.csv", sweep);

        if (cmd == Subcommand::mc_compare) {
            const McResult paths = simulate_paths(sweep.Su, problem.model, problem.rho0, mc);
            timings["monte_carlo"] = clock.lap();
            append(warnings, paths.warnings, "monte carlo: ");
            const GridSpec hg = histogram_grid(g, mc.bins);

            json hist = json::array();
            for (double t : sc.output_checkpoints) {
                const int n = step_index(g, t);
                const EmpiricalDensity emp = empirical_density(paths.samples(static_cast<std::size_t>(n)), hg);
                const DensityComparison cmp = compare_mc_pde(emp.density, coarsen(sweep.density.at(n), hg));
                write_csv((dir / ("mc_hist_t" + time_tag(g.time(n)) + ".csv")).string(), emp.density);
                hist.push_back({{"t", g.time(n)},
                                {"l1", cmp.l1},
                                {"max_cell", cmp.max_cell},
                                {"retained_fraction", emp.retained_fraction}});
            }
            const EmpiricalDensity final_emp = empirical_density(paths.samples(paths.times.size() - 1), hg);
            const DensityComparison final_cmp = compare_mc_pde(final_emp.density, coarsen(sweep.density.final_state(), hg));
            const McCostEstimate est = estimate_cost_mc(paths, problem.cost, g.horizon);
            const double j_pde = sweep.cost.running + sweep.cost.terminal;
            const double cost_gap = std::abs(est.total - j_pde);
            const double cost_limit =
                sc.mc_acceptance.se_multiplier * est.se_total + sc.mc_acceptance.cost_allowance * std::abs(j_pde);
            const bool l1_ok = final_cmp.l1 <= sc.mc_acceptance.l1_tolerance;
            const bool cost_ok = cost_gap <= cost_limit;
            if (!l1_ok) warnings.push_back("mc-compare: L1 distance at T exceeds tolerance");
            if (!cost_ok) warnings.push_back("mc-compare: cost mismatch exceeds 3 SE + allowance");
            if (!(l1_ok && cost_ok)) {
                status = exit_acceptance_breach;
                report["status"] = "acceptance_breach";
            }
            report["monte_carlo"] = {
                {"paths", paths.paths},
                {"seed", mc.seed},
                {"threads", mc.threads},
                {"dt", paths.dt},
                {"steps", paths.steps},
                {"wrap_events", paths.wrap_events},
                {"wrapped_path_fraction", paths.wrapped_path_fraction},
                {"histograms", hist},
                {"l1_at_T", final_cmp.l1},
                {"max_cell_at_T", final_cmp.max_cell},
                {"retained_fraction_at_T", final_emp.retained_fraction},
                {"cost", {{"running", est.running},
                          {"terminal", est.terminal},
                          {"total", est.total},
                          {"se_running", est.se_running},
                          {"se_terminal", est.se_terminal},
                          {"se_total", est.se_total}}},
                {"pde_cost", j_pde},
                {"cost_gap", cost_gap},
                {"cost_limit", cost_limit},
                {"l1_ok", l1_ok},
                {"cost_ok", cost_ok}};
        }
    }

    timings["artifacts"] = clock.lap();
    report["timings_s"] = timings;
    report["warnings"] = warnings;
    write_text(dir / "report.json", report.dump(2) + "\n");
    return status;
}

void write_error_report(const std::filesystem::path& out_dir, const std::string& kind, const std::string& message) {
    try {
        std::filesystem::create_directories(out_dir);
        json report = {{"status", "error"}, {"error", {{"kind", kind}, {"message", message}}}};
        write_text(out_dir / "report.json", report.dump(2) + "\n");
    } catch (...) {
    }
}

}  // namespace nfpc
