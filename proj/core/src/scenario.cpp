#include "nfpc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nfpc/error.hpp"
#include "nfpc/expression.hpp"

namespace nfpc {

std::pair<CoefficientModel, CostSpec> finance_preset(const FinanceParams& p) {
    if (!(p.sigma0 > 0.0)) throw ContractError("H2: finance preset needs sigma0 > 0 (ellipticity)");
    if (!(p.r > 0.0) || !(p.mu1 > 0.0)) throw ContractError("finance preset: r and mu1 must be positive");
    if (!(p.sigma1 >= 0.0)) throw ContractError("finance preset: sigma1 must be >= 0");
    if (!(p.lambda_run >= 0.0)) throw ContractError("H4: finance preset needs lambda_run >= 0");
    if (!std::isfinite(p.x_target)) throw ContractError("finance preset: x_target must be finite");

    CoefficientModel m;
    m.name = "finance";
    m.dim = 1;
    const double r = p.r, mu1 = p.mu1, s0 = p.sigma0, s1 = p.sigma1;
    m.drift = [r, mu1](double, const Point&, double s) { return Point{r + mu1 * s / (1.0 + s), 0.0}; };
    m.drift_ds = [mu1](double, const Point&, double s) { return Point{mu1 / ((1.0 + s) * (1.0 + s)), 0.0}; };
    m.sigma = [s0, s1](double, const Point&, double s) { return s0 + s1 * s / (1.0 + s); };
    m.q_ds = [s0, s1](double, const Point&, double s) {
        const double sig = s0 + s1 * s / (1.0 + s);
        return 2.0 * sig * s1 / ((1.0 + s) * (1.0 + s));
    };
    m.gamma = s0 * s0;
    m.drift_bound = r + mu1;
    m.q_bound = (s0 + s1) * (s0 + s1);
    m.time_independent = true;

    CostSpec c;
    c.name = "finance";
    const double xt = p.x_target, lam = p.lambda_run;
    c.running = [xt, lam](double, const Point& x) { return lam * (x[0] - xt) * (x[0] - xt); };
    c.terminal = [xt](const Point& x) { return (x[0] - xt) * (x[0] - xt); };
    c.penalty = quadratic_penalty(p.alpha);
    return {std::move(m), std::move(c)};
}

namespace {

using json = nlohmann::ordered_json;

/// Reads one JSON object, records every key it touches (with defaults filled
/// in) and rejects keys it never touched.
class Section {
public:
    Section(const json& in, std::string path) : in_(in), path_(std::move(path)) {
        if (!in_.is_object()) fail("must be an object");
    }

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + ": " + what); }

    bool has(const std::string& key) const { return in_.contains(key) && !in_.at(key).is_null(); }

    double number(const std::string& key, std::optional<double> def = std::nullopt) {
        known_.insert(key);
        double v;
        if (has(key)) {
            if (!in_.at(key).is_number()) fail("'" + key + "' must be a number");
            v = in_.at(key).get<double>();
        } else if (def) {
            v = *def;
        } else {
            fail("missing required key '" + key + "'");
        }
        out_[key] = v;
        return v;
    }

    std::int64_t integer(const std::string& key, std::int64_t def) {
        known_.insert(key);
        std::int64_t v = def;
        if (has(key)) {
            const json& j = in_.at(key);
            if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>()))
                fail("'" + key + "' must be an integer");
            v = j.is_number_integer() ? j.get<std::int64_t>() : static_cast<std::int64_t>(j.get<double>());
        }
        out_[key] = v;
        return v;
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
        known_.insert(key);
        std::uint64_t v = def;
        if (has(key)) {
            if (!in_.at(key).is_number_unsigned()) fail("'" + key + "' must be a nonnegative integer");
            v = in_.at(key).get<std::uint64_t>();
        }
        out_[key] = v;
        return v;
    }

    bool boolean(const std::string& key, bool def) {
        known_.insert(key);
        bool v = def;
        if (has(key)) {
            if (!in_.at(key).is_boolean()) fail("'" + key + "' must be a boolean");
            v = in_.at(key).get<bool>();
        }
        out_[key] = v;
        return v;
    }

    std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
        known_.insert(key);
        std::string v;
        if (has(key)) {
            if (!in_.at(key).is_string()) fail("'" + key + "' must be a string");
            v = in_.at(key).get<std::string>();
        } else if (def) {
            v = *def;
        } else {
            fail("missing required key '" + key + "'");
        }
        out_[key] = v;
        return v;
    }

    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = std::nullopt) {
        known_.insert(key);
        std::vector<double> v;
        if (has(key)) {
            const json& j = in_.at(key);
            if (j.is_number()) {
                v = {j.get<double>()};
            } else {
                if (!j.is_array()) fail("'" + key + "' must be a number or an array of numbers");
                for (const auto& e : j) {
                    if (!e.is_number()) fail("'" + key + "' must contain numbers only");
                    v.push_back(e.get<double>());
                }
            }
        } else if (def) {
            v = *def;
        } else {
            fail("missing required key '" + key + "'");
        }
        out_[key] = v;
        return v;
    }

    std::vector<std::string> strings(const std::string& key) {
        known_.insert(key);
        std::vector<std::string> v;
        if (!has(key)) fail("missing required key '" + key + "'");
        const json& j = in_.at(key);
        if (j.is_string()) {
            v = {j.get<std::string>()};
        } else {
            if (!j.is_array()) fail("'" + key + "' must be a string or an array of strings");
            for (const auto& e : j) {
                if (!e.is_string()) fail("'" + key + "' must contain strings only");
                v.push_back(e.get<std::string>());
            }
        }
        out_[key] = v;
        return v;
    }

    /// Nested object (empty object when absent).
    const json& object(const std::string& key) {
        known_.insert(key);
        static const json empty = json::object();
        return has(key) ? in_.at(key) : empty;
    }

    void put(const std::string& key, json value) {
        known_.insert(key);
        out_[key] = std::move(value);
    }

    json finish() const {
        for (const auto& item : in_.items())
            if (!known_.count(item.key())) fail("unknown key '" + item.key() + "'");
        return out_;
    }

    const std::string& path() const { return path_; }

private:
    const json& in_;
    std::string path_;
    json out_ = json::object();
    std::set<std::string> known_;
};

Point to_point(const Section& sec, const std::string& key, const std::vector<double>& v, int dim) {
    if (static_cast<int>(v.size()) != dim) sec.fail("'" + key + "' must have " + std::to_string(dim) + " entries");
    Point p{0.0, 0.0};
    for (int k = 0; k < dim; ++k) p[k] = v[k];
    return p;
}

Expression parse_expression(const Section& sec, const std::string& text) {
    try {
        return Expression::parse(text);
    } catch (const ConfigError& e) {
        sec.fail(e.what());
    }
}

KernelParams read_kernel(const json& in, json& out) {
    Section sec(in, "nonlocal.kernel");
    KernelParams k;
    const std::string type = sec.string("type", "gaussian");
    if (type == "gaussian") {
        k.type = KernelType::gaussian;
        k.width = sec.number("sigma", 0.2);
    } else if (type == "bump") {
        k.type = KernelType::bump;
        k.width = sec.number("radius", 0.5);
    } else if (type == "delta") {
        k.type = KernelType::delta;
    } else {
        sec.fail("unknown kernel type '" + type + "' (gaussian, bump, delta)");
    }
    if (k.type != KernelType::delta) {
        k.amplitude = sec.number("amplitude", 1.0);
        k.normalize = sec.boolean("normalize", true);
    }
    k.exponent = sec.number("exponent", 1.0);
    out = sec.finish();
    return k;
}

Penalty read_penalty(const json& in, json& out) {
    Section sec(in, "problem.penalty");
    const std::string type = sec.string("type", "quadratic");
    const double alpha = sec.number("alpha", 1.0);
    Penalty p;
    try {
        if (type == "quadratic") p = quadratic_penalty(alpha);
        else if (type == "quadratic_linear") p = quadratic_linear_penalty(alpha, sec.number("beta"));
        else if (type == "quadratic_quartic") p = quadratic_quartic_penalty(alpha, sec.number("c"));
        else if (type == "quadratic_hinge") {
            const double c = sec.number("c");
            p = quadratic_hinge_penalty(alpha, c, sec.number("knee"));
        } else if (type == "quadratic_exp") p = quadratic_exp_penalty(alpha, sec.number("c"));
        else sec.fail("unknown penalty type '" + type + "'");
    } catch (const ContractError& e) {
        sec.fail(e.what());
    }
    out = sec.finish();
    return p;
}

struct ProblemParts {
    CoefficientModel model;
    CostSpec cost;
};

ProblemParts read_problem(const json& in, json& out, int dim) {
    Section sec(in, "problem");
    const std::string type = sec.string("type");
    ProblemParts parts;
    try {
        if (type == "finance") {
            if (dim != 1) sec.fail("the finance preset is one-dimensional");
            FinanceParams fp;
            fp.r = sec.number("r", fp.r);
            fp.mu1 = sec.number("mu1", fp.mu1);
            fp.sigma0 = sec.number("sigma0", fp.sigma0);
            fp.sigma1 = sec.number("sigma1", fp.sigma1);
            fp.x_target = sec.number("x_target", fp.x_target);
            fp.lambda_run = sec.number("lambda_run", fp.lambda_run);
            fp.alpha = sec.number("alpha", fp.alpha);
            auto [m, c] = finance_preset(fp);
            parts.model = std::move(m);
            parts.cost = std::move(c);
        } else if (type == "constant") {
            const Point drift = to_point(sec, "drift", sec.numbers("drift", std::vector<double>(dim, 0.0)), dim);
            const double q = sec.number("q", 0.2);
            if (!(q > 0.0)) sec.fail("H2: q must be positive");
            parts.model = constant_model(dim, drift, q);
            const double g = sec.number("running", 0.0);
            const double gt = sec.number("terminal", 0.0);
            parts.cost = constant_cost(g, gt, 1.0);
            json pen;
            parts.cost.penalty = read_penalty(sec.object("penalty"), pen);
            sec.put("penalty", pen);
        } else if (type == "expression") {
            CoefficientModel m;
            m.name = "expression";
            m.dim = dim;
            const auto drift_text = sec.strings("drift");
            if (static_cast<int>(drift_text.size()) != dim) sec.fail("'drift' needs one expression per axis");
            std::vector<Expression> drift, drift_ds;
            for (const auto& t : drift_text) drift.push_back(parse_expression(sec, t));
            const Expression sigma = parse_expression(sec, sec.string("sigma"));
            if (sec.has("drift_ds")) {
                for (const auto& t : sec.strings("drift_ds")) drift_ds.push_back(parse_expression(sec, t));
                if (static_cast<int>(drift_ds.size()) != dim) sec.fail("'drift_ds' needs one expression per axis");
            }
            std::optional<Expression> q_ds;
            if (sec.has("q_ds")) q_ds = parse_expression(sec, sec.string("q_ds"));
            m.gamma = sec.number("gamma");
            m.drift_bound = sec.number("drift_bound");
            m.q_bound = sec.number("q_bound");
            m.time_independent = sec.boolean("time_independent", true);

            auto vars = [](double t, const Point& x, double s) { return ExpressionVars{t, x[0], x[1], s}; };
            auto fd_step = [](double s) { return 1e-6 * std::max(1.0, std::abs(s)); };
            m.drift = [drift, vars](double t, const Point& x, double s) {
                Point b{0.0, 0.0};
                for (std::size_t k = 0; k < drift.size(); ++k) b[k] = drift[k](vars(t, x, s));
                return b;
            };
            if (!drift_ds.empty()) {
                m.drift_ds = [drift_ds, vars](double t, const Point& x, double s) {
                    Point b{0.0, 0.0};
                    for (std::size_t k = 0; k < drift_ds.size(); ++k) b[k] = drift_ds[k](vars(t, x, s));
                    return b;
                };
            } else {
                m.drift_ds = [drift, vars, fd_step](double t, const Point& x, double s) {
                    const double h = fd_step(s);
                    Point b{0.0, 0.0};
                    for (std::size_t k = 0; k < drift.size(); ++k)
                        b[k] = (drift[k](vars(t, x, s + h)) - drift[k](vars(t, x, s - h))) / (2.0 * h);
                    return b;
                };
            }
            m.sigma = [sigma, vars](double t, const Point& x, double s) { return sigma(vars(t, x, s)); };
            if (q_ds) {
                m.q_ds = [e = *q_ds, vars](double t, const Point& x, double s) { return e(vars(t, x, s)); };
            } else {
                m.q_ds = [sigma, vars, fd_step](double t, const Point& x, double s) {
                    const double h = fd_step(s);
                    const double a = sigma(vars(t, x, s + h)), b = sigma(vars(t, x, s - h));
                    return (a * a - b * b) / (2.0 * h);
                };
            }
            parts.model = std::move(m);

            const Expression running = parse_expression(sec, sec.string("running", "0"));
            const Expression terminal = parse_expression(sec, sec.string("terminal", "0"));
            parts.cost.name = "expression";
            parts.cost.running = [running](double t, const Point& x) { return running({t, x[0], x[1], 0.0}); };
            parts.cost.terminal = [terminal](const Point& x) { return terminal({0.0, x[0], x[1], 0.0}); };
            json pen;
            parts.cost.penalty = read_penalty(sec.object("penalty"), pen);
            sec.put("penalty", pen);
        } else {
            sec.fail("unknown problem type '" + type + "' (finance, constant, expression)");
        }
    } catch (const ContractError& e) {
        sec.fail(e.what());
    }
    out = sec.finish();
    return parts;
}

InitialDensityParams read_density(const json& in, json& out, int dim) {
    Section sec(in, "initial_density");
    InitialDensityParams p;
    const std::string type = sec.string("type", "gaussian");
    if (type == "gaussian") {
        p.type = DensityPreset::gaussian;
        GaussianComponent c;
        c.mean = to_point(sec, "mean", sec.numbers("mean", std::vector<double>(dim, 0.0)), dim);
        c.variance = sec.number("variance", 0.04);
        p.components = {c};
    } else if (type == "mixture") {
        p.type = DensityPreset::mixture;
        p.components.clear();
        const json& comps = sec.object("components");
        if (!comps.is_array() || comps.empty()) sec.fail("'components' must be a nonempty array");
        json resolved = json::array();
        for (std::size_t i = 0; i < comps.size(); ++i) {
            Section cs(comps[i], "initial_density.components[" + std::to_string(i) + "]");
            GaussianComponent c;
            c.weight = cs.number("weight");
            c.mean = to_point(cs, "mean", cs.numbers("mean"), dim);
            c.variance = cs.number("variance");
            p.components.push_back(c);
            resolved.push_back(cs.finish());
        }
        sec.put("components", resolved);
    } else if (type == "uniform") {
        p.type = DensityPreset::uniform;
        p.lower = to_point(sec, "lower", sec.numbers("lower"), dim);
        p.upper = to_point(sec, "upper", sec.numbers("upper"), dim);
    } else {
        sec.fail("unknown density type '" + type + "' (gaussian, mixture, uniform)");
    }
    out = sec.finish();
    return p;
}

}  // namespace

Scenario parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }

    Section top(root, "config");
    Scenario sc;
    json resolved = json::object();
    sc.name = top.string("name", "scenario");

    // grid
    GridSpec grid;
    {
        Section sec(top.object("grid"), "grid");
        grid.dim = static_cast<int>(sec.integer("dim", 1));
        grid.half_width = sec.number("half_width", 4.0);
        grid.cells = static_cast<int>(sec.integer("cells", 256));
        grid.horizon = sec.number("horizon", 1.0);
        grid.steps = static_cast<int>(sec.integer("steps", 100));
        try {
            grid.validate();
        } catch (const ContractError& e) {
            sec.fail(e.what());
        }
        top.put("grid", sec.finish());
    }
    const int dim = grid.dim;

    // omega
    OmegaPtr omega;
    {
        Section sec(top.object("omega"), "omega");
        const Point lo = to_point(sec, "lower", sec.numbers("lower", std::vector<double>(dim, -1.0)), dim);
        const Point hi = to_point(sec, "upper", sec.numbers("upper", std::vector<double>(dim, 1.0)), dim);
        try {
            omega = std::make_shared<const OmegaMask>(OmegaMask::box(grid, lo, hi));
        } catch (const ContractError& e) {
            sec.fail(e.what());
        }
        top.put("omega", sec.finish());
    }

    // control
    double bound = 1.0;
    std::vector<double> initial;
    {
        Section sec(top.object("control"), "control");
        bound = sec.number("bound", 1.0);
        if (!(bound > 0.0)) sec.fail("admissible set: bound M0 must be positive");
        initial = sec.numbers("initial", std::vector<double>{0.5 * bound});
        if (initial.size() == 1) initial.assign(omega->count(), initial[0]);
        if (initial.size() != omega->count())
            sec.fail("'initial' must be a scalar or have one value per omega cell");
        try {
            sc.initial_control = ControlField(omega, bound, initial);
        } catch (const ContractError& e) {
            sec.fail(e.what());
        }
        json out = sec.finish();
        // keep the echo compact when the initial control is constant
        if (std::all_of(initial.begin(), initial.end(), [&](double v) { return v == initial[0]; }))
            out["initial"] = initial[0];
        top.put("control", out);
    }

    // nonlocal operator
    std::shared_ptr<const NonlocalOperator> op;
    {
        Section sec(top.object("nonlocal"), "nonlocal");
        const std::string type = sec.string("type", "convolution");
        if (type == "convolution") {
            json kout;
            const KernelParams kp = read_kernel(sec.object("kernel"), kout);
            sec.put("kernel", kout);
            try {
                Kernel k = build_kernel(grid, kp);
                const double tail = k.tail_fraction(grid.half_width - omega->reach());
                if (tail > 1e-8) {
                    std::ostringstream msg;
                    msg << "kernel wrap-around contamination " << tail << " exceeds 1e-8; enlarge the domain";
                    sc.warnings.push_back(msg.str());
                }
                op = std::make_shared<const ConvolutionOperator>(std::move(k));
            } catch (const ContractError& e) {
                sec.fail(e.what());
            }
        } else if (type == "elliptic") {
            op = std::make_shared<const EllipticOperator>(grid);
        } else {
            sec.fail("unknown nonlocal type '" + type + "' (convolution, elliptic)");
        }
        top.put("nonlocal", sec.finish());
    }

    // problem (model + cost)
    ProblemParts parts;
    {
        json out;
        if (!top.has("problem")) top.fail("missing required key 'problem'");
        parts = read_problem(top.object("problem"), out, dim);
        top.put("problem", out);
    }

    // initial density
    ScalarField rho0;
    {
        json out;
        const InitialDensityParams dp = read_density(top.object("initial_density"), out, dim);
        try {
            rho0 = make_initial_density(grid, dp);
        } catch (const ContractError& e) {
            throw ConfigError(std::string("initial_density: ") + e.what());
        }
        if (boundary_mass(rho0) > 1e-6) sc.warnings.push_back("initial density mass near the box boundary exceeds 1e-6");
        top.put("initial_density", out);
    }

    // sweep
    {
        Section sec(top.object("sweep"), "sweep");
        sc.sweep.relaxation = sec.number("relaxation", 0.5);
        sc.sweep.max_iter = static_cast<int>(sec.integer("max_iter", 100));
        sc.sweep.tol_control = sec.number("tol_control", 1e-6);
        sc.sweep.tol_residual = sec.number("tol_residual", 1e-6);
        sc.sweep.argmin_resolution = sec.number("argmin_resolution", 1e-4 * bound);
        sc.sweep.max_halvings = static_cast<int>(sec.integer("max_halvings", 5));
        try {
            sc.sweep.validate();
        } catch (const ContractError& e) {
            sec.fail(e.what());
        }
        top.put("sweep", sec.finish());
    }

    // monte carlo
    {
        sc.monte_carlo_configured = top.has("monte_carlo");
        Section sec(top.object("monte_carlo"), "monte_carlo");
        McConfig& mc = sc.monte_carlo;
        mc.paths = sec.unsigned_integer("paths", 100000);
        mc.seed = sec.unsigned_integer("seed", 1);
        mc.dt = sec.number("dt", grid.dt() / 10.0);
        mc.bins = static_cast<int>(sec.integer("bins", 0));
        mc.threads = static_cast<unsigned>(sec.unsigned_integer("threads", 1));
        sc.mc_acceptance.l1_tolerance = sec.number("l1_tolerance", 0.05);
        sc.mc_acceptance.cost_allowance = sec.number("cost_allowance", 0.02);
        sc.mc_acceptance.se_multiplier = sec.number("se_multiplier", 3.0);
        if (mc.dt > grid.dt() * (1.0 + 1e-12))
            sec.fail("'dt' must not exceed the grid time step (paths are recorded at every grid time)");
        for (int n = 0; n <= grid.steps; ++n) mc.checkpoints.push_back(grid.time(n));
        try {
            mc.validate(grid);
        } catch (const ContractError& e) {
            sec.fail(e.what());
        }
        top.put("monte_carlo", sec.finish());
    }

    // gradient check
    {
        Section sec(top.object("grad_check"), "grad_check");
        sc.grad_check.eps = sec.numbers("eps", std::vector<double>{1e-2, 1e-3, 1e-4});
        sc.grad_check.seed = sec.unsigned_integer("seed", 7);
        sc.grad_check.amplitude = sec.number("amplitude", 0.25);
        if (sc.grad_check.eps.empty()) sec.fail("'eps' must not be empty");
        for (double e : sc.grad_check.eps)
            if (!(e > 0.0)) sec.fail("'eps' entries must be positive");
        if (!(sc.grad_check.amplitude > 0.0)) sec.fail("'amplitude' must be positive");
        top.put("grad_check", sec.finish());
    }

    // output
    {
        Section sec(top.object("output"), "output");
        sc.output_checkpoints = sec.numbers("checkpoints", std::vector<double>{0.0, grid.horizon});
        for (double t : sc.output_checkpoints)
            if (!(t >= 0.0 && t <= grid.horizon * (1.0 + 1e-12))) sec.fail("checkpoint outside [0, T]");
        top.put("output", sec.finish());
    }

    resolved = top.finish();

    sc.problem.grid = grid;
    sc.problem.op = op;
    sc.problem.omega = omega;
    sc.problem.bound = bound;
    sc.problem.model = std::move(parts.model);
    sc.problem.cost = std::move(parts.cost);
    sc.problem.rho0 = std::move(rho0);
    try {
        sc.problem.validate();
    } catch (const ContractError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    sc.resolved_config = resolved.dump(2);
    return sc;
}

Scenario load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

std::string emit_config(const Scenario& scenario) { return scenario.resolved_config; }

}  // namespace nfpc
