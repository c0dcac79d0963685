#include "pathwise/experiments.hpp"

#include "pathwise/characteristics.hpp"
#include "pathwise/errors.hpp"
#include "pathwise/parallel.hpp"
#include "pathwise/path_io.hpp"
#include "pathwise/rng.hpp"
#include "pathwise/viscosity.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace pathwise {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* library_version() { return PATHWISE_VERSION; }

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* flag(bool b) { return b ? "true" : "false"; }

struct Context {
    Context(const ExperimentConfig& c, const RunOptions& o, fs::path d) : cfg(c), opt(o), dir(std::move(d)) {}

    const ExperimentConfig& cfg;
    const RunOptions& opt;
    fs::path dir;
    json summary = json::object();
    std::vector<std::string> artifacts;
    bool pass = true;

    void log(const std::string& line) const {
        if (opt.log != nullptr) *opt.log << "[" << cfg.experiment << "] " << line << '\n';
    }

    std::ofstream open(const std::string& name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw ParameterError("cannot write " + (dir / name).string());
        artifacts.push_back(name);
        return out;
    }
};

std::vector<std::uint64_t> path_seeds(const ExperimentConfig& c) {
    std::vector<std::uint64_t> s(c.seeds);
    for (std::size_t i = 0; i < c.seeds; ++i) s[i] = c.seed + i;
    return s;
}

SamplePath make_path(const ExperimentConfig& c, std::uint64_t seed) {
    SamplePath p = sample_path(c.noise_dim, c.path->horizon, c.path->steps, seed);
    return c.path->refine > 1 ? refine(p, c.path->refine) : p;
}

std::vector<SamplePath> make_paths(const Context& ctx) {
    std::vector<SamplePath> out;
    for (auto s : path_seeds(ctx.cfg)) out.push_back(make_path(ctx.cfg, s));
    return out;
}

CoefficientSuite make_suite(const ExperimentConfig& c) {
    return pathwise::make_suite(c.f->family, c.f->params, c.g->family, c.g->params, c.noise_dim, c.space_dim);
}

FDGrid fd_grid(const GridSpec& g) {
    FDGrid out;
    out.x_lo = g.x_lo;
    out.x_hi = g.x_hi;
    out.nx = g.nx;
    out.boundary = g.boundary;
    out.store_every = g.store_every;
    return out;
}

void require_scalar_dims(const ExperimentConfig& c) {
    if (c.noise_dim != 1 || c.space_dim != 1)
        throw ParameterError(c.experiment + " runs with one-dimensional fields: set dims to {noise: 1, space: 1}");
}

// Evaluation points for one path. Times are snapped to the path grid.
std::vector<ConsistencyPoint> make_points(const ExperimentConfig& c, const SamplePath& path) {
    const PointsSpec& spec = *c.points;
    auto snap = [&](double t) {
        const double k = std::round(t / path.step());
        if (k < 1.0 || k > static_cast<double>(path.steps()))
            throw ParameterError("point time " + num(t) + " lies outside (0, T]");
        return path.time(static_cast<std::size_t>(k));
    };
    std::vector<ConsistencyPoint> out;
    if (!spec.list.empty()) {
        for (const auto& [t, x] : spec.list) out.push_back({snap(t), x});
        return out;
    }
    Stream rng(c.seed, "points", path.seed());
    for (std::size_t i = 0; i < spec.count; ++i) {
        const double t = spec.t_range.first + (spec.t_range.second - spec.t_range.first) * rng.uniform();
        const double x = spec.x_range.first + (spec.x_range.second - spec.x_range.first) * rng.uniform();
        out.push_back({snap(t), x});
    }
    return out;
}

ScanLattice make_lattice(const LatticeSpec& l) {
    ScanLattice lat = ScanLattice::dyadic(l.finest, l.coarsest, l.pairing);
    lat.multipliers = l.multipliers;
    for (double h : l.offsets) lat.hs.push_back(scalar_vec(h));
    return lat;
}

void gen_path(Context& ctx) {
    for (const auto& p : make_paths(ctx)) {
        const std::string stem = "path_" + std::to_string(p.seed());
        write_path_binary(p, (ctx.dir / (stem + ".pwpf")).string());
        ctx.artifacts.push_back(stem + ".pwpf");
        auto out = ctx.open(stem + ".csv");
        write_path_csv(p, out);
    }
}

void levy_check(Context& ctx) {
    const double tol = ctx.cfg.tolerance("chen");
    auto out = ctx.open("levy_check.csv");
    out << "seed,s,u,t,chen_defect,antisymmetry,product_rule\n";
    double worst = 0.0;
    for (const auto& p : make_paths(ctx)) {
        const std::size_t n = p.steps();
        std::vector<std::array<std::size_t, 3>> triples;
        for (std::size_t k = 1; k < 8; ++k) triples.push_back({0, std::max<std::size_t>(1, k * n / 8), n});
        triples.push_back({n / 4, n / 2, 3 * n / 4});
        triples.push_back({n / 2, n / 2 + 1, n});
        for (const auto& tr : triples) {
            if (!(tr[0] < tr[1] && tr[1] < tr[2])) continue;
            const double s = p.time(tr[0]), u = p.time(tr[1]), t = p.time(tr[2]);
            const double chen = chen_check(p, s, u, t);
            const SecondLevel lvl = second_level(p, s, t);
            const double anti = (lvl.levy + lvl.levy.transpose()).cwiseAbs().maxCoeff();
            const Mat bb = lvl.increment * lvl.increment.transpose();
            const double prod = (lvl.strat + lvl.strat.transpose() - bb).cwiseAbs().maxCoeff() /
                                std::max(1.0, lvl.increment.squaredNorm());
            worst = std::max({worst, chen, anti, prod});
            out << p.seed() << ',' << num(s) << ',' << num(u) << ',' << num(t) << ',' << num(chen) << ','
                << num(anti) << ',' << num(prod) << '\n';
        }
    }
    ctx.summary["worst_defect"] = worst;
    ctx.pass = worst <= tol;
}

void taylor_order(Context& ctx) {
    require_scalar_dims(ctx.cfg);
    const CoefficientSuite suite = make_suite(ctx.cfg);
    const RandomField u = make_field(ctx.cfg.field->family, ctx.cfg.field->params);
    const ScanLattice lat = make_lattice(*ctx.cfg.lattice);
    auto rows = ctx.open("taylor_order.csv");
    auto sums = ctx.open("taylor_order_summary.csv");
    rows << "seed,t,x,delta,h_norm,remainder,scale\n";
    sums << "seed,t,x,slope,intercept,n_points\n";
    std::size_t fits = 0, good = 0;
    for (const auto& p : make_paths(ctx)) {
        for (const auto& pt : make_points(ctx.cfg, p)) {
            OrderFit fit;
            bool ok = true;
            try {
                fit = order_estimate(u, suite, pt.t, scalar_vec(pt.x), p, lat, ctx.opt.threads);
            } catch (const InsufficientDataError&) {
                ok = false;
                const auto pts = lat.points(1);
                for (const auto& q : pts) {
                    RemainderSample s;
                    s.delta = q.delta;
                    s.h_norm = q.h.norm();
                    s.remainder = remainder(u, suite, pt.t, scalar_vec(pt.x), q.delta, q.h, p);
                    s.scale = q.delta + q.h.squaredNorm();
                    fit.samples.push_back(s);
                    if (std::abs(s.remainder) > 1e-13) ++fit.n_points;
                }
            }
            for (const auto& s : fit.samples)
                rows << p.seed() << ',' << num(pt.t) << ',' << num(pt.x) << ',' << num(s.delta) << ','
                     << num(s.h_norm) << ',' << num(s.remainder) << ',' << num(s.scale) << '\n';
            sums << p.seed() << ',' << num(pt.t) << ',' << num(pt.x) << ',' << (ok ? num(fit.slope) : "nan") << ','
                 << (ok ? num(fit.intercept) : "nan") << ',' << fit.n_points << '\n';
            ++fits;
            if (ok && fit.slope >= ctx.cfg.tolerance("min_slope")) ++good;
        }
        ctx.log("seed " + std::to_string(p.seed()) + " done");
    }
    ctx.summary["fits"] = fits;
    ctx.summary["fits_above_min_slope"] = good;
    ctx.pass = static_cast<double>(good) >= ctx.cfg.tolerance("quota") * static_cast<double>(fits);
}

void check_viscosity(Context& ctx) {
    require_scalar_dims(ctx.cfg);
    const CoefficientSuite suite = make_suite(ctx.cfg);
    const RandomField u = make_field(ctx.cfg.field->family, ctx.cfg.field->params);
    ViscosityOptions vo;
    vo.alpha = ctx.cfg.tolerance("alpha");
    vo.threshold = ctx.cfg.tolerance("threshold");
    vo.f_tolerance = ctx.cfg.tolerance("f_tolerance");
    vo.lattice = make_lattice(*ctx.cfg.lattice);
    const auto seeds = path_seeds(ctx.cfg);
    std::vector<ConsistencyReport> reports(seeds.size());
    parallel_for(seeds.size(), ctx.opt.threads, [&](std::size_t i) {
        const SamplePath p = make_path(ctx.cfg, seeds[i]);
        reports[i] = consistency_experiment(u, suite, make_points(ctx.cfg, p), {p}, vo, 1);
    });
    auto out = ctx.open("check_viscosity.csv");
    out << "seed,t,x,side,a_minus_f,ratio_max,member,pass\n";
    double max_amf = 0.0, max_ratio = 0.0, sub_violation = 0.0, super_violation = 0.0;
    bool sub_ok = true, super_ok = true;
    for (const auto& r : reports) {
        for (const auto& rec : r.records)
            out << rec.seed << ',' << num(rec.t) << ',' << num(rec.x) << ',' << to_string(rec.side) << ','
                << num(rec.a_minus_f) << ',' << num(rec.ratio_max) << ',' << flag(rec.member) << ','
                << flag(rec.pass) << '\n';
        max_amf = std::max(max_amf, r.max_abs_a_minus_f);
        max_ratio = std::max(max_ratio, r.max_ratio);
        sub_ok = sub_ok && r.subsolution_pass;
        super_ok = super_ok && r.supersolution_pass;
        sub_violation = std::max(sub_violation, r.sub_violation);
        super_violation = std::max(super_violation, r.super_violation);
    }
    ctx.summary["max_abs_a_minus_f"] = max_amf;
    ctx.summary["max_ratio"] = max_ratio;
    ctx.summary["subsolution_pass"] = sub_ok;
    ctx.summary["supersolution_pass"] = super_ok;
    ctx.summary["sub_violation"] = sub_violation;
    ctx.summary["super_violation"] = super_violation;
    ctx.pass = sub_ok && super_ok;
}

double linf(const FieldSamples& a, const FieldSamples& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.values.size(); ++n) m = std::max(m, std::abs(a.values[n] - b.values[n]));
    return m;
}

void convert(Context& ctx) {
    const CoefficientSuite suite = make_suite(ctx.cfg);
    const InitialData u0 = make_initial(ctx.cfg.initial->family, ctx.cfg.initial->params);
    const FDGrid grid = fd_grid(*ctx.cfg.grid);
    const auto seeds = path_seeds(ctx.cfg);
    struct Row {
        std::size_t n = 0;
        double d = 0.0, control = 0.0;
    };
    std::vector<std::array<Row, 2>> rows(seeds.size());
    parallel_for(seeds.size(), ctx.opt.threads, [&](std::size_t i) {
        const SamplePath coarse = make_path(ctx.cfg, seeds[i]);
        const SamplePath fine = refine(coarse, 2);
        int level = 0;
        for (const SamplePath* p : {&coarse, &fine}) {
            const FDSolution s = solve_fd_stratonovich(suite, u0, grid, *p);
            const FDSolution it = solve_fd_ito(suite, u0, grid, *p);
            const FDSolution ctl = solve_fd_ito(suite, u0, grid, *p, true);
            rows[i][level] = {p->steps(), linf(s.samples, it.samples), linf(s.samples, ctl.samples)};
            ++level;
        }
    });
    auto out = ctx.open("convert.csv");
    out << "seed,N,discrepancy,control_discrepancy,ratio\n";
    double worst = 0.0, log_ratio = 0.0, worst_control_factor = 1e300;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const double ratio = rows[i][1].d / rows[i][0].d;
        for (const Row& r : rows[i]) {
            out << seeds[i] << ',' << r.n << ',' << num(r.d) << ',' << num(r.control) << ',' << num(ratio) << '\n';
            worst_control_factor = std::min(worst_control_factor, r.control / r.d);
        }
        worst = std::max(worst, rows[i][0].d);
        log_ratio += std::log(ratio);
    }
    const double mean_ratio = std::exp(log_ratio / static_cast<double>(seeds.size()));
    ctx.summary["max_discrepancy"] = worst;
    ctx.summary["geometric_mean_ratio"] = mean_ratio;
    ctx.summary["min_control_factor"] = worst_control_factor;
    ctx.pass = worst <= ctx.cfg.tolerance("max_discrepancy") && mean_ratio >= ctx.cfg.tolerance("ratio_lo") &&
               mean_ratio <= ctx.cfg.tolerance("ratio_hi") &&
               worst_control_factor >= ctx.cfg.tolerance("control_factor");
}

void solve_fd(Context& ctx) {
    const CoefficientSuite suite = make_suite(ctx.cfg);
    const InitialData u0 = make_initial(ctx.cfg.initial->family, ctx.cfg.initial->params);
    const FDGrid grid = fd_grid(*ctx.cfg.grid);
    const auto seeds = path_seeds(ctx.cfg);
    std::vector<FDSolution> sols(seeds.size());
    parallel_for(seeds.size(), ctx.opt.threads, [&](std::size_t i) {
        const SamplePath p = make_path(ctx.cfg, seeds[i]);
        sols[i] = ctx.cfg.scheme == "ito" ? solve_fd_ito(suite, u0, grid, p) : solve_fd_stratonovich(suite, u0, grid, p);
    });
    json runs = json::array();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const std::string stem = "field_" + std::to_string(seeds[i]);
        {
            auto out = ctx.open(stem + ".csv");
            write_samples_csv(sols[i].samples, out);
        }
        const SamplePath p = make_path(ctx.cfg, seeds[i]);
        write_path_binary(p, (ctx.dir / ("path_" + std::to_string(seeds[i]) + ".pwpf")).string());
        ctx.artifacts.push_back("path_" + std::to_string(seeds[i]) + ".pwpf");
        json side;
        side["seed"] = seeds[i];
        side["path_file"] = "path_" + std::to_string(seeds[i]) + ".pwpf";
        side["times"] = sols[i].samples.times.size();
        side["nx"] = sols[i].samples.xs.size();
        side["x_lo"] = grid.x_lo;
        side["x_hi"] = grid.x_hi;
        side["scheme"] = ctx.cfg.scheme;
        side["cfl"] = sols[i].cfl;
        side["boundary_influence"] = sols[i].boundary_influence;
        {
            auto out = ctx.open(stem + ".json");
            out << side.dump(2) << '\n';
        }
        runs.push_back(side);
    }
    ctx.summary["runs"] = runs;
}

void characteristics(Context& ctx, bool full_pipeline) {
    require_scalar_dims(ctx.cfg);
    const CoefficientSuite suite = make_suite(ctx.cfg);
    const RandomField u = make_field(ctx.cfg.field->family, ctx.cfg.field->params);
    const RandomField v = ctx.cfg.reference_field
                              ? make_field(ctx.cfg.reference_field->family, ctx.cfg.reference_field->params)
                              : make_field("constant", {{"c", 0.0}});
    const InitialData w0 = make_initial(ctx.cfg.initial->family, ctx.cfg.initial->params);
    const XGrid grid{ctx.cfg.grid->x_lo, ctx.cfg.grid->x_hi, ctx.cfg.grid->nx};
    const EvaluateSpec& ev = *ctx.cfg.evaluate;
    std::size_t clamps = 0;
    for (const auto& p : make_paths(ctx)) {
        MonteCarloOptions mo;
        mo.samples = ctx.cfg.monte_carlo->samples;
        mo.inner_steps = ctx.cfg.monte_carlo->inner_steps;
        mo.seed = p.seed();
        mo.threads = ctx.opt.threads;
        const double t = p.time(p.index_of(ev.t));
        auto out = ctx.open((full_pipeline ? "characteristics_" : "feynman_kac_") + std::to_string(p.seed()) + ".csv");
        out << "t,x,v,se,w\n";
        if (full_pipeline) {
            for (const auto& q : solve_linear_spde(suite, u, v, w0, p, grid, t, ev.xs, mo)) {
                out << num(t) << ',' << num(q.x) << ',' << num(q.v.mean) << ',' << num(q.v.standard_error) << ','
                    << num(q.w) << '\n';
                clamps += q.v.clamp_events;
            }
        } else {
            const auto coeffs = linearize(suite, u, v, p, grid, ctx.opt.threads);
            const auto bundle = solve_characteristics(coeffs, p);
            const auto reduced = reduced_coefficients(coeffs, bundle);
            const std::size_t k = p.index_of(t);
            for (double x : ev.xs) {
                const FKEstimate e = feynman_kac(reduced, w0, t, x, mo);
                out << num(t) << ',' << num(x) << ',' << num(e.mean) << ',' << num(e.standard_error) << ','
                    << num(bundle.weight(k, x) * e.mean) << '\n';
                clamps += e.clamp_events;
            }
        }
        ctx.log("seed " + std::to_string(p.seed()) + " done");
    }
    ctx.summary["clamp_events"] = clamps;
    ctx.summary["monte_carlo"] = {{"samples", ctx.cfg.monte_carlo->samples},
                                  {"inner_steps", ctx.cfg.monte_carlo->inner_steps}};
}

void compare(Context& ctx) {
    const CoefficientSuite suite = make_suite(ctx.cfg);
    const InitialData u0 = make_initial(ctx.cfg.initial->family, ctx.cfg.initial->params);
    const InitialData v0 = make_initial(ctx.cfg.comparison_initial->family, ctx.cfg.comparison_initial->params);
    const FDGrid grid = fd_grid(*ctx.cfg.grid);
    const auto seeds = path_seeds(ctx.cfg);
    std::vector<ComparisonReport> reports(seeds.size());
    parallel_for(seeds.size(), ctx.opt.threads, [&](std::size_t i) {
        reports[i] = classical_comparison_experiment(suite, u0, v0, make_path(ctx.cfg, seeds[i]), grid);
    });
    auto out = ctx.open("compare.csv");
    out << "seed,precondition_met,min_difference,pass\n";
    double worst = 1e300;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& r = reports[i];
        out << seeds[i] << ',' << flag(r.precondition_met) << ',' << num(r.min_difference) << ','
            << flag(r.pass && r.min_difference >= ctx.cfg.tolerance("min_difference")) << '\n';
        if (!r.precondition_met) {
            ctx.summary["diagnostic"] = r.diagnostic;
            ctx.pass = false;
            continue;
        }
        worst = std::min(worst, r.min_difference);
    }
    if (worst < 1e300) ctx.summary["min_difference"] = worst;
    ctx.pass = ctx.pass && worst >= ctx.cfg.tolerance("min_difference");
}

void envelope(Context& ctx) {
    const CoefficientSuite suite = make_suite(ctx.cfg);
    const InitialData u0 = make_initial(ctx.cfg.initial->family, ctx.cfg.initial->params);
    const FDGrid grid = fd_grid(*ctx.cfg.grid);
    auto out = ctx.open("envelope.csv");
    out << "seed,eps,max_gap,predicted_gap,min_order\n";
    bool ordered = true, monotone = true;
    double worst = 0.0;
    for (const auto& p : make_paths(ctx)) {
        const EnvelopeReport r = envelope_experiment(suite, u0, ctx.cfg.eps, grid, p, ctx.opt.threads);
        for (const auto& l : r.levels)
            out << p.seed() << ',' << num(l.eps) << ',' << num(l.max_gap) << ',' << num(l.predicted_gap) << ','
                << num(l.min_order) << '\n';
        ordered = ordered && r.ordered;
        monotone = monotone && r.monotone;
        worst = std::max(worst, r.worst_relative_gap_error);
    }
    ctx.summary["ordered"] = ordered;
    ctx.summary["monotone"] = monotone;
    ctx.summary["worst_relative_gap_error"] = worst;
    ctx.pass = ordered && monotone && worst <= ctx.cfg.tolerance("gap_relative");
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    RunResult result;
    const std::string dir = options.output_dir.empty() ? config.output : options.output_dir;
    if (dir.empty()) {
        result.exit_code = 1;
        result.message = "no output directory: set `output` in the config or pass --output";
        return result;
    }
    fs::create_directories(dir);
    Context ctx{config, options, fs::path(dir)};
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    std::string status = "pass";
    try {
        const std::string& e = config.experiment;
        if (e == "gen-path") gen_path(ctx);
        else if (e == "levy-check") levy_check(ctx);
        else if (e == "taylor-order") taylor_order(ctx);
        else if (e == "check-viscosity") check_viscosity(ctx);
        else if (e == "convert") convert(ctx);
        else if (e == "solve-fd") solve_fd(ctx);
        else if (e == "solve-characteristics") characteristics(ctx, true);
        else if (e == "feynman-kac") characteristics(ctx, false);
        else if (e == "compare") compare(ctx);
        else if (e == "envelope") envelope(ctx);
        else throw ConfigError("unknown experiment '" + e + "'", "experiment");
        result.exit_code = ctx.pass ? 0 : 2;
        status = ctx.pass ? "pass" : "fail";
        result.message = config.experiment + (ctx.pass ? ": pass" : ": fail");
    } catch (const NumericalError& e) {
        result.exit_code = 2;
        status = "numerical-error";
        result.message = e.what();
    } catch (const Error& e) {
        result.exit_code = 1;
        status = "usage-error";
        result.message = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json meta;
    meta["experiment"] = config.experiment;
    meta["library_version"] = library_version();
    meta["config"] = echo_config(config);
    meta["seeds"] = path_seeds(config);
    meta["threads"] = options.threads;
    meta["started_utc"] = started;
    meta["wall_clock_seconds"] = seconds;
    meta["status"] = status;
    meta["exit_code"] = result.exit_code;
    meta["message"] = result.message;
    meta["summary"] = ctx.summary;
    meta["artifacts"] = ctx.artifacts;
    std::ofstream out(fs::path(dir) / "metadata.json");
    out << meta.dump(2) << '\n';
    ctx.artifacts.push_back("metadata.json");
    result.artifacts = ctx.artifacts;
    return result;
}

}  // namespace pathwise
