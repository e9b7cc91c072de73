// Command line front end: simulate the synthetic families, select
// predictive points, forecast, benchmark methods and run the
// Brownian-kernel approximation experiment. Files are CSV matrices with
// an optional grid header row; models and kernel descriptors are JSON.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fcar/fcar.hpp"
#include "fcar/io.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::vector<double> parse_point_list(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        out.push_back(fcar::io::parse_double(std::string_view(csv).substr(pos, comma - pos),
                                             "--t-star"));
        pos = comma + 1;
    }
    return out;
}

struct PRuleSpec {
    fcar::PRule rule = fcar::PRule::kmeans;
    int fixed_p = 0;
};

PRuleSpec parse_p_rule(const std::string& s) {
    if (s == "kmeans") return {fcar::PRule::kmeans, 0};
    if (s == "cv") return {fcar::PRule::cv, 0};
    if (s.rfind("fixed:", 0) == 0) {
        const int p = std::stoi(s.substr(6));
        if (p < 1) throw CLI::ValidationError("--p-rule", "fixed point count must be >= 1");
        return {fcar::PRule::fixed, p};
    }
    throw CLI::ValidationError("--p-rule", "expected kmeans, cv or fixed:<p>");
}

std::string kernel_sidecar_path(const std::string& data_path) {
    return data_path + ".kernel.json";
}

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string family = "ou";
    int m = 115;
    int grid_n = 101;
    std::uint64_t seed = 0;
    int burn_in = 100;
    double theta = 1.0;
    std::string t_star = "0.3,0.5,0.9";
    int basis_dim = 15;
    double operator_scale = 0.8;
    std::string out;
};

int run_simulate(const SimulateArgs& a) {
    auto family = fcar::parse_family(a.family);
    if (!family) throw CLI::ValidationError("--family", "unknown family '" + a.family + "'");
    fcar::SimConfig cfg;
    cfg.family = *family;
    cfg.m = a.m;
    cfg.grid = fcar::make_uniform_grid(a.grid_n);
    cfg.seed = a.seed;
    cfg.burn_in = a.burn_in;
    cfg.theta = a.theta;
    cfg.t_star = parse_point_list(a.t_star);
    cfg.basis_dim = a.basis_dim;
    cfg.operator_scale = a.operator_scale;
    fcar::SimResult sim = fcar::simulate(cfg);
    fcar::io::write_series_csv(a.out, sim.series);
    if (sim.kernel) fcar::io::save_kernel(kernel_sidecar_path(a.out), *sim.kernel);
    std::cout << "wrote " << sim.series.count() << "x" << sim.series.grid_size() << " curves to "
              << a.out;
    if (sim.kernel) std::cout << " (+ kernel descriptor)";
    std::cout << "\n";

    // stability diagnostic of the generating operator: some power of rho
    // should contract even when the plain coefficient-norm sum does not
    if (sim.kernel && (cfg.family == fcar::SimFamily::sparse_log ||
                       cfg.family == fcar::SimFamily::sparse_sin)) {
        const fcar::TrueKernel& k = *sim.kernel;
        fcar::Matrix alpha(cfg.grid.size(), k.point_count());
        std::vector<fcar::Candidate> pts;
        for (int j = 0; j < k.point_count(); ++j) {
            const int idx = cfg.grid.index_of(k.point(j));
            pts.push_back({1, idx, cfg.grid[idx]});
            for (int s = 0; s < cfg.grid.size(); ++s) alpha(s, j) = k.alpha(j, cfg.grid[s]);
        }
        const fcar::PointSet ps(pts, cfg.grid.min_gap());
        std::cout << "operator norms |rho^j| for j=1..5:";
        for (int j = 1; j <= 5; ++j)
            std::cout << ' ' << fcar::operator_norm_rho(alpha, ps, cfg.grid, j);
        std::cout << "\n";
    }
    return 0;
}

// --- select ----------------------------------------------------------------

struct SelectArgs {
    std::string in;
    int q = 1;
    int p_max = 10;
    std::string p_rule = "kmeans";
    double delta = 0.0;
    int cv_folds = 5;
    bool no_center = false;
    std::string out;
};

int run_select(const SelectArgs& a) {
    const PRuleSpec rule = parse_p_rule(a.p_rule);
    fcar::FunctionalSeries series = fcar::io::read_series_csv(a.in);
    fcar::FitOptions opt;
    opt.q = a.q;
    opt.p_max = a.p_max;
    opt.rule = rule.rule;
    opt.fixed_p = rule.fixed_p;
    opt.delta = a.delta;
    opt.center = !a.no_center;
    opt.cv_folds = a.cv_folds;
    fcar::FCARModel model = fcar::fit(series, opt);
    if (!a.out.empty()) fcar::io::save_model(a.out, model);

    const int p_km = fcar::estimate_p_kmeans(model.trace);
    int p_cv = -1;
    try {
        p_cv = fcar::estimate_p_cv(series, a.q, a.p_max, a.cv_folds, a.delta);
    } catch (const fcar::Error&) {
        // the cv rule can be infeasible on short series; the report shows n/a
    }

    std::cout << "selected points (lag, abscissa), in selection order:\n";
    for (int i = 0; i < model.trace.size(); ++i) {
        const fcar::Candidate& c = model.trace.chosen[static_cast<std::size_t>(i)];
        std::cout << "  " << (i + 1) << ": (" << c.lag << ", " << fcar::io::format_double(c.abscissa)
                  << ")  gain M(" << (i + 1) << ") = " << model.trace.gains[static_cast<std::size_t>(i)]
                  << "  log-gain = " << std::log(model.trace.gains[static_cast<std::size_t>(i)])
                  << "  skipped = " << model.trace.skipped[static_cast<std::size_t>(i)] << "\n";
    }
    std::cout << "p-hat (kmeans rule): " << p_km << "\n";
    if (p_cv > 0)
        std::cout << "p-hat (cv rule):     " << p_cv << "\n";
    else
        std::cout << "p-hat (cv rule):     n/a (series too short for the fold scheme)\n";
    std::cout << "model uses p = " << model.p_hat << " (" << fcar::p_rule_name(model.p_rule)
              << " rule)\n";
    if (!a.out.empty()) std::cout << "model written to " << a.out << "\n";
    return 0;
}

// --- forecast ----------------------------------------------------------------

struct ForecastArgs {
    std::string model;
    std::string in;
    int steps = 1;
    std::string out;
};

int run_forecast(const ForecastArgs& a) {
    if (a.steps < 1) throw CLI::ValidationError("--steps", "must be >= 1");
    const fcar::FCARModel model = fcar::io::load_model(a.model);
    fcar::io::Curves curves = fcar::io::read_curves_csv(a.in);
    if (!(curves.grid == model.grid))
        throw fcar::InvalidArgument("forecast: input grid does not match the model grid");
    if (curves.values.rows() < model.q)
        throw fcar::InvalidArgument("forecast: need at least q curves of history");

    // rolling history, most recent last; multi-step feeds predictions back
    std::vector<std::vector<double>> history;
    for (int i = 0; i < curves.values.rows(); ++i) {
        auto row = curves.values.row(i);
        history.emplace_back(row.begin(), row.end());
    }
    fcar::Matrix out_rows(a.steps, model.grid.size());
    for (int step = 0; step < a.steps; ++step) {
        std::vector<std::span<const double>> recent;
        for (int l = 1; l <= model.q; ++l)
            recent.emplace_back(history[history.size() - static_cast<std::size_t>(l)]);
        std::vector<double> pred = fcar::predict(model, recent, true);
        auto dst = out_rows.row(step);
        std::copy(pred.begin(), pred.end(), dst.begin());
        history.push_back(std::move(pred));
    }
    fcar::io::write_curves_csv(a.out, model.grid, out_rows);
    std::cout << "wrote " << a.steps << " forecast step(s) to " << a.out << "\n";
    return 0;
}

// --- benchmark ----------------------------------------------------------------

struct BenchmarkArgs {
    std::string in;
    std::string family;
    int m = 115;
    int grid_n = 101;
    std::uint64_t seed = 0;
    int burn_in = 100;
    double theta = 1.0;
    std::string t_star = "0.3,0.5,0.9";
    int basis_dim = 15;
    double operator_scale = 0.8;
    std::string methods = "rkhs-kmeans,naive";
    int blocks = 1;
    int train = 100;
    int test = 15;
    int reps = 1;
    int q = 1;
    int p_max = 10;
    int cv_folds = 5;
    double delta = 0.0;
    bool no_center = false;
    std::string out;
};

std::vector<fcar::Method> parse_methods(const std::string& csv) {
    std::vector<fcar::Method> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        const std::string name = csv.substr(pos, comma - pos);
        auto m = fcar::parse_method(name);
        if (!m) throw CLI::ValidationError("--methods", "unknown method '" + name + "'");
        out.push_back(*m);
        pos = comma + 1;
    }
    return out;
}

int run_benchmark(const BenchmarkArgs& a) {
    const std::vector<fcar::Method> methods = parse_methods(a.methods);
    fcar::FitOptions opt;
    opt.q = a.q;
    opt.p_max = a.p_max;
    opt.cv_folds = a.cv_folds;
    opt.delta = a.delta;
    opt.center = !a.no_center;

    fcar::ErrorReport report;
    if (!a.in.empty()) {
        fcar::FunctionalSeries series = fcar::io::read_series_csv(a.in);
        std::optional<fcar::TrueKernel> kernel;
        if (std::filesystem::exists(kernel_sidecar_path(a.in)))
            kernel = fcar::io::load_kernel(kernel_sidecar_path(a.in));
        const fcar::WindowScheme scheme =
            fcar::make_windows(series.count(), a.blocks, a.train, a.test);
        report = fcar::benchmark(series, kernel, methods, scheme, opt);
    } else if (!a.family.empty()) {
        auto family = fcar::parse_family(a.family);
        if (!family) throw CLI::ValidationError("--family", "unknown family '" + a.family + "'");
        fcar::SimConfig cfg;
        cfg.family = *family;
        cfg.m = a.m;
        cfg.grid = fcar::make_uniform_grid(a.grid_n);
        cfg.seed = a.seed;
        cfg.burn_in = a.burn_in;
        cfg.theta = a.theta;
        cfg.t_star = parse_point_list(a.t_star);
        cfg.basis_dim = a.basis_dim;
        cfg.operator_scale = a.operator_scale;
        report = fcar::benchmark_replicated(cfg, a.reps, methods, a.blocks, a.train, a.test, opt);
    } else {
        throw CLI::ValidationError("benchmark", "need either --in or --family");
    }

    std::cout << fcar::io::format_error_report(report);
    if (!a.out.empty()) {
        fcar::io::write_error_report_csv(a.out + ".errors.csv", report);
        fcar::io::write_timing_csv(a.out + ".timing.csv", report);
        std::cout << "wrote " << a.out << ".errors.csv and " << a.out << ".timing.csv\n";
    }
    return 0;
}

// --- kernel-approx ----------------------------------------------------------------

struct KernelArgs {
    std::string kernel = "phi1";
    int p_max = 20;
    std::string design = "greedy";
    int grid_n = 1001;
    std::string out;
};

int run_kernel_approx(const KernelArgs& a) {
    if (a.design != "greedy" && a.design != "quantile")
        throw CLI::ValidationError("--design", "expected greedy or quantile");
    const fcar::rkhs::KernelSurface surface = fcar::rkhs::KernelSurface::named(a.kernel);
    const fcar::rkhs::Design design =
        a.design == "greedy" ? fcar::rkhs::Design::greedy : fcar::rkhs::Design::quantile;
    const fcar::rkhs::DistanceProfile profile =
        fcar::rkhs::distance_profile(surface, a.p_max, design, fcar::make_uniform_grid(a.grid_n));
    fcar::io::write_distance_profile_csv(a.out, profile);
    std::cout << "kernel " << a.kernel << ", " << a.design << " design, p up to " << a.p_max
              << "\n";
    for (std::size_t p = 0; p < profile.distances.size(); ++p) {
        double sup = 0.0;
        for (double d : profile.distances[p]) sup = std::max(sup, d);
        std::cout << "  p=" << (p + 1) << "  sup distance = " << sup << "\n";
    }
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"functional time series forecasting by predictive point selection"};
    app.set_config("--config", "", "flat key=value configuration file");
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "generate a synthetic data set");
    c_sim->fallthrough();
    c_sim->add_option("--family", sim.family, "sparse-log, sparse-sin, ou or far")->capture_default_str();
    c_sim->add_option("--m", sim.m, "number of curves")->capture_default_str();
    c_sim->add_option("--grid", sim.grid_n, "uniform grid size")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "random seed")->capture_default_str();
    c_sim->add_option("--burn-in", sim.burn_in, "discarded initial curves")->capture_default_str();
    c_sim->add_option("--theta", sim.theta, "ou rate")->capture_default_str();
    c_sim->add_option("--t-star", sim.t_star, "sparse evaluation points")->capture_default_str();
    c_sim->add_option("--basis-dim", sim.basis_dim, "far basis dimension")->capture_default_str();
    c_sim->add_option("--operator-scale", sim.operator_scale, "far spectral radius")->capture_default_str();
    c_sim->add_option("--out", sim.out, "output CSV path")->required();

    SelectArgs sel;
    CLI::App* c_sel = app.add_subcommand("select", "select predictive points and fit a model");
    c_sel->fallthrough();
    c_sel->add_option("--in", sel.in, "input CSV data set")->required();
    c_sel->add_option("--q", sel.q, "autoregressive order")->capture_default_str();
    c_sel->add_option("--p-max", sel.p_max, "maximum points to select")->capture_default_str();
    c_sel->add_option("--p-rule", sel.p_rule, "kmeans, cv or fixed:<p>")->capture_default_str();
    c_sel->add_option("--delta", sel.delta, "minimum same-lag separation (0 = one grid step)")->capture_default_str();
    c_sel->add_option("--cv-folds", sel.cv_folds, "folds for the cv rule")->capture_default_str();
    c_sel->add_flag("--no-center", sel.no_center, "treat the data as already centered");
    c_sel->add_option("--out", sel.out, "model file to write");

    ForecastArgs fc;
    CLI::App* c_fc = app.add_subcommand("forecast", "one- or multi-step forecasts from a model");
    c_fc->fallthrough();
    c_fc->add_option("--model", fc.model, "model file from 'select'")->required();
    c_fc->add_option("--in", fc.in, "CSV with at least the last q curves")->required();
    c_fc->add_option("--steps", fc.steps,
                     "steps ahead (steps > 1 feed predictions back and are approximate)")
        ->capture_default_str();
    c_fc->add_option("--out", fc.out, "output CSV path")->required();

    BenchmarkArgs bm;
    CLI::App* c_bm = app.add_subcommand("benchmark", "window-based method comparison");
    c_bm->fallthrough();
    c_bm->add_option("--in", bm.in, "input CSV (kernel sidecar is picked up when present)");
    c_bm->add_option("--family", bm.family, "simulate this family instead of reading a file");
    c_bm->add_option("--m", bm.m, "curves per simulated replication")->capture_default_str();
    c_bm->add_option("--grid", bm.grid_n, "uniform grid size for simulation")->capture_default_str();
    c_bm->add_option("--seed", bm.seed, "base seed; replication r uses seed + r")->capture_default_str();
    c_bm->add_option("--burn-in", bm.burn_in, "discarded initial curves")->capture_default_str();
    c_bm->add_option("--theta", bm.theta, "ou rate")->capture_default_str();
    c_bm->add_option("--t-star", bm.t_star, "sparse evaluation points")->capture_default_str();
    c_bm->add_option("--basis-dim", bm.basis_dim, "far basis dimension")->capture_default_str();
    c_bm->add_option("--operator-scale", bm.operator_scale, "far spectral radius")->capture_default_str();
    c_bm->add_option("--methods", bm.methods, "comma list of rkhs-kmeans, rkhs-cv, naive, exact")->capture_default_str();
    c_bm->add_option("--blocks", bm.blocks, "number of windows")->capture_default_str();
    c_bm->add_option("--train", bm.train, "training curves per window")->capture_default_str();
    c_bm->add_option("--test", bm.test, "test curves per window")->capture_default_str();
    c_bm->add_option("--reps", bm.reps, "simulated replications")->capture_default_str();
    c_bm->add_option("--q", bm.q, "autoregressive order")->capture_default_str();
    c_bm->add_option("--p-max", bm.p_max, "maximum points to select")->capture_default_str();
    c_bm->add_option("--cv-folds", bm.cv_folds, "folds for the cv rule")->capture_default_str();
    c_bm->add_option("--delta", bm.delta, "minimum same-lag separation")->capture_default_str();
    c_bm->add_flag("--no-center", bm.no_center, "treat the data as already centered");
    c_bm->add_option("--out", bm.out, "basename for .errors.csv / .timing.csv");

    KernelArgs ka;
    CLI::App* c_ka = app.add_subcommand("kernel-approx", "Brownian-RKHS kernel approximation profile");
    c_ka->fallthrough();
    c_ka->add_option("--kernel", ka.kernel, "phi1, phi2, phi3 or sparse-log")->capture_default_str();
    c_ka->add_option("--p-max", ka.p_max, "largest design size")->capture_default_str();
    c_ka->add_option("--design", ka.design, "greedy or quantile")->capture_default_str();
    c_ka->add_option("--grid", ka.grid_n, "sampling grid size")->capture_default_str();
    c_ka->add_option("--out", ka.out, "output CSV path")->required();

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    fcar::parallel::set_threads(threads);

    try {
        if (c_sim->parsed()) return run_simulate(sim);
        if (c_sel->parsed()) return run_select(sel);
        if (c_fc->parsed()) return run_forecast(fc);
        if (c_bm->parsed()) return run_benchmark(bm);
        if (c_ka->parsed()) return run_kernel_approx(ka);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const fcar::SingularMatrix& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const fcar::SelectionExhausted& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const fcar::Instability& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const fcar::DivisionGuard& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const fcar::NotInRkhs& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const fcar::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
