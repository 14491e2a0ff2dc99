#include "evenspec/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "evenspec/analysis.hpp"
#include "evenspec/io.hpp"
#include "evenspec/parallel.hpp"

namespace evenspec {

namespace fs = std::filesystem;

namespace {

struct AssertionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string resolve(const std::string& base_dir, const std::string& p)
{
    if (p.empty() || fs::path(p).is_absolute() || base_dir.empty())
        return p;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

Potential load_potential(const RunConfig& cfg)
{
    if (cfg.potential_path.empty())
        throw ConfigError("no potential given (use --potential or the config key \"potential\")");
    Potential q = Potential::read_file(cfg.potential_path);
    if (std::abs(q.omega() - cfg.omega) > 1e-12 * cfg.omega)
        throw ConfigError("potential omega does not match the configured omega");
    return q;
}

std::string out_path(const RunConfig& cfg, const std::string& name)
{
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

void emit_json(const RunConfig& cfg, const std::string& name, nlohmann::json body)
{
    body["config"] = cfg.to_json();
    write_text_file(out_path(cfg, name), dump_json(body));
}

std::pair<int, int> split_indices(const SpectralModel& model, const Potential& q)
{
    const int l = find_l(model, q);
    const PreliminaryTransform pre = preliminary_transform(model, q, l);
    return {l, find_m(model, pre.B, l)};
}

std::string rate_csv(const std::string& comment, const EigenReport& rep)
{
    std::ostringstream os;
    os << "# " << comment << '\n';
    os << "n,residual,shape\n";
    for (const auto& r : rep.records)
        if (r.reliable)
            os << r.n << ',' << format_double(r.residual) << ',' << format_double(r.shape) << '\n';
    return os.str();
}

EigenReport run_compare(const RunConfig& cfg, const MatchedSpectrum& ms, const Potential& q, int m, Order order)
{
    CompareOptions co;
    co.asymptotic.order = order;
    co.asymptotic.series_cut = cfg.series_cut;
    co.asymptotic.split_index = m;
    co.n_lo = cfg.n_lo > 0 ? std::max(cfg.n_lo, m + 1) : 0;
    co.n_hi = cfg.n_hi;
    return compare_spectra(ms, q, co);
}

std::string order_name(Order o) { return o == Order::First ? "first" : "second"; }

} // namespace

SpectralModel RunConfig::model() const
{
    SpectralModel m;
    m.bc = bc;
    m.k = k;
    m.omega = omega;
    m.N = N;
    return m;
}

void RunConfig::validate() const
{
    try {
        model().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (tol <= 0 || max_iter <= 0)
        throw ConfigError("tolerance and max_iter must be positive");
    if (series_cut < 0)
        throw ConfigError("series_cut must be non-negative");
    if (n_hi != 0 && n_hi < n_lo)
        throw ConfigError("n_hi must not be below n_lo");
    if (d_step < 1)
        throw ConfigError("d_step must be positive");
    for (double t : times)
        if (!(t >= 0.0))
            throw ConfigError("semigroup times must be non-negative");
}

nlohmann::json RunConfig::to_json() const
{
    nlohmann::json j;
    j["command"] = command;
    j["bc"] = bc.name();
    j["k"] = k;
    j["omega"] = omega;
    j["n_trunc"] = N;
    j["potential"] = potential_path;
    j["order"] = static_cast<int>(order);
    j["series_cut"] = series_cut;
    j["tol"] = tol;
    j["max_iter"] = max_iter;
    j["seed"] = seed;
    j["n_lo"] = n_lo;
    j["n_hi"] = n_hi;
    j["d_lo"] = d_lo;
    j["d_hi"] = d_hi;
    j["d_step"] = d_step;
    j["times"] = times;
    return j;
}

void apply_config_json(RunConfig& cfg, const nlohmann::json& j, const std::string& base_dir)
{
    try {
        if (j.contains("bc"))
            cfg.bc = BoundaryCondition::parse(j.at("bc").get<std::string>());
        if (j.contains("k"))
            cfg.k = j.at("k").get<int>();
        if (j.contains("omega"))
            cfg.omega = j.at("omega").get<double>();
        if (j.contains("n_trunc"))
            cfg.N = j.at("n_trunc").get<int>();
        if (j.contains("potential"))
            cfg.potential_path = resolve(base_dir, j.at("potential").get<std::string>());
        if (j.contains("order")) {
            int o = j.at("order").get<int>();
            if (o != 1 && o != 2)
                throw ConfigError("order must be 1 or 2");
            cfg.order = static_cast<Order>(o);
        }
        if (j.contains("series_cut"))
            cfg.series_cut = j.at("series_cut").get<int>();
        if (j.contains("tol"))
            cfg.tol = j.at("tol").get<double>();
        if (j.contains("max_iter"))
            cfg.max_iter = j.at("max_iter").get<int>();
        if (j.contains("out"))
            cfg.out_dir = resolve(base_dir, j.at("out").get<std::string>());
        if (j.contains("seed"))
            cfg.seed = j.at("seed").get<unsigned long long>();
        if (j.contains("n_lo"))
            cfg.n_lo = j.at("n_lo").get<int>();
        if (j.contains("n_hi"))
            cfg.n_hi = j.at("n_hi").get<int>();
        if (j.contains("d_lo"))
            cfg.d_lo = j.at("d_lo").get<int>();
        if (j.contains("d_hi"))
            cfg.d_hi = j.at("d_hi").get<int>();
        if (j.contains("d_step"))
            cfg.d_step = j.at("d_step").get<int>();
        if (j.contains("times"))
            cfg.times = j.at("times").get<std::vector<double>>();
        if (j.contains("assert_order"))
            cfg.assert_order = j.at("assert_order").get<double>();
        if (j.contains("assert_r2"))
            cfg.assert_r2 = j.at("assert_r2").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

int cmd_spectrum(const RunConfig& cfg)
{
    const SpectralModel model = cfg.model();
    const Potential q = load_potential(cfg);
    const MatchedSpectrum ms = truncated_spectrum(model, q);
    std::ostringstream os;
    write_spectrum_csv(ms, os);
    write_text_file(out_path(cfg, "spectrum.csv"), os.str());
    std::cout << "spectrum: " << ms.eig.values.size() << " eigenvalues, " << ms.unmatched.size()
              << " unmatched\n";
    return 0;
}

int cmd_compare(const RunConfig& cfg)
{
    const SpectralModel model = cfg.model();
    const Potential q = load_potential(cfg);
    const auto [l, m] = split_indices(model, q);
    const MatchedSpectrum ms = truncated_spectrum(model, q);
    const EigenReport rep = run_compare(cfg, ms, q, m, cfg.order);

    nlohmann::json body;
    body["l"] = l;
    body["m"] = m;
    body["report"] = rep.to_json();
    const auto series = rep.residual_series();
    std::optional<RateFit> fit;
    if (fit_points(series) >= 6) {
        fit = fit_rate(series);
        body["fit"] = fit->to_json();
    }
    emit_json(cfg, "compare.json", body);
    write_text_file(out_path(cfg, "compare_rates.csv"),
                    rate_csv(order_name(cfg.order) + "-order eigenvalue asymptotics: remainder against index", rep));

    std::cout << "compare: max residual " << format_double(rep.max_residual);
    if (fit)
        std::cout << ", fitted order " << format_double(fit->order) << ", R^2 " << format_double(fit->r2);
    std::cout << '\n';
    if (cfg.assert_mode) {
        if (!fit)
            throw AssertionFailure("too few reliable indices for a rate fit");
        if (fit->order < cfg.assert_order || fit->r2 < cfg.assert_r2)
            throw AssertionFailure("fitted order " + format_double(fit->order) + " / R^2 " +
                                   format_double(fit->r2) + " below the asserted thresholds");
    }
    return 0;
}

int cmd_similar(const RunConfig& cfg)
{
    const SpectralModel model = cfg.model();
    const Potential q = load_potential(cfg);
    const SimilarityResult sim = run_similarity(model, q, {cfg.tol, cfg.max_iter});
    emit_json(cfg, "similarity.json", {{"similarity", sim.to_json()}});
    std::cout << "similar: l = " << sim.l << ", m = " << sim.m << ", iterations " << sim.iterations
              << ", residual " << format_double(sim.residual) << '\n';
    return 0;
}

int cmd_projections(const RunConfig& cfg)
{
    const SpectralModel model = cfg.model();
    const Potential q = load_potential(cfg);
    const MatchedSpectrum ms = truncated_spectrum(model, q);
    const SimilarityResult sim = run_similarity(model, q, {cfg.tol, cfg.max_iter});
    const int top = model.N / 2;
    const int d_hi = cfg.d_hi > 0 ? cfg.d_hi : top - 8;
    if (cfg.d_lo < model.first_index() || d_hi > top || d_hi < cfg.d_lo)
        throw ConfigError("projection sweep range must lie inside the reliable indices");

    std::vector<int> ds;
    for (int d = cfg.d_lo; d <= d_hi; d += cfg.d_step)
        ds.push_back(d);
    std::vector<double> tail(ds.size()), tail_sim(ds.size(), std::nan("")), decomp(ds.size());
    parallel_for(ds.size(), [&](std::size_t i) {
        tail[i] = projection_deviation(ms, ds[i], top);
        decomp[i] = decomposition_deviation(ms, ds[i]);
        if (ds[i] > sim.m)
            tail_sim[i] = projection_deviation_similarity(sim, q, ds[i], top);
    });

    std::ostringstream os;
    os << "# spectral projection deviation over tails [d, N/2] and partial spectral decompositions up to d\n";
    os << "d,tail_deviation,tail_deviation_similarity,decomposition_deviation\n";
    std::vector<std::pair<int, double>> st, sd;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        os << ds[i] << ',' << format_double(tail[i]) << ',' << format_double(tail_sim[i]) << ','
           << format_double(decomp[i]) << '\n';
        st.emplace_back(ds[i], tail[i]);
        sd.emplace_back(ds[i], decomp[i]);
    }
    write_text_file(out_path(cfg, "projections.csv"), os.str());
    nlohmann::json body{{"l", sim.l}, {"m", sim.m}};
    if (fit_points(st) >= 6)
        body["tail_fit"] = fit_rate(st).to_json();
    if (fit_points(sd) >= 6)
        body["decomposition_fit"] = fit_rate(sd).to_json();
    emit_json(cfg, "projections.json", body);
    std::cout << "projections: " << ds.size() << " sweep points\n";
    return 0;
}

int cmd_semigroup(const RunConfig& cfg)
{
    const SpectralModel model = cfg.model();
    const Potential q = load_potential(cfg);
    const SimilarityResult sim = run_similarity(model, q, {cfg.tol, cfg.max_iter});
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss;

    CVector x = CVector::Zero(model.dim());
    for (int r = 0; r < model.dim(); ++r)
        if (model.index_of_row(r) > sim.m)
            x(r) = cplx(gauss(rng), gauss(rng));
    x.normalize();
    const CMatrix full = transformed_matrix(sim);

    std::ostringstream os;
    os << "# semigroup generated by the transformed operator: block formula against the full matrix exponential\n";
    os << "t,norm,error_full,law_residual\n";
    nlohmann::json points = nlohmann::json::array();
    for (double t : cfg.times) {
        const CVector y = semigroup_eval(sim, t, x);
        const CVector y_full = matrix_exponential(full, t) * x;
        const double scale = std::max(y_full.norm(), std::numeric_limits<double>::min());
        const double err = (y - y_full).norm() / scale;
        const CVector half = semigroup_eval(sim, 0.5 * t, semigroup_eval(sim, 0.5 * t, x));
        const double law = (half - y).norm() / std::max(y.norm(), std::numeric_limits<double>::min());
        os << format_double(t) << ',' << format_double(y.norm()) << ',' << format_double(err) << ','
           << format_double(law) << '\n';
        points.push_back({{"t", t}, {"norm", y.norm()}, {"error_full", err}, {"law_residual", law}});
    }
    write_text_file(out_path(cfg, "semigroup.csv"), os.str());

    // Closed-form 2x2 exponential against the general algorithm, for both
    // candidate definitions of rho.
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0, worst_alt = 0.0;
    for (int i = 0; i < 1000; ++i) {
        cplx e[4];
        for (auto& z : e)
            z = cplx(unif(rng), unif(rng));
        Eigen::Matrix2cd A;
        A << e[0], e[1], e[2], e[3];
        const CMatrix ref = matrix_exponential(-A, 0.7);
        worst = std::max(worst, (two_by_two_exp(e[0], e[1], e[2], e[3], 0.7) - ref).cwiseAbs().maxCoeff());
        worst_alt = std::max(worst_alt, (two_by_two_exp_alt_rho(e[0], e[1], e[2], e[3], 0.7) - ref).cwiseAbs().maxCoeff());
    }
    emit_json(cfg, "semigroup.json",
              {{"l", sim.l}, {"m", sim.m}, {"points", points},
               {"two_by_two", {{"samples", 1000}, {"max_error", worst}, {"max_error_alt_rho", worst_alt}}}});
    std::cout << "semigroup: " << cfg.times.size() << " times, 2x2 closed form max error " << format_double(worst)
              << '\n';
    return 0;
}

int cmd_rates(const RunConfig& cfg)
{
    const SpectralModel model = cfg.model();
    const Potential q = load_potential(cfg);
    const SimilarityResult sim = run_similarity(model, q, {cfg.tol, cfg.max_iter});
    const MatchedSpectrum ms = truncated_spectrum(model, q);

    nlohmann::json body{{"l", sim.l}, {"m", sim.m}};
    for (Order o : {Order::First, Order::Second}) {
        const EigenReport rep = run_compare(cfg, ms, q, sim.m, o);
        const std::string name = order_name(o);
        nlohmann::json entry{{"max_residual", rep.max_residual}, {"c_hat", rep.c_hat}};
        const auto series = rep.residual_series();
        if (fit_points(series) >= 6)
            entry["fit"] = fit_rate(series).to_json();
        body[name] = entry;
        write_text_file(out_path(cfg, "rates_" + name + ".csv"),
                        rate_csv(name + "-order eigenvalue asymptotics: remainder against index", rep));
    }
    body["lemma_bounds"] = verify_lemma_bounds(model, q, sim.l, sim.m).to_json();
    body["block_bounds"] = verify_block_bounds(sim).to_json();
    emit_json(cfg, "rates.json", body);
    std::cout << "rates: lemma bounds " << (body["lemma_bounds"]["all_pass"].get<bool>() ? "pass" : "FAIL")
              << ", block bounds " << (body["block_bounds"]["all_pass"].get<bool>() ? "pass" : "FAIL") << '\n';
    return 0;
}

int run_cli(int argc, char** argv)
{
    CLI::App app{"Spectral asymptotics of even-order periodic, antiperiodic and Dirichlet operators"};
    app.require_subcommand(1);

    struct Flags {
        std::string config, bc, potential, out;
        int k = 0, n_trunc = 0, order = 0;
        double omega = 0.0;
        unsigned long long seed = 0;
        bool dry_run = false, assert_mode = false;
    } flags;

    const std::vector<std::string> names{"spectrum", "compare", "similar", "projections", "semigroup", "rates"};
    std::vector<CLI::App*> subs;
    for (const auto& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", flags.config, "JSON configuration file");
        sub->add_option("--bc", flags.bc, "boundary condition")->check(CLI::IsMember({"per", "ap", "dir"}));
        sub->add_option("--k", flags.k, "half order of the operator");
        sub->add_option("--omega", flags.omega, "interval length");
        sub->add_option("--n-trunc", flags.n_trunc, "truncation N");
        sub->add_option("--potential", flags.potential, "potential JSON file");
        sub->add_option("--order", flags.order, "asymptotic order (1 or 2)")->check(CLI::IsMember({1, 2}));
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--seed", flags.seed, "seed for randomized inputs");
        sub->add_flag("--dry-run", flags.dry_run, "validate and print the plan only");
        if (name == "compare")
            sub->add_flag("--assert", flags.assert_mode, "exit 4 when the fitted rate misses the configured threshold");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunConfig cfg;
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->parsed())
            cfg.command = names[i];
    CLI::App* sub = subs[std::find(names.begin(), names.end(), cfg.command) - names.begin()];

    try {
        if (!flags.config.empty()) {
            std::ifstream in(flags.config);
            if (!in)
                throw ConfigError("cannot open config " + flags.config);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("cannot parse " + flags.config + ": " + e.what());
            }
            apply_config_json(cfg, j, fs::path(flags.config).parent_path().string());
        }
        if (sub->count("--bc"))
            cfg.bc = BoundaryCondition::parse(flags.bc);
        if (sub->count("--k"))
            cfg.k = flags.k;
        if (sub->count("--omega"))
            cfg.omega = flags.omega;
        if (sub->count("--n-trunc"))
            cfg.N = flags.n_trunc;
        if (sub->count("--potential"))
            cfg.potential_path = flags.potential;
        if (sub->count("--order"))
            cfg.order = static_cast<Order>(flags.order);
        if (sub->count("--out"))
            cfg.out_dir = flags.out;
        if (sub->count("--seed"))
            cfg.seed = flags.seed;
        cfg.dry_run = flags.dry_run;
        cfg.assert_mode = flags.assert_mode;
        cfg.validate();

        if (cfg.dry_run) {
            load_potential(cfg);
            std::cout << "plan: " << cfg.command << " with bc=" << cfg.bc.name() << " k=" << cfg.k
                      << " omega=" << format_double(cfg.omega) << " N=" << cfg.N << " potential=" << cfg.potential_path
                      << " -> " << cfg.out_dir << '\n';
            return 0;
        }
        if (cfg.command == "spectrum")
            return cmd_spectrum(cfg);
        if (cfg.command == "compare")
            return cmd_compare(cfg);
        if (cfg.command == "similar")
            return cmd_similar(cfg);
        if (cfg.command == "projections")
            return cmd_projections(cfg);
        if (cfg.command == "semigroup")
            return cmd_semigroup(cfg);
        return cmd_rates(cfg);
    } catch (const AssertionFailure& e) {
        std::cerr << "assertion failed: " << e.what() << '\n';
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

} // namespace evenspec
