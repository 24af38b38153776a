#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdn/coreset.hpp"
#include "cdn/datagen.hpp"
#include "cdn/depnet.hpp"
#include "cdn/harness.hpp"
#include "cdn/kernels.hpp"
#include "cdn/leverage.hpp"
#include "cdn/structure.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 20177;

cdn::Family parse_family(const std::string& name) {
    if (name == "gaussian") return cdn::Family::gaussian;
    if (name == "poisson") return cdn::Family::poisson;
    throw CLI::ValidationError("--family", "must be gaussian or poisson");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

cdn::Matrix apply_transforms(cdn::Matrix x, const std::vector<std::string>& kinds) {
    for (const auto& k : kinds)
        x = cdn::transform(x, cdn::transform_kind_from_name(k));
    return x;
}

// Declared outputs are removed when a subcommand fails partway.
struct OutputGuard {
    std::vector<std::string> paths;
    bool committed = false;
    void declare(const std::string& p) {
        if (!p.empty()) paths.push_back(p);
    }
    ~OutputGuard() {
        if (committed) return;
        for (const auto& p : paths) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }
};

void echo_config(const std::string& subcommand, const nlohmann::json& cfg) {
    nlohmann::json j = cfg;
    j["subcommand"] = subcommand;
    j["kernels"] = std::string(cdn::kernels::active_name());
    std::cout << "config " << j.dump() << '\n';
}

// ---- coreset ----------------------------------------------------------

struct CoresetArgs {
    std::string input, out;
    bool header = false;
    std::string method = "leverage";
    double eps = 0.0;
    double fraction = 0.0;
    double const_d = 1.0;
    bool boost_logd = false;
    std::uint64_t seed = kDefaultSeed;
    std::string transforms;
};

void run_coreset(const CoresetArgs& a) {
    if ((a.eps <= 0.0) == (a.fraction <= 0.0))
        throw CLI::ValidationError("coreset", "give exactly one of --eps or --fraction");
    if (a.eps > 0.0 && a.method != "leverage")
        throw CLI::ValidationError("coreset", "--eps implies --method leverage");

    echo_config("coreset", {{"input", a.input},
                            {"out", a.out},
                            {"method", a.method},
                            {"eps", a.eps},
                            {"fraction", a.fraction},
                            {"const_d", a.const_d},
                            {"boost_logd", a.boost_logd},
                            {"seed", a.seed},
                            {"transform", a.transforms}});

    cdn::Matrix x = apply_transforms(cdn::load_csv(a.input, a.header).data,
                                     split_list(a.transforms));
    OutputGuard guard;
    guard.declare(a.out);

    cdn::WeightedCoreset cs;
    double expected_size = 0.0;
    double distortion = -1.0;
    if (a.method == "uniform") {
        const auto m = static_cast<std::size_t>(
            std::ceil(a.fraction * static_cast<double>(x.rows())));
        cs = cdn::build_uniform_coreset(x, std::min(m, x.rows()), a.seed);
        expected_size = static_cast<double>(m);
    } else {
        const cdn::ThinSVD svd = cdn::thin_svd(x);
        double k;
        if (a.eps > 0.0) {
            k = static_cast<double>(
                cdn::recommended_size(svd.rank, a.eps, a.const_d));
        } else {
            const auto scores = cdn::leverage_scores(svd);
            const double m = std::ceil(a.fraction * static_cast<double>(x.rows()));
            k = cdn::size_param_for_expected(scores, m);
        }
        if (a.boost_logd && x.cols() >= 2)
            k *= std::ceil(std::log(static_cast<double>(x.cols())));
        const auto profile = cdn::make_leverage_profile(svd, k);
        for (double q : profile.probabilities) expected_size += q;
        const auto op = cdn::draw_sampling_operator(profile.probabilities, a.seed);
        cs = cdn::coreset_from_operator(x, op);
        if (svd.rank <= 64) distortion = cdn::embedding_distortion(svd, op);
    }

    cdn::write_coreset_csv(cs, a.out);
    std::cout << "size " << cs.size() << "\nexpected_size " << expected_size
              << "\nseed " << a.seed << '\n';
    if (distortion >= 0.0) std::cout << "distortion " << distortion << '\n';
    guard.committed = true;
}

// ---- train ------------------------------------------------------------

struct TrainArgs {
    std::string input, coreset_path, out;
    bool header = false;
    std::string family = "gaussian";
    bool intercept = true;
    std::string transforms;
    std::size_t workers = 1;
};

void run_train(const TrainArgs& a) {
    if (a.input.empty() == a.coreset_path.empty())
        throw CLI::ValidationError("train", "give exactly one of --input or --coreset");

    echo_config("train", {{"input", a.input},
                          {"coreset", a.coreset_path},
                          {"out", a.out},
                          {"family", a.family},
                          {"intercept", a.intercept},
                          {"transform", a.transforms},
                          {"workers", a.workers}});

    const cdn::Family family = parse_family(a.family);
    cdn::TrainOptions opts;
    opts.intercept = a.intercept;
    opts.workers = a.workers;

    OutputGuard guard;
    guard.declare(a.out);

    cdn::DependencyNetwork dn;
    std::vector<std::string> names;
    if (!a.input.empty()) {
        cdn::LoadedCsv in = cdn::load_csv(a.input, a.header,
                                          family == cdn::Family::poisson &&
                                              a.transforms.empty());
        names = in.names;
        dn = cdn::train(apply_transforms(in.data, split_list(a.transforms)), family,
                        opts);
    } else {
        dn = cdn::train(cdn::read_coreset_csv(a.coreset_path), family, opts);
    }
    dn.variable_names = names;
    cdn::save_depnet(dn, a.out);
    std::cout << "variables " << dn.d << '\n';
    guard.committed = true;
}

// ---- eval -------------------------------------------------------------

struct EvalArgs {
    std::string input, out;
    bool header = false;
    std::string family = "gaussian";
    std::string methods = "full,coreset,uniform";
    std::string fractions = "0.1,0.2,0.3,0.4";
    std::size_t folds = 10;
    std::uint64_t seed = kDefaultSeed;
    bool intercept = true;
    std::string transforms;
    std::string pred_transform;
    double const_d = 1.0;
    bool boost_logd = false;
    std::size_t workers = 1;
};

void run_eval(const EvalArgs& a) {
    echo_config("eval", {{"input", a.input},
                         {"out", a.out},
                         {"family", a.family},
                         {"methods", a.methods},
                         {"fractions", a.fractions},
                         {"folds", a.folds},
                         {"seed", a.seed},
                         {"intercept", a.intercept},
                         {"transform", a.transforms},
                         {"pred_transform", a.pred_transform},
                         {"const_d", a.const_d},
                         {"boost_logd", a.boost_logd},
                         {"workers", a.workers}});

    cdn::CrossValidateOptions opts;
    opts.family = parse_family(a.family);
    opts.methods.clear();
    for (const auto& m : split_list(a.methods)) {
        if (m == "full") opts.methods.push_back(cdn::EvalMethod::full);
        else if (m == "coreset") opts.methods.push_back(cdn::EvalMethod::coreset);
        else if (m == "uniform") opts.methods.push_back(cdn::EvalMethod::uniform);
        else throw CLI::ValidationError("--methods", "unknown method " + m);
    }
    opts.fractions.clear();
    for (const auto& f : split_list(a.fractions)) opts.fractions.push_back(std::stod(f));
    opts.folds = a.folds;
    opts.seed = a.seed;
    opts.intercept = a.intercept;
    opts.const_d = a.const_d;
    opts.boost_logd = a.boost_logd;
    opts.workers = a.workers;
    if (!a.pred_transform.empty())
        opts.prediction_transform = cdn::transform_kind_from_name(a.pred_transform);

    cdn::Matrix x = apply_transforms(
        cdn::load_csv(a.input, a.header,
                      opts.family == cdn::Family::poisson && a.transforms.empty())
            .data,
        split_list(a.transforms));

    OutputGuard guard;
    const std::string csv_path = a.out + ".csv", json_path = a.out + ".json";
    guard.declare(csv_path);
    guard.declare(json_path);

    const auto reports = cdn::cross_validate(x, opts);
    cdn::write_reports_csv(reports, csv_path);
    std::ofstream jf(json_path);
    if (!jf) throw std::runtime_error("eval: cannot open " + json_path);
    jf << cdn::reports_to_json(reports, opts) << '\n';
    std::cout << "reports " << reports.size() << '\n';
    guard.committed = true;
}

// ---- gibbs ------------------------------------------------------------

struct GibbsArgs {
    std::string model, out;
    std::size_t steps = 1000;
    std::size_t burnin = 0;
    std::uint64_t seed = kDefaultSeed;
};

void run_gibbs(const GibbsArgs& a) {
    echo_config("gibbs", {{"model", a.model},
                          {"out", a.out},
                          {"steps", a.steps},
                          {"burnin", a.burnin},
                          {"seed", a.seed}});

    const cdn::DependencyNetwork dn = cdn::load_depnet(a.model);
    OutputGuard guard;
    guard.declare(a.out);

    auto state = cdn::make_gibbs_state(std::vector<double>(dn.d, 0.0), a.seed);
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("gibbs: cannot open " + a.out);
    f << "step";
    for (std::size_t i = 0; i < dn.d; ++i)
        f << ',' << (i < dn.variable_names.size() ? dn.variable_names[i]
                                                  : "x" + std::to_string(i));
    f << '\n';
    f.precision(17);
    for (std::size_t s = 0; s < a.burnin + a.steps; ++s) {
        cdn::gibbs_step(dn, state);
        if (s < a.burnin) continue;
        f << state.step;
        for (double v : state.current) f << ',' << v;
        f << '\n';
    }
    std::cout << "sweeps " << a.burnin + a.steps << "\nseed " << a.seed << '\n';
    guard.committed = true;
}

// ---- structure --------------------------------------------------------

struct StructureArgs {
    std::string model, out, dot;
    std::size_t edges = 70;
};

void run_structure(const StructureArgs& a) {
    echo_config("structure",
                {{"model", a.model}, {"out", a.out}, {"dot", a.dot}, {"edges", a.edges}});

    const cdn::DependencyNetwork dn = cdn::load_depnet(a.model);
    const auto edges = cdn::top_positive_edges(cdn::adjacency(dn), a.edges);

    OutputGuard guard;
    guard.declare(a.out);
    guard.declare(a.dot);
    cdn::write_edges_csv(edges, a.out, dn.variable_names);
    if (!a.dot.empty()) cdn::write_edges_dot(edges, a.dot, dn.variable_names);
    std::cout << "edges " << edges.size() << '\n';
    guard.committed = true;
}

// ---- hard -------------------------------------------------------------

struct HardArgs {
    std::string out, report;
    std::size_t n = 16;
    std::string bits;  // string of 0/1; default all ones
};

void run_hard(const HardArgs& a) {
    echo_config("hard",
                {{"out", a.out}, {"report", a.report}, {"n", a.n}, {"bits", a.bits}});

    std::vector<int> bits(a.n, 1);
    if (!a.bits.empty()) {
        if (a.bits.size() != a.n)
            throw CLI::ValidationError("--bits", "length must equal --n");
        for (std::size_t i = 0; i < a.n; ++i) bits[i] = a.bits[i] == '1' ? 1 : 0;
    }
    const cdn::HardInstance inst = cdn::generate_hard_instance(a.n, bits);

    OutputGuard guard;
    guard.declare(a.out);
    guard.declare(a.report);

    {
        std::ofstream f(a.out);
        if (!f) throw std::runtime_error("hard: cannot open " + a.out);
        f << "index,x0,x1,x2,y\n";
        f.precision(17);
        for (std::size_t r = 0; r < inst.present.size(); ++r)
            f << inst.present[r] << ',' << inst.x(r, 0) << ',' << inst.x(r, 1) << ','
              << inst.x(r, 2) << ",1\n";
    }
    {
        std::ofstream f(a.report);
        if (!f) throw std::runtime_error("hard: cannot open " + a.report);
        const double nd = static_cast<double>(a.n);
        // Decision threshold from the separation gap: exp(n/4) * 2 n^2.
        const double log_threshold = nd / 4.0 + std::log(2.0 * nd * nd);
        f << "query,bit,log_nll,log_threshold,decision\n";
        f.precision(17);
        for (std::size_t j = 0; j < a.n; ++j) {
            const double log_nll = cdn::hard_instance_log_nll(inst, j);
            f << j << ',' << bits[j] << ',' << log_nll << ',' << log_threshold << ','
              << (log_nll > log_threshold ? 1 : 0) << '\n';
        }
    }
    std::cout << "points " << inst.present.size() << "\nradius " << inst.radius << '\n';
    guard.committed = true;
}

// ---- gen --------------------------------------------------------------

struct GenArgs {
    std::string kind = "gaussian-dn";
    std::string out;
    std::size_t d = 8, n = 1000, m = 2;
    double sigma = 1.0;
    std::size_t heavy_rows = 0;
    double heavy_scale = 30.0;
    std::uint64_t seed = kDefaultSeed;
};

void run_gen(const GenArgs& a) {
    echo_config("gen", {{"kind", a.kind},
                        {"out", a.out},
                        {"d", a.d},
                        {"n", a.n},
                        {"m", a.m},
                        {"sigma", a.sigma},
                        {"heavy_rows", a.heavy_rows},
                        {"heavy_scale", a.heavy_scale},
                        {"seed", a.seed}});

    OutputGuard guard;
    guard.declare(a.out);

    cdn::Matrix x;
    if (a.kind == "gaussian-dn") {
        x = cdn::generate_gaussian_dn_data(
            a.d, a.n, cdn::random_planted_model(a.d, cdn::derive_seed(a.seed, 1, 0, 0)),
            a.sigma, a.seed);
        if (a.heavy_rows > 0)
            cdn::inject_high_leverage_rows(x, a.heavy_rows, a.heavy_scale,
                                           cdn::derive_seed(a.seed, 2, 0, 0));
    } else if (a.kind == "lognormal-poisson") {
        // Covariate columns from a planted Gaussian model, count column last.
        cdn::Matrix cov = cdn::generate_gaussian_dn_data(
            std::max<std::size_t>(2, a.d - 1), a.n,
            cdn::random_planted_model(std::max<std::size_t>(2, a.d - 1),
                                      cdn::derive_seed(a.seed, 1, 0, 0)),
            1.0, a.seed);
        std::mt19937_64 rng(cdn::derive_seed(a.seed, 3, 0, 0));
        std::uniform_real_distribution<double> coef(-0.3, 0.3);
        std::vector<double> gamma(cov.cols());
        for (double& g : gamma) g = coef(rng);
        const auto y = cdn::generate_lognormal_poisson(
            cov, gamma, a.sigma, cdn::derive_seed(a.seed, 4, 0, 0));
        x = cdn::Matrix(a.n, cov.cols() + 1);
        for (std::size_t r = 0; r < a.n; ++r) {
            for (std::size_t j = 0; j < cov.cols(); ++j) x(r, j) = cov(r, j);
            x(r, cov.cols()) = y[r];
        }
    } else if (a.kind == "stacked-identity") {
        x = cdn::generate_stacked_identity(a.d, a.m);
    } else {
        throw CLI::ValidationError("--kind", "unknown generator " + a.kind);
    }
    cdn::write_matrix_csv(x, a.out);
    std::cout << "rows " << x.rows() << "\ncols " << x.cols() << '\n';
    guard.committed = true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Core dependency networks: leverage-score coresets, GLM training, "
                 "evaluation, and structure extraction"};
    app.require_subcommand(1);

    std::string kernels_override;
    app.add_option("--kernels", kernels_override,
                   "Force a kernel variant (scalar, avx2, neon)");

    CoresetArgs ca;
    auto* sc = app.add_subcommand("coreset", "Sample a weighted coreset to CSV");
    sc->add_option("--input", ca.input, "Input CSV")->required();
    sc->add_flag("--header", ca.header, "Input has a header row");
    sc->add_option("--out", ca.out, "Output coreset CSV")->required();
    sc->add_option("--method", ca.method, "leverage or uniform");
    sc->add_option("--eps", ca.eps, "Target distortion (leverage sizing)");
    sc->add_option("--fraction", ca.fraction, "Target sample fraction");
    sc->add_option("--const-d", ca.const_d, "Constant D in the size bound");
    sc->add_flag("--boost-logd", ca.boost_logd, "Multiply k by ceil(log d)");
    sc->add_option("--seed", ca.seed, "RNG seed");
    sc->add_option("--transform", ca.transforms, "Comma list: log1p,clip01,floor");

    TrainArgs ta;
    auto* st = app.add_subcommand("train", "Fit a dependency network");
    st->add_option("--input", ta.input, "Input CSV (full data)");
    st->add_option("--coreset", ta.coreset_path, "Coreset CSV (weighted data)");
    st->add_flag("--header", ta.header, "Input has a header row");
    st->add_option("--family", ta.family, "gaussian or poisson")->required();
    st->add_flag("--intercept,!--no-intercept", ta.intercept, "Intercept column");
    st->add_option("--transform", ta.transforms, "Comma list applied before fitting");
    st->add_option("--workers", ta.workers, "Parallel per-variable fits");
    st->add_option("--out", ta.out, "Model JSON path")->required();

    EvalArgs ea;
    auto* se = app.add_subcommand("eval", "Cross-validated benchmark");
    se->add_option("--input", ea.input, "Input CSV")->required();
    se->add_flag("--header", ea.header, "Input has a header row");
    se->add_option("--family", ea.family, "gaussian or poisson")->required();
    se->add_option("--methods", ea.methods, "Comma list of full,coreset,uniform");
    se->add_option("--fractions", ea.fractions, "Comma list of sample fractions");
    se->add_option("--folds", ea.folds, "Cross-validation folds");
    se->add_option("--seed", ea.seed, "RNG seed");
    se->add_flag("--intercept,!--no-intercept", ea.intercept, "Intercept column");
    se->add_option("--transform", ea.transforms, "Comma list applied to the data");
    se->add_option("--pred-transform", ea.pred_transform,
                   "Transform applied to predictions (clip01 or floor)");
    se->add_option("--const-d", ea.const_d, "Constant D in the size bound");
    se->add_flag("--boost-logd", ea.boost_logd, "Multiply k by ceil(log d)");
    se->add_option("--workers", ea.workers, "Parallel per-variable fits");
    se->add_option("--out", ea.out, "Output stem; writes <out>.csv and <out>.json")
        ->required();

    GibbsArgs ga;
    auto* sg = app.add_subcommand("gibbs", "Sample a trajectory from a model");
    sg->add_option("--model", ga.model, "Model JSON")->required();
    sg->add_option("--steps", ga.steps, "Recorded sweeps");
    sg->add_option("--burnin", ga.burnin, "Discarded leading sweeps");
    sg->add_option("--seed", ga.seed, "RNG seed");
    sg->add_option("--out", ga.out, "Trajectory CSV")->required();

    StructureArgs sa;
    auto* ss = app.add_subcommand("structure", "Export top positive edges");
    ss->add_option("--model", sa.model, "Model JSON")->required();
    ss->add_option("--edges", sa.edges, "Edge count to keep");
    ss->add_option("--out", sa.out, "Edge list CSV")->required();
    ss->add_option("--dot", sa.dot, "Optional DOT graph output");

    HardArgs ha;
    auto* sh = app.add_subcommand("hard", "Worst-case Poisson instance + separation report");
    sh->add_option("--n", ha.n, "Polygon size");
    sh->add_option("--bits", ha.bits, "0/1 string of present points (default all 1)");
    sh->add_option("--out", ha.out, "Instance CSV")->required();
    sh->add_option("--report", ha.report, "Separation report CSV")->required();

    GenArgs na;
    auto* sn = app.add_subcommand("gen", "Synthetic data generators");
    sn->add_option("--kind", na.kind,
                   "gaussian-dn, lognormal-poisson, or stacked-identity");
    sn->add_option("--d", na.d, "Variable count");
    sn->add_option("--n", na.n, "Row count");
    sn->add_option("--m", na.m, "Stacking exponent (stacked-identity)");
    sn->add_option("--sigma", na.sigma, "Noise level");
    sn->add_option("--heavy-rows", na.heavy_rows, "High-leverage rows to inject");
    sn->add_option("--heavy-scale", na.heavy_scale, "Scale factor for heavy rows");
    sn->add_option("--seed", na.seed, "RNG seed");
    sn->add_option("--out", na.out, "Output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!kernels_override.empty() && !cdn::kernels::select(kernels_override)) {
            std::cerr << "error: kernel variant not available: " << kernels_override
                      << '\n';
            return 1;
        }
        if (sc->parsed()) run_coreset(ca);
        if (st->parsed()) run_train(ta);
        if (se->parsed()) run_eval(ea);
        if (sg->parsed()) run_gibbs(ga);
        if (ss->parsed()) run_structure(sa);
        if (sh->parsed()) run_hard(ha);
        if (sn->parsed()) run_gen(na);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
