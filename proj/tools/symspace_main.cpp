// Command-line front end: sampling, density evaluation, estimator fitting,
// classification, metrics, descriptors, the simulation study and the
// numerical verification suite. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <sstream>

#include "symspace/classify.hpp"
#include "symspace/descriptors.hpp"
#include "symspace/distributions.hpp"
#include "symspace/estimators.hpp"
#include "symspace/io.hpp"
#include "symspace/manifolds.hpp"
#include "symspace/metrics.hpp"
#include "symspace/simulate.hpp"
#include "symspace/verify.hpp"

namespace {

using namespace symspace;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct VerifyFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw CLI::ValidationError("expected a comma-separated list of numbers");
    return out;
}

struct Options {
    std::string manifold;
    std::string params_path;
    std::string params2_path;
    std::string model_path;
    std::string in_path;
    std::string in2_path;
    std::string test_path;
    std::string out_path;
    std::string kind;
    std::string family;
    std::string sweep;
    std::string h_grid;
    std::string cost = "geodesic";
    std::string format = "csv";
    std::string covariance = "full";
    double h = 0.0;
    double split_fraction = 0.0;
    double eps = 1e-8;
    int n = 1000;
    int grid = 32;
    int K = 0;
    int Kmax = 0;
    int folds = 5;
    int cases = 100;
    int label = 0;
    int replicates = 10;
    Seed seed = 0;
};

std::string config_echo(const std::string& subcommand, std::initializer_list<std::pair<std::string, std::string>> kv) {
    std::ostringstream out;
    out << "config: subcommand=" << subcommand;
    for (const auto& [k, v] : kv) out << " " << k << "=" << v;
    return out.str();
}

json config_json(const std::string& subcommand, std::initializer_list<std::pair<std::string, std::string>> kv) {
    json j;
    j["subcommand"] = subcommand;
    for (const auto& [k, v] : kv) j[k] = v;
    return j;
}

int cmd_sample(const Options& opt) {
    const auto params = io::read_lg_params_file(opt.params_path);
    if (!opt.manifold.empty() && manifolds::ManifoldHandle::parse(opt.manifold) != params.handle) {
        throw std::invalid_argument("--manifold disagrees with the params file");
    }
    const auto points = distributions::lg_sample(params, opt.n, opt.seed);
    std::vector<io::DatasetRow> rows;
    rows.reserve(points.size());
    for (const auto& p : points) rows.push_back({opt.label, p});
    io::write_dataset_file(opt.out_path, params.handle, rows,
                           config_echo("sample", {{"manifold", params.handle.str()},
                                                  {"n", std::to_string(opt.n)},
                                                  {"seed", std::to_string(opt.seed)}}));
    return kExitOk;
}

int cmd_density(const Options& opt) {
    const auto handle = manifolds::ManifoldHandle::parse(opt.manifold);
    const auto rows = io::read_dataset_file(opt.in_path, handle);

    std::function<double(const manifolds::ManifoldPoint&)> log_density;
    std::string source;
    if (!opt.params_path.empty()) {
        const auto params = io::read_lg_params_file(opt.params_path);
        if (params.handle != handle) throw std::invalid_argument("params manifold mismatch");
        log_density = [params](const manifolds::ManifoldPoint& x) {
            return distributions::lg_log_density(params, x);
        };
        source = "params";
    } else if (!opt.model_path.empty()) {
        const auto model = io::read_model_file(opt.model_path);
        if (model.handle() != handle) throw std::invalid_argument("model manifold mismatch");
        log_density = [model](const manifolds::ManifoldPoint& x) { return model.log_density(x); };
        source = "model";
    } else {
        throw CLI::ValidationError("density needs --params or --model");
    }

    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& row : rows) values.push_back(log_density(row.point));

    const auto echo = config_echo("density", {{"manifold", handle.str()},
                                              {"source", source},
                                              {"seed", std::to_string(opt.seed)}});
    if (opt.format == "json") {
        json j;
        j["config"] = config_json("density", {{"manifold", handle.str()}, {"source", source}});
        j["log_density"] = values;
        io::write_text_file(opt.out_path, j.dump(2) + "\n");
    } else {
        std::ostringstream out;
        out << "# " << echo << "\n";
        out << "index,log_density\n";
        for (size_t i = 0; i < values.size(); ++i) {
            out << i << "," << io::format_double(values[i]) << "\n";
        }
        io::write_text_file(opt.out_path, out.str());
    }
    return kExitOk;
}

int cmd_kde(const Options& opt) {
    const auto handle = manifolds::ManifoldHandle::parse(opt.manifold);
    const auto rows = io::read_dataset_file(opt.in_path, handle);
    std::vector<manifolds::ManifoldPoint> points;
    points.reserve(rows.size());
    for (const auto& row : rows) points.push_back(row.point);

    const auto kind = opt.kind.empty() ? estimators::KernelKind::LogGaussian
                                       : estimators::parse_kernel_kind(opt.kind);
    double bandwidth = opt.h;
    if (bandwidth <= 0.0) {
        std::vector<double> grid;
        if (!opt.h_grid.empty()) {
            grid = parse_double_list(opt.h_grid);
        } else if (kind == estimators::KernelKind::Wishart ||
                   kind == estimators::KernelKind::InvWishart) {
            const double lo = kind == estimators::KernelKind::Wishart
                                  ? static_cast<double>(handle.param)
                                  : 3.5;
            for (int i = 0; i < 20; ++i) {
                grid.push_back(std::exp(std::log(lo) + (std::log(200.0) - std::log(lo)) * i / 19.0));
            }
        } else {
            Mat coords(static_cast<Eigen::Index>(points.size()), handle.dim());
            for (size_t i = 0; i < points.size(); ++i) {
                coords.row(static_cast<Eigen::Index>(i)) =
                    manifolds::log_map(points[i]).values.transpose();
            }
            grid = estimators::default_bandwidth_grid(coords);
        }
        bandwidth = estimators::bandwidth_cv(points, grid, opt.folds, opt.seed, kind).selected;
    }
    const auto model = estimators::kde_fit(points, bandwidth, kind);
    io::write_text_file(opt.out_path, io::write_kde_model(model));
    return kExitOk;
}

int cmd_em(const Options& opt) {
    const auto handle = manifolds::ManifoldHandle::parse(opt.manifold);
    const auto rows = io::read_dataset_file(opt.in_path, handle);
    Mat coords(static_cast<Eigen::Index>(rows.size()), handle.dim());
    for (size_t i = 0; i < rows.size(); ++i) {
        coords.row(static_cast<Eigen::Index>(i)) = manifolds::log_map(rows[i].point).values.transpose();
    }
    int k = opt.K;
    if (k <= 0) {
        if (opt.Kmax <= 0) throw CLI::ValidationError("em needs --K or --Kmax");
        k = estimators::model_select_k(coords, opt.Kmax, opt.folds, opt.seed);
    }
    const auto cov_kind = opt.covariance == "diagonal" ? estimators::CovarianceKind::Diagonal
                                                       : estimators::CovarianceKind::Full;
    const auto model = estimators::em_fit(coords, k, opt.seed, 500, 1e-8, 1e-6, cov_kind, handle);
    io::write_text_file(opt.out_path, io::write_mixture_model(model));
    return kExitOk;
}

int cmd_classify(const Options& opt) {
    const auto handle = manifolds::ManifoldHandle::parse(opt.manifold);
    if (handle.kind != manifolds::Kind::Pd) throw std::invalid_argument("classify expects a pd manifold");
    const auto kind = classify::parse_classifier_kind(opt.kind);
    const auto train_rows = io::read_dataset_file(opt.in_path, handle);

    classify::LabeledDataset train = io::to_labeled(train_rows);
    classify::LabeledDataset test;
    if (!opt.test_path.empty()) {
        test = io::to_labeled(io::read_dataset_file(opt.test_path, handle));
    } else if (opt.split_fraction > 0.0) {
        auto parts = classify::split(train, opt.split_fraction, opt.seed);
        train = std::move(parts.first);
        test = std::move(parts.second);
    } else {
        throw CLI::ValidationError("classify needs --test or --split-fraction");
    }

    std::optional<double> bandwidth;
    if (opt.h > 0.0) bandwidth = opt.h;
    const auto model = classify::fit(kind, train, bandwidth, opt.seed);
    const auto report = classify::evaluate(model, test);

    json j;
    j["config"] = config_json("classify", {{"manifold", handle.str()},
                                           {"kind", opt.kind},
                                           {"seed", std::to_string(opt.seed)}});
    j["accuracy"] = report.accuracy;
    j["brier"] = report.brier;
    json confusion = json::array();
    for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) row.push_back(report.confusion(i, c));
        confusion.push_back(std::move(row));
    }
    j["confusion"] = std::move(confusion);
    j["train_size"] = train.size();
    j["test_size"] = test.size();
    if (model.kind == classify::ClassifierKind::Gkc || model.kind == classify::ClassifierKind::Lgkc) {
        j["bandwidth"] = model.bandwidth;
    }
    io::write_text_file(opt.out_path, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_metric(const Options& opt) {
    json j;
    j["config"] = config_json("metric", {{"kind", opt.kind}, {"seed", std::to_string(opt.seed)}});
    if (opt.kind == "hellinger" || opt.kind == "kl") {
        const auto p = io::read_lg_params_file(opt.params_path);
        const auto q = io::read_lg_params_file(opt.params2_path);
        const auto dp = metrics::density_of(p);
        const auto dq = metrics::density_of(q);
        const auto est = opt.kind == "hellinger" ? metrics::hellinger_sq(dp, dq, opt.n, opt.seed)
                                                 : metrics::kl_divergence(dp, dq, opt.n, opt.seed);
        j["value"] = est.value;
        j["stderr"] = est.std_error;
        j["n"] = est.n;
        j["seed"] = est.seed;
    } else if (opt.kind == "l1" || opt.kind == "l2") {
        const auto p = io::read_lg_params_file(opt.params_path);
        const auto q = io::read_lg_params_file(opt.params2_path);
        const int lp = opt.kind == "l1" ? 1 : 2;
        j["value"] = metrics::lp_distance_quadrature(metrics::density_of(p), metrics::density_of(q), lp);
        j["stderr"] = 0.0;
        j["n"] = 0;
        j["seed"] = opt.seed;
    } else if (opt.kind == "w1" || opt.kind == "w2") {
        const auto handle = manifolds::ManifoldHandle::parse(opt.manifold);
        const auto xs_rows = io::read_dataset_file(opt.in_path, handle);
        const auto ys_rows = io::read_dataset_file(opt.in2_path, handle);
        std::vector<manifolds::ManifoldPoint> xs, ys;
        for (const auto& r : xs_rows) xs.push_back(r.point);
        for (const auto& r : ys_rows) ys.push_back(r.point);
        const auto cost = opt.cost == "tangent" ? metrics::WassersteinCost::EuclideanTangent
                                                : metrics::WassersteinCost::Geodesic;
        j["value"] = metrics::wasserstein_empirical(xs, ys, opt.kind == "w1" ? 1 : 2, cost);
        j["stderr"] = 0.0;
        j["n"] = static_cast<int>(xs.size());
        j["seed"] = opt.seed;
    } else {
        throw CLI::ValidationError("metric kind must be hellinger, kl, l1, l2, w1 or w2");
    }
    io::write_text_file(opt.out_path, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_descriptor(const Options& opt) {
    const auto img = descriptors::load_pgm_file(opt.in_path);
    descriptors::DescriptorConfig cfg;
    cfg.grid = opt.grid;
    cfg.epsilon = opt.eps;
    const auto desc = descriptors::covariance_descriptor(img, cfg);
    if (opt.format == "matrix") {
        io::write_matrix_file(opt.out_path, desc.mat());
        return kExitOk;
    }
    const auto handle = manifolds::ManifoldHandle::pd(descriptors::kFeatureCount);
    std::vector<io::DatasetRow> rows{{opt.label, manifolds::ManifoldPoint{handle, desc}}};
    io::write_dataset_file(opt.out_path, handle, rows,
                           config_echo("descriptor", {{"grid", std::to_string(opt.grid)},
                                                      {"label", std::to_string(opt.label)}}));
    return kExitOk;
}

int cmd_simulate(const Options& opt, bool n_given) {
    const auto family = sim::parse_family(opt.family);
    const auto sweep = opt.sweep.empty() ? sim::default_sweep(family) : parse_double_list(opt.sweep);
    const int n = n_given ? opt.n : 2000;
    const auto report = sim::run_simulation(family, sweep, n, opt.replicates, opt.seed);
    const auto echo = config_echo("simulate", {{"family", opt.family},
                                               {"n", std::to_string(n)},
                                               {"replicates", std::to_string(opt.replicates)},
                                               {"seed", std::to_string(opt.seed)}});
    io::write_text_file(opt.out_path, sim::report_to_csv(report, echo));
    return kExitOk;
}

int cmd_verify(const Options& opt) {
    const auto handle = manifolds::ManifoldHandle::parse(opt.manifold);
    const auto checks = verify::run_checks(handle, opt.cases, opt.seed);
    std::ostringstream out;
    out << "# " << config_echo("verify", {{"manifold", handle.str()},
                                          {"cases", std::to_string(opt.cases)},
                                          {"seed", std::to_string(opt.seed)}})
        << "\n";
    bool all_pass = true;
    for (const auto& c : checks) {
        out << "verify " << handle.str() << " " << c.name << ": " << (c.pass ? "PASS" : "FAIL")
            << " (value=" << io::format_double(c.value) << " bound=" << io::format_double(c.bound)
            << ")";
        if (!c.detail.empty()) out << " [" << c.detail << "]";
        out << "\n";
        all_pass = all_pass && c.pass;
    }
    std::cout << out.str();
    if (!opt.out_path.empty()) io::write_text_file(opt.out_path, out.str());
    if (!all_pass) throw VerifyFailure("verification failed for " + handle.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"log-Gaussian distributions, estimation and classification on symmetric spaces"};
    app.set_help_flag("--help", "print help");  // frees -h / --h for the bandwidth flag
    app.require_subcommand(1);
    Options opt;

    auto* sample = app.add_subcommand("sample", "draw log-Gaussian samples into a dataset CSV");
    sample->add_option("--manifold", opt.manifold);
    sample->add_option("--params", opt.params_path)->required();
    sample->add_option("--n", opt.n);
    sample->add_option("--seed", opt.seed);
    sample->add_option("--label", opt.label);
    sample->add_option("--out", opt.out_path)->required();

    auto* density = app.add_subcommand("density", "evaluate a density on dataset points");
    density->add_option("--manifold", opt.manifold)->required();
    density->add_option("--params", opt.params_path);
    density->add_option("--model", opt.model_path);
    density->add_option("--in", opt.in_path)->required();
    density->add_option("--out", opt.out_path)->required();
    density->add_option("--format", opt.format)->check(CLI::IsMember({"csv", "json"}));
    density->add_option("--seed", opt.seed);

    auto* kde = app.add_subcommand("kde", "fit a kernel density estimator");
    kde->add_option("--manifold", opt.manifold)->required();
    kde->add_option("--in", opt.in_path)->required();
    kde->add_option("--h", opt.h);
    kde->add_option("--h-grid", opt.h_grid);
    kde->add_option("--kind", opt.kind);
    kde->add_option("--folds", opt.folds);
    kde->add_option("--seed", opt.seed);
    kde->add_option("--out", opt.out_path)->required();

    auto* em = app.add_subcommand("em", "fit a mixture of log-Gaussians by EM");
    em->add_option("--manifold", opt.manifold)->required();
    em->add_option("--in", opt.in_path)->required();
    em->add_option("--K", opt.K);
    em->add_option("--Kmax", opt.Kmax);
    em->add_option("--folds", opt.folds);
    em->add_option("--covariance", opt.covariance)->check(CLI::IsMember({"full", "diagonal"}));
    em->add_option("--seed", opt.seed);
    em->add_option("--out", opt.out_path)->required();

    auto* cls = app.add_subcommand("classify", "fit and evaluate a density-based classifier");
    cls->add_option("--manifold", opt.manifold)->required();
    cls->add_option("--kind", opt.kind)->required();
    cls->add_option("--in", opt.in_path)->required();
    cls->add_option("--test", opt.test_path);
    cls->add_option("--split-fraction", opt.split_fraction);
    cls->add_option("--h", opt.h);
    cls->add_option("--seed", opt.seed);
    cls->add_option("--out", opt.out_path)->required();

    auto* metric = app.add_subcommand("metric", "distances/divergences between densities or samples");
    metric->add_option("--kind", opt.kind)->required();
    metric->add_option("--manifold", opt.manifold);
    metric->add_option("--params", opt.params_path);
    metric->add_option("--params2", opt.params2_path);
    metric->add_option("--in", opt.in_path);
    metric->add_option("--in2", opt.in2_path);
    metric->add_option("--cost", opt.cost)->check(CLI::IsMember({"geodesic", "tangent"}));
    metric->add_option("--n", opt.n);
    metric->add_option("--seed", opt.seed);
    metric->add_option("--out", opt.out_path)->required();

    auto* desc = app.add_subcommand("descriptor", "covariance descriptor of a PGM image");
    desc->add_option("--in", opt.in_path)->required();
    desc->add_option("--out", opt.out_path)->required();
    desc->add_option("--grid", opt.grid);
    desc->add_option("--eps", opt.eps);
    desc->add_option("--label", opt.label);
    desc->add_option("--format", opt.format)->check(CLI::IsMember({"dataset", "matrix"}));

    auto* simulate = app.add_subcommand("simulate", "the four-estimator comparison study");
    simulate->add_option("--family", opt.family)->required();
    simulate->add_option("--sweep", opt.sweep);
    simulate->add_option("--n", opt.n);
    simulate->add_option("--replicates", opt.replicates);
    simulate->add_option("--seed", opt.seed);
    simulate->add_option("--out", opt.out_path)->required();

    auto* verify_cmd = app.add_subcommand("verify", "run the numerical oracle suite");
    verify_cmd->add_option("--manifold", opt.manifold)->required();
    verify_cmd->add_option("--cases", opt.cases);
    verify_cmd->add_option("--seed", opt.seed);
    verify_cmd->add_option("--out", opt.out_path);

    for (auto* sub : app.get_subcommands({})) sub->set_help_flag("--help", "print help");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sample->parsed()) return cmd_sample(opt);
        if (density->parsed()) return cmd_density(opt);
        if (kde->parsed()) return cmd_kde(opt);
        if (em->parsed()) return cmd_em(opt);
        if (cls->parsed()) return cmd_classify(opt);
        if (metric->parsed()) return cmd_metric(opt);
        if (desc->parsed()) return cmd_descriptor(opt);
        if (simulate->parsed()) return cmd_simulate(opt, simulate->count("--n") > 0);
        if (verify_cmd->parsed()) return cmd_verify(opt);
    } catch (const VerifyFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitVerify;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
