#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "symspace/distributions.hpp"
#include "symspace/estimators.hpp"
#include "symspace/io.hpp"

using namespace symspace;
using linalg::PdMatrix;
using manifolds::ManifoldHandle;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("symspace_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args, int threads = 1) {
    const std::string cmd = "SYMSPACE_THREADS=" + std::to_string(threads) + " \"" SYMSPACE_CLI_PATH
                            "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("matrix text format round trip") {
    Rng rng(3);
    Mat a(3, 3);
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.normal() * std::pow(10.0, (i % 5) - 2);
    const std::string text = io::write_matrix_text(a);
    CHECK(text.rfind("m=3\n", 0) == 0);
    const Mat back = io::read_matrix_text(text);
    CHECK((back - a).norm() == 0.0);

    CHECK_THROWS_AS(io::read_matrix_text("3\n1,0,0\n"), std::invalid_argument);
    CHECK_THROWS_AS(io::read_matrix_text("m=2\n1,0\n"), std::invalid_argument);
    CHECK_THROWS_AS(io::read_matrix_text("m=2\n1,0\n0,x\n"), std::invalid_argument);
}

TEST_CASE("dataset round trips for every chart") {
    const ManifoldHandle pd = ManifoldHandle::pd(2);
    const distributions::LogGaussianParams p{pd, Vec::Zero(3), PdMatrix::identity(3)};
    std::vector<io::DatasetRow> rows;
    int label = 1;
    for (const auto& x : distributions::lg_sample(p, 5, 7)) rows.push_back({1 + (label++ % 2), x});
    const std::string text = io::write_dataset(pd, rows, "roundtrip");
    const auto back = io::read_dataset(pd, text);
    REQUIRE(back.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].label == rows[i].label);
        CHECK((back[i].point.pd().mat() - rows[i].point.pd().mat()).norm() == 0.0);
    }

    const ManifoldHandle ball = ManifoldHandle::poincare_ball(3);
    Vec v(3);
    v << 0.1, -0.2, 0.4;
    const auto ball_text = io::write_dataset(ball, {{0, {ball, v}}});
    CHECK((io::read_dataset(ball, ball_text)[0].point.vec() - v).norm() == 0.0);

    const ManifoldHandle siegel = ManifoldHandle::siegel_disk(1);
    CMat z(1, 1);
    z(0, 0) = {0.25, -0.4};
    const auto sg_text = io::write_dataset(siegel, {{0, {siegel, z}}});
    CHECK((io::read_dataset(siegel, sg_text)[0].point.cmat() - z).norm() == 0.0);

    CHECK_THROWS_AS(io::read_dataset(pd, "label,m,entries\n1,2,1,0,0\n"), std::invalid_argument);
    CHECK_THROWS_AS(io::read_dataset(pd, ""), std::invalid_argument);
}

TEST_CASE("params json round trip") {
    const ManifoldHandle h = ManifoldHandle::poincare_ball(2);
    Vec mu(2);
    mu << 0.25, -0.5;
    Mat sigma(2, 2);
    sigma << 1.25, 0.25, 0.25, 0.75;
    const distributions::LogGaussianParams p{h, mu, PdMatrix(sigma)};
    const auto back = io::read_lg_params(io::write_lg_params(p));
    CHECK(back.handle == h);
    CHECK((back.mu - mu).norm() == 0.0);
    CHECK((back.sigma.mat() - sigma).norm() == 0.0);

    CHECK_THROWS_AS(io::read_lg_params("{\"manifold\": \"pd:2\"}"), std::invalid_argument);
    CHECK_THROWS_AS(io::read_lg_params("not json"), std::invalid_argument);
}

TEST_CASE("model json reproduces densities bit for bit") {
    const ManifoldHandle h = ManifoldHandle::pd(2);
    const distributions::LogGaussianParams p{h, Vec::Zero(3), PdMatrix::identity(3)};
    const auto pts = distributions::lg_sample(p, 30, 11);
    const auto queries = distributions::lg_sample(p, 10, 13);

    const auto kde = estimators::kde_fit(pts, 0.45);
    const auto kde_back = io::read_model(io::write_kde_model(kde));
    REQUIRE_FALSE(kde_back.is_mixture);
    for (const auto& q : queries) {
        CHECK(estimators::kde_log_density(kde_back.kde, q) == estimators::kde_log_density(kde, q));
    }

    Mat coords(30, 3);
    for (int i = 0; i < 30; ++i) coords.row(i) = manifolds::log_map(pts[static_cast<size_t>(i)]).values.transpose();
    const auto mix = estimators::em_fit(coords, 2, 5, 500, 1e-8, 1e-6,
                                        estimators::CovarianceKind::Full, h);
    const auto mix_back = io::read_model(io::write_mixture_model(mix));
    REQUIRE(mix_back.is_mixture);
    for (const auto& q : queries) {
        CHECK(estimators::mixture_log_density(mix_back.mixture, q) ==
              estimators::mixture_log_density(mix, q));
    }

    const auto wkde = estimators::kde_fit(pts, 8.0, estimators::KernelKind::Wishart);
    const auto wkde_back = io::read_model(io::write_kde_model(wkde));
    for (const auto& q : queries) {
        CHECK(estimators::kde_log_density(wkde_back.kde, q) == estimators::kde_log_density(wkde, q));
    }
}

TEST_CASE("cli: sampling, density evaluation and exit codes") {
    TempDir dir;
    const std::string params = dir.file("params.json");
    io::write_text_file(params, io::write_lg_params({ManifoldHandle::pd(2), Vec::Zero(3),
                                                     PdMatrix::identity(3)}));

    // n = 0 gives a file with the header only.
    CHECK(run_cli("sample --params " + params + " --n 0 --seed 1 --out " + dir.file("empty.csv")) == 0);
    const std::string empty = io::read_text_file(dir.file("empty.csv"));
    CHECK(empty.find("label,m,entries") != std::string::npos);
    CHECK(io::read_dataset(ManifoldHandle::pd(2), empty).empty());

    CHECK(run_cli("sample --params " + params + " --n 40 --seed 7 --out " + dir.file("pts.csv")) == 0);

    // Fit a KDE, serialize, evaluate through the CLI.
    CHECK(run_cli("kde --manifold pd:2 --in " + dir.file("pts.csv") + " --h 0.5 --seed 3 --out " +
                  dir.file("model.json")) == 0);
    CHECK(run_cli("density --manifold pd:2 --model " + dir.file("model.json") + " --in " +
                  dir.file("pts.csv") + " --out " + dir.file("dens.csv")) == 0);
    const auto model = io::read_model_file(dir.file("model.json"));
    const auto rows = io::read_dataset_file(dir.file("pts.csv"), ManifoldHandle::pd(2));
    const std::string dens = io::read_text_file(dir.file("dens.csv"));
    // First data line carries the density of the first point, bit for bit.
    const auto pos = dens.find("\n0,");
    REQUIRE(pos != std::string::npos);
    const auto line_end = dens.find('\n', pos + 1);
    const std::string value = dens.substr(pos + 3, line_end - pos - 3);
    CHECK(std::stod(value) == model.log_density(rows[0].point));

    // Exit codes: usage, data, verification.
    CHECK(run_cli("density --manifold pd:2 --in " + dir.file("pts.csv") + " --out " +
                  dir.file("x.csv")) == 1);  // neither --params nor --model
    CHECK(run_cli("nonsense") == 1);
    CHECK(run_cli("density --manifold pd:2 --model " + dir.file("missing.json") + " --in " +
                  dir.file("pts.csv") + " --out " + dir.file("x.csv")) == 2);
    CHECK(run_cli("verify --manifold pd:2 --cases 10 --seed 3") == 0);
}

TEST_CASE("cli: em, classify, metric, descriptor") {
    TempDir dir;
    const ManifoldHandle h = ManifoldHandle::pd(2);

    // Mixture fit over two separated clusters.
    Vec far = Vec::Zero(3);
    far[0] = 6.0;
    const distributions::LogGaussianParams a{h, Vec::Zero(3), PdMatrix::identity(3)};
    const distributions::LogGaussianParams b{h, far, PdMatrix::identity(3)};
    std::vector<io::DatasetRow> rows;
    for (const auto& x : distributions::lg_sample(a, 60, 5)) rows.push_back({1, x});
    for (const auto& x : distributions::lg_sample(b, 60, 6)) rows.push_back({2, x});
    io::write_dataset_file(dir.file("two.csv"), h, rows);

    CHECK(run_cli("em --manifold pd:2 --in " + dir.file("two.csv") + " --K 2 --seed 9 --out " +
                  dir.file("mix.json")) == 0);
    const auto mix = io::read_model_file(dir.file("mix.json"));
    REQUIRE(mix.is_mixture);
    CHECK(mix.mixture.weights.size() == 2);

    CHECK(run_cli("classify --manifold pd:2 --kind lgnb --in " + dir.file("two.csv") +
                  " --split-fraction 0.5 --seed 4 --out " + dir.file("report.json")) == 0);
    const auto report = io::read_text_file(dir.file("report.json"));
    CHECK(report.find("\"accuracy\": 1.0") != std::string::npos);

    // Hellinger distance of a distribution against itself.
    const std::string params = dir.file("p.json");
    io::write_text_file(params, io::write_lg_params(a));
    CHECK(run_cli("metric --kind hellinger --params " + params + " --params2 " + params +
                  " --n 4000 --seed 3 --out " + dir.file("m.json")) == 0);
    const auto metric_out = io::read_text_file(dir.file("m.json"));
    CHECK(metric_out.find("\"value\"") != std::string::npos);

    // Descriptor of a small synthetic image, in both output formats.
    std::string pgm = "P2\n24 24\n255\n";
    Rng rng(17);
    for (int i = 0; i < 24 * 24; ++i) pgm += std::to_string(rng.below(256)) + " ";
    io::write_text_file(dir.file("img.pgm"), pgm);
    CHECK(run_cli("descriptor --in " + dir.file("img.pgm") + " --grid 8 --out " +
                  dir.file("desc.csv")) == 0);
    const auto desc_rows = io::read_dataset_file(dir.file("desc.csv"), ManifoldHandle::pd(5));
    REQUIRE(desc_rows.size() == 1);
    CHECK(run_cli("descriptor --in " + dir.file("img.pgm") + " --grid 8 --format matrix --out " +
                  dir.file("desc_m.csv")) == 0);
    const Mat m = io::read_matrix_file(dir.file("desc_m.csv"));
    CHECK((m - desc_rows[0].point.pd().mat()).norm() == 0.0);
}
