#include "symspace/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace symspace::io {

using manifolds::ManifoldHandle;
using manifolds::ManifoldPoint;
using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& tok) {
    try {
        size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed number: '" + tok + "'");
    }
}

int parse_int(const std::string& tok) {
    try {
        size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed integer: '" + tok + "'");
    }
}

size_t chart_entry_count(const ManifoldHandle& h) {
    switch (h.kind) {
        case manifolds::Kind::Pd:
            return static_cast<size_t>(h.param) * h.param;
        case manifolds::Kind::SiegelDisk:
            return 2 * static_cast<size_t>(h.param) * h.param;
        default:
            return static_cast<size_t>(h.param);
    }
}

std::vector<double> chart_entries(const ManifoldPoint& p) {
    std::vector<double> out;
    switch (p.handle.kind) {
        case manifolds::Kind::Pd: {
            const Mat& m = p.pd().mat();
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
            }
            break;
        }
        case manifolds::Kind::SiegelDisk: {
            const CMat& z = p.cmat();
            for (Eigen::Index i = 0; i < z.rows(); ++i) {
                for (Eigen::Index j = 0; j < z.cols(); ++j) {
                    out.push_back(z(i, j).real());
                    out.push_back(z(i, j).imag());
                }
            }
            break;
        }
        default:
            for (Eigen::Index i = 0; i < p.vec().size(); ++i) out.push_back(p.vec()[i]);
    }
    return out;
}

ManifoldPoint point_from_entries(const ManifoldHandle& h, const std::vector<double>& e) {
    switch (h.kind) {
        case manifolds::Kind::Pd: {
            Mat m(h.param, h.param);
            size_t k = 0;
            for (Eigen::Index i = 0; i < h.param; ++i) {
                for (Eigen::Index j = 0; j < h.param; ++j) m(i, j) = e[k++];
            }
            return {h, linalg::PdMatrix(m)};
        }
        case manifolds::Kind::SiegelDisk: {
            CMat z(h.param, h.param);
            size_t k = 0;
            for (Eigen::Index i = 0; i < h.param; ++i) {
                for (Eigen::Index j = 0; j < h.param; ++j) {
                    z(i, j) = {e[k], e[k + 1]};
                    k += 2;
                }
            }
            return {h, z};
        }
        default: {
            Vec v(h.param);
            for (Eigen::Index i = 0; i < h.param; ++i) v[i] = e[static_cast<size_t>(i)];
            return {h, v};
        }
    }
}

}  // namespace

std::string write_matrix_text(const Mat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("write_matrix_text: matrix must be square");
    std::ostringstream out;
    out << "m=" << a.rows() << "\n";
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (j > 0) out << ",";
            out << format_double(a(i, j));
        }
        out << "\n";
    }
    return out.str();
}

Mat read_matrix_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("m=", 0) != 0) {
        throw std::invalid_argument("matrix text: first line must be m=<order>");
    }
    const int m = parse_int(line.substr(2));
    if (m < 1) throw std::invalid_argument("matrix text: order must be >= 1");
    Mat a(m, m);
    for (int i = 0; i < m; ++i) {
        if (!std::getline(in, line)) throw std::invalid_argument("matrix text: missing row");
        const auto cells = split_csv(line);
        if (static_cast<int>(cells.size()) != m) throw std::invalid_argument("matrix text: wrong row length");
        for (int j = 0; j < m; ++j) a(i, j) = parse_double(cells[static_cast<size_t>(j)]);
    }
    return a;
}

std::string write_dataset(const ManifoldHandle& handle, const std::vector<DatasetRow>& rows,
                          const std::string& comment) {
    std::ostringstream out;
    if (!comment.empty()) out << "# " << comment << "\n";
    out << "label,m,entries\n";
    for (const auto& row : rows) {
        out << row.label << "," << handle.param;
        for (double e : chart_entries(row.point)) out << "," << format_double(e);
        out << "\n";
    }
    return out.str();
}

std::vector<DatasetRow> read_dataset(const ManifoldHandle& handle, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<DatasetRow> rows;
    bool header_seen = false;
    const size_t expect = chart_entry_count(handle);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line.rfind("label,m,", 0) != 0) {
                throw std::invalid_argument("dataset: missing 'label,m,entries' header");
            }
            header_seen = true;
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 2 + expect) {
            throw std::invalid_argument("dataset: row has " + std::to_string(cells.size()) +
                                        " cells, expected " + std::to_string(2 + expect));
        }
        DatasetRow row;
        row.label = parse_int(cells[0]);
        if (parse_int(cells[1]) != handle.param) {
            throw std::invalid_argument("dataset: size column does not match manifold");
        }
        std::vector<double> entries;
        entries.reserve(expect);
        for (size_t k = 0; k < expect; ++k) entries.push_back(parse_double(cells[2 + k]));
        row.point = point_from_entries(handle, entries);
        if (!manifolds::is_valid(row.point)) throw std::invalid_argument("dataset: invalid point in row");
        rows.push_back(std::move(row));
    }
    if (!header_seen) throw std::invalid_argument("dataset: empty file");
    return rows;
}

classify::LabeledDataset to_labeled(const std::vector<DatasetRow>& rows) {
    std::vector<linalg::PdMatrix> pts;
    std::vector<int> labels;
    pts.reserve(rows.size());
    labels.reserve(rows.size());
    for (const auto& row : rows) {
        pts.push_back(row.point.pd());
        labels.push_back(row.label);
    }
    return classify::LabeledDataset(std::move(pts), std::move(labels));
}

namespace {

json mat_to_json(const Mat& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("json matrix: expected array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Mat a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[static_cast<size_t>(i)].size()) != cols) {
            throw std::invalid_argument("json matrix: ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            a(i, c) = j[static_cast<size_t>(i)][static_cast<size_t>(c)].get<double>();
        }
    }
    return a;
}

json vec_to_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vec vec_from_json(const json& j) {
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<size_t>(i)].get<double>();
    return v;
}

}  // namespace

std::string write_lg_params(const distributions::LogGaussianParams& p) {
    json j;
    j["manifold"] = p.handle.str();
    j["mu"] = vec_to_json(p.mu);
    j["sigma"] = mat_to_json(p.sigma.mat());
    return j.dump(2) + "\n";
}

distributions::LogGaussianParams read_lg_params(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("params json: ") + e.what());
    }
    if (!j.contains("manifold") || !j.contains("mu") || !j.contains("sigma")) {
        throw std::invalid_argument("params json: need manifold, mu and sigma");
    }
    const auto handle = ManifoldHandle::parse(j["manifold"].get<std::string>());
    return {handle, vec_from_json(j["mu"]), linalg::PdMatrix(mat_from_json(j["sigma"]))};
}

std::string write_kde_model(const estimators::KdeModel& model) {
    json j;
    j["model"] = "kde";
    j["manifold"] = model.handle.str();
    j["kind"] = estimators::kernel_kind_name(model.kind);
    j["h"] = model.bandwidth;
    if (model.kind == estimators::KernelKind::Wishart ||
        model.kind == estimators::KernelKind::InvWishart) {
        json mats = json::array();
        for (const auto& m : model.train_mats) mats.push_back(mat_to_json(m.mat()));
        j["train_matrices"] = std::move(mats);
    } else {
        j["coords"] = mat_to_json(model.coords);
    }
    return j.dump(2) + "\n";
}

std::string write_mixture_model(const estimators::MixtureModel& model) {
    json j;
    j["model"] = "mixture";
    j["manifold"] = model.handle.str();
    j["weights"] = vec_to_json(model.weights);
    j["means"] = mat_to_json(model.means);
    json covs = json::array();
    for (const auto& c : model.covariances) covs.push_back(mat_to_json(c));
    j["covariances"] = std::move(covs);
    j["covariance_kind"] =
        model.covariance_kind == estimators::CovarianceKind::Full ? "full" : "diagonal";
    return j.dump(2) + "\n";
}

AnyModel read_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("model json: ") + e.what());
    }
    AnyModel out;
    const std::string kind = j.value("model", "");
    const auto handle = ManifoldHandle::parse(j.at("manifold").get<std::string>());
    if (kind == "kde") {
        out.is_mixture = false;
        out.kde.handle = handle;
        out.kde.kind = estimators::parse_kernel_kind(j.at("kind").get<std::string>());
        out.kde.bandwidth = j.at("h").get<double>();
        if (out.kde.kind == estimators::KernelKind::Wishart ||
            out.kde.kind == estimators::KernelKind::InvWishart) {
            for (const auto& m : j.at("train_matrices")) {
                out.kde.train_mats.emplace_back(mat_from_json(m));
            }
        } else {
            out.kde.coords = mat_from_json(j.at("coords"));
        }
        return out;
    }
    if (kind == "mixture") {
        out.is_mixture = true;
        out.mixture.handle = handle;
        out.mixture.weights = vec_from_json(j.at("weights"));
        out.mixture.means = mat_from_json(j.at("means"));
        for (const auto& c : j.at("covariances")) out.mixture.covariances.push_back(mat_from_json(c));
        out.mixture.covariance_kind = j.value("covariance_kind", "full") == "diagonal"
                                          ? estimators::CovarianceKind::Diagonal
                                          : estimators::CovarianceKind::Full;
        return out;
    }
    throw std::invalid_argument("model json: unknown model kind '" + kind + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    out << content;
}

void write_matrix_file(const std::string& path, const Mat& a) {
    write_text_file(path, write_matrix_text(a));
}

Mat read_matrix_file(const std::string& path) { return read_matrix_text(read_text_file(path)); }

void write_dataset_file(const std::string& path, const ManifoldHandle& handle,
                        const std::vector<DatasetRow>& rows, const std::string& comment) {
    write_text_file(path, write_dataset(handle, rows, comment));
}

std::vector<DatasetRow> read_dataset_file(const std::string& path, const ManifoldHandle& handle) {
    return read_dataset(handle, read_text_file(path));
}

distributions::LogGaussianParams read_lg_params_file(const std::string& path) {
    return read_lg_params(read_text_file(path));
}

AnyModel read_model_file(const std::string& path) { return read_model(read_text_file(path)); }

}  // namespace symspace::io
