#include "rms/io.hpp"

#include <fstream>
#include <sstream>

#include "rms/errors.hpp"

namespace rms::io {

namespace {

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

const Json& field(const Json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) throw ValidationError(std::string("missing field \"") + key + "\"");
    return doc.at(key);
}

std::vector<double> vector_field(const Json& doc, const char* key) {
    const auto& v = field(doc, key);
    if (!v.is_array()) throw ValidationError(std::string("field \"") + key + "\" must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ValidationError(std::string("field \"") + key + "\" must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Matrix matrix_from(const Json& v, const std::string& name) {
    if (!v.is_array()) throw ValidationError("\"" + name + "\" must be an array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& row : v) {
        if (!row.is_array()) throw ValidationError("\"" + name + "\" must be an array of rows");
        auto& out = rows.emplace_back();
        for (const auto& x : row) {
            if (!x.is_number()) throw ValidationError("\"" + name + "\" must hold numbers");
            out.push_back(x.get<double>());
        }
    }
    try {
        return Matrix::from_rows(rows);
    } catch (const DimensionError& e) {
        throw ValidationError("\"" + name + "\": " + e.what());
    }
}

std::size_t count_field(const Json& doc, const char* key) {
    const auto& v = field(doc, key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ValidationError(std::string("field \"") + key + "\" must be a nonnegative integer");
    return v.get<std::size_t>();
}

void expect_dims(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& name) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream os;
        os << name << " is " << m.rows() << "x" << m.cols() << ", declared " << rows << "x" << cols;
        throw ValidationError(os.str());
    }
}

}  // namespace

Json to_json(const KnownInstance& inst) {
    Json doc;
    doc["type"] = "known";
    doc["n"] = inst.bidders();
    doc["m"] = inst.goods();
    doc["p"] = inst.prior();
    doc["V"] = matrix_json(inst.values());
    return doc;
}

Json to_json(const BayesInstance& inst) {
    Json doc;
    doc["type"] = "bayes";
    doc["n"] = inst.bidders();
    doc["m"] = inst.goods();
    doc["k"] = inst.outcomes();
    doc["p"] = inst.prior();
    doc["q"] = inst.outcome_probs();
    Json vs = Json::array();
    for (std::size_t l = 0; l < inst.outcomes(); ++l) vs.push_back(matrix_json(inst.values(l)));
    doc["Vs"] = std::move(vs);
    return doc;
}

Json to_json(const AnyInstance& inst) {
    return std::visit([](const auto& i) { return to_json(i); }, inst);
}

Json to_json(const SignalingScheme& scheme) {
    Json doc;
    doc["s"] = scheme.signals();
    doc["phi"] = matrix_json(scheme.phi());
    return doc;
}

Json to_json(const SchemeReport& report) {
    Json doc;
    doc["revenue"] = report.revenue;
    doc["welfare"] = report.welfare;
    doc["signal_count_after_merge"] = report.signal_count_after_merge;
    Json signals = Json::array();
    for (const auto& s : report.per_signal) {
        Json entry;
        entry["signal"] = s.signal + 1;
        entry["contribution"] = s.contribution;
        Json lab = Json::array();
        for (const auto& p : s.labels) lab.push_back({p.top + 1, p.second + 1});
        entry["labels"] = std::move(lab);
        signals.push_back(std::move(entry));
    }
    doc["per_signal"] = std::move(signals);
    return doc;
}

Json to_json(const ClusterPartition& partition) {
    Json clusters = Json::array();
    for (const auto& c : partition.clusters) {
        Json members = Json::array();
        for (auto j : c) members.push_back(j + 1);
        clusters.push_back(std::move(members));
    }
    Json doc;
    doc["clusters"] = std::move(clusters);
    return doc;
}

Json to_json(const SimReport& report) {
    Json doc;
    doc["estimate"] = report.estimate;
    doc["stderr"] = report.standard_error;
    doc["samples"] = report.samples;
    doc["seed"] = report.seed;
    return doc;
}

Json to_json(const Graph& graph) {
    Json doc;
    doc["vertices"] = graph.vertices;
    Json edges = Json::array();
    for (const auto& [u, v] : graph.edges) edges.push_back({graph.vertices[u], graph.vertices[v]});
    doc["edges"] = std::move(edges);
    doc["x"] = graph.vertices[graph.x];
    doc["y"] = graph.vertices[graph.y];
    return doc;
}

AnyInstance instance_from_json(const Json& doc, double tol) {
    const auto& type = field(doc, "type");
    if (!type.is_string()) throw ValidationError("field \"type\" must be \"known\" or \"bayes\"");
    const std::size_t n = count_field(doc, "n"), m = count_field(doc, "m");
    auto p = vector_field(doc, "p");
    if (p.size() != m) throw ValidationError("p has " + std::to_string(p.size()) + " entries, m = " + std::to_string(m));
    if (type == "known") {
        auto v = matrix_from(field(doc, "V"), "V");
        expect_dims(v, n, m, "V");
        return KnownInstance(std::move(p), std::move(v), tol);
    }
    if (type == "bayes") {
        const std::size_t k = count_field(doc, "k");
        auto q = vector_field(doc, "q");
        if (q.size() != k) throw ValidationError("q has " + std::to_string(q.size()) + " entries, k = " + std::to_string(k));
        const auto& vs = field(doc, "Vs");
        if (!vs.is_array() || vs.size() != k) throw ValidationError("\"Vs\" must hold k valuation matrices");
        std::vector<Matrix> values;
        for (std::size_t l = 0; l < k; ++l) {
            auto name = "Vs[" + std::to_string(l + 1) + "]";
            values.push_back(matrix_from(vs[l], name));
            expect_dims(values.back(), n, m, name);
        }
        return BayesInstance(std::move(p), std::move(q), std::move(values), tol);
    }
    throw ValidationError("unknown instance type " + type.dump());
}

SignalingScheme scheme_from_json(const Json& doc) {
    if (doc.is_object() && doc.contains("scheme") && !doc.contains("phi")) return scheme_from_json(doc.at("scheme"));
    auto phi = matrix_from(field(doc, "phi"), "phi");
    if (doc.contains("s") && count_field(doc, "s") != phi.rows()) {
        throw ValidationError("scheme declares s = " + std::to_string(count_field(doc, "s")) + " but phi has " +
                              std::to_string(phi.rows()) + " rows");
    }
    return SignalingScheme(std::move(phi));
}

ClusterPartition partition_from_json(const Json& doc) {
    const auto& clusters = field(doc, "clusters");
    if (!clusters.is_array()) throw ValidationError("\"clusters\" must be an array");
    ClusterPartition out;
    for (const auto& c : clusters) {
        if (!c.is_array()) throw ValidationError("each cluster must be an array of good indices");
        auto& members = out.clusters.emplace_back();
        for (const auto& j : c) {
            if (!j.is_number_integer() || j.get<long long>() < 1)
                throw ValidationError("good indices in clusters are 1-based positive integers");
            members.push_back(j.get<std::size_t>() - 1);
        }
    }
    return out;
}

Graph graph_from_json(const Json& doc) {
    try {
        auto vertices = field(doc, "vertices").get<std::vector<std::string>>();
        std::vector<std::pair<std::string, std::string>> edges;
        for (const auto& e : field(doc, "edges")) {
            if (!e.is_array() || e.size() != 2) throw ValidationError("each edge must be a pair of vertex names");
            edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
        return Graph::from_names(std::move(vertices), edges, field(doc, "x").get<std::string>(),
                                 field(doc, "y").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("graph: ") + e.what());
    }
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& doc) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

}  // namespace rms::io
