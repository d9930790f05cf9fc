#include "fisherlab/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fisherlab {
namespace io {

using nlohmann::json;

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

namespace {

void expect_keys(const json &obj, const std::vector<std::string> &allowed,
                 const std::string &where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const auto &k : allowed) {
            known = known || (it.key() == k);
        }
        if (!known) {
            throw ConfigError("unknown field \"" + it.key() + "\" in " + where);
        }
    }
}

const json &require(const json &obj, const std::string &key, const std::string &where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError("missing field \"" + key + "\" in " + where);
    }
    return *it;
}

int require_int(const json &obj, const std::string &key, const std::string &where) {
    const json &v = require(obj, key, where);
    if (!v.is_number_integer()) {
        throw ConfigError("field \"" + key + "\" in " + where + " must be an integer");
    }
    return v.get<int>();
}

std::vector<int> require_int_list(const json &obj, const std::string &key,
                                  const std::string &where) {
    const json &v = require(obj, key, where);
    if (!v.is_array()) {
        throw ConfigError("field \"" + key + "\" in " + where + " must be an array");
    }
    std::vector<int> out;
    for (const auto &e : v) {
        if (!e.is_number_integer()) {
            throw ConfigError("field \"" + key + "\" in " + where + " must hold integers");
        }
        out.push_back(e.get<int>());
    }
    return out;
}

Eigen::MatrixXcd parse_complex_matrix(const json &entries, const std::string &where) {
    if (!entries.is_array() || entries.empty()) {
        throw ConfigError("\"matrix\" in " + where + " must be a non-empty array of [re, im]");
    }
    const std::size_t total = entries.size();
    std::size_t dim = 1;
    while (dim * dim < total) {
        ++dim;
    }
    if (dim * dim != total) {
        throw ConfigError("\"matrix\" in " + where + " must hold a square matrix, row-major");
    }
    Eigen::MatrixXcd m(dim, dim);
    for (std::size_t k = 0; k < total; ++k) {
        const json &pair = entries[k];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
            throw ConfigError("\"matrix\" entries in " + where + " must be [re, im] pairs");
        }
        m(static_cast<Eigen::Index>(k / dim), static_cast<Eigen::Index>(k % dim)) =
            Complex(pair[0].get<double>(), pair[1].get<double>());
    }
    return m;
}

Gate parse_gate(const json &g, std::size_t index) {
    std::ostringstream where;
    where << "gates[" << index << "]";
    if (!g.is_object()) {
        throw ConfigError(where.str() + " must be an object");
    }
    const std::string type = require(g, "type", where.str()).get<std::string>();

    if (type == "rx" || type == "ry" || type == "rz") {
        expect_keys(g, {"type", "target", "param"}, where.str());
        const int target = require_int(g, "target", where.str());
        const int param = require_int(g, "param", where.str());
        if (type == "rx") {
            return gates::rx(target, param);
        }
        if (type == "ry") {
            return gates::ry(target, param);
        }
        return gates::rz(target, param);
    }
    if (type == "cnot") {
        expect_keys(g, {"type", "control", "target"}, where.str());
        return gates::cnot(require_int(g, "control", where.str()),
                           require_int(g, "target", where.str()));
    }
    if (type == "h") {
        expect_keys(g, {"type", "target"}, where.str());
        return gates::hadamard(require_int(g, "target", where.str()));
    }
    if (type == "rot") {
        expect_keys(g, {"type", "targets", "pauli", "param"}, where.str());
        return gates::pauli_rotation(require(g, "pauli", where.str()).get<std::string>(),
                                     require_int_list(g, "targets", where.str()),
                                     require_int(g, "param", where.str()));
    }
    if (type == "fixed") {
        expect_keys(g, {"type", "targets", "matrix"}, where.str());
        Eigen::MatrixXcd m = parse_complex_matrix(require(g, "matrix", where.str()), where.str());
        return gates::fixed(m, require_int_list(g, "targets", where.str()));
    }
    throw ConfigError("unknown gate type \"" + type + "\" in " + where.str());
}

} // namespace

ParamCircuit circuit_from_json(const std::string &text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed circuit JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("circuit JSON must be an object");
    }
    expect_keys(root, {"qubits", "params", "gates", "layers"}, "circuit");

    const int n_qubits = require_int(root, "qubits", "circuit");
    const int n_params = require_int(root, "params", "circuit");
    const json &gate_array = require(root, "gates", "circuit");
    if (!gate_array.is_array()) {
        throw ConfigError("\"gates\" must be an array");
    }
    std::vector<Gate> gate_list;
    for (std::size_t i = 0; i < gate_array.size(); ++i) {
        try {
            gate_list.push_back(parse_gate(gate_array[i], i));
        } catch (const std::invalid_argument &e) {
            std::ostringstream msg;
            msg << "gates[" << i << "]: " << e.what();
            throw ConfigError(msg.str());
        }
    }

    std::optional<std::vector<std::vector<std::size_t>>> layers;
    if (root.contains("layers")) {
        const json &layer_array = root["layers"];
        if (!layer_array.is_array()) {
            throw ConfigError("\"layers\" must be an array of arrays");
        }
        layers.emplace();
        for (const auto &layer : layer_array) {
            if (!layer.is_array()) {
                throw ConfigError("\"layers\" must be an array of arrays");
            }
            std::vector<std::size_t> indices;
            for (const auto &e : layer) {
                if (!e.is_number_integer() || e.get<int>() < 0) {
                    throw ConfigError("layer entries must be nonnegative gate indices");
                }
                indices.push_back(e.get<std::size_t>());
            }
            layers->push_back(std::move(indices));
        }
    }

    try {
        return make_circuit(n_qubits, n_params, std::move(gate_list), std::move(layers));
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
}

ParamCircuit circuit_from_file(const std::string &path) {
    return circuit_from_json(read_file(path));
}

namespace {

void append_meta(std::ostringstream &out, const FisherMeta &meta) {
    out << "\"meta\":{";
    bool first = true;
    auto sep = [&]() {
        if (!first) {
            out << ",";
        }
        first = false;
    };
    if (meta.shots) {
        sep();
        out << "\"shots\":" << *meta.shots;
    }
    if (meta.seed) {
        sep();
        out << "\"seed\":" << *meta.seed;
    }
    if (meta.epsilon) {
        sep();
        out << "\"epsilon\":" << format_double(*meta.epsilon);
    }
    if (meta.n_samples) {
        sep();
        out << "\"samples\":" << *meta.n_samples;
    }
    if (meta.note) {
        sep();
        out << "\"note\":" << json(*meta.note).dump();
    }
    out << "}";
}

} // namespace

std::string fisher_to_json(const FisherMatrix &fisher) {
    std::ostringstream out;
    out << "{\"kind\":\"" << to_string(fisher.kind) << "\",";
    out << "\"method\":\"" << to_string(fisher.method) << "\",";
    out << "\"d\":" << fisher.d() << ",";
    out << "\"entries\":[";
    for (Eigen::Index i = 0; i < fisher.d(); ++i) {
        for (Eigen::Index j = 0; j < fisher.d(); ++j) {
            if (i != 0 || j != 0) {
                out << ",";
            }
            out << format_double(fisher.entries(i, j));
        }
    }
    out << "],";
    append_meta(out, fisher.meta);
    out << "}\n";
    return out.str();
}

FisherMatrix fisher_from_json(const std::string &text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("malformed matrix JSON: ") + e.what());
    }
    expect_keys(root, {"kind", "method", "d", "entries", "meta"}, "matrix");
    FisherMatrix out;
    const std::string kind = require(root, "kind", "matrix").get<std::string>();
    if (kind == "classical") {
        out.kind = FisherKind::Classical;
    } else if (kind == "quantum") {
        out.kind = FisherKind::Quantum;
    } else {
        throw ConfigError("matrix kind must be \"classical\" or \"quantum\"");
    }
    const std::string method = require(root, "method", "matrix").get<std::string>();
    bool found = false;
    for (FisherMethod m : {FisherMethod::Exact, FisherMethod::Sampled, FisherMethod::ParamShift,
                           FisherMethod::FiniteDiff, FisherMethod::Spsa, FisherMethod::MixedExact}) {
        if (to_string(m) == method) {
            out.method = m;
            found = true;
        }
    }
    if (!found) {
        throw ConfigError("unknown matrix method \"" + method + "\"");
    }
    const int d = require_int(root, "d", "matrix");
    const json &entries = require(root, "entries", "matrix");
    if (!entries.is_array() || entries.size() != static_cast<std::size_t>(d) * d) {
        throw ConfigError("\"entries\" must hold d*d numbers, row-major");
    }
    out.entries.resize(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const json &v = entries[static_cast<std::size_t>(i) * d + j];
            if (!v.is_number()) {
                throw ConfigError("\"entries\" must hold numbers");
            }
            out.entries(i, j) = v.get<double>();
        }
    }
    if (root.contains("meta") && root["meta"].is_object()) {
        const json &meta = root["meta"];
        if (meta.contains("shots")) {
            out.meta.shots = meta["shots"].get<std::int64_t>();
        }
        if (meta.contains("seed")) {
            out.meta.seed = meta["seed"].get<std::uint64_t>();
        }
        if (meta.contains("epsilon")) {
            out.meta.epsilon = meta["epsilon"].get<double>();
        }
        if (meta.contains("samples")) {
            out.meta.n_samples = meta["samples"].get<int>();
        }
        if (meta.contains("note")) {
            out.meta.note = meta["note"].get<std::string>();
        }
    }
    return out;
}

FisherMatrix fisher_from_file(const std::string &path) {
    return fisher_from_json(read_file(path));
}

std::string trace_to_jsonl(const OptTrace &trace) {
    std::ostringstream out;
    for (std::size_t t = 0; t < trace.records.size(); ++t) {
        const OptRecord &r = trace.records[t];
        out << "{\"iter\":" << t << ",\"theta\":[";
        for (Eigen::Index i = 0; i < r.theta.size(); ++i) {
            if (i != 0) {
                out << ",";
            }
            out << format_double(r.theta(i));
        }
        out << "],\"cost\":" << format_double(r.cost);
        out << ",\"gradNorm\":" << format_double(r.grad_norm);
        out << ",\"metricCond\":";
        if (r.metric_cond) {
            out << format_double(*r.metric_cond);
        } else {
            out << "null";
        }
        out << "}\n";
    }
    return out.str();
}

std::string trace_to_csv(const OptTrace &trace) {
    std::ostringstream out;
    const Eigen::Index d = trace.records.empty() ? 0 : trace.records.front().theta.size();
    out << "iter";
    for (Eigen::Index i = 0; i < d; ++i) {
        out << ",theta" << i;
    }
    out << ",cost,grad_norm,metric_cond\n";
    for (std::size_t t = 0; t < trace.records.size(); ++t) {
        const OptRecord &r = trace.records[t];
        out << t;
        for (Eigen::Index i = 0; i < d; ++i) {
            out << "," << format_double(r.theta(i));
        }
        out << "," << format_double(r.cost) << "," << format_double(r.grad_norm) << ",";
        if (r.metric_cond) {
            out << format_double(*r.metric_cond);
        }
        out << "\n";
    }
    return out.str();
}

std::string scaling_to_csv(const ScalingResult &result) {
    std::ostringstream out;
    out << "n,fisher\n";
    for (const auto &[n, f] : result.table) {
        out << n << "," << format_double(f) << "\n";
    }
    return out.str();
}

std::string estimates_to_csv(const EstimatorResult &result) {
    std::ostringstream out;
    out << "repeat,estimate\n";
    for (std::size_t r = 0; r < result.estimates.size(); ++r) {
        out << r << "," << format_double(result.estimates[r]) << "\n";
    }
    return out.str();
}

std::string spectrum_to_json(const Eigen::VectorXd &eigenvalues, int effective_dimension,
                             double rank_tol) {
    std::ostringstream out;
    out << "{\"eigenvalues\":[";
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (i != 0) {
            out << ",";
        }
        out << format_double(eigenvalues(i));
    }
    out << "],\"effectiveQuantumDimension\":" << effective_dimension;
    out << ",\"rankTol\":" << format_double(rank_tol) << "}\n";
    return out.str();
}

void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot open output file: " + path);
    }
    out << content;
    if (!out) {
        throw ConfigError("failed writing output file: " + path);
    }
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace io
} // namespace fisherlab
