#pragma once

#include "fisherlab/metrology.hpp"
#include "fisherlab/optimize.hpp"

#include <string>

namespace fisherlab {

/// Raised for malformed configuration input (bad JSON, unknown fields,
/// inconsistent flags). The CLI maps it to exit code 2, while computation
/// failures exit with 3.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

namespace io {

/// %.17g formatting: 17 significant digits, round-trip exact for doubles.
std::string format_double(double value);

/// Strict circuit schema: { "qubits", "params", "gates": [...], "layers"? }.
/// Gate forms: {"type":"rx|ry|rz","target",..,"param"}, {"type":"cnot",
/// "control","target"}, {"type":"h","target"}, {"type":"rot","targets",
/// "pauli","param"}, {"type":"fixed","targets","matrix":[[re,im],...]}.
/// Unknown fields or gate types are rejected.
ParamCircuit circuit_from_json(const std::string &text);
ParamCircuit circuit_from_file(const std::string &path);

std::string fisher_to_json(const FisherMatrix &fisher);
FisherMatrix fisher_from_json(const std::string &text);
FisherMatrix fisher_from_file(const std::string &path);

std::string trace_to_jsonl(const OptTrace &trace);
std::string trace_to_csv(const OptTrace &trace);

std::string scaling_to_csv(const ScalingResult &result);
std::string estimates_to_csv(const EstimatorResult &result);

std::string spectrum_to_json(const Eigen::VectorXd &eigenvalues, int effective_dimension,
                             double rank_tol);

void write_file(const std::string &path, const std::string &content);
std::string read_file(const std::string &path);

} // namespace io
} // namespace fisherlab
