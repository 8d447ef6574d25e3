#pragma once

// JSON (de)serialization: custom resource states, Choi operators, and error
// reports. Matrices are stored as separate row-major real and imaginary
// part tables.

#include "bqt/channels.hpp"
#include "bqt/simerr.hpp"

#include <json.hpp>

#include <fstream>

namespace bqt {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  json re = json::array(), im = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json rowr = json::array(), rowi = json::array();
    for (long c = 0; c < m.cols(); ++c) {
      rowr.push_back(m(r, c).real());
      rowi.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rowr));
    im.push_back(std::move(rowi));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

inline Matrix matrix_from_json(const json& j) {
  const auto& re = j.at("re");
  const long rows = static_cast<long>(re.size());
  if (rows == 0) throw std::invalid_argument("matrix json: empty");
  const long cols = static_cast<long>(re.at(0).size());
  Matrix m(rows, cols);
  bool has_im = j.contains("im");
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) {
      double imv = has_im ? j.at("im").at(r).at(c).get<double>() : 0.0;
      m(r, c) = cxd(re.at(r).at(c).get<double>(), imv);
    }
  return m;
}

inline json operator_to_json(const LabeledOperator& op) {
  json j = matrix_to_json(op.data);
  j["dims"] = op.dims;
  return j;
}

inline LabeledOperator operator_from_json(const json& j) {
  return LabeledOperator{matrix_from_json(j), j.at("dims").get<std::vector<int>>()};
}

/// Load a custom bipartite resource state; validates Hermiticity, positivity
/// and unit trace.
inline ResourceState resource_state_from_json(const json& j) {
  LabeledOperator op = operator_from_json(j);
  if (op.num_factors() != 2)
    throw std::invalid_argument("resource state json: dims must be [dA, dB]");
  if (!op.is_hermitian(1e-8))
    throw std::invalid_argument("resource state json: matrix is not Hermitian");
  return ResourceState::custom(std::move(op));
}

inline ResourceState load_resource_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  in >> j;
  return resource_state_from_json(j);
}

inline json choi_to_json(const ChoiOperator& choi) {
  json j = matrix_to_json(choi.op.data);
  j["input_dims"] = choi.input_dims;
  j["output_dims"] = choi.output_dims;
  return j;
}

inline ChoiOperator choi_from_json(const json& j) {
  std::vector<int> in = j.at("input_dims").get<std::vector<int>>();
  std::vector<int> out = j.at("output_dims").get<std::vector<int>>();
  std::vector<int> fac = in;
  fac.insert(fac.end(), out.begin(), out.end());
  return ChoiOperator{LabeledOperator{matrix_from_json(j), fac}, std::move(in), std::move(out)};
}

inline json error_report_to_json(const ErrorReport& rep) {
  json j;
  j["value"] = rep.value;
  j["method"] = to_string(rep.method);
  j["gap"] = rep.gap;
  j["status"] = sdp::to_string(rep.status);
  j["resource"] = rep.resource;
  j["target"] = rep.target;
  j["iterations"] = rep.iterations;
  json cert;
  for (const auto& [name, op] : rep.certificate) cert[name] = operator_to_json(op);
  j["certificate"] = std::move(cert);
  return j;
}

}  // namespace bqt
