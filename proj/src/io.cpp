#include "entlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace entlab {

Json operator_to_json(const LabeledOperator& op) {
  Json j;
  j["labels"] = op.layout().labels();
  j["dims"] = op.layout().dims();
  Json re = Json::array(), im = Json::array();
  const Mat& m = op.mat();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rr = Json::array(), ri = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      rr.push_back(m(i, k).real());
      ri.push_back(m(i, k).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw ContractViolation("operator file: field '" + field + "' " + why);
}

Eigen::MatrixXd read_part(const Json& j, const char* field, int d) {
  if (!j.contains(field)) bad(field, "is missing");
  const Json& rows = j.at(field);
  if (!rows.is_array() || static_cast<int>(rows.size()) != d) bad(field, "must have " + std::to_string(d) + " rows");
  Eigen::MatrixXd out(d, d);
  for (int i = 0; i < d; ++i) {
    const Json& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      bad(field, "row " + std::to_string(i) + " must have " + std::to_string(d) + " entries");
    for (int k = 0; k < d; ++k) {
      if (!row[k].is_number()) bad(field, "entry (" + std::to_string(i) + "," + std::to_string(k) + ") is not a number");
      out(i, k) = row[k].get<double>();
    }
  }
  return out;
}

}  // namespace

LabeledOperator operator_from_json(const Json& j, bool require_hermitian) {
  if (!j.is_object()) throw ContractViolation("operator file: top level must be an object");
  if (!j.contains("labels") || !j["labels"].is_array()) bad("labels", "must be an array of strings");
  if (!j.contains("dims") || !j["dims"].is_array()) bad("dims", "must be an array of positive integers");
  LabelSet labels;
  for (const auto& l : j["labels"]) {
    if (!l.is_string()) bad("labels", "must contain only strings");
    labels.push_back(l.get<std::string>());
  }
  std::vector<int> dims;
  for (const auto& d : j["dims"]) {
    if (!d.is_number_integer() || d.get<int>() < 1) bad("dims", "must contain only positive integers");
    dims.push_back(d.get<int>());
  }
  SystemLayout layout;
  try {
    layout = SystemLayout(labels, dims);
  } catch (const LayoutError& e) {
    throw ContractViolation(std::string("operator file: field 'labels'/'dims' invalid: ") + e.what());
  }
  const int d = layout.total_dim();
  const Eigen::MatrixXd re = read_part(j, "re", d);
  const Eigen::MatrixXd im = read_part(j, "im", d);
  Mat m(d, d);
  m.real() = re;
  m.imag() = im;
  LabeledOperator op(layout, m);
  if (require_hermitian && !op.hermitian(1e-10)) bad("re/im", "does not describe a Hermitian matrix");
  return op;
}

LabeledOperator read_operator(const std::string& path, bool require_hermitian) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open operator file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ContractViolation("operator file '" + path + "' is not valid JSON: " + e.what());
  }
  return operator_from_json(j, require_hermitian);
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

std::string digest_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) h = (h ^ c) * 0x100000001b3ULL;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace entlab
