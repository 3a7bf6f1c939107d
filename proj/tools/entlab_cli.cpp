// entlab: state generation, quantity evaluation, inequality checks and sweeps.
// Exit codes: 0 pass, 1 strict violation, 2 usage/input error, 3 incomplete.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "entlab/entmeasures.hpp"
#include "entlab/entropy.hpp"
#include "entlab/inequalities.hpp"
#include "entlab/io.hpp"
#include "entlab/linop.hpp"
#include "entlab/random.hpp"
#include "entlab/recovery.hpp"

using namespace entlab;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kPass = 0, kStrict = 1, kUsage = 2, kIncomplete = 3 };

struct Options {
  std::string check, kind = "ginibre", quantity, format = "json", out, config;
  std::string state, sigma, input, dims_text, first, cls = "ALL";
  std::string a, b, c, abar, bbar;
  int trials = 10, restarts = 0, quad_n = 201;
  std::uint64_t seed = 0, trial = 0;
  double tol_strict = 1e-7, tol_heur = 1e-3;
};

// ---- parsing helpers -------------------------------------------------------------

LabelSet split_labels(const std::string& text) {
  LabelSet out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Comma-separated check ids; commas inside parentheses belong to the id.
std::vector<std::string> split_ids(const std::string& text) {
  std::vector<std::string> out(1);
  int depth = 0;
  for (char ch : text) {
    depth += ch == '(' ? 1 : ch == ')' ? -1 : 0;
    if (ch == ',' && depth == 0)
      out.emplace_back();
    else
      out.back() += ch;
  }
  std::erase(out, std::string());
  return out;
}

std::map<std::string, int> parse_dims(const std::string& text) {
  std::map<std::string, int> out;
  for (const auto& item : split_labels(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ParameterError("--dims: expected LABEL=DIM, got '" + item + "'");
    int d = 0;
    try {
      d = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParameterError("--dims: dimension of '" + item.substr(0, eq) + "' is not an integer");
    }
    if (d < 1) throw ParameterError("--dims: dimensions must be positive");
    out[item.substr(0, eq)] = d;
  }
  return out;
}

// Layout in the order given on the command line.
SystemLayout layout_from(const std::string& text) {
  LabelSet labels;
  std::vector<int> dims;
  for (const auto& item : split_labels(text)) {
    const auto m = parse_dims(item);
    labels.push_back(m.begin()->first);
    dims.push_back(m.begin()->second);
  }
  if (labels.empty()) throw ParameterError("--dims is required (e.g. A=2,B=2)");
  return {labels, dims};
}

Json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ContractViolation("cannot open '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ContractViolation("'" + path + "' is not valid JSON: " + e.what());
  }
}

// Config file keys mirror the long flags; flags given on the command line win.
void apply_config(const std::string& path, Options& o, const CLI::App& app) {
  const Json j = read_json_file(path);
  if (!j.is_object()) throw ContractViolation("config: top level must be an object");
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  auto num = [&](const Json& v, const std::string& key) {
    if (!v.is_number()) throw ContractViolation("config: field '" + key + "' must be a number");
    if (v.get<double>() <= 0 && key != "seed" && key != "trial")
      throw ContractViolation("config: field '" + key + "' must be positive");
    if (v.get<double>() < 0) throw ContractViolation("config: field '" + key + "' must be non-negative");
    return v;
  };
  auto str = [&](const Json& v, const std::string& key) {
    if (!v.is_string()) throw ContractViolation("config: field '" + key + "' must be a string");
    return v.get<std::string>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "check") { if (!given("--check")) o.check = str(v, key); }
    else if (key == "kind") { if (!given("--kind")) o.kind = str(v, key); }
    else if (key == "quantity") { if (!given("--quantity")) o.quantity = str(v, key); }
    else if (key == "format") { if (!given("--format")) o.format = str(v, key); }
    else if (key == "out") { if (!given("--out")) o.out = str(v, key); }
    else if (key == "dims") { if (!given("--dims")) o.dims_text = str(v, key); }
    else if (key == "first") { if (!given("--first")) o.first = str(v, key); }
    else if (key == "class") { if (!given("--class")) o.cls = str(v, key); }
    else if (key == "trials") { if (!given("--trials")) o.trials = num(v, key).get<int>(); }
    else if (key == "restarts") { if (!given("--restarts")) o.restarts = num(v, key).get<int>(); }
    else if (key == "quad_n") { if (!given("--quad-n")) o.quad_n = num(v, key).get<int>(); }
    else if (key == "seed") { if (!given("--seed")) o.seed = num(v, key).get<std::uint64_t>(); }
    else if (key == "trial") { if (!given("--trial")) o.trial = num(v, key).get<std::uint64_t>(); }
    else if (key == "tol_strict") { if (!given("--tol-strict")) o.tol_strict = num(v, key).get<double>(); }
    else if (key == "tol_heur") { if (!given("--tol-heur")) o.tol_heur = num(v, key).get<double>(); }
    else throw ContractViolation("config: unknown key '" + key + "'");
  }
}

void validate(const Options& o) {
  if (o.trials < 1) throw ParameterError("--trials must be positive");
  if (o.restarts < 0) throw ParameterError("--restarts must be positive");
  if (o.quad_n < 3 || o.quad_n % 2 == 0) throw ParameterError("--quad-n must be odd and at least 3");
  if (!(o.tol_strict > 0) || !(o.tol_heur > 0)) throw ParameterError("tolerances must be positive");
  if (o.format != "json" && o.format != "csv") throw ParameterError("--format must be json or csv");
}

CheckConfig check_config(const Options& o) {
  CheckConfig cfg;
  cfg.seed = o.seed;
  cfg.quad_n = o.quad_n;
  cfg.tol_strict = o.tol_strict;
  cfg.tol_heur = o.tol_heur;
  cfg.sampler = o.kind;
  if (!o.dims_text.empty()) cfg.dims = parse_dims(o.dims_text);
  if (o.restarts > 0) {
    cfg.ent.restarts = o.restarts;
    cfg.ent.inner.restarts = o.restarts;
    cfg.meas.restarts = o.restarts;
  }
  return cfg;
}

Json config_json(const std::string& command, const Options& o) {
  Json c;
  c["command"] = command;
  c["check"] = o.check;
  c["kind"] = o.kind;
  c["quantity"] = o.quantity;
  c["dims"] = o.dims_text;
  c["seed"] = o.seed;
  c["trial"] = o.trial;
  c["trials"] = o.trials;
  c["restarts"] = o.restarts;
  c["quad_n"] = o.quad_n;
  c["tol_strict"] = o.tol_strict;
  c["tol_heur"] = o.tol_heur;
  c["format"] = o.format;
  c["state"] = o.state;
  c["sigma"] = o.sigma;
  c["input"] = o.input;
  return c;
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Digest over the report without its timestamp; both are put in the header.
Json with_header(const std::string& command, const Options& o, Json body) {
  Json r;
  r["header"] = {{"tool", "entlab"}, {"version", kVersion}, {"config", config_json(command, o)}};
  for (auto& [k, v] : body.items()) r[k] = v;
  const std::string digest = digest_hex(r.dump());
  r["header"]["digest"] = digest;
  r["header"]["timestamp"] = timestamp();
  return r;
}

void emit(const Options& o, const Json& report) {
  const std::string text = report.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw std::runtime_error("cannot write '" + o.out + "'");
  f << text;
  std::cout << "digest " << report["header"]["digest"].get<std::string>() << "\n";
}

void emit_text(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw std::runtime_error("cannot write '" + o.out + "'");
  f << text;
  std::cout << "digest " << digest_hex(text) << "\n";
}

// ---- commands ------------------------------------------------------------------------

Json check_input_json(const CheckInput& in) {
  Json j = Json::object();
  if (in.state) j["state"] = operator_to_json(*in.state);
  if (in.second) j["second"] = operator_to_json(*in.second);
  if (!in.hermitians.empty()) {
    j["hermitians"] = Json::array();
    for (const Mat& h : in.hermitians)
      j["hermitians"].push_back(operator_to_json(LabeledOperator(SystemLayout({"H"}, {int(h.rows())}), h)));
  }
  if (in.pmf) j["pmf"] = {{"nx", in.pmf->nx}, {"ny", in.pmf->ny}, {"nz", in.pmf->nz}, {"p", in.pmf->p}};
  return j;
}

CheckInput check_input_from(const Json& j) {
  CheckInput in;
  if (!j.is_object()) throw ContractViolation("input file: top level must be an object");
  if (j.contains("labels")) {
    in.state = operator_from_json(j);
    return in;
  }
  for (const auto& [k, v] : j.items())
    if (k != "state" && k != "second" && k != "hermitians" && k != "pmf")
      throw ContractViolation("input file: unknown field '" + k + "'");
  if (j.contains("state")) in.state = operator_from_json(j["state"]);
  if (j.contains("second")) in.second = operator_from_json(j["second"]);
  if (j.contains("hermitians")) {
    if (!j["hermitians"].is_array()) throw ContractViolation("input file: field 'hermitians' must be an array");
    for (const auto& h : j["hermitians"]) in.hermitians.push_back(operator_from_json(h).mat());
  }
  if (j.contains("pmf")) {
    const Json& p = j["pmf"];
    Pmf3 pmf;
    try {
      pmf.nx = p.at("nx").get<int>();
      pmf.ny = p.at("ny").get<int>();
      pmf.nz = p.at("nz").get<int>();
      pmf.p = p.at("p").get<std::vector<double>>();
    } catch (const Json::exception&) {
      throw ContractViolation("input file: field 'pmf' needs integers nx, ny, nz and an array p");
    }
    if (pmf.nx < 1 || pmf.ny < 1 || pmf.nz < 1 || static_cast<int>(pmf.p.size()) != pmf.nx * pmf.ny * pmf.nz)
      throw ContractViolation("input file: field 'pmf.p' must have nx*ny*nz entries");
    in.pmf = pmf;
  }
  return in;
}

int cmd_gen(const Options& o) {
  if (!o.check.empty()) {
    const CheckConfig cfg = check_config(o);
    emit(o, with_header("gen", o, {{"check", o.check}, {"trial", o.trial},
                                   {"input", check_input_json(sample_input(o.check, cfg, o.trial))}}));
    return kPass;
  }
  const SystemLayout layout = layout_from(o.dims_text);
  Rng rng(o.seed, tag_of("gen"));
  LabeledOperator op;
  if (o.kind == "ginibre") op = ginibre_state(layout, rng).op();
  else if (o.kind == "pure") op = haar_pure(layout, rng).op();
  else if (o.kind == "separable") {
    std::vector<LabelSet> groups;
    for (const auto& l : layout.labels()) groups.push_back({l});
    op = separable_mixture(layout, groups, 2 * layout.total_dim(), rng).assemble();
  } else if (o.kind == "ppt") op = ppt_state(layout, {layout.labels().back()}, rng).op();
  else if (o.kind == "ghz" || o.kind == "bell") {
    const int d = layout.dims().front();
    for (int x : layout.dims())
      if (x != d) throw ParameterError("gen " + o.kind + ": all dimensions must be equal");
    CVec v = CVec::Zero(layout.total_dim());
    int stride = 0;
    for (std::size_t k = 0; k < layout.size(); ++k) stride = stride * d + 1;
    for (int k = 0; k < d; ++k) v(k * stride) = 1.0 / std::sqrt(static_cast<double>(d));
    op = LabeledOperator(layout, v * v.adjoint());
  } else
    throw ParameterError("unknown --kind '" + o.kind + "' (ginibre|pure|separable|ppt|ghz|bell)");
  const std::string text = operator_to_json(op).dump(2) + "\n";
  emit_text(o, text);
  return kPass;
}

LabeledOperator load(const std::string& path, const char* what) {
  if (path.empty()) throw ParameterError(std::string("--") + what + " is required");
  return operator_from_json(read_json_file(path));
}

int cmd_eval(const Options& o) {
  const CheckConfig cfg = check_config(o);
  const LabeledOperator rho = load(o.state, "state");
  const std::string& q = o.quantity;
  const LabelSet first = split_labels(o.first.empty() ? rho.layout().labels().front() : o.first);
  const LabelSet rest = rho.layout().complement(first);
  Json body;
  body["quantity"] = q;
  double value = 0.0;
  Direction dir = Direction::Exact;
  bool incomplete = false;
  auto sigma = [&] { return reorder(load(o.sigma, "sigma"), rho.layout().labels()); };
  auto measured = [&](const MeasuredValue& m) {
    value = m.value;
    dir = m.direction;
    incomplete = m.incomplete && !std::isfinite(m.value);
    body["converged"] = m.converged;
    if (m.omega.size() && m.omega.rows() <= 16) body["witness"] = operator_to_json(LabeledOperator(rho.layout(), m.omega));
  };
  auto ent = [&](const EntMeasureValue& e) {
    value = e.value;
    dir = e.direction;
    body["converged"] = e.converged;
    body["witness"] = operator_to_json(e.sigma);
  };
  if (q == "H") value = vn_entropy(rho, o.a.empty() ? rho.layout().labels() : split_labels(o.a));
  else if (q == "D") {
    const DivergenceValue d = umegaki(rho, sigma());
    value = d.value;
  } else if (q == "F") value = fidelity(rho.mat(), sigma().mat());
  else if (q == "D_ALL") measured(d_all(rho, sigma()));
  else if (q == "D_LOCC1") measured(d_locc1(rho, sigma(), first, cfg.meas));
  else if (q == "D_LO") measured(d_lo(rho, sigma(), first, cfg.meas));
  else if (q == "D_SEPP") measured(cone_bound(rho, sigma(), MeasClass::SEPP, {first, rest}, cfg.ent.cone));
  else if (q == "D_PPT") measured(cone_bound_ppt(rho, sigma(), {rest}, cfg.ent.cone));
  else if (q == "PT_MIN") value = min_eigenvalue(hermitian_part(partial_transpose(rho, rest).mat()));
  else if (q == "CQMI") value = cqmi(rho, split_labels(o.a), split_labels(o.b), split_labels(o.c));
  else if (q == "CEMI")
    value = cemi_term(rho, split_labels(o.a), split_labels(o.abar), split_labels(o.b), split_labels(o.bbar));
  else if (q == "E") ent(ree(rho, {first, rest}, cfg.ent));
  else if (q == "E_M") ent(ree_measured(rho, first, meas_class_from_string(o.cls), cfg.ent));
  else if (q == "P") ent(ppt_ree(rho, {rest}, cfg.ent));
  else if (q == "P_M") ent(ppt_ree_measured(rho, {rest}, cfg.ent));
  else if (q == "recovery") {
    // R: C → BC anchored at ρ_BC applied to ρ_AC; value −∫log F(ρ, R_t(ρ_AC)).
    const LabelSet a = split_labels(o.a), b = split_labels(o.b), c = split_labels(o.c);
    LabelSet bc = b, ac = a;
    bc.insert(bc.end(), c.begin(), c.end());
    ac.insert(ac.end(), c.begin(), c.end());
    const RecoveryPlan plan{PetzFamily(marginal(rho, bc), c)};
    const QuadratureRule rule = beta0_rule(cfg.quad_n);
    value = fidelity_bound(rule, node_fidelities(plan, rule, marginal(rho, ac), rho));
    body["witness"] = operator_to_json(reorder(averaged_recover(plan, rule, marginal(rho, ac)), rho.layout().labels()));
  } else
    throw ParameterError("unknown --quantity '" + q +
                         "' (H|D|F|D_ALL|D_LOCC1|D_LO|D_SEPP|D_PPT|PT_MIN|CQMI|CEMI|E|E_M|P|P_M|recovery)");
  body["value"] = value;
  body["direction"] = to_string(dir);
  body["incomplete"] = incomplete;
  emit(o, with_header("eval", o, body));
  return incomplete ? kIncomplete : kPass;
}

int exit_for(const std::vector<GapReport>& reports) {
  bool strict = false, incomplete = false;
  for (const auto& r : reports) {
    strict = strict || r.strict_violation();
    incomplete = incomplete || r.incomplete;
  }
  return strict ? kStrict : incomplete ? kIncomplete : kPass;
}

int cmd_check(const Options& o) {
  if (o.check.empty()) throw ParameterError("--check is required");
  const CheckConfig cfg = check_config(o);
  find_check(o.check);
  GapReport r;
  if (!o.input.empty() || !o.state.empty()) {
    CheckInput in;
    if (!o.input.empty()) {
      Json j = read_json_file(o.input);
      if (j.is_object() && j.contains("input")) j = j["input"];
      in = check_input_from(j);
    } else {
      in.state = load(o.state, "state");
      if (!o.sigma.empty()) in.second = load(o.sigma, "sigma");
    }
    r = run_check(o.check, in, cfg, o.trial);
  } else {
    r = run_trial(o.check, cfg, o.trial);
  }
  emit(o, with_header("check", o, {{"report", to_json(r)}}));
  std::cerr << o.check << ": " << r.verdict() << " (gap " << r.gap << ")\n";
  return exit_for({r});
}

int cmd_sweep(const Options& o) {
  if (o.check.empty()) throw ParameterError("--check is required (an id or 'all')");
  const CheckConfig cfg = check_config(o);
  std::vector<std::string> ids;
  if (o.check == "all")
    for (const auto& c : list_checks()) ids.push_back(c.id);
  else
    for (const auto& id : split_ids(o.check)) ids.push_back(find_check(id).id);
  std::vector<SweepSummary> rows;
  std::vector<GapReport> all;
  Json reports = Json::array();
  for (const auto& id : ids) {
    const SweepResult s = run_sweep(id, cfg, o.trials);
    rows.push_back(s.summary);
    for (const auto& r : s.reports) {
      all.push_back(r);
      reports.push_back(to_json(r));
    }
    std::cerr << id << ": min_gap " << s.summary.min_gap << ", violations " << s.summary.violations
              << ", strict " << s.summary.strict_violations << "\n";
  }
  if (o.format == "csv") {
    emit_text(o, summary_csv(rows));
  } else {
    Json summaries = Json::array();
    for (const auto& s : rows) summaries.push_back(to_json(s));
    emit(o, with_header("sweep", o, {{"summaries", summaries}, {"reports", reports}}));
  }
  return exit_for(all);
}

int cmd_list(const Options& o) {
  Json arr = Json::array();
  for (const auto& c : list_checks())
    arr.push_back({{"id", c.id}, {"quote", c.quote}, {"statement", c.statement},
                   {"soundness", to_string(c.soundness)}, {"identity", c.identity}, {"note", c.note}});
  if (o.format == "csv") {
    std::ostringstream os;
    os << "id,soundness\n";
    for (const auto& c : list_checks()) os << '"' << c.id << "\",\"" << to_string(c.soundness) << "\"\n";
    emit_text(o, os.str());
  } else {
    emit_text(o, arr.dump(2) + "\n");
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entlab: entanglement and recoverability inequality checks"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* s) {
    s->add_option("--check", o.check, "check id (see 'list'); 'all' for sweep");
    s->add_option("--seed", o.seed, "seed");
    s->add_option("--dims", o.dims_text, "dimensions, e.g. A=2,B=2,C=2");
    s->add_option("--restarts", o.restarts, "solver restarts")->check(CLI::PositiveNumber);
    s->add_option("--quad-n", o.quad_n, "beta0 quadrature nodes (odd)");
    s->add_option("--tol-strict", o.tol_strict, "strict tolerance");
    s->add_option("--tol-heur", o.tol_heur, "heuristic tolerance");
    s->add_option("--out", o.out, "output path (stdout when omitted)");
    s->add_option("--format", o.format, "json|csv");
    s->add_option("--config", o.config, "JSON config mirroring the flags");
    s->add_option("--kind", o.kind, "sampler: ginibre|pure|separable|ppt (gen also: ghz|bell)");
  };
  auto* gen = app.add_subcommand("gen", "write a sampled state (or a check input with --check)");
  common(gen);
  gen->add_option("--trial", o.trial, "trial index for --check inputs");
  auto* eval = app.add_subcommand("eval", "evaluate one quantity on state files");
  common(eval);
  eval->add_option("--quantity", o.quantity, "quantity id")->required();
  eval->add_option("--state", o.state, "state file");
  eval->add_option("--sigma", o.sigma, "second state file");
  eval->add_option("--first", o.first, "first party labels (comma separated)");
  eval->add_option("--class", o.cls, "measurement class for E_M: ALL|LO|LOCC1|SEPP|PPT");
  eval->add_option("--a", o.a, "labels of A");
  eval->add_option("--b", o.b, "labels of B");
  eval->add_option("--c", o.c, "labels of C");
  eval->add_option("--abar", o.abar, "labels of Abar");
  eval->add_option("--bbar", o.bbar, "labels of Bbar");
  auto* check = app.add_subcommand("check", "run one check on a sampled trial or on files");
  common(check);
  check->add_option("--trial", o.trial, "trial index");
  check->add_option("--input", o.input, "check input file (as written by gen --check)");
  check->add_option("--state", o.state, "state file");
  check->add_option("--sigma", o.sigma, "second state file");
  auto* sweep = app.add_subcommand("sweep", "run a seeded sweep and summarize gaps");
  common(sweep);
  sweep->add_option("--trials", o.trials, "number of trials");
  auto* list = app.add_subcommand("list", "list registered checks");
  list->add_option("--format", o.format, "json|csv");
  list->add_option("--out", o.out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!o.config.empty()) apply_config(o.config, o, *sub);
    validate(o);
    if (sub == gen) return cmd_gen(o);
    if (sub == eval) return cmd_eval(o);
    if (sub == check) return cmd_check(o);
    if (sub == sweep) return cmd_sweep(o);
    return cmd_list(o);
  } catch (const LayoutError& e) {
    std::cerr << "layout error: " << e.what() << "\n";
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
  } catch (const ContractViolation& e) {
    std::cerr << "input error: " << e.what() << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIncomplete;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kUsage;
}
