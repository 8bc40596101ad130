#include "fieldforms/modelfile.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fieldforms {

namespace {

using nlohmann::json;

Expr parse_field(const json& j, const char* what) {
  if (!j.is_string()) throw Error(std::string("schema: ") + what + " must be a string");
  return Expr::parse(j.get<std::string>());
}

Rat rat_field(const json& j) {
  if (j.is_number_integer()) return Rat(j.get<long>());
  if (j.is_string()) return rat_from_string(j.get<std::string>());
  throw Error("schema: rationals are integers or strings like \"1/2\"");
}

std::vector<int> parse_tuple(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

}  // namespace

ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error("model file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("schema") || j["schema"] != 1)
    throw Error("schema: expected a JSON object with \"schema\": 1");

  ModelFile f;
  if (j.contains("kind")) f.kind = model_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("n")) f.n = j["n"].get<int>();
  if (j.contains("k")) f.k = j["k"].get<int>();
  if (j.contains("seed")) f.seed = j["seed"].get<uint64_t>();
  if (j.contains("slot")) f.slot = j["slot"].get<int>();
  if (j.contains("equations")) f.equations = j["equations"].get<std::string>();
  if (j.contains("tolerance")) f.tolerance = j["tolerance"].get<double>();
  if (j.contains("lagrangian")) f.lagrangian = parse_field(j["lagrangian"], "lagrangian");
  if (j.contains("lagrangian_lifted"))
    f.lagrangian_lifted = parse_field(j["lagrangian_lifted"], "lagrangian_lifted");
  if (j.contains("hamiltonian"))
    f.hamiltonian = parse_field(j["hamiltonian"], "hamiltonian");
  if (j.contains("tau")) {
    f.tau = rat_field(j["tau"]);
    f.has_tau = true;
  }
  if (j.contains("alpha"))
    for (const auto& e : j["alpha"]) f.alpha.push_back(parse_field(e, "alpha entry"));
  if (j.contains("metric"))
    for (const auto& row : j["metric"]) {
      std::vector<Rat> r;
      for (const auto& e : row) r.push_back(rat_field(e));
      f.metric.push_back(std::move(r));
    }
  if (j.contains("s_functions"))
    for (const auto& e : j["s_functions"])
      f.s_functions.push_back(parse_field(e, "s_function"));
  if (j.contains("u_section"))
    for (const auto& row : j["u_section"]) {
      ExprVec r;
      for (const auto& e : row) r.push_back(parse_field(e, "u_section entry"));
      f.u_section.push_back(std::move(r));
    }
  if (j.contains("contravolume"))
    for (const auto& row : j["contravolume"]) {
      ExprVec r;
      for (const auto& e : row) r.push_back(parse_field(e, "contravolume entry"));
      f.contravolume.push_back(std::move(r));
    }
  if (j.contains("observables"))
    for (const auto& o : j["observables"]) {
      ObservableSpec spec;
      spec.rank = o.at("rank").get<int>();
      for (const auto& [key, value] : o.at("components").items())
        spec.components.emplace(parse_tuple(key), parse_field(value, "component"));
      f.observables.push_back(std::move(spec));
    }
  if (j.contains("candidates"))
    for (const auto& [name, value] : j["candidates"].items())
      f.candidates.emplace(name, parse_field(value, "candidate"));
  if (j.contains("grid"))
    for (const auto& [name, spec] : j["grid"].items()) {
      if (!spec.is_array() || spec.size() != 3)
        throw Error("schema: grid axes are [lo, hi, points]");
      GridAxis ax;
      ax.coordinate = sym(name);
      ax.lo = spec[0].get<double>();
      ax.hi = spec[1].get<double>();
      ax.points = spec[2].get<int>();
      f.grid.axes.push_back(ax);
    }
  return f;
}

Expr lifted_lagrangian(const ModelFile& f, const BundleModel& adapted,
                       const BundleModel& jet) {
  if (f.lagrangian_lifted) return *f.lagrangian_lifted;
  if (!f.lagrangian) throw Error("schema: a lagrangian is required");
  return rho_projection(adapted, jet).pull_expr(*f.lagrangian);
}

}  // namespace fieldforms
