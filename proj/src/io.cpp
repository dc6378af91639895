#include "spnbn/io.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "spnbn/error.hpp"

namespace spnbn {

using json = nlohmann::ordered_json;

std::string bn_to_json(const BayesNet& bn) {
  json doc;
  doc["variables"] = json::array();
  for (const Variable& v : bn.variables) {
    json var;
    var["name"] = v.name;
    var["cardinality"] = v.cardinality;
    if (v.kind == Variable::Kind::Latent) var["kind"] = "latent";
    doc["variables"].push_back(std::move(var));
  }
  doc["edges"] = json::array();
  for (const Edge& e : bn.dag.edges()) doc["edges"].push_back({e.first, e.second});
  doc["cpts"] = json::object();
  for (const Cpt& cpt : bn.cpts) {
    json entry;
    entry["parents"] = json::array();
    for (NodeId p : cpt.parents) entry["parents"].push_back(bn.variables[p].name);
    entry["table"] = cpt.table;
    doc["cpts"][bn.variables[cpt.child].name] = std::move(entry);
  }
  return doc.dump(2) + "\n";
}

BayesNet bn_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("bn json: parse failure: ") + e.what());
  }
  try {
    BayesNet bn;
    for (const json& var : doc.at("variables")) {
      Variable v;
      v.name = var.at("name").get<std::string>();
      v.cardinality = var.at("cardinality").get<int>();
      if (var.contains("kind") && var["kind"] == "latent") v.kind = Variable::Kind::Latent;
      bn.variables.push_back(std::move(v));
    }
    std::vector<Edge> edges;
    for (const json& e : doc.at("edges"))
      edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    bn.dag = Dag(bn.size(), edges);
    bn.cpts.resize(bn.size());
    for (NodeId v = 0; v < bn.size(); ++v) bn.cpts[v].child = v;
    for (const auto& [name, entry] : doc.at("cpts").items()) {
      NodeId child = bn.index_of(name);
      if (child < 0) throw Error("bn json: cpt for unknown variable '" + name + "'");
      Cpt& cpt = bn.cpts[child];
      for (const json& pname : entry.at("parents")) {
        NodeId p = bn.index_of(pname.get<std::string>());
        if (p < 0) throw Error("bn json: unknown parent '" + pname.get<std::string>() + "'");
        cpt.parents.push_back(p);
      }
      cpt.table = entry.at("table").get<std::vector<std::vector<double>>>();
    }
    bn.validate();
    return bn;
  } catch (const json::exception& e) {
    throw Error(std::string("bn json: malformed document: ") + e.what());
  }
}

std::string circuit_to_json(const Circuit& c) {
  json doc;
  doc["nodes"] = json::array();
  for (int ref = 0; ref < c.size(); ++ref) {
    const CircuitNode& n = c.node(ref);
    json node;
    node["id"] = ref;
    switch (n.kind) {
      case NodeKind::Sum:
        node["type"] = "sum";
        node["children"] = n.children;
        node["weights"] = n.weights;
        break;
      case NodeKind::Product:
        node["type"] = "product";
        node["children"] = n.children;
        break;
      case NodeKind::Indicator:
        node["type"] = "indicator";
        node["variable"] = n.var;
        node["value"] = n.state;
        break;
      case NodeKind::Param:
        node["type"] = "param";
        node["value"] = n.value;
        break;
      case NodeKind::Terminal:
        node["type"] = "terminal";
        node["variable"] = n.var;
        node["distribution"] = n.dist;
        break;
      case NodeKind::One:
        node["type"] = "one";
        break;
    }
    doc["nodes"].push_back(std::move(node));
  }
  doc["root"] = c.root();
  return doc.dump(2) + "\n";
}

Circuit circuit_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("spn json: parse failure: ") + e.what());
  }
  try {
    struct Raw {
      std::string type;
      std::vector<int> children;
      std::vector<double> weights;
      NodeId var = -1;
      int state = -1;
      double value = 0.0;
      std::vector<double> dist;
    };
    std::map<int, Raw> raw;
    for (const json& node : doc.at("nodes")) {
      Raw r;
      int id = node.at("id").get<int>();
      r.type = node.at("type").get<std::string>();
      if (node.contains("children")) r.children = node["children"].get<std::vector<int>>();
      if (node.contains("weights")) r.weights = node["weights"].get<std::vector<double>>();
      if (node.contains("variable")) r.var = node["variable"].get<int>();
      if (r.type == "indicator" && node.contains("value")) r.state = node["value"].get<int>();
      if (r.type == "param" && node.contains("value")) r.value = node["value"].get<double>();
      if (node.contains("distribution"))
        r.dist = node["distribution"].get<std::vector<double>>();
      if (!raw.emplace(id, std::move(r)).second)
        throw Error("spn json: duplicate node id " + std::to_string(id));
    }
    int root = doc.at("root").get<int>();
    if (!raw.count(root)) throw Error("spn json: root references a missing node");

    // children-first construction order
    std::vector<int> order;
    std::map<int, int> state;  // 0 new, 1 open, 2 done
    std::vector<int> stack = {root};
    while (!stack.empty()) {
      int id = stack.back();
      if (!raw.count(id)) throw Error("spn json: missing node id " + std::to_string(id));
      int& st = state[id];
      if (st == 2) {
        stack.pop_back();
        continue;
      }
      if (st == 1) {
        st = 2;
        order.push_back(id);
        stack.pop_back();
        continue;
      }
      st = 1;
      for (int child : raw[id].children) {
        if (state[child] == 1) throw Error("spn json: node cycle detected");
        if (state[child] == 0) stack.push_back(child);
      }
    }

    Circuit c;
    bool has_param = false;
    std::map<int, int> remap;
    for (int id : order) {
      const Raw& r = raw[id];
      std::vector<int> children;
      for (int child : r.children) children.push_back(remap.at(child));
      if (r.type == "sum") {
        remap[id] = c.add_sum(std::move(children), r.weights);
      } else if (r.type == "product") {
        remap[id] = c.add_product(std::move(children));
      } else if (r.type == "indicator") {
        remap[id] = c.add_indicator(r.var, r.state);
      } else if (r.type == "param") {
        remap[id] = c.add_param(r.value);
        has_param = true;
      } else if (r.type == "terminal") {
        remap[id] = c.add_terminal(r.var, r.dist);
      } else if (r.type == "one") {
        remap[id] = c.add_one();
      } else {
        throw Error("spn json: unknown node type '" + r.type + "'");
      }
      const Raw& rr = raw[id];
      NodeId var = rr.var;
      if (var >= 0) {
        int needed = rr.type == "terminal" ? static_cast<int>(rr.dist.size()) : rr.state + 1;
        if (var >= static_cast<int>(c.var_cards.size())) c.var_cards.resize(var + 1, 0);
        c.var_cards[var] = std::max(c.var_cards[var], needed);
      }
    }
    c.set_root(remap.at(root));
    c.stage = has_param ? Stage::Ac : Stage::Spn;
    return c;
  } catch (const json::exception& e) {
    throw Error(std::string("spn json: malformed document: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file '" + path + "'");
  out << content;
}

std::string model_file_to_dot(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model json: parse failure: ") + e.what());
  }
  if (doc.contains("cpts") || doc.contains("variables")) {
    BayesNet bn = bn_from_json(text);
    std::vector<std::string> names;
    for (const Variable& v : bn.variables) names.push_back(v.name);
    return dag_to_dot(bn.dag, names);
  }
  if (doc.contains("nodes")) return circuit_to_dot(circuit_from_json(text));
  throw Error("model json: neither a BN nor an SPN document");
}

}  // namespace spnbn
