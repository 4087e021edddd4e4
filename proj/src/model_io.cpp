#include "robustq/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace robustq {

using nlohmann::json;

namespace {

const json& field(const json& obj, const std::string& name, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(where + ": missing field \"" + name + "\"");
  return *it;
}

template <typename T>
T as(const json& value, const std::string& where) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

template <typename Atom>
Distribution<Atom> parse_distribution(const json& obj, const char* atom_field,
                                      const std::string& where) {
  Distribution<Atom> dist;
  dist.atoms = as<std::vector<Atom>>(field(obj, atom_field, where), where + "." + atom_field);
  dist.probs = as<std::vector<double>>(field(obj, "probs", where), where + ".probs");
  if (dist.atoms.size() != dist.probs.size()) {
    throw ParseError(where + ": \"" + atom_field + "\" and \"probs\" differ in length");
  }
  return canonicalize(dist);
}

template <typename Atom>
void parse_table(const json& root, const char* name, const char* atom_field,
                 const TabularRMDP& shape, std::vector<Distribution<Atom>>& out) {
  const json& table = field(root, name, "model");
  if (!table.is_array() || table.size() != shape.n_states) {
    throw ParseError(std::string(name) + ": expected n_states rows");
  }
  out.clear();
  for (std::size_t s = 0; s < shape.n_states; ++s) {
    const std::string row_where = std::string(name) + "[" + std::to_string(s) + "]";
    if (!table[s].is_array() || table[s].size() != shape.n_actions) {
      throw ParseError(row_where + ": expected n_actions entries");
    }
    for (std::size_t a = 0; a < shape.n_actions; ++a) {
      out.push_back(parse_distribution<Atom>(table[s][a], atom_field,
                                             row_where + "[" + std::to_string(a) + "]"));
    }
  }
}

}  // namespace

TabularRMDP parse_model(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("syntax error: ") + e.what());
  }
  TabularRMDP model;
  model.n_states = as<std::size_t>(field(root, "n_states", "model"), "n_states");
  model.n_actions = as<std::size_t>(field(root, "n_actions", "model"), "n_actions");
  model.gamma = as<double>(field(root, "gamma", "model"), "gamma");
  model.delta = as<double>(field(root, "delta", "model"), "delta");
  parse_table(root, "rewards", "values", model, model.rewards);
  parse_table(root, "transitions", "states", model, model.transitions);
  return model;
}

TabularRMDP load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

std::string serialize_model(const TabularRMDP& model) {
  json root;
  root["n_states"] = model.n_states;
  root["n_actions"] = model.n_actions;
  root["gamma"] = model.gamma;
  root["delta"] = model.delta;
  json rewards = json::array();
  json transitions = json::array();
  for (std::size_t s = 0; s < model.n_states; ++s) {
    json r_row = json::array();
    json t_row = json::array();
    for (std::size_t a = 0; a < model.n_actions; ++a) {
      const auto& r = model.reward(s, a);
      const auto& t = model.transition(s, a);
      r_row.push_back({{"values", r.atoms}, {"probs", r.probs}});
      t_row.push_back({{"states", t.atoms}, {"probs", t.probs}});
    }
    rewards.push_back(std::move(r_row));
    transitions.push_back(std::move(t_row));
  }
  root["rewards"] = std::move(rewards);
  root["transitions"] = std::move(transitions);
  return root.dump(2) + "\n";
}

void save_model(const TabularRMDP& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out << serialize_model(model);
}

std::string serialize_q(const QFunction& q) {
  json root;
  root["n_states"] = q.n_states();
  root["n_actions"] = q.n_actions();
  json rows = json::array();
  for (std::size_t s = 0; s < q.n_states(); ++s) {
    json row = json::array();
    for (std::size_t a = 0; a < q.n_actions(); ++a) row.push_back(q(s, a));
    rows.push_back(std::move(row));
  }
  root["q"] = std::move(rows);
  return root.dump(2) + "\n";
}

}  // namespace robustq
