#include <fstream>

#include "mgverify/circuit.hpp"

namespace mgv {

using nlohmann::json;

namespace {

template <class M>
json matrix_to_json(const M& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class M>
M matrix_from_json(const json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) throw ValidationError("matrix must have " + std::to_string(dim) + " rows");
  M m;
  for (int r = 0; r < dim; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != dim) throw ValidationError("matrix row has wrong length");
    for (int c = 0; c < dim; ++c) {
      const auto& z = row[c];
      if (z.is_number()) {
        m(r, c) = cplx(z.get<double>(), 0.0);
      } else if (z.is_array() && z.size() == 2) {
        m(r, c) = cplx(z[0].get<double>(), z[1].get<double>());
      } else {
        throw ValidationError("complex entries must be [re, im]");
      }
    }
  }
  return m;
}

json generator_to_json(const GateGenerator& g) {
  json terms = json::object();
  for (std::size_t i = 0; i < kGeneratorTerms.size(); ++i)
    if (g.coeffs[i] != 0.0) terms[std::string(kGeneratorTerms[i])] = g.coeffs[i];
  return {{"terms", terms}, {"phase", g.phase}};
}

GateGenerator generator_from_json(const json& j) {
  GateGenerator g;
  g.phase = j.value("phase", 0.0);
  for (const auto& [key, val] : j.at("terms").items()) {
    std::size_t i = 0;
    while (i < kGeneratorTerms.size() && kGeneratorTerms[i] != key) ++i;
    if (i == kGeneratorTerms.size()) throw ValidationError("unsupported generator term " + key);
    g.coeffs[i] = val.get<double>();
  }
  return g;
}

json op_to_json(const CircuitOp& op) {
  json j = std::visit(
      [](const auto& o) -> json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, SingleQubitOp>) {
          return {{"kind", "u1"}, {"q", o.qubit}, {"u", matrix_to_json(o.u)}};
        } else if constexpr (std::is_same_v<T, MatchgateOp>) {
          json r = {{"kind", "mg"}, {"q", o.gate.first()}, {"u", matrix_to_json(o.gate.matrix())}};
          if (o.generator) r["generator"] = generator_to_json(*o.generator);
          return r;
        } else if constexpr (std::is_same_v<T, CzOp>) {
          return {{"kind", "cz"}, {"q1", o.q1}, {"q2", o.q2}};
        } else if constexpr (std::is_same_v<T, PauliOp>) {
          return {{"kind", "pauli"}, {"word", o.word.str()}};
        } else if constexpr (std::is_same_v<T, MeasureOp>) {
          return {{"kind", "measure"}, {"q", o.qubit}, {"label", o.label}};
        } else {
          json table = json::object();
          for (const auto& [k, w] : o.table) table[k] = w.str();
          return {{"kind", "correction"}, {"gadget", o.gadget}, {"labels", o.labels}, {"table", table}};
        }
      },
      op.op);
  if (op.prep) j["prep"] = true;
  if (op.layer) j["layer"] = *op.layer;
  return j;
}

CircuitOp op_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ValidationError("op must be an object with a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  CircuitOp out;
  if (kind == "u1") {
    out.op = SingleQubitOp{j.at("q").get<int>(), matrix_from_json<Mat2>(j.at("u"), 2)};
  } else if (kind == "mg") {
    MatchgateOp m{Matchgate::from_matrix(matrix_from_json<Mat4>(j.at("u"), 4), j.at("q").get<int>()), std::nullopt};
    if (j.contains("generator")) m.generator = generator_from_json(j.at("generator"));
    out.op = std::move(m);
  } else if (kind == "cz") {
    out.op = CzOp{j.at("q1").get<int>(), j.at("q2").get<int>()};
  } else if (kind == "pauli") {
    out.op = PauliOp{PauliString::parse(j.at("word").get<std::string>())};
  } else if (kind == "measure") {
    out.op = MeasureOp{j.at("q").get<int>(), j.at("label").get<std::string>()};
  } else if (kind == "correction") {
    CorrectionOp c;
    c.gadget = j.at("gadget").get<int>();
    const auto& table = j.at("table");
    for (const auto& [k, w] : table.items()) c.table.emplace(k, PauliString::parse(w.get<std::string>()));
    if (j.contains("labels")) {
      c.labels = j.at("labels").get<std::vector<std::string>>();
    } else {
      const std::string g = std::to_string(c.gadget);
      c.labels = {"g" + g + "a", "g" + g + "b", "g" + g + "c", "g" + g + "d"};
    }
    out.op = std::move(c);
  } else {
    throw ValidationError("unknown op kind '" + kind + "'");
  }
  out.prep = j.value("prep", false);
  if (j.contains("layer")) out.layer = j.at("layer").get<int>();
  return out;
}

}  // namespace

json to_json(const Circuit& c) {
  json ops = json::array();
  for (const auto& op : c.ops()) ops.push_back(op_to_json(op));
  json j = {{"n", c.width()}, {"ops", ops}, {"meta", c.meta()}};
  if (c.data_width() != c.width()) j["data_width"] = c.data_width();
  return j;
}

Circuit circuit_from_json(const json& j) {
  try {
    Circuit c(j.at("n").get<int>());
    if (j.contains("meta")) c.meta() = j.at("meta");
    for (const auto& op : j.at("ops")) c.append(op_from_json(op));
    if (j.contains("data_width")) c.set_data_width(j.at("data_width").get<int>());
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed circuit JSON: ") + e.what());
  }
}

Circuit load_circuit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open circuit file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("cannot parse " + path + ": " + e.what());
  }
  return circuit_from_json(j);
}

void save_circuit(const Circuit& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SimulationError("cannot write " + path);
  out << to_json(c).dump(1) << '\n';
}

}  // namespace mgv
