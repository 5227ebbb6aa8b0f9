#include "tsm/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "tsm/harness.hpp"

namespace tsm {

namespace {

using nlohmann::json;

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ScenarioError(path, "expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ScenarioError(path, "expected an integer");
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ScenarioError(path, "integer out of range");
  }
  return static_cast<int>(x);
}

std::vector<double> get_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ScenarioError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(get_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

PiecewiseHazard get_hazard(const json& v, const std::string& path) {
  if (!v.is_object()) throw ScenarioError(path, "expected {\"cuts\": [...], \"rates\": [...]}");
  for (const auto& [key, _] : v.items()) {
    if (key != "cuts" && key != "rates") throw ScenarioError(path + "." + key, "unknown field");
  }
  if (!v.contains("cuts")) throw ScenarioError(path + ".cuts", "missing");
  if (!v.contains("rates")) throw ScenarioError(path + ".rates", "missing");
  auto cuts = get_numbers(v.at("cuts"), path + ".cuts");
  auto rates = get_numbers(v.at("rates"), path + ".rates");
  try {
    return PiecewiseHazard(std::move(cuts), std::move(rates));
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path, e.what());
  }
}

json hazard_json(const PiecewiseHazard& h) {
  return json{{"cuts", h.cuts()}, {"rates", h.rates()}};
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

CrossoverScenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ScenarioParseError(
        "scenario: syntax error at line " + std::to_string(line) + ", column " +
            std::to_string(col),
        line, col);
  }
  if (!doc.is_object()) throw ScenarioError("$", "scenario must be a JSON object");

  CrossoverScenario sc;
  if (doc.contains("preset")) {
    const auto& p = doc.at("preset");
    if (!p.is_string()) throw ScenarioError("preset", "expected a string");
    try {
      sc = preset(p.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("preset", e.what());
    }
  }
  for (const auto& [key, v] : doc.items()) {
    if (key == "preset") continue;
    if (key == "name") {
      if (!v.is_string()) throw ScenarioError(key, "expected a string");
      sc.name = v.get<std::string>();
    } else if (key == "n_treatment") {
      sc.n_treatment = get_int(v, key);
    } else if (key == "n_control") {
      sc.n_control = get_int(v, key);
    } else if (key == "accrual_duration") {
      sc.accrual_duration = get_number(v, key);
    } else if (key == "readout_time") {
      sc.readout_time = get_number(v, key);
    } else if (key == "dropout") {
      sc.dropout = get_hazard(v, key);
    } else if (key == "lambda1") {
      sc.lambda1 = get_hazard(v, key);
    } else if (key == "lambda2") {
      sc.lambda2 = get_hazard(v, key);
    } else if (key == "lambda2_star") {
      sc.lambda2_star = get_hazard(v, key);
    } else if (key == "lambda3") {
      sc.lambda3 = get_hazard(v, key);
    } else if (key == "treatment") {
      sc.treatment = get_hazard(v, key);
    } else if (key == "crossover") {
      if (!v.is_string()) throw ScenarioError(key, "expected \"markov\" or \"semi-markov\"");
      const auto s = v.get<std::string>();
      if (s == "markov") sc.crossover = CrossoverType::Markov;
      else if (s == "semi-markov") sc.crossover = CrossoverType::SemiMarkov;
      else throw ScenarioError(key, "expected \"markov\" or \"semi-markov\"");
    } else if (key == "pi2") {
      sc.pi2 = get_number(v, key);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw ScenarioError(key, "expected a non-negative integer");
      sc.seed = v.get<std::uint64_t>();
    } else if (key == "alpha") {
      sc.alpha = get_number(v, key);
    } else if (key == "hr_true") {
      if (v.is_null()) sc.hr_true.reset();
      else sc.hr_true = get_number(v, key);
    } else {
      throw ScenarioError(key, "unknown field");
    }
  }
  sc.validate();
  return sc;
}

CrossoverScenario load_scenario(const std::string& name_or_path) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return preset(name_or_path);
  }
  if (!std::filesystem::exists(name_or_path)) {
    throw ScenarioError("scenario", "'" + name_or_path + "' is neither a preset nor a file");
  }
  std::ifstream in(name_or_path);
  if (!in) throw ScenarioError("scenario", "cannot open '" + name_or_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

json scenario_to_json(const CrossoverScenario& sc) {
  json j;
  j["name"] = sc.name;
  j["n_treatment"] = sc.n_treatment;
  j["n_control"] = sc.n_control;
  j["accrual_duration"] = sc.accrual_duration;
  j["readout_time"] = sc.readout_time;
  j["dropout"] = hazard_json(sc.dropout);
  j["lambda1"] = hazard_json(sc.lambda1);
  j["lambda2"] = hazard_json(sc.lambda2);
  j["lambda2_star"] = hazard_json(sc.lambda2_star);
  j["lambda3"] = hazard_json(sc.lambda3);
  j["treatment"] = hazard_json(sc.treatment);
  switch (sc.crossover) {
    case CrossoverType::Markov: j["crossover"] = "markov"; break;
    case CrossoverType::SemiMarkov: j["crossover"] = "semi-markov"; break;
    case CrossoverType::General: j["crossover"] = "general"; break;
  }
  j["pi2"] = sc.pi2;
  j["seed"] = sc.seed;
  j["alpha"] = sc.alpha;
  j["hr_true"] = sc.hr_true ? json(*sc.hr_true) : json(nullptr);
  return j;
}

}  // namespace tsm
