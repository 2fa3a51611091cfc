#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "errors.hpp"
#include "forms.hpp"
#include "liealg.hpp"
#include "multi_index.hpp"

namespace ckylab {

using Json = nlohmann::json;

// Form JSON: {"degree": p, "terms": [{"index": [i1 < ... < ip], "value": v}]}.
// Indices are 0-based positions in the algebra basis.

inline Json form_to_json(const PForm& f, double drop_below = 0.0) {
  Json terms = Json::array();
  const MultiIndexSet set(f.dim(), f.degree());
  for (int pos = 0; pos < set.size(); ++pos) {
    const double v = f.coeffs()(pos);
    if (v == 0.0 || std::abs(v) <= drop_below) continue;
    terms.push_back({{"index", set[pos]}, {"value", v}});
  }
  return {{"degree", f.degree()}, {"terms", terms}};
}

inline PForm form_from_json(const Json& j, int dim) {
  try {
    if (!j.is_object()) throw InputError("form must be a JSON object");
    const int degree = j.at("degree").get<int>();
    if (degree < 0 || degree > dim) throw InputError("form degree out of range");
    PForm out(dim, degree);
    const MultiIndexSet set(dim, degree);
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(set.size());
    std::vector<bool> seen(set.size(), false);
    for (const auto& term : j.at("terms")) {
      const auto index = term.at("index").get<std::vector<int>>();
      if (static_cast<int>(index.size()) != degree) throw InputError("term index has the wrong length");
      for (std::size_t a = 0; a < index.size(); ++a) {
        if (index[a] < 0 || index[a] >= dim) throw InputError("term index out of range");
        if (a > 0 && index[a] <= index[a - 1]) throw InputError("term index must be strictly increasing");
      }
      const int pos = set.position(index);
      if (seen[pos]) throw InputError("duplicate term in form");
      seen[pos] = true;
      const double v = term.at("value").get<double>();
      if (!std::isfinite(v)) throw InputError("form coefficient is not finite");
      coeffs(pos) = v;
    }
    return PForm(dim, degree, coeffs);
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed form JSON: ") + e.what());
  }
}

// Algebra JSON: {"dim": n, "basis": [labels], "brackets": [{"i", "j", "coeffs":
// {index-or-label: value}}], "metric": n x n}. Omitted pairs are zero.

struct LoadedAlgebra {
  StructureData<double> structure;
  std::optional<PForm> reference_form;
};

inline LoadedAlgebra algebra_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw InputError("algebra must be a JSON object");
    const int n = j.at("dim").get<int>();
    if (n <= 0 || n > 12) throw InputError("dim must be in [1, 12]");
    std::vector<std::string> labels;
    if (j.contains("basis")) labels = j.at("basis").get<std::vector<std::string>>();
    if (!labels.empty() && static_cast<int>(labels.size()) != n) {
      throw InputError("basis label count does not match dim");
    }
    StructureData<double> s(n, labels);
    auto resolve = [&](const std::string& key) {
      for (int i = 0; i < n; ++i) {
        if (s.labels()[i] == key) return i;
      }
      std::size_t used = 0;
      int idx = -1;
      try {
        idx = std::stoi(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size() || idx < 0 || idx >= n) throw InputError("unknown basis key '" + key + "'");
      return idx;
    };
    // given[i][j] holds the bracket as supplied, for consistency checks.
    std::map<std::pair<int, int>, std::vector<double>> given;
    if (j.contains("brackets")) {
      for (const auto& b : j.at("brackets")) {
        const int i = b.at("i").get<int>();
        const int k = b.at("j").get<int>();
        if (i < 0 || i >= n || k < 0 || k >= n) throw InputError("bracket index out of range");
        std::vector<double> image(n, 0.0);
        for (const auto& [key, value] : b.at("coeffs").items()) {
          const double v = value.get<double>();
          if (!std::isfinite(v)) throw InputError("bracket coefficient is not finite");
          image[resolve(key)] += v;
        }
        if (i == k) {
          for (double v : image) {
            if (v != 0.0) throw InputError("[e_i, e_i] must vanish");
          }
          continue;
        }
        const auto key = std::make_pair(std::min(i, k), std::max(i, k));
        if (i > k) {
          for (double& v : image) v = -v;
        }
        auto it = given.find(key);
        if (it != given.end()) {
          for (int m = 0; m < n; ++m) {
            if (std::abs(it->second[m] - image[m]) > 1e-12 * std::max(1.0, std::abs(image[m]))) {
              throw InputError("inconsistent brackets supplied for (" + std::to_string(key.first) + ", " +
                               std::to_string(key.second) + ")");
            }
          }
        } else {
          given.emplace(key, image);
        }
      }
    }
    for (const auto& [key, image] : given) {
      std::vector<std::pair<int, double>> terms;
      for (int m = 0; m < n; ++m) {
        if (image[m] != 0.0) terms.emplace_back(m, image[m]);
      }
      s.set_bracket(key.first, key.second, terms);
    }
    if (j.contains("metric")) {
      const auto rows = j.at("metric").get<std::vector<std::vector<double>>>();
      if (static_cast<int>(rows.size()) != n) throw InputError("metric must be n x n");
      for (int r = 0; r < n; ++r) {
        if (static_cast<int>(rows[r].size()) != n) throw InputError("metric must be n x n");
        for (int c = 0; c < n; ++c) s.gram(r, c) = rows[r][c];
      }
    }
    LoadedAlgebra out{s, std::nullopt};
    if (j.contains("reference_form") && !j.at("reference_form").is_null()) {
      out.reference_form = form_from_json(j.at("reference_form"), n);
    }
    return out;
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed algebra JSON: ") + e.what());
  }
}

inline Json algebra_to_json(const MetricLieAlgebra& a, const std::optional<PForm>& reference_form = std::nullopt) {
  const int n = a.dim();
  Json brackets = Json::array();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Json coeffs = Json::object();
      for (int k = 0; k < n; ++k) {
        if (a.c(i, j, k) != 0.0) coeffs[std::to_string(k)] = a.c(i, j, k);
      }
      if (!coeffs.empty()) brackets.push_back({{"i", i}, {"j", j}, {"coeffs", coeffs}});
    }
  }
  Json metric = Json::array();
  for (int i = 0; i < n; ++i) {
    Json row = Json::array();
    for (int j = 0; j < n; ++j) row.push_back(a.gram()(i, j));
    metric.push_back(row);
  }
  Json out = {{"dim", n}, {"basis", a.labels()}, {"brackets", brackets}, {"metric", metric}};
  if (reference_form) out["reference_form"] = form_to_json(*reference_form);
  return out;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError("malformed JSON in '" + path + "': " + e.what());
  }
}

}  // namespace ckylab
