#pragma once

// Shared fixtures for the test suites: random draws and the family samples.

#include <Eigen/Dense>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ckylab/catalog.hpp"
#include "ckylab/liealg.hpp"

namespace testing_support {

using ckylab::FamilyInstance;
using ckylab::ParamMap;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240531);
  return gen;
}

inline Eigen::VectorXd random_vector(int n) {
  std::normal_distribution<double> dist;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng());
  return v;
}

inline Eigen::MatrixXd random_matrix(int rows, int cols) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng());
  }
  return m;
}

/// Well-conditioned invertible matrix: identity plus a small random part.
inline Eigen::MatrixXd random_invertible(int n) {
  return Eigen::MatrixXd::Identity(n, n) + 0.3 * random_matrix(n, n);
}

/// Every family at every documented sample, plus the negative cases.
inline std::vector<std::pair<std::string, ParamMap<double>>> all_samples() {
  std::vector<std::pair<std::string, ParamMap<double>>> out;
  for (const auto& id : ckylab::extension_family_ids()) {
    for (const auto& p : ckylab::sweep_params(id)) out.emplace_back(id, p);
  }
  for (const auto& [r, s] : ckylab::grs_sweep()) out.push_back({"grs", {{"r", r}, {"s", s}}});
  out.push_back({"L59", {{"r", 1.0}}});
  out.push_back({"L59", {{"r", 2.0}}});
  out.push_back({"su2xR2", {{"r", 1.0}, {"s", 2.0}}});
  out.push_back({"sl2xR2", {{"r", 2.0}, {"s", 1.0}}});
  for (const auto& p : ckylab::dim3center_draws()) out.emplace_back("dim3center", p);
  out.push_back({"abelian", {}});
  return out;
}

/// One sample per family, for the more expensive suites.
inline std::vector<FamilyInstance> representative_instances() {
  std::vector<FamilyInstance> out;
  for (const auto& id : ckylab::extension_family_ids()) out.push_back(ckylab::build_family(id));
  out.push_back(ckylab::build_family("grs", {{"r", 1.0}, {"s", 2.0}}));
  out.push_back(ckylab::build_family("grs", {{"r", 2.0}, {"s", 1.0}}));
  out.push_back(ckylab::build_family("L59", {{"r", 1.0}}));
  out.push_back(ckylab::build_family("su2xR2"));
  out.push_back(ckylab::build_family("sl2xR2"));
  out.push_back(ckylab::build_family("dim3center"));
  out.push_back(ckylab::build_family("abelian"));
  return out;
}

/// Exact copy of double-valued parameters (all samples are dyadic or integer).
inline ParamMap<ckylab::exact::Rational> to_rational(const ParamMap<double>& p) {
  ParamMap<ckylab::exact::Rational> out;
  for (const auto& [k, v] : p) out[k] = ckylab::exact::Rational(v);
  return out;
}

inline std::string label(const std::string& id, const ParamMap<double>& p) {
  std::string s = id;
  for (const auto& [k, v] : p) s += " " + k + "=" + std::to_string(v);
  return s;
}

}  // namespace testing_support
