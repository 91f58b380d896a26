#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errcal/error.hpp"
#include "errcal/matrix.hpp"
#include "errcal/scenario.hpp"

namespace errcal {

namespace detail {

inline Vector vector_from_json(const nlohmann::json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) fail(ErrorKind::InvalidScenario, field + " must be a number or array");
  Vector v;
  for (const auto& e : j) {
    if (!e.is_number()) fail(ErrorKind::InvalidScenario, field + " must hold numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& field) {
  if (j.is_number()) return Matrix{{j.get<double>()}};
  if (!j.is_array()) fail(ErrorKind::InvalidScenario, field + " must be a number or array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().is_array() ? j.front().size() : 1;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (row.is_number() && cols == 1) {
      m(i, 0) = row.get<double>();
      continue;
    }
    if (!row.is_array() || row.size() != cols)
      fail(ErrorKind::InvalidScenario, field + " rows must have equal length");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = row.at(k).get<double>();
  }
  return m;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  return nlohmann::json(v);
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const ScenarioSpec& s) {
  using detail::matrix_to_json;
  using detail::vector_to_json;
  nlohmann::json j;
  j["name"] = s.name;
  j["design"] = std::string(to_string(s.design));
  j["model"] = {{"beta0", s.model.beta0},
                {"beta_x", vector_to_json(s.model.beta_x)},
                {"beta_z", vector_to_json(s.model.beta_z)},
                {"sigma_eps", s.model.sigma_eps}};
  j["error"] = {{"sigma_T", matrix_to_json(s.error.sigma_T)},
                {"sigma_Ttilde", s.error.sigma_Ttilde},
                {"rho_TTtilde", s.error.rho_TTtilde},
                {"systematic_x",
                 {{"alpha0", vector_to_json(s.error.systematic_x.alpha0)},
                  {"alpha1", matrix_to_json(s.error.systematic_x.alpha1)}}},
                {"systematic_y",
                 {{"gamma0", s.error.systematic_y.gamma0},
                  {"gamma1", vector_to_json(s.error.systematic_y.gamma1)}}},
                {"bio_sigma_eta", matrix_to_json(s.error.bio_sigma_eta)},
                {"bio_sigma_nu", s.error.bio_sigma_nu},
                {"error_shape", std::string(to_string(s.error.error_shape))}};
  j["mu_x"] = vector_to_json(s.mu_x);
  j["sigma_x"] = matrix_to_json(s.sigma_x);
  j["mu_z"] = vector_to_json(s.mu_z);
  j["sigma_z"] = matrix_to_json(s.sigma_z);
  j["rho_xz"] = matrix_to_json(s.rho_xz);
  j["cohort_n"] = s.cohort_n;
  j["subset_n"] = s.subset_n;
  return j;
}

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  using detail::matrix_from_json;
  using detail::vector_from_json;
  if (!j.is_object()) fail(ErrorKind::InvalidScenario, "scenario must be a JSON object");
  ScenarioSpec s;
  s.name = j.value("name", std::string("custom"));
  if (!j.contains("design")) fail(ErrorKind::InvalidScenario, "missing field 'design'");
  s.design = parse_design(j.at("design").get<std::string>());

  if (!j.contains("model")) fail(ErrorKind::InvalidScenario, "missing field 'model'");
  const auto& jm = j.at("model");
  s.model.beta0 = jm.value("beta0", 0.0);
  if (!jm.contains("beta_x")) fail(ErrorKind::InvalidScenario, "missing field 'model.beta_x'");
  s.model.beta_x = vector_from_json(jm.at("beta_x"), "model.beta_x");
  if (jm.contains("beta_z")) s.model.beta_z = vector_from_json(jm.at("beta_z"), "model.beta_z");
  s.model.sigma_eps = jm.value("sigma_eps", 0.0);

  if (!j.contains("mu_x")) fail(ErrorKind::InvalidScenario, "missing field 'mu_x'");
  s.mu_x = vector_from_json(j.at("mu_x"), "mu_x");
  const std::size_t p = s.mu_x.size();
  if (!j.contains("sigma_x")) fail(ErrorKind::InvalidScenario, "missing field 'sigma_x'");
  s.sigma_x = matrix_from_json(j.at("sigma_x"), "sigma_x");
  if (j.contains("mu_z")) s.mu_z = vector_from_json(j.at("mu_z"), "mu_z");
  const std::size_t q = s.mu_z.size();
  s.sigma_z = j.contains("sigma_z") ? matrix_from_json(j.at("sigma_z"), "sigma_z")
                                    : Matrix(q, q);
  s.rho_xz = j.contains("rho_xz") ? matrix_from_json(j.at("rho_xz"), "rho_xz") : Matrix(p, q);
  if (s.rho_xz.rows() == 0 && q == 0) s.rho_xz = Matrix(p, 0);
  if (s.model.beta_z.empty() && q > 0) s.model.beta_z.assign(q, 0.0);

  const nlohmann::json je = j.value("error", nlohmann::json::object());
  s.error.sigma_T = je.contains("sigma_T") ? matrix_from_json(je.at("sigma_T"), "error.sigma_T")
                                           : Matrix(p, p);
  s.error.sigma_Ttilde = je.value("sigma_Ttilde", 0.0);
  s.error.rho_TTtilde = je.value("rho_TTtilde", 0.0);
  if (je.contains("systematic_x")) {
    const auto& jx = je.at("systematic_x");
    if (jx.contains("alpha0"))
      s.error.systematic_x.alpha0 = vector_from_json(jx.at("alpha0"), "alpha0");
    if (jx.contains("alpha1"))
      s.error.systematic_x.alpha1 = matrix_from_json(jx.at("alpha1"), "alpha1");
  }
  if (s.error.systematic_x.alpha0.empty()) s.error.systematic_x.alpha0.assign(p, 0.0);
  if (s.error.systematic_x.alpha1.rows() == 0) s.error.systematic_x.alpha1 = Matrix(p, q);
  if (je.contains("systematic_y")) {
    const auto& jy = je.at("systematic_y");
    s.error.systematic_y.gamma0 = jy.value("gamma0", 0.0);
    if (jy.contains("gamma1"))
      s.error.systematic_y.gamma1 = vector_from_json(jy.at("gamma1"), "gamma1");
  }
  if (s.error.systematic_y.gamma1.empty()) s.error.systematic_y.gamma1.assign(q, 0.0);
  s.error.bio_sigma_eta = je.contains("bio_sigma_eta")
                              ? matrix_from_json(je.at("bio_sigma_eta"), "error.bio_sigma_eta")
                              : Matrix(p, p);
  s.error.bio_sigma_nu = je.value("bio_sigma_nu", 0.0);
  if (je.contains("error_shape"))
    s.error.error_shape = parse_error_shape(je.at("error_shape").get<std::string>());

  if (!j.contains("cohort_n") || !j.contains("subset_n"))
    fail(ErrorKind::InvalidScenario, "missing cohort_n or subset_n");
  s.cohort_n = j.at("cohort_n").get<std::size_t>();
  s.subset_n = j.at("subset_n").get<std::size_t>();
  validate(s);
  return s;
}

// Applies one `path.to.field=value` override onto a scenario JSON document.
// The value is parsed as JSON when possible and treated as a bare string
// otherwise (so error.error_shape=log_normal works unquoted).
inline void apply_set_override(nlohmann::json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    fail(ErrorKind::InvalidScenario,
         "override must look like path.to.field=value, got '" + std::string(assignment) + "'");
  std::string_view path = assignment.substr(0, eq);
  const std::string value_text(assignment.substr(eq + 1));
  nlohmann::json value = nlohmann::json::parse(value_text, nullptr, false);
  if (value.is_discarded()) value = value_text;

  nlohmann::json* node = &doc;
  while (true) {
    const auto dot = path.find('.');
    const std::string key(path.substr(0, dot));
    if (key.empty()) fail(ErrorKind::InvalidScenario, "empty key in override path");
    if (dot == std::string_view::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    path = path.substr(dot + 1);
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidScenario, "cannot open '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::InvalidScenario, "invalid JSON in '" + path + "'");
  return j;
}

}  // namespace errcal
