#pragma once

#include <nlohmann/json.hpp>

#include "congame/errors.hpp"
#include "congame/types.hpp"

namespace congame {

inline nlohmann::json vec_to_json(const VectorRef& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vector vec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InvalidArgument("expected a JSON array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<size_t>(i)].get<double>();
  return v;
}

/// Nested arrays, one inner array per row.
inline nlohmann::json mat_to_json_rows(const MatrixRef& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r).transpose()));
  return rows;
}

inline Matrix mat_from_json_rows(const nlohmann::json& j) {
  if (!j.is_array()) throw InvalidArgument("expected a JSON array of rows");
  const Index rows = static_cast<Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<size_t>(r)];
    if (static_cast<Index>(row.size()) != cols)
      throw InvalidArgument("ragged matrix rows in JSON");
    for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace congame
