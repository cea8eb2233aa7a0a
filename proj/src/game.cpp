#include "congame/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "congame/serialize.hpp"

namespace congame {

ActionSetDescriptor ActionSetDescriptor::Simplex(Index d) {
  ActionSetDescriptor s;
  s.kind = ActionSetKind::simplex;
  s.dim = d;
  s.validate();
  return s;
}

ActionSetDescriptor ActionSetDescriptor::Box(Vector lo, Vector up) {
  ActionSetDescriptor s;
  s.kind = ActionSetKind::box;
  s.dim = lo.size();
  s.lower = std::move(lo);
  s.upper = std::move(up);
  s.validate();
  return s;
}

ActionSetDescriptor ActionSetDescriptor::PolytopeEnum(Matrix verts) {
  ActionSetDescriptor s;
  s.kind = ActionSetKind::polytope_enum;
  s.dim = verts.cols();
  s.vertices = std::move(verts);
  s.validate();
  return s;
}

void ActionSetDescriptor::validate() const {
  if (dim < 1) throw InvalidArgument("action set dimension must be positive");
  switch (kind) {
    case ActionSetKind::simplex:
      break;
    case ActionSetKind::box:
      if (lower.size() != dim) throw DimensionError("box lower bound", dim, lower.size());
      if (upper.size() != dim) throw DimensionError("box upper bound", dim, upper.size());
      if ((lower.array() > upper.array()).any())
        throw InvalidArgument("box has lower > upper in some coordinate");
      break;
    case ActionSetKind::polytope_enum:
      if (vertices.rows() < 1) throw InvalidArgument("polytope needs at least one vertex");
      if (vertices.cols() != dim)
        throw DimensionError("polytope vertices", dim, vertices.cols());
      if (!all_finite(vertices)) throw InvalidArgument("polytope vertices must be finite");
      break;
  }
}

bool ActionSetDescriptor::contains(const VectorRef& x, double tol) const {
  if (x.size() != dim) return false;
  switch (kind) {
    case ActionSetKind::simplex:
      return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
    case ActionSetKind::box:
      return (x.array() >= lower.array() - tol).all() &&
             (x.array() <= upper.array() + tol).all();
    case ActionSetKind::polytope_enum:
      return (x - project_action_set(*this, x)).norm() <= tol;
  }
  return false;
}

Matrix ActionSetDescriptor::extreme_points(Index max_points) const {
  switch (kind) {
    case ActionSetKind::simplex:
      return Matrix::Identity(dim, dim);
    case ActionSetKind::box: {
      if (dim >= 62 || (Index(1) << dim) > max_points)
        throw InvalidArgument("box corner enumeration too large");
      const Index n = Index(1) << dim;
      Matrix pts(n, dim);
      for (Index mask = 0; mask < n; ++mask)
        for (Index k = 0; k < dim; ++k)
          pts(mask, k) = (mask >> k) & 1 ? upper[k] : lower[k];
      return pts;
    }
    case ActionSetKind::polytope_enum:
      return vertices;
  }
  throw InvalidArgument("unknown action set kind");
}

NoiseModel NoiseModel::Gaussian(double s) {
  if (s < 0) throw InvalidArgument("noise sigma must be nonnegative");
  NoiseModel n;
  n.kind = NoiseKind::gaussian_iid;
  n.sigma = s;
  return n;
}

NoiseModel NoiseModel::Custom(std::function<Vector(const VectorRef&, RngStream&)> f) {
  if (!f) throw InvalidArgument("custom noise sampler must be callable");
  NoiseModel n;
  n.kind = NoiseKind::custom;
  n.sample_custom = std::move(f);
  return n;
}

Index GameSpec::total_dim() const {
  return std::accumulate(dims.begin(), dims.end(), Index(0));
}

std::vector<Index> GameSpec::block_offsets() const {
  std::vector<Index> off(dims.size() + 1, 0);
  for (size_t i = 0; i < dims.size(); ++i) off[i + 1] = off[i] + dims[i];
  return off;
}

void GameSpec::validate() const {
  if (n_players < 1) throw InvalidArgument("need at least one player");
  if (static_cast<Index>(dims.size()) != n_players)
    throw DimensionError("dims", n_players, static_cast<Index>(dims.size()));
  if (static_cast<Index>(action_sets.size()) != n_players)
    throw DimensionError("action_sets", n_players, static_cast<Index>(action_sets.size()));
  for (Index i = 0; i < n_players; ++i) {
    action_sets[i].validate();
    if (action_sets[i].dim != dims[i])
      throw DimensionError("action set of player " + std::to_string(i), dims[i],
                           action_sets[i].dim);
  }
  const Index d = total_dim();
  if (resources.A.cols() != d) throw DimensionError("constraint matrix columns", d, resources.A.cols());
  if (resources.b.size() != resources.A.rows())
    throw DimensionError("capacity vector", resources.A.rows(), resources.b.size());
  if (!all_finite(resources.A) || !all_finite(resources.b))
    throw InvalidArgument("constraints must be finite");
  if (noise.sigma < 0) throw InvalidArgument("noise sigma must be nonnegative");
  if (noise.kind == NoiseKind::custom && !noise.sample_custom)
    throw InvalidArgument("custom noise without a sampler");
  if (resources.slater_point) {
    const Vector& s = *resources.slater_point;
    if (s.size() != d) throw DimensionError("slater point", d, s.size());
    if (!contains(s, 1e-9)) throw InvalidArgument("slater point outside the action sets");
    const Vector slack = resources.A * s - resources.b;
    if ((slack.array() >= 0).any())
      throw InvalidArgument("slater point is not strictly feasible");
  }
}

bool GameSpec::contains(const VectorRef& x, double tol) const {
  if (x.size() != total_dim()) return false;
  const auto off = block_offsets();
  for (Index i = 0; i < n_players; ++i)
    if (!action_sets[i].contains(x.segment(off[i], dims[i]), tol)) return false;
  return true;
}

Vector congestion(const VectorRef& x, const ResourceConstraints& rc) {
  if (x.size() != rc.A.cols())
    throw DimensionError("congestion input", rc.A.cols(), x.size());
  return rc.A * x - rc.b;
}

Vector sample_noise(const NoiseModel& noise, const VectorRef& x, Index dim,
                    RngStream& rng) {
  switch (noise.kind) {
    case NoiseKind::none:
      return Vector::Zero(dim);
    case NoiseKind::gaussian_iid: {
      Vector xi(dim);
      for (Index k = 0; k < dim; ++k) xi[k] = noise.sigma * rng.gaussian();
      return xi;
    }
    case NoiseKind::custom: {
      Vector xi = noise.sample_custom(x, rng);
      if (xi.size() != dim) throw DimensionError("custom noise sample", dim, xi.size());
      return xi;
    }
  }
  throw InvalidArgument("unknown noise kind");
}

Vector noisy_gradient(const VectorRef& x, const GameSpec& game, RngStream& rng,
                      Vector* xi_out) {
  Vector v = game.gradient.eval(x);
  if (v.size() != game.total_dim())
    throw DimensionError("gradient oracle output", game.total_dim(), v.size());
  Vector xi = sample_noise(game.noise, x, v.size(), rng);
  if (xi_out) *xi_out = xi;
  return v + xi;
}

double block_primal_norm(const ActionSetDescriptor& set, const VectorRef& v) {
  return set.kind == ActionSetKind::simplex ? v.lpNorm<1>() : v.norm();
}

double block_dual_norm(const ActionSetDescriptor& set, const VectorRef& v) {
  return set.kind == ActionSetKind::simplex ? v.lpNorm<Eigen::Infinity>() : v.norm();
}

double product_primal_norm(const GameSpec& game, const VectorRef& x) {
  if (x.size() != game.total_dim())
    throw DimensionError("product norm input", game.total_dim(), x.size());
  const auto off = game.block_offsets();
  double s = 0;
  for (Index i = 0; i < game.n_players; ++i)
    s += block_primal_norm(game.action_sets[i], x.segment(off[i], game.dims[i]));
  return s;
}

double product_dual_norm(const GameSpec& game, const VectorRef& y) {
  if (y.size() != game.total_dim())
    throw DimensionError("product norm input", game.total_dim(), y.size());
  const auto off = game.block_offsets();
  double m = 0;
  for (Index i = 0; i < game.n_players; ++i)
    m = std::max(m, block_dual_norm(game.action_sets[i], y.segment(off[i], game.dims[i])));
  return m;
}

Vector project_simplex(const VectorRef& v) {
  const Index n = v.size();
  if (n == 0) throw InvalidArgument("cannot project an empty vector");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0, tau = 0;
  Index rho = 0;
  for (Index j = 0; j < n; ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / double(j + 1);
    if (u[j] - t > 0) {
      rho = j + 1;
      tau = t;
    }
  }
  (void)rho;
  return (v.array() - tau).max(0.0).matrix();
}

Vector project_box(const VectorRef& v, const VectorRef& lo, const VectorRef& up) {
  return v.cwiseMax(lo).cwiseMin(up);
}

Vector project_action_set(const ActionSetDescriptor& set, const VectorRef& v) {
  if (v.size() != set.dim) throw DimensionError("projection input", set.dim, v.size());
  switch (set.kind) {
    case ActionSetKind::simplex:
      return project_simplex(v);
    case ActionSetKind::box:
      return project_box(v, set.lower, set.upper);
    case ActionSetKind::polytope_enum: {
      // Projected gradient on the weight simplex for min ||V^T w - v||^2.
      const Matrix& V = set.vertices;
      const Index m = V.rows();
      if (m == 1) return V.row(0).transpose();
      const Matrix G = V * V.transpose();
      const double L = G.operatorNorm();
      const double step = 1.0 / std::max(L, 1e-300);
      Vector w = Vector::Constant(m, 1.0 / double(m));
      Vector Vv = V * v;
      for (int it = 0; it < 20000; ++it) {
        Vector grad = G * w - Vv;
        Vector w_next = project_simplex(w - step * grad);
        const double delta = (w_next - w).lpNorm<Eigen::Infinity>();
        w = w_next;
        if (delta < 1e-14) break;
      }
      return V.transpose() * w;
    }
  }
  throw InvalidArgument("unknown action set kind");
}

Vector project_all(const GameSpec& game, const VectorRef& x) {
  if (x.size() != game.total_dim())
    throw DimensionError("projection input", game.total_dim(), x.size());
  Vector out(x.size());
  const auto off = game.block_offsets();
  for (Index i = 0; i < game.n_players; ++i)
    out.segment(off[i], game.dims[i]) =
        project_action_set(game.action_sets[i], x.segment(off[i], game.dims[i]));
  return out;
}

namespace {

nlohmann::json action_set_to_json(const ActionSetDescriptor& s) {
  nlohmann::json j;
  switch (s.kind) {
    case ActionSetKind::simplex:
      j["kind"] = "simplex";
      j["dim"] = s.dim;
      break;
    case ActionSetKind::box:
      j["kind"] = "box";
      j["lower"] = vec_to_json(s.lower);
      j["upper"] = vec_to_json(s.upper);
      break;
    case ActionSetKind::polytope_enum:
      j["kind"] = "polytope_enum";
      j["vertices"] = mat_to_json_rows(s.vertices);
      break;
  }
  return j;
}

ActionSetDescriptor action_set_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "simplex") return ActionSetDescriptor::Simplex(j.at("dim").get<Index>());
  if (kind == "box")
    return ActionSetDescriptor::Box(vec_from_json(j.at("lower")), vec_from_json(j.at("upper")));
  if (kind == "polytope_enum")
    return ActionSetDescriptor::PolytopeEnum(mat_from_json_rows(j.at("vertices")));
  throw InvalidArgument("unknown action set kind '" + kind + "'");
}

}  // namespace

nlohmann::json game_spec_to_json(const GameSpec& g) {
  nlohmann::json j;
  j["n_players"] = g.n_players;
  j["dims"] = g.dims;
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& s : g.action_sets) sets.push_back(action_set_to_json(s));
  j["action_sets"] = sets;
  j["A"] = mat_to_json_rows(g.resources.A);
  j["b"] = vec_to_json(g.resources.b);
  if (g.resources.slater_point) j["slater_point"] = vec_to_json(*g.resources.slater_point);
  switch (g.noise.kind) {
    case NoiseKind::none:
      j["noise"] = {{"kind", "none"}};
      break;
    case NoiseKind::gaussian_iid:
      j["noise"] = {{"kind", "gaussian_iid"}, {"sigma", g.noise.sigma}};
      break;
    case NoiseKind::custom:
      j["noise"] = {{"kind", "custom"}};
      break;
  }
  if (g.gradient.affine) {
    j["gradient_affine"] = {{"M", mat_to_json_rows(g.gradient.affine->M)},
                            {"offset", vec_to_json(g.gradient.affine->offset)}};
  }
  return j;
}

GameSpec game_spec_from_json(const nlohmann::json& j) {
  GameSpec g;
  g.n_players = j.at("n_players").get<Index>();
  g.dims = j.at("dims").get<std::vector<Index>>();
  for (const auto& s : j.at("action_sets")) g.action_sets.push_back(action_set_from_json(s));
  g.resources.A = mat_from_json_rows(j.at("A"));
  g.resources.b = vec_from_json(j.at("b"));
  if (j.contains("slater_point")) g.resources.slater_point = vec_from_json(j["slater_point"]);
  if (j.contains("noise")) {
    const std::string kind = j["noise"].at("kind").get<std::string>();
    if (kind == "none")
      g.noise = NoiseModel::None();
    else if (kind == "gaussian_iid")
      g.noise = NoiseModel::Gaussian(j["noise"].at("sigma").get<double>());
    else if (kind == "custom")
      throw InvalidArgument("custom noise samplers cannot be deserialized");
    else
      throw InvalidArgument("unknown noise kind '" + kind + "'");
  }
  if (j.contains("gradient_affine")) {
    AffineMap m;
    m.M = mat_from_json_rows(j["gradient_affine"].at("M"));
    m.offset = vec_from_json(j["gradient_affine"].at("offset"));
    g.gradient.affine = m;
    const Matrix M = m.M;
    const Vector off = m.offset;
    g.gradient.eval = [M, off](const VectorRef& x) -> Vector { return M * x + off; };
  }
  g.validate();
  return g;
}

}  // namespace congame
