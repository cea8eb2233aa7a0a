#include "congame/theory.hpp"

#include <cmath>

#include "congame/errors.hpp"
#include "congame/rng.hpp"
#include "congame/serialize.hpp"

namespace congame {

namespace {

double linear_max_over_set(const ActionSetDescriptor& set, const VectorRef& w) {
  switch (set.kind) {
    case ActionSetKind::simplex:
      return w.maxCoeff();
    case ActionSetKind::box:
      return w.cwiseProduct(set.upper).cwiseMax(w.cwiseProduct(set.lower)).sum();
    case ActionSetKind::polytope_enum:
      return (set.vertices * w).maxCoeff();
  }
  throw InvalidArgument("unknown action set kind");
}

// Exact max of <w, x> over the product of action sets (blockwise).
double joint_linear_max(const GameSpec& g, const VectorRef& w) {
  const auto off = g.block_offsets();
  double s = 0;
  for (Index i = 0; i < g.n_players; ++i)
    s += linear_max_over_set(g.action_sets[i], w.segment(off[i], g.dims[i]));
  return s;
}

// max over x of |<w, x> + offset|.
double row_abs_max(const GameSpec& g, const VectorRef& w, double offset) {
  const double hi = joint_linear_max(g, w) + offset;
  const double lo = -joint_linear_max(g, -w) + offset;
  return std::max(std::abs(hi), std::abs(lo));
}

double block_operator_constant(const ActionSetDescriptor& set, const MatrixRef& Ai) {
  if (set.kind == ActionSetKind::simplex) {
    double m = 0;
    for (Index k = 0; k < Ai.cols(); ++k) m = std::max(m, Ai.col(k).norm());
    return m;
  }
  Eigen::JacobiSVD<Matrix> svd(Ai);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

// Max dual norm of the affine gradient over the action sets. Exact on
// l-infinity (simplex) blocks, row-wise certified on l2 blocks.
double max_dual_gradient_norm(const GameSpec& g, const AffineMap& aff) {
  const auto off = g.block_offsets();
  double c2 = 0;
  for (Index i = 0; i < g.n_players; ++i) {
    const bool linf = g.action_sets[i].kind == ActionSetKind::simplex;
    double block_val = 0;
    double sq_sum = 0;
    for (Index k = 0; k < g.dims[i]; ++k) {
      const Index row = off[i] + k;
      const double m = row_abs_max(g, aff.M.row(row).transpose(), aff.offset[row]);
      if (linf)
        block_val = std::max(block_val, m);
      else
        sq_sum += m * m;
    }
    if (!linf) block_val = std::sqrt(sq_sum);
    c2 = std::max(c2, block_val);
  }
  return c2;
}

double product_vertex_count(const GameSpec& g) {
  double total = 1;
  for (const auto& s : g.action_sets) {
    double n = 0;
    switch (s.kind) {
      case ActionSetKind::simplex:
        n = double(s.dim);
        break;
      case ActionSetKind::box:
        n = std::pow(2.0, double(s.dim));
        break;
      case ActionSetKind::polytope_enum:
        n = double(s.vertices.rows());
        break;
    }
    total *= n;
    if (total > 1e18) return total;
  }
  return total;
}

double max_congestion_norm(const GameSpec& g) {
  const Matrix& A = g.resources.A;
  const Vector& b = g.resources.b;
  const auto off = g.block_offsets();

  const double count = product_vertex_count(g);
  if (count <= 1e6) {
    // Exact: the norm is convex, so the max sits on a joint vertex.
    std::vector<Matrix> pts;
    pts.reserve(g.n_players);
    for (const auto& s : g.action_sets) pts.push_back(s.extreme_points());
    std::vector<Index> idx(g.n_players, 0);
    Vector x(g.total_dim());
    double best = 0;
    while (true) {
      for (Index i = 0; i < g.n_players; ++i)
        x.segment(off[i], g.dims[i]) = pts[i].row(idx[i]).transpose();
      best = std::max(best, (A * x - b).norm());
      Index i = 0;
      for (; i < g.n_players; ++i) {
        if (++idx[i] < pts[i].rows()) break;
        idx[i] = 0;
      }
      if (i == g.n_players) break;
    }
    return best;
  }

  // Identical simplex blocks: the block sum ranges over a scaled simplex,
  // so the max is exact over its n*e_k vertices.
  bool identical_simplex = true;
  for (Index i = 0; i < g.n_players && identical_simplex; ++i) {
    if (g.action_sets[i].kind != ActionSetKind::simplex || g.dims[i] != g.dims[0])
      identical_simplex = false;
    else if ((A.middleCols(off[i], g.dims[i]) - A.middleCols(0, g.dims[0]))
                 .cwiseAbs()
                 .maxCoeff() != 0.0)
      identical_simplex = false;
  }
  if (identical_simplex) {
    const double n = double(g.n_players);
    double best = 0;
    for (Index k = 0; k < g.dims[0]; ++k)
      best = std::max(best, (n * A.col(k) - b).norm());
    return best;
  }

  // Fallback: certified row-interval bound.
  double sq = 0;
  for (Index r = 0; r < A.rows(); ++r) {
    const double m = row_abs_max(g, A.row(r).transpose(), -b[r]);
    sq += m * m;
  }
  return std::sqrt(sq);
}

}  // namespace

GameConstants compute_constants(const GameSpec& game, const std::vector<Regularizer>& regs) {
  game.validate();
  if (static_cast<Index>(regs.size()) != game.n_players)
    throw DimensionError("regularizers", game.n_players, static_cast<Index>(regs.size()));
  if (!game.gradient.affine)
    throw InvalidArgument(
        "constant calculator needs the gradient's affine map; supply GradientOracle.affine");

  GameConstants c;
  const auto off = game.block_offsets();

  c.K = std::numeric_limits<double>::infinity();
  c.delta_psi = 0;
  for (Index i = 0; i < game.n_players; ++i) {
    if (regs[i].dimension() != game.dims[i])
      throw DimensionError("regularizer of player " + std::to_string(i), game.dims[i],
                           regs[i].dimension());
    c.K = std::min(c.K, regs[i].strong_convexity());
    c.delta_psi += regs[i].psi_range();
  }

  c.C1 = 0;
  for (Index i = 0; i < game.n_players; ++i)
    c.C1 = std::max(c.C1, block_operator_constant(game.action_sets[i],
                                                  game.resources.A.middleCols(off[i], game.dims[i])));

  c.C2 = max_dual_gradient_norm(game, *game.gradient.affine);
  c.C3 = max_congestion_norm(game);
  c.C_tilde1 = 2.0 * (c.C2 * c.C2 / c.K + 2.0 * c.C3 * c.C3);
  c.C_tilde2 = 1.0;
  c.sigma_star2 = game.noise.kind == NoiseKind::custom
                      ? std::numeric_limits<double>::quiet_NaN()
                      : noise_second_moment_bound(game);
  return c;
}

bool trackability_check(double gamma, double eta, const GameConstants& c) {
  if (!(gamma >= 0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be finite and >= 0");
  if (!(eta >= 0) || !std::isfinite(eta)) throw InvalidArgument("eta must be finite and >= 0");
  const long double e = eta, g = gamma, C1 = c.C1, K = c.K;
  const long double lhs = e * e - e / 4.0L + g * g * C1 * C1 / (4.0L * K);
  return lhs <= 0.0L;
}

std::optional<std::pair<double, double>> eta_interval(double gamma, const GameConstants& c) {
  if (!(gamma >= 0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be finite and >= 0");
  const long double g = gamma, C1 = c.C1, K = c.K;
  const long double q = g * g * C1 * C1 / (4.0L * K);
  const long double disc = 1.0L / 16.0L - 4.0L * q;
  if (disc < 0.0L) return std::nullopt;
  const long double root = std::sqrt(disc);
  const long double hi = (0.25L + root) / 2.0L;
  const long double lo = hi > 0.0L ? q / hi : 0.0L;  // product of roots = q
  return std::make_pair(double(lo), double(hi));
}

double gamma_threshold(const GameConstants& c) {
  if (c.C1 <= 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(c.K) / (4.0 * c.C1);
}

bool violation_bound_applies(const ScheduleSet& schedules, Index t, const GameConstants& c,
                             Index* failing_step) {
  for (Index tau = 0; tau < t; ++tau) {
    const double beta = schedules.beta.at(tau);
    const double g = schedules.gamma.at(tau);
    const double z = schedules.zeta.at(tau);
    const double e = schedules.eta.at(tau);
    const bool ok = std::abs(beta - 2.0) <= 2e-12 &&
                    std::abs(z - g) <= 1e-12 * std::max({std::abs(g), std::abs(z), 1e-300}) &&
                    trackability_check(g, e, c);
    if (!ok) {
      if (failing_step) *failing_step = tau;
      return false;
    }
  }
  return true;
}

double violation_bound(Index t, const ScheduleSet& schedules, const GameConstants& c,
                       const std::function<double(Index)>& noise_second_moment) {
  if (t < 1) throw InvalidArgument("bound needs t >= 1");
  std::function<double(Index)> sm = noise_second_moment;
  if (!sm) {
    if (std::isnan(c.sigma_star2))
      throw InvalidArgument("no noise second moment available; pass one explicitly");
    const double s2 = c.sigma_star2;
    sm = [s2](Index) { return s2; };
  }

  Index bad = -1;
  if (!violation_bound_applies(schedules, t, c, &bad))
    throw HypothesisError(
        "bound hypotheses fail at step " + std::to_string(bad) +
            " (needs beta == 2, zeta == gamma, and the trackability check)",
        bad);

  long double eta_bar = 1.0L, sum_g2 = 0.0L, sum_noise = 0.0L;
  for (Index tau = 0; tau < t; ++tau) {
    const double g = schedules.gamma.at(tau);
    const double e = schedules.eta.at(tau);
    eta_bar += e;
    sum_g2 += static_cast<long double>(g) * g;
    sum_noise += static_cast<long double>(g) * g * sm(tau);
  }

  const long double lin =
      2.0L * eta_bar * (static_cast<long double>(c.delta_psi) + c.C_tilde1 * sum_g2);
  const long double quad = eta_bar * eta_bar *
                           (static_cast<long double>(c.C_tilde2) * c.C_tilde2 +
                            (4.0L / c.K) * sum_noise);
  return double(lin + quad);
}

double KktResidual::max_residual() const {
  return std::max({stationarity, feasibility, complementarity});
}

KktResidual kkt_residual(const VectorRef& x, const VectorRef& lambda, const GameSpec& game) {
  if (x.size() != game.total_dim())
    throw DimensionError("kkt point", game.total_dim(), x.size());
  if (lambda.size() != game.resources.A.rows())
    throw DimensionError("kkt multiplier", game.resources.A.rows(), lambda.size());
  const Vector v = game.gradient.eval(x);
  const Vector walk = x + v - game.resources.A.transpose() * lambda;
  KktResidual r;
  r.stationarity = (x - project_all(game, walk)).norm();
  const Vector slack = congestion(x, game.resources);
  r.feasibility = slack.cwiseMax(0.0).norm();
  r.complementarity = std::abs(lambda.dot(slack));
  return r;
}

namespace {

Vector center_point(const GameSpec& g) {
  Vector x(g.total_dim());
  const auto off = g.block_offsets();
  for (Index i = 0; i < g.n_players; ++i) {
    const auto& s = g.action_sets[i];
    switch (s.kind) {
      case ActionSetKind::simplex:
        x.segment(off[i], s.dim).setConstant(1.0 / double(s.dim));
        break;
      case ActionSetKind::box:
        x.segment(off[i], s.dim) = 0.5 * (s.lower + s.upper);
        break;
      case ActionSetKind::polytope_enum:
        x.segment(off[i], s.dim) = s.vertices.colwise().mean().transpose();
        break;
    }
  }
  return x;
}

double set_diameter(const GameSpec& g) {
  double sq = 0;
  for (const auto& s : g.action_sets) {
    switch (s.kind) {
      case ActionSetKind::simplex:
        sq += 2.0;
        break;
      case ActionSetKind::box:
        sq += (s.upper - s.lower).squaredNorm();
        break;
      case ActionSetKind::polytope_enum: {
        double d = 0;
        for (Index a = 0; a < s.vertices.rows(); ++a)
          for (Index bb = a + 1; bb < s.vertices.rows(); ++bb)
            d = std::max(d, (s.vertices.row(a) - s.vertices.row(bb)).norm());
        sq += d * d;
        break;
      }
    }
  }
  return std::sqrt(sq);
}

Vector random_feasible(const GameSpec& g, RngStream& rng) {
  Vector x(g.total_dim());
  for (Index k = 0; k < x.size(); ++k) x[k] = rng.gaussian();
  return project_all(g, x);
}

}  // namespace

VISolution solve_constrained_vi(const GameSpec& game, const VIOptions& opts) {
  game.validate();
  if (!game.gradient.eval) throw InvalidArgument("solver needs a gradient oracle");
  const Matrix& A = game.resources.A;
  const Vector& b = game.resources.b;
  const Index R = A.rows();

  RngStream rng(opts.seed);

  double grad_scale = 0;
  if (game.gradient.affine) {
    grad_scale = max_dual_gradient_norm(game, *game.gradient.affine);
  } else {
    for (int k = 0; k < 64; ++k)
      grad_scale = std::max(grad_scale, game.gradient.eval(random_feasible(game, rng)).norm());
  }
  double cap = opts.dual_cap > 0 ? opts.dual_cap : 2.0 * (grad_scale * set_diameter(game) + 1.0);

  auto op = [&](const Vector& x, const Vector& lam, Vector& gx, Vector& gl) {
    gx = game.gradient.eval(x) - A.transpose() * lam;
    gl = A * x - b;
  };

  // Local Lipschitz estimate from random feasible pairs.
  double L = 1e-12;
  {
    Vector gx1(game.total_dim()), gl1(R), gx2(game.total_dim()), gl2(R);
    for (int k = 0; k < 50; ++k) {
      const Vector xa = random_feasible(game, rng), xb = random_feasible(game, rng);
      Vector la(R), lb(R);
      for (Index r = 0; r < R; ++r) {
        la[r] = cap * rng.uniform();
        lb[r] = cap * rng.uniform();
      }
      op(xa, la, gx1, gl1);
      op(xb, lb, gx2, gl2);
      const double dz = std::sqrt((xa - xb).squaredNorm() + (la - lb).squaredNorm());
      if (dz < 1e-12) continue;
      const double dop = std::sqrt((gx1 - gx2).squaredNorm() + (gl1 - gl2).squaredNorm());
      L = std::max(L, dop / dz);
    }
  }
  double step = 0.5 / L;
  const double step_floor = 1e-8 / L;

  Vector x = center_point(game);
  Vector lam = Vector::Zero(R);
  Vector gx(game.total_dim()), gl(R);

  KktResidual res = kkt_residual(x, lam, game);
  double best = res.max_residual();
  Index since_best = 0;
  int doublings = 0;

  for (Index iter = 1; iter <= opts.max_iters; ++iter) {
    op(x, lam, gx, gl);
    const Vector xh = project_all(game, x + step * gx);
    const Vector lh = (lam + step * gl).cwiseMax(0.0).cwiseMin(cap);
    op(xh, lh, gx, gl);
    x = project_all(game, x + step * gx);
    lam = (lam + step * gl).cwiseMax(0.0).cwiseMin(cap);

    if (!all_finite(x) || !all_finite(lam))
      throw NumericalError("solver state became non-finite");

    if (iter % 10 == 0 || iter == opts.max_iters) {
      res = kkt_residual(x, lam, game);
      const double r = res.max_residual();
      if (r < best) {
        best = r;
        since_best = 0;
      } else if (++since_best >= 50) {
        step = std::max(0.5 * step, step_floor);
        since_best = 0;
      }
      if (R > 0 && lam.maxCoeff() >= 0.95 * cap && doublings < 10) {
        cap *= 2;
        ++doublings;
        best = std::numeric_limits<double>::infinity();
        continue;
      }
      if (r <= opts.tol) {
        VISolution sol;
        sol.x_star = x;
        sol.lambda_star = lam;
        sol.residuals = res;
        sol.iterations = iter;
        sol.dual_cap = cap;
        return sol;
      }
    }
  }
  throw ConvergenceError("primal-dual solver hit the iteration limit", res.stationarity,
                         res.feasibility, res.complementarity, opts.max_iters);
}

double noise_second_moment_bound(const GameSpec& game) {
  switch (game.noise.kind) {
    case NoiseKind::none:
      return 0.0;
    case NoiseKind::gaussian_iid: {
      const double D = double(game.total_dim());
      bool all_simplex = true;
      for (const auto& s : game.action_sets)
        if (s.kind != ActionSetKind::simplex) all_simplex = false;
      const double s2 = game.noise.sigma * game.noise.sigma;
      if (all_simplex) {
        // max_k |g_k| over D iid standard normals: E max <= sqrt(2 ln 2D),
        // Var <= 1, so E max^2 <= 2 ln(2D) + 1; never worse than E ||g||^2 = D.
        return s2 * std::min(D, 2.0 * std::log(2.0 * D) + 1.0);
      }
      return s2 * D;
    }
    case NoiseKind::custom:
      throw InvalidArgument("no certified second moment for custom noise");
  }
  throw InvalidArgument("unknown noise kind");
}

nlohmann::json constants_to_json(const GameConstants& c) {
  return {{"C1", c.C1},         {"C2", c.C2},
          {"C3", c.C3},         {"K", c.K},
          {"delta_psi", c.delta_psi}, {"C_tilde1", c.C_tilde1},
          {"C_tilde2", c.C_tilde2},   {"sigma_star2", c.sigma_star2}};
}

GameConstants constants_from_json(const nlohmann::json& j) {
  GameConstants c;
  c.C1 = j.at("C1").get<double>();
  c.C2 = j.at("C2").get<double>();
  c.C3 = j.at("C3").get<double>();
  c.K = j.at("K").get<double>();
  c.delta_psi = j.at("delta_psi").get<double>();
  c.C_tilde1 = j.at("C_tilde1").get<double>();
  c.C_tilde2 = j.at("C_tilde2").get<double>();
  c.sigma_star2 = j.value("sigma_star2", 0.0);
  return c;
}

nlohmann::json vi_solution_to_json(const VISolution& s) {
  return {{"x_star", vec_to_json(s.x_star)},
          {"lambda_star", vec_to_json(s.lambda_star)},
          {"residuals",
           {{"stationarity", s.residuals.stationarity},
            {"feasibility", s.residuals.feasibility},
            {"complementarity", s.residuals.complementarity}}},
          {"iterations", s.iterations},
          {"dual_cap", s.dual_cap}};
}

}  // namespace congame
