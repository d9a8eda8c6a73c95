#include "voltlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

#include "voltlab/conv_algebra.hpp"
#include "voltlab/dynamics.hpp"
#include "voltlab/expr.hpp"
#include "voltlab/fnspace.hpp"
#include "voltlab/io.hpp"
#include "voltlab/operators.hpp"
#include "voltlab/opspec.hpp"
#include "voltlab/pipeline.hpp"
#include "voltlab/probes.hpp"
#include "voltlab/rng.hpp"
#include "voltlab/sampling.hpp"
#include "voltlab/weakclosure.hpp"
#include "voltlab/witness.hpp"

namespace voltlab {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config access with ConfigError on every failure mode.
// ---------------------------------------------------------------------------

[[noreturn]] void cfg_fail(const std::string& what) { throw ConfigError(what); }

const json& require_key(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    cfg_fail(std::string("missing required key '") + key + "'");
  }
  return j.at(key);
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return require_key(j, key).get<T>();
  } catch (const json::exception& e) {
    cfg_fail(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    cfg_fail(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) cfg_fail("config must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) cfg_fail("unknown config key '" + item.key() + "'");
  }
}

// A number-or-expression field ("0.15" and 0.15 and "2*pi*(sqrt(2)-1)" all work).
double numeric_field(const json& v, const char* what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return evaluate_expression(v.get<std::string>(), 0.0);
    } catch (const std::invalid_argument& e) {
      cfg_fail(std::string("bad ") + what + ": " + e.what());
    }
  }
  cfg_fail(std::string("bad ") + what + ": expected number or expression string");
}

// Sample-norm exponent: a number >= 1 or the string "inf".
double p_field(const json& cfg, const char* key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "Inf")) {
    return std::numeric_limits<double>::infinity();
  }
  const double p = numeric_field(v, key);
  if (!(p >= 1.0)) cfg_fail(std::string("bad ") + key + ": need p >= 1");
  return p;
}

// ---------------------------------------------------------------------------
// Shared context: assertions, metrics, artifacts.
// ---------------------------------------------------------------------------

struct Ctx {
  json cfg;
  std::string name;
  std::string kind;
  std::uint64_t seed = 0;
  int grid_n = 0;  // 0 when the scenario has no grid
  json metrics = json::object();
  std::vector<AssertionRow> assertions;
  std::vector<std::pair<std::string, std::string>> artifacts;  // name -> content

  void add(const std::string& name_, const std::string& anchor, double measured,
           double tolerance, bool pass) {
    assertions.push_back({name_, anchor, measured, tolerance, pass});
  }
  // measured <= tolerance
  void check_le(const std::string& name_, const std::string& anchor, double measured,
                double tolerance) {
    add(name_, anchor, measured, tolerance, measured <= tolerance);
  }
  // measured >= floor
  void check_ge(const std::string& name_, const std::string& anchor, double measured,
                double floor) {
    add(name_, anchor, measured, floor, measured >= floor);
  }

  // Grid size resolution order: --grid override, config "grid", fallback.
  // The resolved value is stored back so summary.json records what ran.
  int resolve_n(int fallback = 256) {
    if (grid_n == 0) grid_n = fallback;
    return grid_n;
  }
  Grid resolved_grid(int fallback = 256) { return Grid(resolve_n(fallback)); }
};

// ---------------------------------------------------------------------------
// Builders for starts and functionals.
// ---------------------------------------------------------------------------

Vec build_vector(const std::string& spec, int dim, const Grid* g, std::uint64_t seed,
                 std::uint16_t domain, std::uint32_t index) {
  if (spec == "ones") return Vec::Ones(dim);
  if (spec.rfind("basis:", 0) == 0) {
    const int k = std::atoi(spec.c_str() + 6);
    if (k < 0 || k >= dim) cfg_fail("basis index out of range in '" + spec + "'");
    Vec v = Vec::Zero(dim);
    v[k] = 1.0;
    return v;
  }
  if (spec == "seeded") {
    RandomStream rs(seed, StreamId{domain, 0, index});
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rs.normal(std::uint64_t(i));
    return v;
  }
  if (spec == "seeded_smooth") {
    if (g == nullptr) cfg_fail("'seeded_smooth' needs a grid-based operator");
    return seeded_smooth_field(*g, seed, StreamDomain(domain), 0, index);
  }
  if (g != nullptr) {
    try {
      return evaluate_expression(spec, g->nodes());
    } catch (const std::invalid_argument& e) {
      cfg_fail(std::string("bad vector expression: ") + e.what());
    }
  }
  cfg_fail("vector spec '" + spec + "' needs a grid-based operator");
}

std::vector<Vec> build_functionals(const json& list, int dim, const Grid* g,
                                   std::uint64_t seed) {
  std::vector<Vec> fs;
  if (!list.is_array()) cfg_fail("'functionals' must be an array");
  std::uint32_t seeded_index = 0;
  for (const json& item : list) {
    const std::string spec = item.is_string() ? item.get<std::string>() : std::string();
    if (spec.empty()) cfg_fail("functional entries must be strings");
    if (spec.rfind("seeded:", 0) == 0) {
      const int count = std::atoi(spec.c_str() + 7);
      if (count < 1) cfg_fail("bad seeded functional count in '" + spec + "'");
      for (int t = 0; t < count; ++t) {
        fs.push_back(build_vector("seeded", dim, g, seed, kFunctionalData, seeded_index++));
      }
      continue;
    }
    fs.push_back(build_vector(spec, dim, g, seed, kFunctionalData, seeded_index++));
  }
  if (fs.empty()) cfg_fail("'functionals' must not be empty");
  return fs;
}

// Random smooth positive-leaning kernel: low-order cosine series with seeded
// gaussian coefficients, offset to stay away from zero mean.
Vec seeded_smooth_kernel(Grid g, std::uint64_t seed, std::uint32_t index) {
  return seeded_smooth_field(g, seed, kKernelData, 0, index);
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

void run_verify_volterra_calculus(Ctx& ctx, const json& cfg) {
  const int powers = get_or(cfg, "powers", 8);
  const double tol = get_or(cfg, "tolerance", 5e-3);
  const bool halving = get_or(cfg, "halving", true);
  std::vector<double> points = get_or(cfg, "points", std::vector<double>{0.1, 0.25, 0.5, 0.75});
  const double band_lo = get_or(cfg, "halving_band_low", 0.4);
  const double band_hi = get_or(cfg, "halving_band_high", 0.6);
  if (powers < 1) cfg_fail("'powers' must be >= 1");

  auto max_err = [&](int n_nodes) {
    Grid g(n_nodes);
    const LinOp<double> v = volterra(g);
    Vec f = Vec::Ones(g.n);
    double fact = 1.0;
    double worst = 0.0;
    for (int n = 1; n <= powers; ++n) {
      f = v.apply(f);
      fact *= n;
      for (double pt : points) {
        const int i = std::min(g.n - 1, int(std::lround(pt / g.h)));
        const double x = g.node(i);
        const double exact = std::pow(x, n) / fact;
        if (exact == 0.0) continue;
        worst = std::max(worst, std::abs(f[i] - exact) / exact);
      }
    }
    return worst;
  };

  const int base_n = ctx.resolve_n();
  const double e1 = max_err(base_n);
  ctx.metrics["max_rel_error"] = e1;
  ctx.check_le("power_calculus_error", "power-calculus", e1, tol);
  if (halving) {
    const double e2 = max_err(2 * base_n);
    const double ratio = e2 / e1;
    ctx.metrics["max_rel_error_refined"] = e2;
    ctx.metrics["halving_ratio"] = ratio;
    ctx.check_le("halving_ratio_upper", "halving-order", ratio, band_hi);
    ctx.check_ge("halving_ratio_lower", "halving-order", ratio, band_lo);
  }
}

void run_verify_commutator_calculus(Ctx& ctx, const json& cfg) {
  const int count = get_or(cfg, "count", 4);
  Grid g = ctx.resolved_grid();

  double star_comm = 0.0, matrix_product = 0.0, op_comm = 0.0;
  double assoc_exact = 0.0, assoc_generic = 0.0;
  for (int t = 0; t < count; ++t) {
    RandomStream rs(ctx.seed, StreamId{kKernelData, std::uint16_t(t), 0});
    Vec a(g.n), b(g.n), c(g.n), ai(g.n), bi(g.n), ci(g.n);
    for (int i = 0; i < g.n; ++i) {
      a[i] = rs.normal(std::uint64_t(3 * i));
      b[i] = rs.normal(std::uint64_t(3 * i + 1));
      c[i] = rs.normal(std::uint64_t(3 * i + 2));
      ai[i] = std::round(8.0 * a[i]);
      bi[i] = std::round(8.0 * b[i]);
      ci[i] = std::round(8.0 * c[i]);
    }
    const ConvElement<double> ea(g, a), eb(g, b), ec(g, c);
    star_comm = std::max(star_comm,
                         (star(ea, eb).coeffs - star(eb, ea).coeffs).cwiseAbs().maxCoeff());
    matrix_product = std::max(
        matrix_product,
        ((conv_matrix(ea) * conv_matrix(eb)).mat - conv_matrix(star(ea, eb)).mat)
            .cwiseAbs()
            .maxCoeff());
    op_comm = std::max(op_comm, commutator(conv_matrix(ea), conv_matrix(eb)).max_abs());
    const ConvElement<double> ia(g, ai), ib(g, bi), ic(g, ci);
    assoc_exact = std::max(assoc_exact, (star(star(ia, ib), ic).coeffs -
                                         star(ia, star(ib, ic)).coeffs)
                                            .cwiseAbs()
                                            .maxCoeff());
    const Vec lhs = star(star(ea, eb), ec).coeffs;
    const Vec rhs = star(ea, star(eb, ec)).coeffs;
    const double scale = std::max(lhs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff());
    if (scale > 0.0) {
      assoc_generic = std::max(assoc_generic, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
    }
  }

  const LinOp<double> v = volterra(g);
  const LinOp<double> m = mult_by_x(g);
  const double square_identity =
      (v * v - g.h * v - commutator(m, v)).max_abs();
  // [M, V] equals convolution by the coordinate kernel, entry for entry.
  const double coordinate_gap =
      (commutator(m, v) - conv_matrix(ConvElement<double>(g, g.nodes())))
          .frobenius();

  // Against the continuum model the bracket is the square of the integration
  // operator up to one mesh step: ||[M,V] - V^2|| = h ||V|| exactly.
  double continuum_worst = 0.0;
  {
    std::vector<int> grids;
    if (cfg.contains("grids")) {
      for (const json& gv : cfg.at("grids")) grids.push_back(gv.get<int>());
    } else {
      grids = {g.n};
    }
    for (int n_nodes : grids) {
      Grid gc(n_nodes);
      const LinOp<double> vc = volterra(gc);
      const LinOp<double> mc = mult_by_x(gc);
      const double gap = (commutator(mc, vc) - vc * vc).frobenius();
      continuum_worst = std::max(continuum_worst, gap / (gc.h * vc.frobenius()));
    }
  }

  ctx.metrics["star_commutativity"] = star_comm;
  ctx.metrics["matrix_product_gap"] = matrix_product;
  ctx.metrics["square_identity"] = square_identity;
  ctx.metrics["coordinate_kernel_gap"] = coordinate_gap;
  ctx.metrics["continuum_ratio_worst"] = continuum_worst;
  ctx.check_le("star_commutativity", "exact-commutation", star_comm, 0.0);
  ctx.check_le("kernel_matrix_product", "kernel-matrix-product", matrix_product, 0.0);
  ctx.check_le("operator_commutator", "exact-commutation", op_comm, 0.0);
  ctx.check_le("square_minus_h_identity", "square-bracket-identity", square_identity, 0.0);
  ctx.check_le("coordinate_kernel_identity", "square-bracket-identity",
               coordinate_gap, 1e-13);
  ctx.check_le("continuum_commutator_ratio", "square-bracket-identity",
               continuum_worst, 1.5);
  ctx.check_le("associativity_exact_inputs", "star-associativity", assoc_exact, 0.0);
  ctx.check_le("associativity_generic", "star-associativity", assoc_generic,
               get_or(cfg, "assoc_tolerance", 5e-14));
}

void run_verify_derivation(Ctx& ctx, const json& cfg) {
  const std::string op_spec = get_or<std::string>(cfg, "operator", "V");
  const int n_max = get_or(cfg, "n_max", 10);
  const double tol = get_or(cfg, "tolerance", 1e-11);
  Grid g = ctx.resolved_grid();
  const ParsedOperator op = parse_operator(op_spec, g);
  if (op.complex_valued) cfg_fail("derivation check needs a real operator");

  LinOp<double> m = op_spec.rfind("shift_example", 0) == 0
                        ? shift_example(op.real_op.dim()).M
                        : mult_by_x(g);
  const DerivationReport rep = derivation_identity_report(op.real_op, m, n_max);
  double worst = 0.0;
  for (const auto& row : rep.rows) worst = std::max(worst, row.relative);
  ctx.metrics["worst_relative_residual"] = worst;
  ctx.metrics["canonicalization_deviation"] = rep.canonicalization_deviation;
  ctx.metrics["commutation_defect"] = rep.commutation_defect;
  ctx.check_le("derivation_residual", "derivation-identity", worst, tol);
}

void run_verify_leibniz(Ctx& ctx, const json& cfg) {
  const int count = get_or(cfg, "count", 4);
  const double tol = get_or(cfg, "tolerance", 1e-13);
  Grid g = ctx.resolved_grid();
  double worst = 0.0;
  for (int t = 0; t < count; ++t) {
    RandomStream rs(ctx.seed, StreamId{kKernelData, std::uint16_t(t), 1});
    Vec a(g.n), b(g.n);
    for (int i = 0; i < g.n; ++i) {
      a[i] = rs.normal(std::uint64_t(2 * i));
      b[i] = rs.normal(std::uint64_t(2 * i + 1));
    }
    worst = std::max(worst, leibniz_residual(ConvElement<double>(g, a),
                                             ConvElement<double>(g, b)));
  }
  ctx.metrics["worst_relative_residual"] = worst;
  ctx.check_le("pointwise_weight_derivation", "leibniz-derivation", worst, tol);
}

void run_verify_intertwining(Ctx& ctx, const json& cfg) {
  const std::string weight_expr = get_as<std::string>(cfg, "weight");
  const double tol = get_or(cfg, "tolerance", 0.25);
  const bool refine = get_or(cfg, "refine", true);
  const bool mass_corrected = get_or(cfg, "mass_corrected", true);
  const double band_lo = get_or(cfg, "halving_band_low", 0.35);
  const double band_hi = get_or(cfg, "halving_band_high", 0.80);

  auto residual = [&](int n_nodes, json* info) {
    Grid g(n_nodes);
    const Vec w = evaluate_expression(weight_expr, g.nodes());
    const Intertwiner itw = intertwiner(g, w);
    const LinOp<double> tw = weighted_volterra_left(g, w);
    const LinOp<double> vj = volterra(g) * itw.J;
    const double scale = mass_corrected ? itw.mass : 1.0;
    const Mat diff = (itw.J * tw).mat - scale * vj.mat;
    if (info) {
      (*info)["mass"] = itw.mass;
      (*info)["guard_rows"] = itw.guard_rows;
    }
    return diff.norm() / (scale * vj.mat.norm());
  };

  json info;
  const int base_n = ctx.resolve_n();
  const double r1 = residual(base_n, &info);
  ctx.metrics.update(info);
  ctx.metrics["relative_residual"] = r1;
  ctx.check_le("intertwining_residual", "intertwining-residual", r1, tol);
  if (refine) {
    const double r2 = residual(2 * base_n, nullptr);
    const double ratio = r2 / r1;
    ctx.metrics["relative_residual_refined"] = r2;
    ctx.metrics["halving_ratio"] = ratio;
    ctx.check_le("intertwining_halving_upper", "intertwining-order", ratio, band_hi);
    ctx.check_ge("intertwining_halving_lower", "intertwining-order", ratio, band_lo);
  }
}

// Raw change-of-variables residual on the monomial basis: for each grid in
// the list, C(N) = max_{k<=degrees} ||(J T_w - V J) x^k||_1 / h. First-order
// convergence shows up as C(N) staying inside a fixed band while h shrinks.
void run_verify_intertwining_basis(Ctx& ctx, const json& cfg) {
  const std::string weight_expr = get_as<std::string>(cfg, "weight");
  const int degrees = get_or(cfg, "degrees", 5);
  const double band = get_or(cfg, "stability_band", 4.0);
  std::vector<int> grids;
  if (cfg.contains("grids")) {
    for (const json& v : cfg.at("grids")) grids.push_back(v.get<int>());
  } else {
    grids = {512, 1024, 2048};
  }
  if (grids.empty()) cfg_fail("intertwining_basis: empty grid list");

  double c_min = std::numeric_limits<double>::infinity(), c_max = 0.0;
  for (int n_nodes : grids) {
    Grid g(n_nodes);
    const Vec w = evaluate_expression(weight_expr, g.nodes());
    const Intertwiner itw = intertwiner(g, w);
    const LinOp<double> tw = weighted_volterra_left(g, w);
    const LinOp<double> v = volterra(g);
    double c_grid = 0.0;
    Vec mono = Vec::Ones(g.n);
    for (int k = 0; k <= degrees; ++k) {
      if (k > 0) {
        for (int i = 0; i < g.n; ++i) mono[i] *= g.node(i);
      }
      const Vec resid = itw.J.apply(tw.apply(mono)) - v.apply(itw.J.apply(mono));
      c_grid = std::max(c_grid, lp_norm(resid, 1.0, g.h) / g.h);
    }
    ctx.metrics["c_" + std::to_string(n_nodes)] = c_grid;
    c_min = std::min(c_min, c_grid);
    c_max = std::max(c_max, c_grid);
  }
  ctx.metrics["c_band_ratio"] = c_max / c_min;
  ctx.check_le("basis_residual_stability", "intertwining-order", c_max / c_min, band);
  if (cfg.contains("bound")) {
    ctx.check_le("basis_residual_constant", "intertwining-residual", c_max,
                 get_as<double>(cfg, "bound"));
  }
}

// Both association orders of mult(w) . V . mult(w) must agree; on dyadic
// grids with w = 2x every entry is exactly 4 i j h^3 in either order.
void run_verify_conjugation(Ctx& ctx, const json& cfg) {
  const std::string weight_expr = get_as<std::string>(cfg, "weight");
  const double tol = get_or(cfg, "tolerance", 0.0);
  Grid g = ctx.resolved_grid();
  const Vec w = evaluate_expression(weight_expr, g.nodes());
  const LinOp<double> mw = mult_by(g, w);
  const Mat lhs = (mw * weighted_volterra_right(g, w)).mat;
  const Mat rhs = (weighted_volterra_left(g, w) * mw).mat;
  const double gap = (lhs - rhs).cwiseAbs().maxCoeff();
  ctx.metrics["conjugation_gap"] = gap;
  ctx.check_le("conjugation_exact", "conjugation-identity", gap, tol);
}

void run_verify_quasinilpotency(Ctx& ctx, const json& cfg) {
  const std::string op_spec = get_or<std::string>(cfg, "operator", "V");
  const int n = get_or(cfg, "n", 30);
  const double bound = get_or(cfg, "bound", 0.15);
  const double p = p_field(cfg, "p", 2.0);
  Grid g = ctx.resolved_grid();
  const ParsedOperator op = parse_operator(op_spec, g);
  if (op.complex_valued) cfg_fail("quasinilpotency check needs a real operator");
  const Vec x0 = build_vector(get_or<std::string>(cfg, "start", "ones"), op.real_op.dim(),
                              op.weight == 1.0 ? nullptr : &g, ctx.seed, kStartVector, 0);
  const Orbit<double> orb = orbit(op.real_op, x0, p, op.weight, n);
  const std::vector<double> r = root_norm_gauge(orb);
  if (r.size() < std::size_t(n)) cfg_fail("orbit terminated before the requested step");
  ctx.metrics["root_norm_final"] = r.back();
  ctx.check_le("root_norm_gauge", "root-norm-decay", r.back(), bound);
}

void run_verify_primitive_derivative(Ctx& ctx, const json& cfg) {
  const int count = get_or(cfg, "count", 3);
  const int order = get_or(cfg, "order", 1);
  const double tol = get_or(cfg, "tolerance", order == 1 ? 1e-12 : 0.01);
  if (order != 1 && order != 2) cfg_fail("primitive_derivative: order must be 1 or 2");
  Grid g = ctx.resolved_grid();
  const LinOp<double> v = volterra(g);
  double worst = 0.0;
  for (int t = 0; t < count; ++t) {
    RandomStream rs(ctx.seed, StreamId{kStartVector, std::uint16_t(t), 1});
    Vec f(g.n);
    for (int i = 0; i < g.n; ++i) f[i] = rs.normal(std::uint64_t(i));
    double lhs = 0.0, rhs = 0.0;
    if (order == 1) {
      // Forward differences of the cumulative sum recover the integrand
      // shifted by one node: an exact discrete identity.
      const RealFn vf(g, v.apply(f), 2.0);
      lhs = derivative_l2_norm(vf);
      rhs = lp_norm(Vec(f.tail(g.n - 1)), 2.0, g.h);
    } else {
      // One more integration: differencing the second primitive gives back
      // the first up to a single boundary sample, i.e. an O(h) match.
      const Vec vf = v.apply(f);
      const RealFn vvf(g, v.apply(vf), 2.0);
      lhs = derivative_l2_norm(vvf);
      rhs = lp_norm(vf, 2.0, g.h);
    }
    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
  }
  ctx.metrics["worst_relative_gap"] = worst;
  ctx.check_le("primitive_derivative", "primitive-derivative", worst, tol);
}

void run_verify_witness_chain(Ctx& ctx, const json& cfg) {
  const int n_max = get_or(cfg, "n_max", 40);
  const double tol = get_or(cfg, "tolerance", 1e-10);
  Grid g = ctx.resolved_grid(512);
  const std::string start = get_or<std::string>(cfg, "start", "seeded");
  const Vec x0 = start == "seeded" ? seeded_smooth_kernel(g, ctx.seed, 0)
                                   : build_vector(start, g.n, &g, ctx.seed,
                                                  kStartVector, 0);
  const WitnessSet w = canonical_witness_set(g, volterra(g), x0);
  const FunctionalGrowthReport rep =
      functional_growth_report(w, Vec::Ones(g.n), 2.0, n_max);
  ctx.metrics["chain_residual_max"] = rep.chain_residual_max;
  ctx.metrics["min_margin"] = rep.min_margin;
  ctx.check_le("witness_chain", "chain-identity", rep.chain_residual_max, tol);
  ctx.check_ge("margin_floor", "margin-positivity", rep.min_margin, 0.0);
}

void run_verify(Ctx& ctx) {
  reject_unknown_keys(ctx.cfg, {"name", "kind", "grid", "seed", "check", "powers",
                                "points", "tolerance", "halving", "halving_band_low",
                                "halving_band_high", "count", "assoc_tolerance",
                                "operator", "n_max", "weight", "refine",
                                "mass_corrected", "n", "bound", "p", "start",
                                "degrees", "grids", "stability_band", "order"});
  const std::string check = get_as<std::string>(ctx.cfg, "check");
  if (check == "volterra_calculus") run_verify_volterra_calculus(ctx, ctx.cfg);
  else if (check == "commutator_calculus") run_verify_commutator_calculus(ctx, ctx.cfg);
  else if (check == "derivation_identity") run_verify_derivation(ctx, ctx.cfg);
  else if (check == "leibniz") run_verify_leibniz(ctx, ctx.cfg);
  else if (check == "intertwining") run_verify_intertwining(ctx, ctx.cfg);
  else if (check == "intertwining_basis") run_verify_intertwining_basis(ctx, ctx.cfg);
  else if (check == "conjugation") run_verify_conjugation(ctx, ctx.cfg);
  else if (check == "quasinilpotency") run_verify_quasinilpotency(ctx, ctx.cfg);
  else if (check == "primitive_derivative") run_verify_primitive_derivative(ctx, ctx.cfg);
  else if (check == "witness_chain") run_verify_witness_chain(ctx, ctx.cfg);
  else cfg_fail("unknown verify check '" + check + "'");
  ctx.metrics["check"] = check;
}

// ---------------------------------------------------------------------------
// orbit
// ---------------------------------------------------------------------------

void run_orbit(Ctx& ctx) {
  reject_unknown_keys(ctx.cfg, {"name", "kind", "grid", "seed", "operator", "start",
                                "p", "n_max", "functionals", "assertions"});
  Grid g = ctx.resolved_grid();
  const ParsedOperator op = parse_operator(get_as<std::string>(ctx.cfg, "operator"), g);
  if (op.complex_valued) cfg_fail("orbit scenarios use real operators");
  const double p = p_field(ctx.cfg, "p", 2.0);
  const int n_max = get_as<int>(ctx.cfg, "n_max");
  const bool grid_based = op.weight != 1.0;
  const Grid* gp = grid_based ? &g : nullptr;
  const Vec x0 = build_vector(get_or<std::string>(ctx.cfg, "start", "ones"),
                              op.real_op.dim(), gp, ctx.seed, kStartVector, 0);

  const Orbit<double> orb = orbit(op.real_op, x0, p, op.weight, n_max);
  std::vector<Vec> fs;
  if (ctx.cfg.contains("functionals")) {
    fs = build_functionals(ctx.cfg.at("functionals"), op.real_op.dim(), gp, ctx.seed);
  }
  ctx.artifacts.emplace_back("orbit.csv", io::orbit_csv(orb, fs, op.weight));
  ctx.metrics["points"] = orb.points.size();
  ctx.metrics["log_norm_final"] = orb.points.back().log_norm;
  ctx.metrics["terminated"] = orb.terminated;

  WeakNullReport<double> wn;
  if (!fs.empty()) {
    wn = weak_null_report(orb, fs);
    ctx.metrics["sup_final"] = wn.sup.back();
  }

  const json asserts = get_or(ctx.cfg, "assertions", json::object());
  reject_unknown_keys(asserts, {"angle_final", "angle_model", "decade",
                                "sup_final_below"});
  if (asserts.contains("angle_model")) {
    // Integration-orbit angle law: for the cumulative-sum operator started at
    // the constant vector and probed with the constant functional, the angle
    // statistic follows (n p + 1)^{1/p} / (n + 1).
    const json& a = asserts.at("angle_model");
    reject_unknown_keys(a, {"functional", "n_low", "n_high", "rel_tol"});
    const int idx = get_or(a, "functional", 0);
    if (fs.empty() || idx < 0 || idx >= int(fs.size())) {
      cfg_fail("angle_model: bad functional index");
    }
    const int n_low = get_or(a, "n_low", 5);
    const int n_high = get_or(a, "n_high", 40);
    if (n_low < 0 || n_high >= int(orb.points.size()) || n_low > n_high) {
      cfg_fail("angle_model: index range out of bounds");
    }
    const double rel_tol = get_as<double>(a, "rel_tol");
    const std::vector<double> ang = angle_statistic(orb, fs[std::size_t(idx)]);
    double worst = 0.0;
    for (int n = n_low; n <= n_high; ++n) {
      const double model = std::pow(n * p + 1.0, 1.0 / p) / (n + 1.0);
      worst = std::max(worst, std::abs(ang[std::size_t(n)] - model) / model);
    }
    ctx.metrics["angle_model_worst_rel"] = worst;
    ctx.check_le("angle_model_band", "orbit-angle-law", worst, rel_tol);
  }
  if (asserts.contains("angle_final")) {
    const json& a = asserts.at("angle_final");
    const int idx = get_or(a, "functional", 0);
    if (fs.empty() || idx < 0 || idx >= int(fs.size())) cfg_fail("angle_final: bad functional index");
    const std::vector<double> ang = angle_statistic(orb, fs[std::size_t(idx)]);
    const double target = get_as<double>(a, "target");
    const double tol = get_as<double>(a, "tol");
    ctx.metrics["angle_final"] = ang.back();
    ctx.check_le("angle_final_gap", "orbit-angle-limit", std::abs(ang.back() - target), tol);
  }
  if (asserts.contains("decade")) {
    // Tail-vs-head ratio of |<f_j, unit_n>| per (start, functional) pair;
    // with starts > 1 the worst pair over independently seeded smooth
    // starts decides.
    const json& d = asserts.at("decade");
    reject_unknown_keys(d, {"n_low", "n_high", "max_factor", "starts"});
    const int n_low = get_or(d, "n_low", 10);
    const int n_high = get_or(d, "n_high", 100);
    const double max_factor = get_as<double>(d, "max_factor");
    const int starts = get_or(d, "starts", 1);
    if (fs.empty()) cfg_fail("decade assertion needs functionals");
    if (starts < 1) cfg_fail("decade: starts must be >= 1");
    if (n_low < 0 || n_high >= int(orb.points.size()) || n_low >= n_high) {
      cfg_fail("decade assertion indices out of range");
    }
    const std::string start_spec = get_or<std::string>(ctx.cfg, "start", "ones");
    if (starts > 1 && start_spec != "seeded" && start_spec != "seeded_smooth") {
      cfg_fail("decade with multiple starts needs a seeded start spec");
    }
    double worst = 0.0;
    for (int t = 0; t < starts; ++t) {
      const WeakNullReport<double> rep =
          t == 0 ? wn
                 : weak_null_report(
                       orbit(op.real_op,
                             build_vector(start_spec, op.real_op.dim(), gp,
                                          ctx.seed, kStartVector,
                                          std::uint32_t(t)),
                             p, op.weight, n_max),
                       fs);
      for (Eigen::Index j = 0; j < rep.ratios.cols(); ++j) {
        worst = std::max(worst, rep.ratios(n_high, j) / rep.ratios(n_low, j));
      }
    }
    ctx.metrics["decade_ratio"] = worst;
    ctx.check_le("weak_null_decade", "weak-null-decade", worst, max_factor);
  }
  if (asserts.contains("sup_final_below")) {
    if (fs.empty()) cfg_fail("sup_final_below needs functionals");
    ctx.check_le("sup_final", "weak-null-sup", wn.sup.back(),
                 asserts.at("sup_final_below").get<double>());
  }
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

void run_certify(Ctx& ctx) {
  reject_unknown_keys(ctx.cfg, {"name", "kind", "grid", "seed", "space", "p", "q", "k",
                                "trials", "points", "family", "mc_samples",
                                "store_limit", "assertions", "operator"});
  const json space = require_key(ctx.cfg, "space");
  reject_unknown_keys(space, {"type", "n", "dim"});
  const std::string space_type = get_as<std::string>(space, "type");
  SpaceSpec sp;
  sp.p = p_field(ctx.cfg, "p", 2.0);
  int dim = 0;
  std::optional<Grid> grid;
  if (space_type == "grid") {
    grid = ctx.resolved_grid(get_as<int>(space, "n"));
    dim = grid->n;
    sp.weight = grid->h;
  } else if (space_type == "sequence") {
    dim = get_as<int>(space, "dim");
    if (dim < 1) cfg_fail("sequence dim must be >= 1");
    sp.weight = 1.0;
  } else {
    cfg_fail("space type must be 'grid' or 'sequence'");
  }

  const double q = get_or(ctx.cfg, "q", 1.5);
  const int k = get_as<int>(ctx.cfg, "k");
  const int trials = get_or(ctx.cfg, "trials", 8);
  const int mc_samples = get_or(ctx.cfg, "mc_samples", 0);
  const std::size_t store_limit = get_or<std::size_t>(ctx.cfg, "store_limit", 10000);

  // Points and target.
  const json pts_cfg = require_key(ctx.cfg, "points");
  reject_unknown_keys(pts_cfg, {"type", "count", "exponent", "operator", "start", "n_from"});
  const std::string pts_type = get_as<std::string>(pts_cfg, "type");
  std::vector<Vec> points;
  Vec y = Vec::Zero(dim);
  if (pts_type == "coordinate_blowup") {
    const int count = get_as<int>(pts_cfg, "count");
    const double expo = get_or(pts_cfg, "exponent", 1.0);
    if (count < 1 || count > dim) cfg_fail("coordinate_blowup: count out of range");
    for (int n = 0; n < count; ++n) {
      Vec x = Vec::Zero(dim);
      x[n] = std::pow(double(n + 1), expo);
      points.push_back(std::move(x));
    }
  } else if (pts_type == "orbit_blowup") {
    if (!grid) cfg_fail("orbit_blowup points need a grid space");
    const int count = get_as<int>(pts_cfg, "count");
    const double expo = get_or(pts_cfg, "exponent", 1.0);
    const int n_from = get_or(pts_cfg, "n_from", 1);
    const ParsedOperator op =
        parse_operator(get_or<std::string>(pts_cfg, "operator", "V"), *grid);
    if (op.complex_valued) cfg_fail("orbit_blowup needs a real operator");
    const Vec x0 = build_vector(get_or<std::string>(pts_cfg, "start", "ones"), dim,
                                &*grid, ctx.seed, kStartVector, 0);
    const Orbit<double> orb = orbit(op.real_op, x0, sp.p, sp.weight, n_from + count);
    if (int(orb.points.size()) < n_from + count) cfg_fail("orbit_blowup: orbit too short");
    for (int n = 0; n < count; ++n) {
      points.push_back(std::pow(double(n + 1), expo) *
                       orb.points[std::size_t(n_from + n)].unit);
    }
  } else {
    cfg_fail("unknown points type '" + pts_type + "'");
  }

  std::vector<Vec> ds;
  ds.reserve(points.size());
  for (const Vec& x : points) ds.push_back(x - y);

  // Family.
  NormingFamily fam;
  const json fam_cfg = get_or(ctx.cfg, "family", json("norming"));
  if (fam_cfg.is_string() && fam_cfg.get<std::string>() == "norming") {
    fam = build_norming_family(points, y, sp, q);
  } else if (fam_cfg.is_object()) {
    reject_unknown_keys(fam_cfg, {"type", "decay"});
    if (get_as<std::string>(fam_cfg, "type") != "coordinate") {
      cfg_fail("family type must be 'norming' or 'coordinate'");
    }
    const double decay = get_as<double>(fam_cfg, "decay");
    std::vector<Vec> fs;
    for (std::size_t n = 0; n < points.size(); ++n) {
      Vec f = Vec::Zero(dim);
      if (int(n) >= dim) cfg_fail("coordinate family needs dim >= point count");
      f[Eigen::Index(n)] = std::pow(double(n + 1), -decay);
      fs.push_back(std::move(f));
    }
    fam = make_family(std::move(fs), ds, sp, sp.p, q);
  } else {
    cfg_fail("bad 'family' spec");
  }

  const CertificateResult res =
      gaussian_certificate(fam, ds, sp, k, trials, ctx.seed, store_limit);
  if (!res.success) {
    ctx.add("separation_achieved", "separation-epsilon", 0.0, 0.0, false);
    ctx.metrics["trials"] = res.trials.size();
    return;
  }
  const Certificate& cert = res.cert;

  ctx.artifacts.emplace_back("functionals.csv", io::functionals_csv(cert.u));
  ctx.artifacts.emplace_back("certificate.json",
                             io::certificate_json(cert, "functionals.csv"));
  const std::vector<SmallBallRow> rows =
      small_ball_rows(fam, ds, sp, cert.epsilon, mc_samples, ctx.seed);
  ctx.artifacts.emplace_back("small_ball.csv", io::small_ball_csv(rows));

  ctx.metrics["epsilon_star"] = cert.epsilon_star;
  ctx.metrics["epsilon"] = cert.epsilon;
  ctx.metrics["failure_bound"] = cert.failure_bound;
  ctx.metrics["sum_sq_dual"] = fam.sum_sq_dual;
  ctx.metrics["sum_inv_r"] = fam.sum_inv_r;
  ctx.metrics["family_r"] = std::isinf(fam.r) ? -1.0 : fam.r;
  ctx.metrics["outside_scope"] = fam.outside_scope;
  ctx.metrics["trial"] = cert.trial;

  ctx.check_ge("separation_epsilon_star", "separation-epsilon", cert.epsilon_star,
               std::nextafter(0.0, 1.0));

  // Small-ball chain: exact <= linear <= coarse per point.
  double chain_violation = 0.0, mc_gap_sigmas = 0.0, coarse_excess = 0.0;
  for (const SmallBallRow& r : rows) {
    chain_violation = std::max(chain_violation, r.exact - r.linear);
    chain_violation = std::max(chain_violation, r.linear - r.coarse);
    if (mc_samples > 0) {
      if (r.mc_sigma > 0.0) {
        mc_gap_sigmas =
            std::max(mc_gap_sigmas, std::abs(r.empirical - r.exact) / r.mc_sigma);
      }
      coarse_excess = std::max(
          coarse_excess, r.empirical - r.coarse * (1.0 + 3.0 * r.mc_sigma));
    }
  }
  ctx.check_le("small_ball_chain", "small-ball-chain", chain_violation, 0.0);
  if (mc_samples > 0) {
    ctx.check_le("small_ball_monte_carlo", "small-ball-chain", mc_gap_sigmas, 5.0);
    ctx.check_le("empirical_vs_coarse", "small-ball-chain", coarse_excess, 0.0);
  }

  // Separation floor over nested prefixes of the point list never increases.
  double prefix_increase = 0.0;
  double running = std::numeric_limits<double>::infinity();
  std::vector<double> prefix_min;
  for (double m : cert.margins) {
    const double next = std::min(running, m);
    prefix_min.push_back(next);
    running = next;
  }
  for (std::size_t i = 1; i < prefix_min.size(); ++i) {
    prefix_increase = std::max(prefix_increase, prefix_min[i] - prefix_min[i - 1]);
  }
  ctx.check_le("prefix_monotonicity", "prefix-monotonicity", prefix_increase, 0.0);

  if (cert.draws_stored) {
    const double reverify = reverify_certificate(cert, fam, ds, sp);
    ctx.check_le("certificate_reverify", "certificate-reverify", reverify, 0.0);
  }

  const json asserts = get_or(ctx.cfg, "assertions", json::object());
  reject_unknown_keys(asserts, {"bound_max", "epsilon_star_min"});
  if (asserts.contains("bound_max")) {
    ctx.check_le("failure_bound", "failure-bound", cert.failure_bound,
                 asserts.at("bound_max").get<double>());
  }
  if (asserts.contains("epsilon_star_min")) {
    ctx.check_ge("epsilon_star_floor", "separation-epsilon", cert.epsilon_star,
                 asserts.at("epsilon_star_min").get<double>());
  }
}

// ---------------------------------------------------------------------------
// kronecker
// ---------------------------------------------------------------------------

std::vector<double> parse_angles(const json& cfg) {
  const json& arr = require_key(cfg, "angles");
  if (!arr.is_array() || arr.empty()) cfg_fail("'angles' must be a non-empty array");
  std::vector<double> angles;
  for (const json& v : arr) angles.push_back(numeric_field(v, "angle"));
  return angles;
}

void run_kronecker(Ctx& ctx) {
  reject_unknown_keys(ctx.cfg, {"name", "kind", "grid", "seed", "angles", "mode",
                                "targets", "delta", "n_max", "samples", "assertions"});
  const std::vector<double> angles = parse_angles(ctx.cfg);
  const std::size_t m = angles.size();
  const std::string mode = get_or<std::string>(ctx.cfg, "mode", "density");
  const double delta = get_or(ctx.cfg, "delta", 0.15);
  const std::uint64_t n_max = get_or<std::uint64_t>(ctx.cfg, "n_max", 1000000);
  const json asserts = get_or(ctx.cfg, "assertions", json::object());
  reject_unknown_keys(asserts, {"steps_max", "achieved_max", "violation_max"});

  json rows = json::array();
  if (mode == "density" || mode == "two_term") {
    const json targets = get_or(ctx.cfg, "targets", json{{"type", "seeded"}, {"count", 8}});
    reject_unknown_keys(targets, {"type", "count"});
    if (get_as<std::string>(targets, "type") != "seeded") {
      cfg_fail("targets type must be 'seeded'");
    }
    const int count = get_or(targets, "count", 8);

    std::uint64_t worst_steps = 0;
    double worst_achieved = 0.0;
    int found = 0;
    for (int t = 0; t < count; ++t) {
      RandomStream rs(ctx.seed, StreamId{kTorusTarget, std::uint16_t(t), 0});
      CVec target = CVec::Zero(Eigen::Index(m));
      for (std::size_t j = 0; j < m; ++j) {
        const double phase = 2.0 * std::numbers::pi * rs.uniform(2 * j);
        if (mode == "density") {
          target[Eigen::Index(j)] = std::polar(1.0, phase);
        } else {
          target[Eigen::Index(j)] = std::polar(2.0 * rs.uniform(2 * j + 1), phase);
        }
      }
      json target_json = json::array();
      for (std::size_t j = 0; j < m; ++j) {
        target_json.push_back({target[Eigen::Index(j)].real(),
                               target[Eigen::Index(j)].imag()});
      }
      json row;
      if (mode == "density") {
        const DensitySearchResult r = density_search(angles, target, delta, n_max);
        if (r.found) ++found;
        worst_steps = std::max(worst_steps, r.steps);
        worst_achieved = std::max(worst_achieved, r.achieved);
        row = {{"target", std::move(target_json)}, {"found", r.found},
               {"n_found", r.n}, {"elapsed_steps", r.steps},
               {"achieved", r.achieved}};
      } else {
        const TwoTermResult r = two_term_decomposition(angles, target, delta, n_max);
        if (r.found) ++found;
        worst_steps = std::max(worst_steps, r.steps);
        worst_achieved = std::max(worst_achieved, r.achieved);
        row = {{"target", std::move(target_json)}, {"found", r.found},
               {"r", r.r}, {"k", r.k}, {"m", r.m},
               {"elapsed_steps", r.steps}, {"achieved", r.achieved}};
      }
      rows.push_back(std::move(row));
    }
    ctx.metrics["found"] = found;
    ctx.metrics["count"] = count;
    ctx.metrics["worst_steps"] = worst_steps;
    ctx.metrics["worst_achieved"] = worst_achieved;
    ctx.add("all_targets_reached", "density-hit", double(found), double(count),
            found == count);
    ctx.check_le("worst_achieved", mode == "density" ? "density-hit" : "two-term-error",
                 worst_achieved, delta);
    if (asserts.contains("steps_max")) {
      ctx.check_le("worst_steps", "density-steps", double(worst_steps),
                   asserts.at("steps_max").get<double>());
    }
  } else if (mode == "obstruction") {
    const int samples = get_or(ctx.cfg, "samples", 256);
    RandomStream rs(ctx.seed, StreamId{kObstruction, 0, 0});
    CVec f = CVec::Zero(Eigen::Index(m));
    CVec g = CVec::Zero(Eigen::Index(m));
    for (std::size_t j = 0; j < m; ++j) {
      // distinct moduli so the obstruction is strictly positive
      f[Eigen::Index(j)] = std::polar(0.5 + double(j + 1) / double(m + 1),
                                      2.0 * std::numbers::pi * rs.uniform(4 * j));
      g[Eigen::Index(j)] = std::polar(0.5 + double(m - j) / double(m + 2),
                                      2.0 * std::numbers::pi * rs.uniform(4 * j + 1));
    }
    std::vector<std::pair<cplx, std::uint64_t>> zs;
    RandomStream zrs(ctx.seed, StreamId{kObstruction, 1, 0});
    for (int s = 0; s < samples; ++s) {
      const double r = 0.25 + 1.75 * zrs.uniform(std::uint64_t(3 * s));
      const double phi = 2.0 * std::numbers::pi * zrs.uniform(std::uint64_t(3 * s + 1));
      const std::uint64_t n = std::uint64_t(zrs.uniform(std::uint64_t(3 * s + 2)) * 1e4);
      zs.emplace_back(std::polar(r, phi), n);
    }
    const ObstructionReport rep = projective_obstruction(angles, f, g, zs);
    const double violation = projective_invariant_violation(angles, f, zs);
    ctx.metrics["obstruction"] = rep.obstruction;
    ctx.metrics["lower_bound"] = rep.lower_bound;
    ctx.metrics["min_sampled"] = rep.min_sampled;
    ctx.metrics["invariant_violation"] = violation;
    ctx.check_le("orbit_invariant_violation", "modulus-invariance", violation,
                 get_or(asserts, "violation_max", 1e-12));
    ctx.check_ge("obstruction_positive", "modulus-obstruction", rep.obstruction, 1e-6);
    ctx.check_ge("sampled_distance_floor", "modulus-obstruction",
                 rep.min_sampled - rep.lower_bound, -1e-12);
    rows.push_back({{"obstruction", rep.obstruction},
                    {"lower_bound", rep.lower_bound},
                    {"min_sampled", rep.min_sampled},
                    {"invariant_violation", violation}});
  } else {
    cfg_fail("unknown kronecker mode '" + mode + "'");
  }
  ctx.artifacts.emplace_back(
      "density.json",
      json{{"mode", mode}, {"angles", angles}, {"delta", delta}, {"rows", rows}}
              .dump(2) +
          "\n");
}

// ---------------------------------------------------------------------------
// commutant
// ---------------------------------------------------------------------------

void run_commutant(Ctx& ctx) {
  reject_unknown_keys(ctx.cfg, {"name", "kind", "grid", "seed", "a", "b", "tol_rel",
                                "expected_dimension", "min_gap"});
  Grid g = ctx.resolved_grid();
  const ParsedOperator a = parse_operator(get_or<std::string>(ctx.cfg, "a", "V"), g);
  const ParsedOperator b = parse_operator(get_or<std::string>(ctx.cfg, "b", "M"), g);
  if (a.complex_valued || b.complex_valued) cfg_fail("commutant check needs real operators");
  const double tol_rel = get_or(ctx.cfg, "tol_rel", 1e-10);
  const CommutantReport rep = joint_commutant(a.real_op.mat, b.real_op.mat, tol_rel);
  ctx.metrics["dimension"] = rep.dimension;
  ctx.metrics["gap"] = std::isinf(rep.gap) ? -1.0 : rep.gap;
  ctx.metrics["sigma_max"] = rep.sigma_max;
  if (ctx.cfg.contains("expected_dimension")) {
    const int expected = get_as<int>(ctx.cfg, "expected_dimension");
    ctx.add("commutant_dimension", "commutant-dimension", double(rep.dimension),
            double(expected), rep.dimension == expected);
  }
  const double min_gap = get_or(ctx.cfg, "min_gap", 1e3);
  ctx.check_ge("commutant_gap", "commutant-gap",
               std::isinf(rep.gap) ? std::numeric_limits<double>::max() : rep.gap, min_gap);
}

// ---------------------------------------------------------------------------
// witness
// ---------------------------------------------------------------------------

void run_witness(Ctx& ctx) {
  reject_unknown_keys(ctx.cfg, {"name", "kind", "grid", "seed", "operator", "start",
                                "kernels", "p", "h_functional", "n_max", "assertions",
                                "pipeline"});
  Grid g = ctx.resolved_grid();
  const ParsedOperator op = parse_operator(get_or<std::string>(ctx.cfg, "operator", "V"), g);
  if (op.complex_valued || op.real_op.tag != OpTag::lower_toeplitz) {
    cfg_fail("witness scenarios need a real convolution operator");
  }
  const double p = p_field(ctx.cfg, "p", 2.0);
  const int n_max = get_or(ctx.cfg, "n_max", 40);

  // Batch mode: many independently seeded positive kernel pairs with random
  // probe functionals; reports the worst margin and residual over the batch.
  if (ctx.cfg.contains("kernels") && ctx.cfg.at("kernels").contains("seeded")) {
    const json& kr = ctx.cfg.at("kernels");
    reject_unknown_keys(kr, {"seeded"});
    const int count = get_as<int>(kr, "seeded");
    if (count < 1) cfg_fail("seeded witness count must be >= 1");
    if (ctx.cfg.contains("pipeline")) {
      cfg_fail("the pipeline block needs explicit kernels, not a seeded batch");
    }
    const std::string start = get_or<std::string>(ctx.cfg, "start", "ones");
    const Vec x0 = start == "seeded"
                       ? seeded_smooth_kernel(g, ctx.seed, 0)
                       : build_vector(start, g.n, &g, ctx.seed, kStartVector, 0);

    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_chain = 0.0, worst_comm = 0.0, worst_sym = 0.0;
    json wrows = json::array();
    for (int t = 0; t < count; ++t) {
      const Vec u = seeded_positive_kernel(g, ctx.seed, kKernelData,
                                           std::uint16_t(t), 0);
      const Vec v = seeded_positive_kernel(g, ctx.seed, kKernelData,
                                           std::uint16_t(t), 1);
      const WitnessSet w = build_witness_set(g, op.real_op, u, v);
      const Vec h_fun = seeded_smooth_field(g, ctx.seed, kFunctionalData,
                                            std::uint16_t(t), 0);
      const Vec y0 = w.R.apply(x0);
      const FunctionalGrowthReport rep =
          functional_growth_report(w, h_fun, p, n_max, &y0);
      worst_margin = std::min(worst_margin, rep.min_margin);
      worst_chain = std::max(worst_chain, rep.chain_residual_max);
      worst_comm = std::max(worst_comm, w.comm_max);
      worst_sym = std::max(worst_sym, w.cv_bu_gap);
      wrows.push_back({{"witness", t},
                       {"min_margin", rep.min_margin},
                       {"chain_residual_max", rep.chain_residual_max},
                       {"c_dual", rep.c_dual}});
    }
    ctx.artifacts.emplace_back("margins.json",
                               json{{"witnesses", wrows},
                                    {"min_margin", worst_margin},
                                    {"chain_residual_max", worst_chain}}
                                       .dump(2) +
                                   "\n");
    ctx.metrics["witness_count"] = count;
    ctx.metrics["min_margin"] = worst_margin;
    ctx.metrics["chain_residual_max"] = worst_chain;

    ctx.check_le("family_commutators", "exact-commutation", worst_comm, 0.0);
    ctx.check_le("kernel_symmetry_gap", "kernel-symmetry", worst_sym,
                 g.dyadic() ? 0.0 : 1e-15);
    const json asserts = get_or(ctx.cfg, "assertions", json::object());
    reject_unknown_keys(asserts, {"min_margin", "chain_max"});
    ctx.check_ge("margin_floor", "margin-positivity", worst_margin,
                 get_or(asserts, "min_margin", 0.0));
    ctx.check_le("chain_identity", "chain-identity", worst_chain,
                 get_or(asserts, "chain_max", 1e-9));
    return;
  }

  WitnessSet w;
  Vec orbit_start;              // R x when kernels are explicit
  const Vec* start_ptr = nullptr;  // canonical sets already carry y = R x
  if (ctx.cfg.contains("kernels")) {
    const json& kr = ctx.cfg.at("kernels");
    reject_unknown_keys(kr, {"u", "v"});
    const Vec u = evaluate_expression(get_as<std::string>(kr, "u"), g.nodes());
    const Vec v = evaluate_expression(get_as<std::string>(kr, "v"), g.nodes());
    w = build_witness_set(g, op.real_op, u, v);
    const std::string start = get_or<std::string>(ctx.cfg, "start", "ones");
    const Vec x0 = start == "seeded" ? seeded_smooth_kernel(g, ctx.seed, 0)
                                     : build_vector(start, g.n, &g, ctx.seed, kStartVector, 0);
    orbit_start = w.R.apply(x0);
    start_ptr = &orbit_start;
  } else {
    const std::string start = get_or<std::string>(ctx.cfg, "start", "seeded");
    const Vec x0 = start == "seeded" ? seeded_smooth_kernel(g, ctx.seed, 0)
                                     : build_vector(start, g.n, &g, ctx.seed, kStartVector, 0);
    w = canonical_witness_set(g, op.real_op, x0);
  }

  const Vec h_fun =
      evaluate_expression(get_or<std::string>(ctx.cfg, "h_functional", "1"), g.nodes());
  const FunctionalGrowthReport rep =
      functional_growth_report(w, h_fun, p, n_max, start_ptr);
  ctx.artifacts.emplace_back("margins.json", io::margins_json(rep));

  ctx.metrics["c_dual"] = rep.c_dual;
  ctx.metrics["min_margin"] = rep.min_margin;
  ctx.metrics["chain_residual_max"] = rep.chain_residual_max;
  ctx.metrics["comm_max"] = w.comm_max;
  ctx.metrics["cv_bu_gap"] = w.cv_bu_gap;
  ctx.metrics["canon_deviation"] = w.canon_deviation;
  ctx.metrics["reduced_chain"] = w.reduced_chain;

  ctx.check_le("family_commutators", "exact-commutation", w.comm_max, 0.0);
  ctx.check_le("kernel_symmetry_gap", "kernel-symmetry", w.cv_bu_gap,
               g.dyadic() ? 0.0 : 1e-15);

  const json asserts = get_or(ctx.cfg, "assertions", json::object());
  reject_unknown_keys(asserts, {"min_margin", "chain_max"});
  ctx.check_ge("margin_floor", "margin-positivity", rep.min_margin,
               get_or(asserts, "min_margin", 0.0));
  ctx.check_le("chain_identity", "chain-identity", rep.chain_residual_max,
               get_or(asserts, "chain_max", 1e-9));

  if (ctx.cfg.contains("pipeline")) {
    const json& pl = ctx.cfg.at("pipeline");
    reject_unknown_keys(pl, {"k", "q", "trials", "n_max"});
    PipelineOptions popt;
    popt.p = p;
    popt.q = get_or(pl, "q", 1.5);
    popt.k = get_or(pl, "k", 3);
    popt.max_trials = get_or(pl, "trials", 8);
    popt.n_max = get_or(pl, "n_max", 40);
    popt.seed = ctx.seed;
    const PipelineReport prep = run_pipeline(w, h_fun, popt, start_ptr);

    std::ostringstream growth;
    growth << "n,norm_yn,lower,ok,skipped\n";
    int violations = 0;
    for (const GrowthRow& r : prep.rows) {
      growth << r.n << ',' << r.norm_yn << ',' << r.lower << ',' << int(r.ok) << ','
             << int(r.skipped) << '\n';
      if (!r.skipped && !r.ok) ++violations;
    }
    ctx.artifacts.emplace_back("growth.csv", growth.str());
    if (prep.certificate.success) {
      ctx.artifacts.emplace_back("functionals.csv",
                                 io::functionals_csv(prep.certificate.cert.u));
      ctx.artifacts.emplace_back(
          "certificate.json",
          io::certificate_json(prep.certificate.cert, "functionals.csv"));
    }

    ctx.metrics["b"] = prep.b;
    ctx.metrics["c_measured"] = prep.c_measured;
    ctx.metrics["c_lemma"] = prep.c_lemma;
    ctx.metrics["skipped"] = prep.skipped;

    ctx.check_le("embedding_constant", "embedding-constant", prep.c_measured,
                 prep.c_lemma * (1.0 + 1e-12));
    ctx.check_le("growth_floor_violations", "growth-floor", double(violations), 0.0);
    ctx.add("pipeline_certificate", "separation-epsilon",
            prep.certificate.success ? prep.certificate.cert.epsilon_star : 0.0, 0.0,
            prep.certificate.success);
  }
}

// ---------------------------------------------------------------------------
// Dispatch, summary, report.
// ---------------------------------------------------------------------------

json summary_json(const Ctx& ctx, bool pass) {
  json out;
  out["name"] = ctx.name;
  out["kind"] = ctx.kind;
  out["seed"] = ctx.seed;
  if (ctx.grid_n > 0) out["grid"] = ctx.grid_n;
  out["metrics"] = ctx.metrics;
  out["assertions"] = json::array();
  for (const AssertionRow& a : ctx.assertions) {
    out["assertions"].push_back({{"name", a.name},
                                 {"anchor", a.anchor},
                                 {"measured", a.measured},
                                 {"tolerance", a.tolerance},
                                 {"pass", a.pass}});
  }
  out["pass"] = pass;
  return out;
}

}  // namespace

ScenarioOutcome run_scenario_text(const std::string& config_json, const RunOptions& opt) {
  json cfg;
  try {
    cfg = json::parse(config_json);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  Ctx ctx;
  ctx.cfg = cfg;
  try {
    ctx.name = get_or<std::string>(cfg, "name", "scenario");
    ctx.kind = get_as<std::string>(cfg, "kind");
    ctx.seed = opt.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 1));
    ctx.grid_n = opt.grid.value_or(get_or(cfg, "grid", 0));

    if (ctx.kind == "verify") run_verify(ctx);
    else if (ctx.kind == "orbit") run_orbit(ctx);
    else if (ctx.kind == "certify") run_certify(ctx);
    else if (ctx.kind == "kronecker") run_kronecker(ctx);
    else if (ctx.kind == "commutant") run_commutant(ctx);
    else if (ctx.kind == "witness") run_witness(ctx);
    else cfg_fail("unknown scenario kind '" + ctx.kind + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }

  ScenarioOutcome out;
  out.name = ctx.name;
  out.kind = ctx.kind;
  out.assertions = ctx.assertions;
  out.pass = std::all_of(ctx.assertions.begin(), ctx.assertions.end(),
                         [](const AssertionRow& a) { return a.pass; });
  out.summary_text = summary_json(ctx, out.pass).dump(2) + "\n";

  std::filesystem::create_directories(opt.out_dir);
  for (const auto& [fname, content] : ctx.artifacts) {
    io::write_text(opt.out_dir / fname, content);
    out.artifacts.push_back(fname);
  }
  io::write_text(opt.out_dir / "summary.json", out.summary_text);
  out.artifacts.push_back("summary.json");
  return out;
}

ScenarioOutcome run_scenario_file(const std::filesystem::path& config, const RunOptions& opt) {
  std::string text;
  try {
    text = io::read_text(config);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return run_scenario_text(text, opt);
}

std::string render_report(const std::vector<std::pair<std::string, std::string>>& summaries) {
  std::ostringstream md;
  md << "# Verification report\n\n";
  md << "| scenario | kind | check | anchor | measured | tolerance | verdict |\n";
  md << "|---|---|---|---|---|---|---|\n";
  int total = 0, passed = 0;
  bool all_pass = true;
  for (const auto& [label, text] : summaries) {
    json s;
    try {
      s = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError("summary '" + label + "' is not valid JSON: " + e.what());
    }
    const std::string name = s.value("name", label);
    const std::string kind = s.value("kind", "?");
    for (const json& a : s.value("assertions", json::array())) {
      ++total;
      const bool pass = a.value("pass", false);
      if (pass) ++passed;
      all_pass = all_pass && pass;
      std::ostringstream meas, tol;
      meas.precision(6);
      tol.precision(6);
      meas << a.value("measured", 0.0);
      tol << a.value("tolerance", 0.0);
      md << "| " << name << " | " << kind << " | " << a.value("name", "?") << " | "
         << a.value("anchor", "?") << " | " << meas.str() << " | " << tol.str() << " | "
         << (pass ? "pass" : "FAIL") << " |\n";
    }
    if (!s.value("pass", false)) all_pass = false;
  }
  md << "\nAggregate: " << (all_pass ? "PASS" : "FAIL") << " (" << passed << "/" << total
     << " assertions)\n";
  return md.str();
}

}  // namespace voltlab
