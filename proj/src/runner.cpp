#include "approxk/runner.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <variant>

#include "approxk/boundary.hpp"
#include "approxk/functional_calculus.hpp"
#include "approxk/kproducts.hpp"
#include "approxk/scenarios.hpp"

namespace approxk::runner {

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::uint64_t draw_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 of the pair
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + index + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

[[noreturn]] void schema(const std::string& what) { fail(ErrorKind::SchemaViolation, what); }

using Value = std::variant<CMatrix, LoopElem>;

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

cplx parse_complex(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  schema("complex numbers are a number or [re, im]");
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) schema(std::string("missing field '") + key + "'");
  return obj.at(key);
}

template <class T>
T get(const json& obj, const char* key) {
  try {
    return field(obj, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    schema(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& obj, const char* key, T dflt) {
  if (!obj.contains(key)) return dflt;
  return get<T>(obj, key);
}

json class_json(const K0Vec& k) {
  json blocks = json::array();
  for (const auto& b : k.blocks) blocks.push_back({b.d, b.m});
  return {{"entries", k.entries}, {"blocks", blocks}};
}

struct Context {
  std::string model;
  Index dim = 0;
  Index grid = 0, fiber = 1;
  Tol tol;
  std::uint64_t seed = 0;
  bool has_seed = false;
  json elements = json::object();
  std::map<std::string, Value> cache;
  std::set<std::string> active;

  Value eval(const json& spec);

  Value ref(const std::string& name) {
    if (auto it = cache.find(name); it != cache.end()) return it->second;
    if (!elements.contains(name)) schema("unknown element '" + name + "'");
    if (active.count(name)) schema("element '" + name + "' refers to itself");
    active.insert(name);
    Value v = eval(elements.at(name));
    active.erase(name);
    cache.emplace(name, v);
    return v;
  }

  CMatrix matrix(const json& spec) {
    Value v = eval(spec);
    if (auto* m = std::get_if<CMatrix>(&v)) return *m;
    schema("expected a constant matrix");
  }

  LoopElem loop(const Value& v) {
    if (auto* l = std::get_if<LoopElem>(&v)) return *l;
    return LoopElem::constant(grid, std::get<CMatrix>(v));
  }

  Value binary(const Value& a, const Value& b, bool product) {
    if (std::holds_alternative<CMatrix>(a) && std::holds_alternative<CMatrix>(b)) {
      const auto& x = std::get<CMatrix>(a);
      const auto& y = std::get<CMatrix>(b);
      if (x.rows() != y.rows()) schema("size mismatch in element arithmetic");
      return product ? CMatrix(x * y) : CMatrix(x + y);
    }
    if (model != "loop") schema("loop elements in a matrix scenario");
    LoopElem x = loop(a), y = loop(b);
    if (x.fiber() != y.fiber()) schema("size mismatch in element arithmetic");
    return product ? x * y : x + y;
  }
};

Value Context::eval(const json& spec) {
  if (spec.is_string()) return ref(spec.get<std::string>());
  const std::string type = get<std::string>(spec, "type");
  const Index base = model == "loop" ? fiber : dim;
  auto list = [&](const char* key) {
    const json& l = field(spec, key);
    if (!l.is_array() || l.empty()) schema(std::string("'") + key + "' must be a non-empty list");
    return l;
  };
  if (type == "matrix") {
    const json& rows = list("rows");
    const Index n = static_cast<Index>(rows.size());
    CMatrix m(n, n);
    for (Index i = 0; i < n; ++i) {
      if (!rows[i].is_array() || static_cast<Index>(rows[i].size()) != n) schema("matrix rows must be square");
      for (Index j = 0; j < n; ++j) m(i, j) = parse_complex(rows[i][j]);
    }
    return m;
  }
  if (type == "identity") return identity(get_or<Index>(spec, "n", base));
  if (type == "zero") return zeros(get_or<Index>(spec, "n", base));
  if (type == "unit") {
    Index n = get_or<Index>(spec, "n", base), i = get<Index>(spec, "i"), j = get<Index>(spec, "j");
    if (i < 1 || j < 1 || i > n || j > n) schema("unit indices are 1-based and inside the matrix");
    return unit(n, i - 1, j - 1);
  }
  if (type == "rotation") return rotation(get<double>(spec, "angle") * std::numbers::pi);
  if (type == "kron") {
    CMatrix acc;
    bool first = true;
    for (const auto& f : list("factors")) {
      CMatrix m = matrix(f);
      acc = first ? m : kron(acc, m);
      first = false;
    }
    return acc;
  }
  if (type == "sum" || type == "product") {
    std::optional<Value> acc;
    for (const auto& t : list(type == "sum" ? "terms" : "factors")) {
      Value v = eval(t);
      acc = acc ? binary(*acc, v, type == "product") : v;
    }
    return *acc;
  }
  if (type == "scale") {
    cplx k = parse_complex(field(spec, "by"));
    Value v = eval(field(spec, "of"));
    if (auto* m = std::get_if<CMatrix>(&v)) return CMatrix(k * *m);
    return k * std::get<LoopElem>(v);
  }
  if (type == "adjoint" || type == "inverse") {
    Value v = eval(field(spec, "of"));
    return std::visit(
        [&](const auto& x) -> Value {
          if (type == "adjoint") return adjoint(x);
          if (approxk::dim(x) == 0) schema("cannot invert an empty element");
          return inverse(x, tol);
        },
        v);
  }
  if (type == "direct_sum") {
    std::optional<Value> acc;
    for (const auto& t : list("parts")) {
      Value v = eval(t);
      if (!acc) {
        acc = v;
      } else if (std::holds_alternative<CMatrix>(*acc) && std::holds_alternative<CMatrix>(v)) {
        acc = direct_sum(std::get<CMatrix>(*acc), std::get<CMatrix>(v));
      } else {
        acc = direct_sum(loop(*acc), loop(v));
      }
    }
    return *acc;
  }
  if (model == "loop") {
    if (type == "z_power") return power_z(grid, get<int>(spec, "n"), get_or<Index>(spec, "fiber", 1));
    if (type == "bump") {
      const json& pl = field(spec, "plateau");
      if (!pl.is_array() || pl.size() != 2) schema("bump plateau is [start, end]");
      return bump(loop_ambient(grid, fiber), pl[0].get<double>(), pl[1].get<double>(), get<double>(spec, "ramp"));
    }
    if (type == "constant") return LoopElem::constant(grid, matrix(field(spec, "value")));
  }
  schema("unknown element type '" + type + "' for model " + model);
}

Subalg matrix_algebra(Context& ctx, const json& spec, const std::map<std::string, Subalg>& done) {
  const std::string type = get<std::string>(spec, "type");
  if (type == "full") return full_algebra(ctx.dim);
  if (type == "diagonal") return diagonal_algebra(ctx.dim);
  if (type == "left_tensor_factor") {
    Index a = get<Index>(spec, "a"), b = get<Index>(spec, "b");
    if (a * b != ctx.dim) schema("left_tensor_factor does not fill the ambient");
    return left_tensor_factor(a, b);
  }
  if (type == "conjugated") {
    std::string of = get<std::string>(spec, "of");
    auto it = done.find(of);
    if (it == done.end()) schema("conjugated refers to unknown algebra '" + of + "'");
    return conjugated(it->second, ctx.matrix(field(spec, "by")), ctx.tol);
  }
  if (type == "span" || type == "corner") {
    std::vector<CMatrix> gens;
    if (type == "span") {
      for (const auto& e : field(spec, "elements")) gens.push_back(ctx.matrix(e));
    } else {
      CMatrix p = ctx.matrix(field(spec, "projection"));
      for (Index i = 0; i < ctx.dim; ++i)
        for (Index j = 0; j < ctx.dim; ++j) gens.push_back(p * unit(ctx.dim, i, j) * p);
    }
    for (const auto& g : gens)
      if (g.rows() != ctx.dim) schema("algebra generator has the wrong size");
    return Subalg::from_basis(ctx.dim, gens, ctx.tol);
  }
  schema("unknown matrix algebra type '" + type + "'");
}

LoopAlg loop_algebra(Context& ctx, const json& spec) {
  const std::string type = get<std::string>(spec, "type");
  LoopAlg a = loop_ambient(ctx.grid, ctx.fiber);
  if (type == "full") return a;
  if (type == "arc") return arc_ideal(a, get<double>(spec, "start"), get<double>(spec, "end"));
  schema("unknown loop algebra type '" + type + "'");
}

// Element conversion for a setting.
template <class S>
typename S::Elem as_elem(Context& ctx, const json& spec) {
  Value v = ctx.eval(spec);
  if constexpr (std::is_same_v<S, MatrixSetting>) {
    return std::get<CMatrix>(v);
  } else {
    return ctx.loop(v);
  }
}

template <class S>
std::vector<typename S::Elem> as_elems(Context& ctx, const json& spec) {
  if (!spec.is_array()) schema("expected a list of elements");
  std::vector<typename S::Elem> out;
  for (const auto& e : spec) out.push_back(as_elem<S>(ctx, e));
  return out;
}

void check_expect(const json& chk, const K0Vec& cls, CheckRecord& rec) {
  if (!chk.contains("expect")) return;
  std::vector<long long> want;
  try {
    want = chk.at("expect").get<std::vector<long long>>();
  } catch (const nlohmann::json::exception&) {
    schema("'expect' must be a list of integers");
  }
  if (want != cls.entries) {
    rec.passed = false;
    rec.error = "class " + cls.to_string() + " differs from the expected value";
  }
}

json lift_json(const auto& cert) {
  return {{"level", cert.level()},       {"res_c", cert.res_c},
          {"res_d", cert.res_d},         {"res_cap", cert.res_cap},
          {"norm_v", cert.norm_v},       {"norm_v_inv", cert.norm_v_inv},
          {"c", cert.c},                 {"rounding_distance", cert.rounding_distance},
          {"rounded", cert.rounded}};
}

template <class S>
LiftCert<S> make_lift(const S& s, Context& ctx, const json& chk) {
  if (chk.contains("iota")) {
    const json& pq = chk.at("iota");
    if (!pq.is_array() || pq.size() != 2) schema("'iota' is [p, q]");
    return iota_lift(s, as_elem<S>(ctx, pq[0]), as_elem<S>(ctx, pq[1]));
  }
  return build_lift_v(s, as_elem<S>(ctx, field(chk, "u")), as_elem<S>(ctx, field(chk, "h")),
                      get_or<double>(chk, "c", 0.0));
}

json k1_json(const K1Vec& k) { return k.windings; }

template <class S>
void run_check(const S& s, Context& ctx, const json& chk, CheckRecord& rec) {
  using Elem = typename S::Elem;
  const std::string& kind = rec.kind;
  rec.passed = true;
  if (kind == "ideal_structure") {
    auto cert = check_delta_ideal_structure(s, as_elem<S>(ctx, field(chk, "h")), as_elems<S>(ctx, field(chk, "x")),
                                            ctx.seed, get_or<int>(chk, "random_count", 50));
    const auto& m = cert.measured;
    rec.measured = {{"comm", m.comm}, {"c", m.c}, {"d", m.d}, {"int1", m.int1}, {"int2", m.int2},
                    {"max", m.max()}, {"probes", cert.probes}};
    if (chk.contains("delta")) rec.passed = cert.valid_at(get<double>(chk, "delta"));
  } else if (kind == "tensor_scale") {
    auto cert = check_delta_ideal_structure(s, as_elem<S>(ctx, field(chk, "h")), as_elems<S>(ctx, field(chk, "x")),
                                            ctx.seed);
    auto ts = tensor_scale_ideal_structure(s, cert, get<Index>(chk, "m"), ctx.seed + 1);
    rec.measured = {{"n", ts.n}, {"m_dual", ts.m_dual}, {"m_x", ts.m_x}, {"delta_in", ts.delta_in},
                    {"bound", ts.bound}, {"tensored", ts.cert.measured.max()}};
    rec.passed = ts.passed;
  } else if (kind == "inv_cut") {
    auto r = check_inv_cut(as_elem<S>(ctx, field(chk, "u")), as_elem<S>(ctx, field(chk, "h")), s.tol());
    rec.measured = {{"residual", r.residual}, {"bound", r.bound}, {"c", r.c}, {"delta_comm", r.delta_comm}};
    rec.passed = r.passed;
  } else if (kind == "boundary" || kind == "iota_lift") {
    json spec = chk;
    if (kind == "iota_lift") spec["iota"] = json::array({field(chk, "p"), field(chk, "q")});
    LiftCert<S> cert = make_lift(s, ctx, spec);
    rec.measured = lift_json(cert);
    K0Vec cls = boundary_class(s, cert);
    rec.classes["boundary"] = class_json(cls);
    if (get_or<bool>(chk, "check_inverse", true)) {
      auto inv = inverse_lift(s, cert);
      rec.classes["inverse"] = class_json(boundary_class(s, inv));
      auto bp = boxplus(s, std::vector<LiftCert<S>>{cert, inv});
      rec.classes["boxplus_with_inverse"] = class_json(boundary_class(s, bp.cert));
    }
    check_expect(chk, cls, rec);
  } else if (kind == "sigma_witness") {
    LiftCert<S> cert = make_lift(s, ctx, chk);
    rec.measured = lift_json(cert);
    auto sw = sigma_witness(s, cert, get_or<double>(chk, "eps", 0.05));
    rec.measured["x_res_d"] = sw.res_d;
    rec.measured["factor_res_c"] = sw.res_c;
    rec.measured["off_diagonal"] = sw.off_diagonal;
    rec.classes = {{"k1_u", k1_json(sw.k1_u)}, {"k1_x", k1_json(sw.k1_x)}, {"k1_factor_c", k1_json(sw.k1_c)}};
  } else if (kind == "whitehead") {
    const double eps = get_or<double>(chk, "eps", 0.1);
    auto ws = whitehead_split(s, as_elem<S>(ctx, field(chk, "a")), as_elem<S>(ctx, field(chk, "h")), eps,
                              get_or<int>(chk, "steps", 32), get_or<bool>(chk, "swap", false),
                              get_or<bool>(chk, "measure_y", true));
    rec.measured = {{"c", ws.c},
                    {"norm_bound", ws.norm_bound},
                    {"max_norm", ws.max_norm},
                    {"max_res_c", ws.max_res_c},
                    {"max_res_d", ws.max_res_d},
                    {"product_residual", ws.product_residual},
                    {"endpoint_residual", ws.endpoint_residual},
                    {"continuity", ws.continuity},
                    {"y_delta", ws.y_delta},
                    {"steps", ws.steps}};
    rec.passed = ws.passed(eps);
  } else if (kind == "uniformity") {
    auto rep = uniformity_probe(s, get_or<int>(chk, "samples", 200),
                                get_or<std::vector<Index>>(chk, "b_dims", {1, 2, 3}),
                                get_or<std::vector<double>>(chk, "deltas", {1e-3, 1e-2, 1e-1}), ctx.seed);
    json rows = json::array();
    for (const auto& r : rep.samples)
      rows.push_back({{"m", r.m}, {"delta_in", r.delta_in}, {"achieved", r.achieved}, {"ratio", r.ratio}});
    rec.measured = {{"sup_ratio", rep.sup_ratio}, {"monotone", rep.monotone}, {"samples", rows}};
    rec.passed = rep.monotone;
    if (chk.contains("max_ratio") && rep.sup_ratio > get<double>(chk, "max_ratio")) rec.passed = false;
  } else if (kind == "product_check") {
    LiftCert<S> cert = make_lift(s, ctx, chk);
    auto pc = boundary_product_check(s, cert, ctx.matrix(field(chk, "p")));
    rec.measured = lift_json(pc.cert);
    rec.measured["intersection_gap"] = pc.intersection_gap;
    rec.classes = {{"lhs", class_json(pc.lhs)}, {"rhs", class_json(pc.rhs)}};
    rec.passed = pc.equal;
    if (!pc.equal) rec.error = "product classes differ";
    check_expect(chk, pc.rhs, rec);
  } else {
    schema("unknown check kind '" + kind + "'");
  }
  (void)sizeof(Elem);
}

const std::set<std::string> kRandomized = {"ideal_structure", "tensor_scale", "uniformity"};
const std::set<std::string> kKinds = {"ideal_structure", "tensor_scale",  "inv_cut",    "boundary",     "iota_lift",
                                      "sigma_witness",   "whitehead",     "uniformity", "product_check"};

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

bool Report::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

json Report::payload() const {
  json cs = json::array();
  std::size_t passed = 0;
  for (const auto& c : checks) {
    passed += c.passed;
    cs.push_back({{"name", c.name},
                  {"kind", c.kind},
                  {"inputs_digest", c.inputs_digest},
                  {"measured", c.measured},
                  {"classes", c.classes},
                  {"passed", c.passed},
                  {"error", c.error.empty() ? json(nullptr) : json(c.error)}});
  }
  return {{"tool", kTool},
          {"version", kVersion},
          {"scenario", scenario},
          {"seed", seed},
          {"checks", cs},
          {"summary", {{"total", checks.size()}, {"passed", passed}, {"failed", checks.size() - passed}}}};
}

json Report::to_json() const {
  json j = payload();
  j["generated_at"] = utc_now();
  return j;
}

std::string Report::to_csv() const {
  std::ostringstream os;
  os << "name,kind,inputs_digest,passed,error\n";
  for (const auto& c : checks) {
    std::string err = c.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    os << c.name << ',' << c.kind << ',' << c.inputs_digest << ',' << (c.passed ? "true" : "false") << ',' << err
       << '\n';
  }
  return os.str();
}

Report run_scenario(const json& sc, const RunOptions& opt) {
  if (!sc.is_object()) schema("scenario must be a JSON object");
  if (get<int>(sc, "schema") != kSchema) schema("unsupported schema version");
  Context ctx;
  ctx.model = get<std::string>(sc, "model");
  ctx.tol = Tol::from_env();
  if (sc.contains("tol")) ctx.tol.membership_tol = get<double>(sc, "tol");
  if (opt.tol) ctx.tol.membership_tol = *opt.tol;
  ctx.tol.validate();
  if (sc.contains("seed")) {
    ctx.seed = get<std::uint64_t>(sc, "seed");
    ctx.has_seed = true;
  }
  if (opt.seed) {
    ctx.seed = *opt.seed;
    ctx.has_seed = true;
  }
  const json& amb = field(sc, "ambient");
  if (ctx.model == "matrix") {
    ctx.dim = get<Index>(amb, "dim");
    if (ctx.dim < 1) schema("ambient dim must be positive");
  } else if (ctx.model == "loop") {
    ctx.grid = opt.grid ? *opt.grid : get<Index>(amb, "grid");
    ctx.fiber = get_or<Index>(amb, "fiber", 1);
    if (ctx.grid < 8 || ctx.fiber < 1) schema("loop grid must be at least 8 and fiber positive");
  } else {
    schema("model must be 'matrix' or 'loop'");
  }
  ctx.elements = sc.value("elements", json::object());
  if (!ctx.elements.is_object()) schema("'elements' must be an object");
  const json checks = sc.value("checks", json::array());
  if (!checks.is_array()) schema("'checks' must be a list");

  // Validate the check list before any numerics run.
  std::vector<json> todo;
  for (const auto& c : checks) {
    std::string kind = get<std::string>(c, "kind");
    get<std::string>(c, "name");
    if (!kKinds.count(kind)) schema("unknown check kind '" + kind + "'");
    if (kRandomized.count(kind) && !ctx.has_seed) schema("check '" + kind + "' needs a seed");
    if (opt.only_kind && kind != *opt.only_kind) continue;
    todo.push_back(c);
  }
  if (opt.only_kind && todo.empty()) schema("scenario has no checks of kind '" + *opt.only_kind + "'");
  for (const auto& [name, spec] : ctx.elements.items()) ctx.ref(name);

  Report rep;
  rep.scenario = get_or<std::string>(sc, "name", "unnamed");
  rep.seed = ctx.seed;
  rep.checks.resize(todo.size());
  const std::string shared = ctx.model + amb.dump() + sc.value("algebras", json::object()).dump() +
                             ctx.elements.dump() + std::to_string(ctx.seed) + fmt(ctx.tol.membership_tol) +
                             std::to_string(ctx.grid);
  for (size_t i = 0; i < todo.size(); ++i) {
    rep.checks[i].name = todo[i].at("name").get<std::string>();
    rep.checks[i].kind = todo[i].at("kind").get<std::string>();
    rep.checks[i].inputs_digest = fnv1a_hex(shared + todo[i].dump());
  }
  if (todo.empty()) return rep;

  const json algs = field(sc, "algebras");
  std::optional<MatrixSetting> ms;
  std::optional<LoopSetting> ls;
  if (ctx.model == "matrix") {
    std::map<std::string, Subalg> done;
    done["A"] = algs.contains("A") ? matrix_algebra(ctx, algs.at("A"), done) : full_algebra(ctx.dim);
    done["C"] = matrix_algebra(ctx, field(algs, "C"), done);
    done["D"] = matrix_algebra(ctx, field(algs, "D"), done);
    ms.emplace(done["A"], done["C"], done["D"], ctx.tol, ctx.seed + 17);
  } else {
    LoopAlg a = algs.contains("A") ? loop_algebra(ctx, algs.at("A")) : loop_ambient(ctx.grid, ctx.fiber);
    ls.emplace(a, loop_algebra(ctx, field(algs, "C")), loop_algebra(ctx, field(algs, "D")), ctx.tol);
  }

  // Each check works on its own copy of the element cache.
  std::vector<std::string> schema_errors(todo.size());
  const int jobs = std::max(1, opt.jobs);
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(todo.size()); ++i) {
    Context local = ctx;
    CheckRecord& rec = rep.checks[static_cast<size_t>(i)];
    try {
      if (ms)
        run_check(*ms, local, todo[static_cast<size_t>(i)], rec);
      else
        run_check(*ls, local, todo[static_cast<size_t>(i)], rec);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SchemaViolation) schema_errors[static_cast<size_t>(i)] = e.what();
      rec.passed = false;
      rec.error = std::string(e.name()) + ": " + e.what();
    } catch (const std::exception& e) {
      rec.passed = false;
      rec.error = std::string("InternalError: ") + e.what();
    }
  }
  for (const auto& s : schema_errors)
    if (!s.empty()) schema(s);
  return rep;
}

Report run_scenario_file(const std::string& path, const RunOptions& opt) {
  std::ifstream in(path);
  if (!in) schema("cannot open scenario file '" + path + "'");
  json sc;
  try {
    sc = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    schema(std::string("scenario is not valid JSON: ") + e.what());
  }
  return run_scenario(sc, opt);
}

// ------------------------------------------------------------------ sweeps

RieszDraw riesz_draw(Rng& rng) {
  std::uniform_int_distribution<int> dim_d(1, 6);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Index n = dim_d(rng);
  std::uniform_int_distribution<int> rank_d(0, static_cast<int>(n));
  for (;;) {
    const double target = std::pow(10.0, -6.0 + 4.0 * u01(rng));
    const Index r = rank_d(rng);
    CMatrix s = random_invertible(n, 1.0 + 2.0 * u01(rng), rng);
    CMatrix p = CMatrix::Zero(n, n);
    for (Index i = 0; i < r; ++i) p(i, i) = 1.0;
    CMatrix e0 = s * p * invert(s);
    if (op_norm(e0) > 4.0) continue;
    CMatrix g = random_gaussian(n, n, rng);
    g /= op_norm(g);
    double lin = op_norm(e0 * g + g * e0 - g);
    if (lin < 1e-12) continue;
    RieszDraw d;
    d.e = e0 + (target / lin) * g;
    d.delta = op_norm(d.e * d.e - d.e);
    d.c = op_norm(d.e);
    if (d.delta < 1e-6 || d.delta > 1e-2 || d.c > 5.0) continue;
    return d;
  }
}

InvCutDraw invcut_draw(Rng& rng) {
  std::uniform_int_distribution<int> dim_d(1, 4);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Index n = dim_d(rng);
  const bool split = n >= 2 && u01(rng) < 0.5;
  double scale = std::pow(10.0, -5.0 + 3.0 * u01(rng));
  for (;;) {
    // h = V diag(mu) V^* with mu near constant, or near a projection when split.
    CMatrix k = random_hermitian(n, rng);
    k /= std::max(op_norm(k), 1e-300);
    CMatrix v = matrix_exp(cplx(0.0, scale) * k);
    Eigen::VectorXd mu(n);
    const Index cut = split ? 1 + static_cast<Index>(u01(rng) * double(n - 1)) : n;
    const double lam = 0.2 + 0.6 * u01(rng);
    for (Index i = 0; i < n; ++i) {
      double base = split ? (i < cut ? 1.0 : 0.0) : lam;
      mu(i) = std::clamp(base + scale * (u01(rng) - 0.5), 0.0, 1.0);
    }
    CMatrix h = v * mu.cast<cplx>().asDiagonal() * v.adjoint();
    h = CMatrix(0.5 * (h + h.adjoint()));
    CMatrix u;
    if (split) {
      Index m = n - cut;
      u = direct_sum(random_invertible(cut, 1.0 + 9.0 * u01(rng), rng), random_invertible(m, 1.0 + 9.0 * u01(rng), rng));
      u += scale * random_gaussian(n, n, rng) / std::sqrt(double(n));
    } else {
      u = random_invertible(n, 1.0 + 9.0 * u01(rng), rng);
    }
    if (cond(u) > 100.0) continue;
    InvCut<CMatrix> r = check_inv_cut(u, h);
    if (r.delta_comm <= 1e-2) return {u, h};
    scale *= 0.5;
  }
}

std::string SweepTable::to_csv() const {
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  return os.str();
}

json SweepTable::to_json() const {
  json rs = json::array();
  for (const auto& r : rows) {
    json o = json::object();
    for (size_t i = 0; i < header.size(); ++i) o[header[i]] = r[i];
    rs.push_back(o);
  }
  return {{"tool", kTool}, {"version", kVersion}, {"header", header}, {"rows", rs}, {"all_passed", all_passed}};
}

SweepTable sweep(const SweepOptions& opt) {
  SweepTable t;
  const int jobs = std::max(1, opt.jobs);
  if (opt.kind == "riesz" || opt.kind == "invcut") {
    const bool riesz = opt.kind == "riesz";
    const int count = opt.count > 0 ? opt.count : (riesz ? 1000 : 500);
    t.header = riesz ? std::vector<std::string>{"seed", "n", "delta", "c", "distance", "paper_bound", "passed"}
                     : std::vector<std::string>{"seed", "n", "delta_comm", "c", "residual", "bound", "passed"};
    t.rows.resize(static_cast<size_t>(count));
    std::vector<char> ok(static_cast<size_t>(count), 1);
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
    for (int i = 0; i < count; ++i) {
      const std::uint64_t sd = draw_seed(opt.seed, static_cast<std::uint64_t>(i));
      Rng rng(sd);
      std::vector<std::string> row;
      if (riesz) {
        RieszDraw d = riesz_draw(rng);
        RieszResult r = riesz_idempotent(d.e);
        double dist = op_norm(r.chi - d.e), bound = riesz_bound(d.delta, d.c);
        ok[static_cast<size_t>(i)] = dist <= bound;
        row = {std::to_string(sd), std::to_string(d.e.rows()), fmt(d.delta), fmt(d.c), fmt(dist), fmt(bound),
               dist <= bound ? "true" : "false"};
      } else {
        InvCutDraw d = invcut_draw(rng);
        InvCut<CMatrix> r = check_inv_cut(d.u, d.h);
        ok[static_cast<size_t>(i)] = r.passed;
        row = {std::to_string(sd), std::to_string(d.u.rows()), fmt(r.delta_comm), fmt(r.c), fmt(r.residual),
               fmt(r.bound), r.passed ? "true" : "false"};
      }
      t.rows[static_cast<size_t>(i)] = std::move(row);
    }
    for (char c : ok) t.all_passed = t.all_passed && c;
    return t;
  }
  if (opt.kind == "uniformity") {
    const int count = opt.count > 0 ? opt.count : 200;
    t.header = {"seed", "pair", "m", "delta_in", "achieved", "ratio"};
    const std::vector<double> deltas{1e-3, 1e-2, 1e-1};
    auto emit = [&](const std::string& pair, const UniformityReport& rep) {
      for (const auto& s : rep.samples)
        t.rows.push_back({std::to_string(opt.seed), pair, std::to_string(s.m), fmt(s.delta_in), fmt(s.achieved),
                          fmt(s.ratio)});
    };
    CircleSplit cs = circle_split(opt.grid);
    UniformityReport ideal = uniformity_probe(cs.s, count, {1, 2, 3}, deltas, opt.seed);
    emit("ideal", ideal);
    t.all_passed = ideal.sup_ratio <= 3.0 && ideal.monotone;
    double last = 0.0;
    for (double th : {0.3, 0.1, 0.03}) {
      UniformityReport rep = uniformity_probe(hereditary_pair(th), count, {1}, deltas, opt.seed);
      emit("hereditary-" + fmt(th), rep);
      t.all_passed = t.all_passed && rep.sup_ratio > last;
      last = rep.sup_ratio;
    }
    return t;
  }
  schema("unknown sweep kind '" + opt.kind + "'");
}

}  // namespace approxk::runner
