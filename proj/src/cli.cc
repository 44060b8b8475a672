#include "bsum/cli.h"

#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <type_traits>
#include <utility>

#include "CLI11.hpp"
#include "bsum/attacks.h"
#include "bsum/errors.h"
#include "bsum/io.h"
#include "bsum/mechanism.h"
#include "bsum/metrics.h"
#include "bsum/rng.h"
#include "bsum/sensitivity.h"
#include "bsum/summation.h"
#include "bsum/value_ops.h"

namespace bsum {

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Option groups shared by several subcommands.

struct FormatOptions {
  std::optional<int> k;
  std::optional<int> l;
  std::optional<int> bits;
  bool is_signed = false;
  std::optional<std::string> overflow;

  void add(CLI::App* app) {
    app->add_option("--k", k, "float mantissa bits");
    app->add_option("--l", l, "float exponent bits");
    app->add_option("--bits", bits, "integer width");
    app->add_flag("--signed", is_signed, "signed integers");
    app->add_option("--overflow", overflow, "wraparound or saturating");
  }

  AnyFormat resolve(const std::string& default_overflow = "wraparound") const {
    const bool is_float = k || l;
    if (is_float && bits) {
      throw InputError("format", "give either --k/--l or --bits, not both");
    }
    try {
      if (is_float) {
        if (!k || !l) throw InputError("format", "floats need both --k and --l");
        if (overflow || is_signed) {
          throw InputError("format", "--overflow and --signed apply to ints");
        }
        return FloatFormat(*k, *l);
      }
      if (!bits) throw InputError("format", "missing --k/--l or --bits");
      std::string o = overflow.value_or(default_overflow);
      if (o != "wraparound" && o != "saturating") {
        throw InputError("overflow", "expected wraparound or saturating");
      }
      return IntFormat(*bits, is_signed,
                       o == "wraparound" ? Overflow::kWraparound
                                         : Overflow::kSaturating);
    } catch (const InputError&) {
      throw;
    } catch (const PreconditionError& e) {
      throw InputError("format", e.what());
    }
  }
};

struct MethodOptions {
  std::string algorithm = "iterative";
  std::string rounding = "banker";
  bool checked = false;
  std::optional<uint64_t> rp_seed;
  std::optional<uint64_t> truncate;
  bool shift = false;
  CLI::App* app = nullptr;

  void add(CLI::App* a) {
    app = a;
    a->add_option("--method", algorithm,
                  "iterative, pairwise, pairwise_levelwise, kahan, split, "
                  "split_int, split_float_rtz or exact");
    a->add_option("--rounding", rounding, "banker or rtz");
    a->add_flag("--checked", checked, "integer parameters checked for overflow");
    a->add_option("--rp", rp_seed, "random permutation with this seed");
    a->add_option("--truncate", truncate, "truncate to this many elements");
    a->add_flag("--shift", shift, "shift bounds to [0, U - L]");
  }

  bool given() const {
    for (const char* name : {"--method", "--rounding", "--checked", "--rp",
                             "--truncate", "--shift"}) {
      if (app->count(name) > 0) return true;
    }
    return false;
  }

  SumMethod build(bool is_float) const {
    SumMethod m;
    m.algorithm = parse_algorithm(algorithm);
    m.rounding = parse_rounding(rounding);
    m.checked = checked;
    if (rp_seed) m.transforms.push_back(Transform::random_permutation(*rp_seed));
    if (truncate) m.transforms.push_back(Transform::truncate(*truncate));
    if (shift) m.transforms.push_back(Transform::shift_bounds());
    try {
      return is_float ? resolve_for_floats(m) : resolve_for_ints(m);
    } catch (const UnsupportedError& e) {
      throw InputError("method", e.what());
    }
  }
};

// Everything that defines a sensitivity question on the command line.
struct SensOptions {
  FormatOptions format;
  std::string lower;
  std::string upper;
  std::string metric;
  std::optional<uint64_t> n;
  MethodOptions method;

  void add(CLI::App* app) {
    format.add(app);
    app->add_option("--lower", lower, "lower bound L")->required();
    app->add_option("--upper", upper, "upper bound U")->required();
    app->add_option("--metric", metric, "sym, co, ham or id")->required();
    app->add_option("--n", n, "dataset length (co/ham) or cap (sym/id)");
    method.add(app);
  }

  template <class T>
  SensSpec<T> build(const typename T::Format& f) const {
    SensSpec<T> spec{parse_element(f, lower, "lower"),
                     parse_element(f, upper, "upper"), parse_metric(metric), n,
                     method.build(std::is_same_v<T, SimFloat>)};
    validate(spec);
    return spec;
  }
};

// ---------------------------------------------------------------------------
// Report helpers.

struct Context {
  std::vector<std::string> args;
  std::ostream* out;
  std::ostream* err;
  std::optional<std::string> out_dir;
};

Json manifest(const Context& ctx, const std::string& command,
              const Json& seeds, const Json& citations = Json::array()) {
  Json args = Json::array();
  for (size_t i = 1; i < ctx.args.size(); ++i) args.push_back(ctx.args[i]);
  return Json{{"tool", "bsum"},
              {"version", kToolVersion},
              {"command", command},
              {"arguments", std::move(args)},
              {"rng", Rng::kAlgorithm},
              {"seeds", seeds},
              {"bounds_cited", citations}};
}

Json envelope(const std::string& command) {
  return Json{{"schema", kSchemaVersion}, {"command", command}};
}

Json number_or_text(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

// Writes the report to <out>/<file> when --out was given, else to stdout.
void emit(const Context& ctx, const std::string& file, const Json& report) {
  const std::string text = dump(report);
  if (ctx.out_dir) {
    fs::create_directories(*ctx.out_dir);
    write_text_file((fs::path(*ctx.out_dir) / file).string(), text);
  } else {
    *ctx.out << text;
  }
}

template <class T>
Json sum_result_json(const SumResult<T>& r) {
  Json j;
  if (r.value) {
    j["value"] = value_to_json(*r.value);
  } else {
    j["value"] = nullptr;
  }
  j["exact"] = r.exact ? Json(r.exact->to_string()) : Json(nullptr);
  j["finite"] = r.exact.has_value();
  j["length"] = r.length;
  j["clamped_positive"] = r.clamped_positive;
  j["clamped_negative"] = r.clamped_negative;
  if (r.offset_count) {
    j["offset_count"] = *r.offset_count;
    j["offset"] = value_to_json(*r.offset);
    if (r.exact) {
      j["total_exact"] = (*r.exact + r.offset->to_exact() *
                                         DyadicRational(static_cast<int64_t>(
                                             *r.offset_count)))
                             .to_string();
    }
  }
  return j;
}

template <class T>
Json sens_spec_json(const SensSpec<T>& spec) {
  Json j{{"format", format_to_json(spec.format())},
         {"L", value_to_json(spec.lower)},
         {"U", value_to_json(spec.upper)},
         {"metric", to_string(spec.metric)}};
  j["n"] = spec.n ? Json(*spec.n) : Json(nullptr);
  j["method"] = method_to_json(spec.method);
  return j;
}

template <class F>
Json try_bound(F&& f) {
  try {
    return bound_to_json(f());
  } catch (const UnsupportedError& e) {
    return Json{{"unsupported", e.what()}};
  } catch (const PreconditionError& e) {
    return Json{{"unsupported", e.what()}};
  }
}

// ---------------------------------------------------------------------------
// Attack instance files.

template <class T>
struct LoadedInstance {
  AttackInstance<T> instance;
  Json json;
};

template <class T>
Json instance_json(const AttackInstance<T>& a, const Json& manifest_json) {
  Json params = Json::object();
  for (const auto& [key, value] : a.parameters) params[key] = value;
  return Json{{"schema", kSchemaVersion},
              {"kind", "attack_instance"},
              {"theorem", a.name},
              {"claim", a.claim},
              {"element_type", is_float_type(a.u.lower()) ? "float" : "int"},
              {"format", format_to_json(a.u.format())},
              {"metric", to_string(a.metric)},
              {"adjacency_distance", a.adjacency_distance},
              {"predicted_gap", a.predicted_gap.to_string()},
              {"idealized", a.idealized.to_string()},
              {"blowup", rational_to_string(a.blowup)},
              {"native_method", method_to_json(a.native_method)},
              {"parameters", std::move(params)},
              {"files", {{"u", "u.json"}, {"v", "v.json"}}},
              {"lengths", {{"u", a.u.size()}, {"v", a.v.size()}}},
              {"manifest", manifest_json}};
}

BigRational parse_rational(const std::string& text, const std::string& field) {
  size_t slash = text.find('/');
  try {
    if (slash == std::string::npos) return BigRational(BigInt(text));
    return BigRational(BigInt(text.substr(0, slash)),
                       BigInt(text.substr(slash + 1)));
  } catch (const std::exception&) {
    throw InputError(field, "expected a rational p/q, got '" + text + "'");
  }
}

std::string json_string(const Json& j, const std::string& key,
                        const std::string& field) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw InputError(field + "." + key, "missing or not a string");
  }
  return it->get<std::string>();
}

// Reads an instance manifest and its two dataset files, which live next
// to it. The element type is decided by the dataset files.
std::pair<Json, std::pair<AnyDataset, AnyDataset>> read_instance_files(
    const std::string& path) {
  Json j = read_json_file(path);
  if (!j.is_object() || j.value("kind", "") != "attack_instance") {
    throw InputError("instance", "'" + path + "' is not an attack instance");
  }
  const fs::path dir = fs::path(path).parent_path();
  if (!j.contains("files") || !j["files"].is_object()) {
    throw InputError("instance.files", "missing");
  }
  const Json& files = j["files"];
  AnyDataset u = dataset_from_json(
      read_json_file((dir / json_string(files, "u", "instance.files")).string()),
      "u");
  AnyDataset v = dataset_from_json(
      read_json_file((dir / json_string(files, "v", "instance.files")).string()),
      "v");
  if (u.index() != v.index()) {
    throw InputError("instance.files", "u and v have different element types");
  }
  return {std::move(j), {std::move(u), std::move(v)}};
}

template <class T>
AttackInstance<T> instance_from(const Json& j, Dataset<T> u, Dataset<T> v) {
  const std::string f = "instance";
  if (u.format() != v.format() || u.lower() != v.lower() ||
      u.upper() != v.upper()) {
    throw InputError("instance.files", "u and v disagree on format or bounds");
  }
  AttackInstance<T> a{json_string(j, "theorem", f),
                      j.value("claim", ""),
                      std::move(u),
                      std::move(v),
                      parse_metric(json_string(j, "metric", f)),
                      0,
                      DyadicRational::parse(json_string(j, "predicted_gap", f)),
                      DyadicRational::parse(json_string(j, "idealized", f)),
                      parse_rational(json_string(j, "blowup", f), f + ".blowup"),
                      SumMethod{},
                      {}};
  if (!j.contains("native_method")) {
    throw InputError("instance.native_method", "missing");
  }
  a.native_method = method_from_json(j["native_method"], "instance.native_method");
  if (j.contains("adjacency_distance") &&
      j["adjacency_distance"].is_number_unsigned()) {
    a.adjacency_distance = j["adjacency_distance"].get<uint64_t>();
  }
  if (j.contains("parameters") && j["parameters"].is_object()) {
    for (const auto& [key, value] : j["parameters"].items()) {
      if (value.is_string()) {
        a.parameters.emplace_back(key, value.template get<std::string>());
      }
    }
  }
  return a;
}

// Calls f(AttackInstance<T>) with the instance stored at path.
template <class F>
void with_instance(const std::string& path, F&& f) {
  auto [j, data] = read_instance_files(path);
  if (auto* u = std::get_if<FloatDataset>(&data.first)) {
    f(instance_from<SimFloat>(j, std::move(*u),
                              std::move(std::get<FloatDataset>(data.second))));
  } else {
    f(instance_from<KInt>(j, std::move(std::get<IntDataset>(data.first)),
                          std::move(std::get<IntDataset>(data.second))));
  }
}

template <class T>
Json realized_json(const RealizedGap& g) {
  Json j{{"sum_u", g.sum_u}, {"sum_v", g.sum_v}};
  j["gap"] = g.gap ? Json(g.gap->to_string()) : Json("undefined");
  if (g.gap) j["gap_approx"] = g.gap->to_double();
  j["midpoint"] = g.midpoint ? Json(g.midpoint->to_string()) : Json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands.

void run_sum(const Context& ctx, const std::string& in,
             const MethodOptions& method) {
  AnyDataset data = dataset_from_json(read_json_file(in), "in");
  std::visit(
      [&](const auto& d) {
        using T = typename std::decay_t<decltype(d)>::Value;
        SumMethod m = method.build(std::is_same_v<T, SimFloat>);
        SumResult<T> r;
        try {
          r = bsum::run_sum(d, m);
        } catch (const ArithmeticError& e) {
          throw PreconditionError(std::string("sum is undefined: ") + e.what());
        }
        Json report = envelope("sum");
        report["format"] = format_to_json(d.format());
        report["length"] = d.size();
        report["method"] = method_to_json(m);
        report["result"] = sum_result_json(r);
        Json seeds = Json::object();
        if (const Transform* t = m.find(Transform::Kind::kRandomPermutation)) {
          seeds["permutation"] = std::to_string(t->seed);
        }
        report["manifest"] = manifest(ctx, "sum", seeds);
        emit(ctx, "sum.json", report);
      },
      data);
}

void run_sens_bound(const Context& ctx, const SensOptions& o) {
  std::visit(
      [&](const auto& f) {
        using Format = std::decay_t<decltype(f)>;
        using T = std::conditional_t<std::is_same_v<Format, FloatFormat>,
                                     SimFloat, KInt>;
        SensSpec<T> spec = o.template build<T>(f);
        Json report = envelope("sens bound");
        report["spec"] = sens_spec_json(spec);
        report["idealized"] = bound_to_json(idealized_sensitivity(spec));
        if constexpr (std::is_same_v<T, KInt>) {
          if (f.overflow() == Overflow::kWraparound) {
            report["modular"] = bound_to_json(modular_sensitivity_bound(spec));
          }
        }
        Json implemented =
            try_bound([&] { return implemented_sensitivity_bound(spec); });
        report["implemented"] = implemented;
        Json cites = Json::array();
        if (implemented.contains("source")) cites.push_back(implemented["source"]);
        report["manifest"] = manifest(ctx, "sens bound", Json::object(), cites);
        emit(ctx, "sens_bound.json", report);
      },
      o.format.resolve());
}

int run_sens_bruteforce(const Context& ctx, const SensOptions& o,
                        uint64_t guard) {
  int code = kExitOk;
  std::visit(
      [&](const auto& f) {
        using Format = std::decay_t<decltype(f)>;
        using T = std::conditional_t<std::is_same_v<Format, FloatFormat>,
                                     SimFloat, KInt>;
        SensSpec<T> spec = o.template build<T>(f);
        if (!spec.n) throw InputError("n", "brute force needs --n");
        BruteForceOptions options;
        options.guard = guard;
        BruteForceResult<T> bf = brute_force_sensitivity(spec, options);
        SensitivityBound lower = attack_lower(spec);
        Json report = envelope("sens bruteforce");
        report["spec"] = sens_spec_json(spec);
        report["brute_force"] = bound_to_json(bf.bound);
        Json wu = Json::array(), wv = Json::array();
        for (const T& x : bf.witness_u) wu.push_back(encode(x));
        for (const T& x : bf.witness_v) wv.push_back(encode(x));
        report["witness"] = {{"u", wu}, {"v", wv}};
        report["evaluations"] = bf.evaluations;
        report["attack_lower"] = bound_to_json(lower);
        bool sandwich = bound_le(lower, bf.bound);
        Json implemented = Json(nullptr);
        try {
          SensitivityBound upper = implemented_sensitivity_bound(spec);
          implemented = bound_to_json(upper);
          sandwich = sandwich && bound_le(bf.bound, upper);
        } catch (const PreconditionError& e) {
          implemented = Json{{"unsupported", e.what()}};
        }
        report["implemented"] = implemented;
        report["sandwich_holds"] = sandwich;
        report["manifest"] = manifest(ctx, "sens bruteforce", Json::object());
        emit(ctx, "sens_bruteforce.json", report);
        if (!sandwich) {
          *ctx.err << "bsum: verification failed: attack lower bound, brute "
                      "force and implemented bound are out of order\n";
          code = kExitVerification;
        }
      },
      o.format.resolve());
  return code;
}

void run_sens_recommend(const Context& ctx, const SensOptions& o,
                        bool n_known, uint64_t seed) {
  std::visit(
      [&](const auto& f) {
        using Format = std::decay_t<decltype(f)>;
        using T = std::conditional_t<std::is_same_v<Format, FloatFormat>,
                                     SimFloat, KInt>;
        T lower = parse_element(f, o.lower, "lower");
        T upper = parse_element(f, o.upper, "upper");
        Metric metric = parse_metric(o.metric);
        if (n_known && !o.n) throw InputError("n", "--n-known needs --n");
        auto recs = recommend(lower, upper, metric, n_known, o.n, seed);
        Json list = Json::array();
        Json cites = Json::array();
        for (const auto& r : recs) {
          Json e{{"method", method_to_json(r.method)},
                 {"bound", bound_to_json(r.bound)}};
          e["factor"] = r.factor ? Json(rational_to_string(*r.factor))
                                 : Json(nullptr);
          e["note"] = r.note;
          cites.push_back(r.bound.source);
          list.push_back(std::move(e));
        }
        Json report = envelope("sens recommend");
        report["format"] = format_to_json(f);
        report["L"] = value_to_json(lower);
        report["U"] = value_to_json(upper);
        report["metric"] = to_string(metric);
        report["n_known"] = n_known;
        report["n"] = o.n ? Json(*o.n) : Json(nullptr);
        report["recommendations"] = std::move(list);
        report["manifest"] = manifest(ctx, "sens recommend",
                                      Json{{"permutation", std::to_string(seed)}},
                                      cites);
        emit(ctx, "sens_recommend.json", report);
      },
      o.format.resolve());
}

struct AttackOptions {
  std::string theorem;
  FormatOptions format;
  std::optional<std::string> lower;
  std::optional<std::string> upper;
  bool ham = false;
  bool drop_last = false;
  std::optional<int64_t> j, a, d, m;
};

int64_t need(const std::optional<int64_t>& v, const std::string& name,
             const std::string& theorem) {
  if (!v) throw InputError(name, "required by theorem " + theorem);
  return *v;
}

FloatFormat float_format(const AttackOptions& o) {
  AnyFormat f = o.format.resolve();
  if (!std::holds_alternative<FloatFormat>(f)) {
    throw InputError("format", "theorem " + o.theorem + " needs --k and --l");
  }
  return std::get<FloatFormat>(f);
}

IntFormat int_format(const AttackOptions& o, const std::string& overflow) {
  AnyFormat f = o.format.resolve(overflow);
  if (!std::holds_alternative<IntFormat>(f)) {
    throw InputError("format", "theorem " + o.theorem + " needs --bits");
  }
  return std::get<IntFormat>(f);
}

template <class T>
void write_instance(const Context& ctx, const AttackInstance<T>& a) {
  if (!ctx.out_dir) throw InputError("out", "attack gen needs --out");
  Json m = manifest(ctx, "attack gen", Json::object());
  Json inst = instance_json(a, m);
  fs::create_directories(*ctx.out_dir);
  const fs::path dir(*ctx.out_dir);
  write_text_file((dir / "u.json").string(), dump(dataset_to_json(a.u)));
  write_text_file((dir / "v.json").string(), dump(dataset_to_json(a.v)));
  write_text_file((dir / "instance.json").string(), dump(inst));
  *ctx.out << dump(inst);
}

void run_attack_gen(const Context& ctx, const AttackOptions& o) {
  const std::string& t = o.theorem;
  if (t == "overflow" || t == "saturation_reorder") {
    IntFormat f = int_format(o, t == "overflow" ? "wraparound" : "saturating");
    if (!o.upper) throw InputError("upper", "required by theorem " + t);
    KInt lower = parse_element(f, o.lower.value_or("0"), "lower");
    KInt upper = parse_element(f, *o.upper, "upper");
    write_instance(ctx, t == "overflow"
                            ? overflow_attack(f, lower, upper, o.ham)
                            : saturation_reorder_attack(f, lower, upper));
    return;
  }
  if (t == "float_reorder") {
    write_instance(ctx, float_reorder_attack(float_format(o), need(o.j, "j", t),
                                             need(o.a, "a", t),
                                             need(o.d, "d", t), o.drop_last));
  } else if (t == "rounding") {
    write_instance(ctx, rounding_attack(float_format(o), need(o.j, "j", t),
                                        need(o.m, "m", t)));
  } else if (t == "repeated_rounding_1") {
    write_instance(ctx, repeated_rounding_attack_1(
                            float_format(o), need(o.j, "j", t), need(o.m, "m", t)));
  } else if (t == "repeated_rounding_2") {
    write_instance(ctx, repeated_rounding_attack_2(
                            float_format(o), need(o.j, "j", t), need(o.a, "a", t)));
  } else {
    throw InputError("theorem",
                     "unknown theorem '" + t +
                         "' (expected overflow, saturation_reorder, "
                         "float_reorder, rounding, repeated_rounding_1 or "
                         "repeated_rounding_2)");
  }
}

int run_attack_verify(const Context& ctx, const std::string& path,
                      const MethodOptions& method) {
  int code = kExitOk;
  with_instance(path, [&](const auto& a) {
    using T = typename std::decay_t<decltype(a.u)>::Value;
    const bool is_native = !method.given();
    SumMethod m = is_native ? a.native_method
                            : method.build(std::is_same_v<T, SimFloat>);
    Distance dist = distance(a.metric, a.u, a.v);
    RealizedGap g;
    std::string failure;
    try {
      g = verify_attack(a, m);
    } catch (const VerificationError& e) {
      failure = e.what();
      g = realized_gap(a, m);
    }
    if (dist.to_string() != std::to_string(a.adjacency_distance)) {
      failure = "datasets are at " + to_string(a.metric) + " distance " +
                dist.to_string() + ", the instance records " +
                std::to_string(a.adjacency_distance);
    }
    Json report = envelope("attack verify");
    report["theorem"] = a.name;
    report["method"] = method_to_json(m);
    report["native_method"] = is_native;
    report["metric"] = to_string(a.metric);
    report["distance"] = dist.to_string();
    report["predicted_gap"] = a.predicted_gap.to_string();
    report["idealized"] = a.idealized.to_string();
    report["realized"] = realized_json<T>(g);
    if (g.gap && !a.idealized.is_zero()) {
      report["realized_blowup"] = rational_to_string(g.gap->to_rational() /
                                                     a.idealized.to_rational());
    }
    report["verified"] = failure.empty();
    if (!failure.empty()) report["failure"] = failure;
    report["manifest"] = manifest(ctx, "attack verify", Json::object());
    emit(ctx, "attack_verify.json", report);
    if (!failure.empty()) {
      *ctx.err << "bsum: verification failed: " << failure << "\n";
      code = kExitVerification;
    }
  });
  return code;
}

struct ExperimentOptions {
  std::string instance;
  double epsilon = 0;
  uint64_t trials = 0;
  std::optional<std::string> threshold;
  uint64_t seed = 0;
  std::optional<std::string> noise;
  std::string calibrate = "idealized";
  std::optional<std::string> scale;
  std::string mode = "tail";
  MethodOptions method;
};

template <class T>
SensitivityBound calibration_bound(const AttackInstance<T>& a,
                                   const SumMethod& m, const std::string& how) {
  SensSpec<T> spec{a.u.lower(), a.u.upper(), a.metric,
                   std::max<uint64_t>(a.u.size(), a.v.size()), m};
  if (how == "idealized") return idealized_sensitivity(spec);
  if (how == "implemented") return implemented_sensitivity_bound(spec);
  if (how == "modular") {
    if constexpr (std::is_same_v<T, KInt>) return modular_sensitivity_bound(spec);
    throw InputError("calibrate", "modular calibration needs integers");
  }
  throw InputError("calibrate",
                   "expected idealized, implemented or modular, got '" + how + "'");
}

template <class T>
MechanismSpec<T> mechanism_for(const AttackInstance<T>& a, const SumMethod& m,
                               NoiseKind noise, const std::string& how,
                               const std::optional<std::string>& scale,
                               double epsilon) {
  if (scale) {
    MechanismSpec<T> spec{a.u.lower(), a.u.upper(), m, noise,
                          DyadicRational::parse(*scale), 0, std::nullopt,
                          std::nullopt};
    if (spec.scale.sign() <= 0) throw InputError("scale", "must be positive");
    if constexpr (std::is_same_v<T, SimFloat>) {
      spec.grid_log2 = spec.scale.floor_log2() - kFloatNoiseGridBits;
    }
    spec.epsilon = epsilon;
    return spec;
  }
  return calibrate(a.u.lower(), a.u.upper(), m, noise,
                   calibration_bound(a, m, how), epsilon);
}

Json noise_json(NoiseKind kind, const DyadicRational& scale, int64_t grid,
                const std::optional<SensitivityBound>& calibration) {
  Json j{{"kind", to_string(kind)},
         {"scale", scale.to_string()},
         {"scale_approx", scale.to_double()},
         {"grid_log2", grid}};
  j["calibration"] = calibration ? bound_to_json(*calibration) : Json(nullptr);
  return j;
}

void run_experiment(const Context& ctx, const ExperimentOptions& o) {
  if (!(o.epsilon > 0)) throw InputError("epsilon", "must be positive");
  LikelihoodMode mode;
  if (o.mode == "tail") {
    mode = LikelihoodMode::kTail;
  } else if (o.mode == "sequence") {
    mode = LikelihoodMode::kSequence;
  } else {
    throw InputError("mode", "expected tail or sequence");
  }
  with_instance(o.instance, [&](const auto& a) {
    using T = typename std::decay_t<decltype(a.u)>::Value;
    SumMethod m = o.method.given() ? o.method.build(std::is_same_v<T, SimFloat>)
                                   : a.native_method;
    NoiseKind noise = parse_noise_kind(o.noise.value_or("discrete_laplace"));
    MechanismSpec<T> spec =
        mechanism_for(a, m, noise, o.calibrate, o.scale, o.epsilon);
    std::optional<DyadicRational> threshold;
    if (o.threshold) threshold = DyadicRational::parse(*o.threshold);
    ExperimentReport r = distinguishing_experiment(a, spec, threshold, o.trials,
                                                   o.seed, o.epsilon, mode);
    Json report = envelope("experiment run");
    report["theorem"] = a.name;
    report["method"] = method_to_json(m);
    report["noise"] = noise_json(noise, spec.scale, spec.grid_log2,
                                 spec.calibration);
    report["epsilon"] = r.epsilon;
    report["trials"] = r.trials;
    report["master_seed"] = std::to_string(r.master_seed);
    report["threshold"] = r.threshold.to_string();
    report["counts"] = {{"u", {{"zeros", r.counts[0][0]}, {"ones", r.counts[0][1]}}},
                        {"v", {{"zeros", r.counts[1][0]}, {"ones", r.counts[1][1]}}}};
    report["likelihood_mode"] = o.mode;
    report["log2_bound"] = number_or_text(r.log2_bound);
    report["alpha"] = kVerdictAlpha;
    report["verdict"] = r.verdict;
    Json cites = Json::array();
    if (spec.calibration) cites.push_back(spec.calibration->source);
    report["manifest"] =
        manifest(ctx, "experiment run",
                 Json{{"master", std::to_string(o.seed)},
                      {"noise_streams", "(master, 2 * trial + dataset)"}},
                 cites);
    emit(ctx, "experiment.json", report);
  });
}

struct DpCheckOptions {
  std::optional<std::string> instance;
  std::optional<std::string> u_file;
  std::optional<std::string> v_file;
  std::optional<std::string> metric;
  std::optional<uint64_t> m;
  double epsilon = 0;
  std::string noise = "discrete_laplace_mod";
  std::optional<std::string> calibrate;
  std::optional<std::string> scale;
  MethodOptions method;
};

void run_dpcheck(const Context& ctx, const DpCheckOptions& o) {
  if (!(o.epsilon > 0)) throw InputError("epsilon", "must be positive");
  auto check = [&](const IntAttack& a) {
    if (o.m) {
      const BigInt modulus = a.u.format().modulus();
      if (BigInt(*o.m) != modulus) {
        throw InputError("m", "the datasets use modulus " + modulus.str());
      }
    }
    SumMethod method = o.method.given() ? o.method.build(false) : a.native_method;
    NoiseKind noise = parse_noise_kind(o.noise);
    std::string how = o.calibrate.value_or(
        noise == NoiseKind::kDiscreteLaplaceMod ? "modular" : "idealized");
    MechanismSpec<KInt> spec =
        mechanism_for(a, method, noise, how, o.scale, o.epsilon);
    DpCheckResult r = exact_dp_check(spec, a.u, a.v, o.epsilon);
    Json report = envelope("dpcheck exact");
    report["format"] = format_to_json(a.u.format());
    report["method"] = method_to_json(method);
    report["noise"] = noise_json(noise, spec.scale, spec.grid_log2,
                                 spec.calibration);
    report["epsilon"] = o.epsilon;
    report["decay"] = rational_to_string(r.decay);
    report["max_ratio"] = rational_to_string(r.max_ratio);
    report["max_ratio_ln_approx"] =
        std::log(static_cast<double>(r.max_ratio));
    report["argmax"] = i128_to_string(r.argmax);
    report["within_epsilon"] = r.within_epsilon;
    Json cites = Json::array();
    if (spec.calibration) cites.push_back(spec.calibration->source);
    report["manifest"] = manifest(ctx, "dpcheck exact", Json::object(), cites);
    emit(ctx, "dpcheck.json", report);
  };
  if (o.instance) {
    with_instance(*o.instance, [&](const auto& a) {
      using T = typename std::decay_t<decltype(a.u)>::Value;
      if constexpr (std::is_same_v<T, KInt>) {
        check(a);
      } else {
        throw UnsupportedError("exact checks apply to integer instances only");
      }
    });
    return;
  }
  if (!o.u_file || !o.v_file || !o.metric) {
    throw InputError("instance", "give --instance, or --u, --v and --metric");
  }
  AnyDataset u = dataset_from_json(read_json_file(*o.u_file), "u");
  AnyDataset v = dataset_from_json(read_json_file(*o.v_file), "v");
  auto* iu = std::get_if<IntDataset>(&u);
  auto* iv = std::get_if<IntDataset>(&v);
  if (!iu || !iv) {
    throw UnsupportedError("exact checks apply to integer datasets only");
  }
  if (iu->format() != iv->format() || iu->lower() != iv->lower() ||
      iu->upper() != iv->upper()) {
    throw InputError("v", "u and v disagree on format or bounds");
  }
  IntAttack a{"files", "", *iu, *iv, parse_metric(*o.metric), 0,
              DyadicRational(0), DyadicRational(0), BigRational(0),
              SumMethod{}, {}};
  check(a);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  Context ctx;
  for (int i = 0; i < argc; ++i) ctx.args.emplace_back(argv[i]);
  ctx.out = &out;
  ctx.err = &err;

  CLI::App app{"Bounded sums over emulated floats and integers: sums, "
               "sensitivity bounds, attacks and privacy experiments."};
  app.name("bsum");
  app.require_subcommand(1);
  // Lets --out follow the subcommand names.
  app.fallthrough();
  std::optional<std::string> out_dir;
  app.add_option("--out", out_dir, "write reports into this directory");

  // sum
  CLI::App* sum = app.add_subcommand("sum", "sum a dataset file");
  std::string sum_in;
  MethodOptions sum_method;
  sum->add_option("--in", sum_in, "dataset file")->required();
  sum_method.add(sum);

  // sens
  CLI::App* sens = app.add_subcommand("sens", "sensitivity bounds");
  sens->require_subcommand(1);
  SensOptions bound_opts, bf_opts, rec_opts;
  CLI::App* sens_bound = sens->add_subcommand("bound", "idealized and proven bounds");
  bound_opts.add(sens_bound);
  CLI::App* sens_bf = sens->add_subcommand("bruteforce", "exhaustive oracle");
  bf_opts.add(sens_bf);
  uint64_t guard = BruteForceOptions{}.guard;
  sens_bf->add_option("--guard", guard, "maximum number of evaluations");
  CLI::App* sens_rec = sens->add_subcommand("recommend", "safe configurations");
  rec_opts.add(sens_rec);
  bool n_known = false;
  uint64_t rec_seed = 0;
  sens_rec->add_flag("--n-known", n_known, "the dataset length is public");
  sens_rec->add_option("--seed", rec_seed, "permutation seed");

  // attack
  CLI::App* attack = app.add_subcommand("attack", "attack instances");
  attack->require_subcommand(1);
  CLI::App* gen = attack->add_subcommand("gen", "generate an instance");
  AttackOptions ao;
  gen->add_option("--theorem", ao.theorem, "construction name")->required();
  ao.format.add(gen);
  gen->add_option("--lower", ao.lower, "integer lower bound (default 0)");
  gen->add_option("--upper", ao.upper, "integer upper bound");
  gen->add_flag("--ham", ao.ham, "equal-length variant of overflow");
  gen->add_flag("--drop-last", ao.drop_last, "float_reorder at d_sym = 1");
  gen->add_option("--j", ao.j,
                  "exponent or length parameter (float constructions)");
  gen->add_option("--a", ao.a, "float_reorder and repeated_rounding_2 shift");
  gen->add_option("--d", ao.d, "float_reorder exponent gap");
  gen->add_option("--m", ao.m, "rounding and repeated_rounding_1 scale");
  CLI::App* verify = attack->add_subcommand("verify", "sum both datasets");
  std::string verify_instance;
  MethodOptions verify_method;
  verify->add_option("--instance", verify_instance, "instance.json")->required();
  verify_method.add(verify);

  // experiment
  CLI::App* experiment = app.add_subcommand("experiment", "distinguishing runs");
  experiment->require_subcommand(1);
  CLI::App* exp_run = experiment->add_subcommand("run", "run an experiment");
  ExperimentOptions eo;
  exp_run->add_option("--instance", eo.instance, "instance.json")->required();
  exp_run->add_option("--epsilon", eo.epsilon, "privacy parameter")->required();
  exp_run->add_option("--trials", eo.trials, "trials per dataset")->required();
  exp_run->add_option("--threshold", eo.threshold, "dyadic threshold");
  exp_run->add_option("--seed", eo.seed, "master seed");
  exp_run->add_option("--noise", eo.noise, "noise kind");
  exp_run->add_option("--calibrate", eo.calibrate,
                      "idealized, implemented or modular");
  exp_run->add_option("--scale", eo.scale, "explicit dyadic noise scale");
  exp_run->add_option("--mode", eo.mode, "tail or sequence");
  eo.method.add(exp_run);

  // dpcheck
  CLI::App* dpcheck = app.add_subcommand("dpcheck", "exact privacy checks");
  dpcheck->require_subcommand(1);
  CLI::App* exact = dpcheck->add_subcommand("exact", "exact PMF ratio");
  DpCheckOptions dco;
  exact->add_option("--instance", dco.instance, "instance.json");
  exact->add_option("--u", dco.u_file, "dataset file");
  exact->add_option("--v", dco.v_file, "dataset file");
  exact->add_option("--metric", dco.metric, "adjacency metric for --u/--v");
  exact->add_option("--m", dco.m, "expected modulus 2^k");
  exact->add_option("--epsilon", dco.epsilon, "privacy parameter")->required();
  exact->add_option("--noise", dco.noise,
                    "discrete_laplace_mod or discrete_laplace_saturating");
  exact->add_option("--calibrate", dco.calibrate,
                    "idealized, implemented or modular");
  exact->add_option("--scale", dco.scale, "explicit dyadic noise scale");
  dco.method.add(exact);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitPrecondition;
  }
  ctx.out_dir = out_dir;

  try {
    if (sum->parsed()) {
      run_sum(ctx, sum_in, sum_method);
    } else if (sens_bound->parsed()) {
      run_sens_bound(ctx, bound_opts);
    } else if (sens_bf->parsed()) {
      return run_sens_bruteforce(ctx, bf_opts, guard);
    } else if (sens_rec->parsed()) {
      run_sens_recommend(ctx, rec_opts, n_known, rec_seed);
    } else if (gen->parsed()) {
      run_attack_gen(ctx, ao);
    } else if (verify->parsed()) {
      return run_attack_verify(ctx, verify_instance, verify_method);
    } else if (exp_run->parsed()) {
      run_experiment(ctx, eo);
    } else if (exact->parsed()) {
      run_dpcheck(ctx, dco);
    }
  } catch (const VerificationError& e) {
    err << "bsum: verification failed: " << e.what() << "\n";
    return kExitVerification;
  } catch (const InputError& e) {
    err << "bsum: invalid input: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const PreconditionError& e) {
    err << "bsum: precondition failed: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const ArithmeticError& e) {
    err << "bsum: arithmetic error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const fs::filesystem_error& e) {
    err << "bsum: file error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err << "bsum: internal error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace bsum
