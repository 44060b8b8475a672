#include "bsum/io.h"

#include <fstream>
#include <sstream>
#include <utility>

#include "bsum/errors.h"
#include "bsum/value_ops.h"

namespace bsum {

namespace {

const Json& member(const Json& j, const std::string& key,
                   const std::string& field) {
  if (!j.is_object()) throw InputError(field, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError(field + "." + key, "missing");
  return *it;
}

std::string string_member(const Json& j, const std::string& key,
                          const std::string& field) {
  const Json& v = member(j, key, field);
  if (!v.is_string()) throw InputError(field + "." + key, "expected a string");
  return v.get<std::string>();
}

int64_t int_member(const Json& j, const std::string& key,
                   const std::string& field) {
  const Json& v = member(j, key, field);
  if (!v.is_number_integer()) {
    throw InputError(field + "." + key, "expected an integer");
  }
  return v.get<int64_t>();
}

uint64_t count_of(const Json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<uint64_t>();
  if (v.is_number_integer() && v.get<int64_t>() >= 0) {
    return static_cast<uint64_t>(v.get<int64_t>());
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
      try {
        return std::stoull(s);
      } catch (const std::exception&) {
      }
    }
  }
  throw InputError(field, "expected a non-negative 64-bit count");
}

template <class T>
Dataset<T> build_dataset(const typename T::Format& format, const Json& j,
                         const std::string& field) {
  const Json& bounds = member(j, "bounds", field);
  T lower = parse_element(format, string_member(bounds, "L", field + ".bounds"),
                          field + ".bounds.L");
  T upper = parse_element(format, string_member(bounds, "U", field + ".bounds"),
                          field + ".bounds.U");
  Dataset<T> out = [&] {
    try {
      return Dataset<T>(lower, upper);
    } catch (const PreconditionError& e) {
      throw InputError(field + ".bounds", e.what());
    }
  }();
  const Json& elements = member(j, "elements", field);
  if (!elements.is_array()) {
    throw InputError(field + ".elements", "expected an array");
  }
  for (size_t i = 0; i < elements.size(); ++i) {
    const std::string f = field + ".elements[" + std::to_string(i) + "]";
    const Json& e = elements[i];
    std::string text;
    uint64_t count = 1;
    if (e.is_string()) {
      text = e.get<std::string>();
    } else if (e.is_object()) {
      text = string_member(e, "value", f);
      count = count_of(member(e, "count", f), f + ".count");
    } else {
      throw InputError(f, "expected a string or {value, count}");
    }
    T value = parse_element(format, text, f);
    try {
      out.push_back(value, count);
    } catch (const PreconditionError& err) {
      throw InputError(f, err.what());
    }
  }
  return out;
}

std::string kind_name(Transform::Kind kind) {
  switch (kind) {
    case Transform::Kind::kTruncate:
      return "truncate";
    case Transform::Kind::kRandomPermutation:
      return "random_permutation";
    case Transform::Kind::kShiftBounds:
      return "shift_bounds";
  }
  return "unknown";
}

}  // namespace

Json format_to_json(const FloatFormat& format) {
  return Json{{"type", "float"}, {"k", format.k()}, {"l", format.l()}};
}

Json format_to_json(const IntFormat& format) {
  return Json{{"type", "int"},
              {"bits", format.bits()},
              {"signed", format.is_signed()},
              {"overflow", format.overflow() == Overflow::kWraparound
                               ? "wraparound"
                               : "saturating"}};
}

AnyFormat format_from_json(const Json& j, const std::string& field) {
  const std::string type = string_member(j, "type", field);
  try {
    if (type == "float") {
      return FloatFormat(static_cast<int>(int_member(j, "k", field)),
                         static_cast<int>(int_member(j, "l", field)));
    }
    if (type == "int") {
      const Json& s = member(j, "signed", field);
      if (!s.is_boolean()) {
        throw InputError(field + ".signed", "expected true or false");
      }
      const std::string overflow = string_member(j, "overflow", field);
      Overflow o;
      if (overflow == "wraparound") {
        o = Overflow::kWraparound;
      } else if (overflow == "saturating") {
        o = Overflow::kSaturating;
      } else {
        throw InputError(field + ".overflow",
                         "expected wraparound or saturating");
      }
      return IntFormat(static_cast<int>(int_member(j, "bits", field)),
                       s.get<bool>(), o);
    }
  } catch (const InputError&) {
    throw;
  } catch (const PreconditionError& e) {
    throw InputError(field, e.what());
  }
  throw InputError(field + ".type", "expected float or int, got '" + type + "'");
}

SimFloat parse_element(const FloatFormat& format, const std::string& text,
                       const std::string& field) {
  try {
    if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) {
      return SimFloat::parse(format, text);
    }
    return SimFloat::exact(format, DyadicRational::parse(text));
  } catch (const PreconditionError& e) {
    throw InputError(field, e.what());
  }
}

KInt parse_element(const IntFormat& format, const std::string& text,
                   const std::string& field) {
  try {
    return KInt::parse(format, text);
  } catch (const PreconditionError& e) {
    throw InputError(field, e.what());
  }
}

template <class T>
Json dataset_to_json(const Dataset<T>& dataset) {
  Json elements = Json::array();
  for (const Run<T>& r : dataset.runs()) {
    if (r.count == 1) {
      elements.push_back(encode(r.value));
    } else {
      elements.push_back(Json{{"value", encode(r.value)}, {"count", r.count}});
    }
  }
  return Json{{"schema", kSchemaVersion},
              {"format", format_to_json(dataset.format())},
              {"bounds",
               {{"L", encode(dataset.lower())}, {"U", encode(dataset.upper())}}},
              {"length", dataset.size()},
              {"elements", std::move(elements)}};
}

AnyDataset dataset_from_json(const Json& j, const std::string& field) {
  AnyFormat format = format_from_json(member(j, "format", field),
                                      field + ".format");
  if (const auto* f = std::get_if<FloatFormat>(&format)) {
    return build_dataset<SimFloat>(*f, j, field);
  }
  return build_dataset<KInt>(std::get<IntFormat>(format), j, field);
}

Json method_to_json(const SumMethod& method) {
  Json transforms = Json::array();
  for (const Transform& t : method.transforms) {
    Json e{{"kind", kind_name(t.kind)}};
    if (t.kind == Transform::Kind::kTruncate) e["n_max"] = t.n_max;
    if (t.kind == Transform::Kind::kRandomPermutation) {
      e["seed"] = std::to_string(t.seed);
    }
    transforms.push_back(std::move(e));
  }
  return Json{{"algorithm", to_string(method.algorithm)},
              {"rounding", to_string(method.rounding)},
              {"checked", method.checked},
              {"transforms", std::move(transforms)},
              {"text", method.to_string()}};
}

SumMethod method_from_json(const Json& j, const std::string& field) {
  SumMethod m;
  try {
    m.algorithm = parse_algorithm(string_member(j, "algorithm", field));
    if (j.contains("rounding")) {
      m.rounding = parse_rounding(string_member(j, "rounding", field));
    }
  } catch (const InputError& e) {
    throw InputError(field, e.what());
  }
  if (j.contains("checked")) {
    const Json& c = j["checked"];
    if (!c.is_boolean()) throw InputError(field + ".checked", "expected bool");
    m.checked = c.get<bool>();
  }
  if (j.contains("transforms")) {
    const Json& ts = j["transforms"];
    if (!ts.is_array()) {
      throw InputError(field + ".transforms", "expected an array");
    }
    for (size_t i = 0; i < ts.size(); ++i) {
      const std::string f = field + ".transforms[" + std::to_string(i) + "]";
      const std::string kind = string_member(ts[i], "kind", f);
      if (kind == "truncate") {
        m.transforms.push_back(
            Transform::truncate(count_of(member(ts[i], "n_max", f), f + ".n_max")));
      } else if (kind == "random_permutation") {
        m.transforms.push_back(Transform::random_permutation(
            count_of(member(ts[i], "seed", f), f + ".seed")));
      } else if (kind == "shift_bounds") {
        m.transforms.push_back(Transform::shift_bounds());
      } else {
        throw InputError(f + ".kind", "unknown transform '" + kind + "'");
      }
    }
  }
  return m;
}

std::string rational_to_string(const BigRational& q) {
  return boost::multiprecision::numerator(q).str() + "/" +
         boost::multiprecision::denominator(q).str();
}

Json bound_to_json(const SensitivityBound& bound) {
  Json j{{"kind", to_string(bound.kind)},
         {"value", bound.value ? bound.value->to_string() : "inf"}};
  if (bound.value) j["approx"] = bound.value->to_double();
  j["modular"] = bound.modular;
  j["source"] = bound.source;
  return j;
}

template <class T>
Json value_to_json(const T& value) {
  return Json{{"encoded", encode(value)}, {"exact", describe(value)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("file", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw InputError("file", "'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write '" + path + "'");
  out << text;
  if (!out) throw PreconditionError("error writing '" + path + "'");
}

template Json dataset_to_json(const Dataset<SimFloat>&);
template Json dataset_to_json(const Dataset<KInt>&);
template Json value_to_json(const SimFloat&);
template Json value_to_json(const KInt&);

}  // namespace bsum
