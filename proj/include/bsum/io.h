// JSON encodings shared by the command-line tool: element formats, bounded
// datasets (run-length), summation methods, sensitivity bounds and report
// envelopes.
//
// Every value that must be exact travels as a string: float elements as
// hex bit patterns, integers in decimal, dyadic rationals as "m*2^e" and
// other rationals as "p/q". JSON numbers are used only for counts, lengths
// and small parameters.

#ifndef BSUM_IO_H_
#define BSUM_IO_H_

#include <cstdint>
#include <string>
#include <variant>

#include "bsum/dataset.h"
#include "bsum/dyadic.h"
#include "bsum/kint.h"
#include "bsum/sensitivity.h"
#include "bsum/sim_float.h"
#include "bsum/summation.h"
#include "json.hpp"

namespace bsum {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

using AnyFormat = std::variant<FloatFormat, IntFormat>;
using AnyDataset = std::variant<FloatDataset, IntDataset>;

// {"type": "float", "k": 52, "l": 11} or
// {"type": "int", "bits": 8, "signed": false, "overflow": "wraparound"}.
Json format_to_json(const FloatFormat& format);
Json format_to_json(const IntFormat& format);
// Throws InputError naming `field` (and the sub-field) when malformed.
AnyFormat format_from_json(const Json& j, const std::string& field = "format");

// An element from text: for floats a "0x" pattern or an exactly
// representable dyadic ("m*2^e", "m/2^e" or an integer); for integers a
// decimal string. Throws InputError naming field.
SimFloat parse_element(const FloatFormat& format, const std::string& text,
                       const std::string& field);
KInt parse_element(const IntFormat& format, const std::string& text,
                   const std::string& field);

// Dataset file: {"schema": 1, "format": {...}, "bounds": {"L", "U"},
// "elements": [...]}. Runs of length one are written as plain strings and
// longer runs as {"value": ..., "count": n}; both forms are accepted.
template <class T>
Json dataset_to_json(const Dataset<T>& dataset);
AnyDataset dataset_from_json(const Json& j, const std::string& field = "dataset");

// {"algorithm", "rounding", "checked", "transforms": [...]}, with
// permutation seeds as decimal strings.
Json method_to_json(const SumMethod& method);
SumMethod method_from_json(const Json& j, const std::string& field = "method");

Json bound_to_json(const SensitivityBound& bound);
std::string rational_to_string(const BigRational& q);
// "inf" and "-inf" for infinities, else the exact dyadic.
template <class T>
Json value_to_json(const T& value);

// Pretty-printed with a trailing newline; key order is insertion order, so
// equal inputs give byte-identical text.
std::string dump(const Json& j);

// Throws InputError("file", ...) when the file is missing or not JSON.
Json read_json_file(const std::string& path);
// Throws PreconditionError when the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace bsum

#endif  // BSUM_IO_H_
