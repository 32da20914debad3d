#pragma once

#include <json.hpp>
#include <string>

#include "cylq/classical.hpp"
#include "cylq/operators.hpp"
#include "cylq/symbols.hpp"

namespace cylq::io {

using json = nlohmann::ordered_json;

// Parse failures and schema violations surface as SchemaError with the
// offending field or byte position in the message.
json parse_json_text(const std::string& text, const std::string& origin = "<input>");
json load_json_file(const std::string& path);

// Observable schema: {n, generators: [{k, U_basis, xi, terms: [{coeff_re,
// coeff_im, poly: {"<comma multiindex>": [re, im]}, Q, b}]}]}. U_basis is the
// list of orthonormal columns, Q the d x d rows, b the complex linear
// exponent as [re, im] pairs. Serializing a canonicalized observable is
// bit-stable under load/save round trips.
json to_json(const Observable& f);
Observable observable_from_json(const json& j);
void save_observable(const std::string& path, const Observable& f);
Observable load_observable(const std::string& path);

// Potential schema: {n, modes: [{k, re, im}]}, one entry per stored mode.
json to_json(const TrigPotential& V);
TrigPotential potential_from_json(const json& j);
void save_potential(const std::string& path, const TrigPotential& V);
TrigPotential load_potential(const std::string& path);

// Operator manifest {n, N, terms: [{k, diag_ref}]} plus one CSV per term
// (columns: index tuple, re, im) next to the manifest.
void save_operator(const std::string& manifest_path, const LatticeOperator& A);
LatticeOperator load_operator(const std::string& manifest_path);

// Helpers shared by the experiment runner.
IntVector int_vector_from_json(const json& j, int expected_size, const std::string& field);
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace cylq::io
