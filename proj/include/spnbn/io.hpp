#pragma once

#include <string>

#include "spnbn/bayesnet.hpp"
#include "spnbn/circuit.hpp"

namespace spnbn {

std::string bn_to_json(const BayesNet& bn);
BayesNet bn_from_json(const std::string& text);

std::string circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Sniffs BN vs SPN JSON and renders the matching DOT.
std::string model_file_to_dot(const std::string& text);

}  // namespace spnbn
