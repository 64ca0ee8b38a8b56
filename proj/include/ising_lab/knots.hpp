#pragma once

#include <string>
#include <vector>

#include "ising_lab/numeric.hpp"
#include "json.hpp"

namespace ising_lab {

// ---------------------------------------------------------------------------
// Signed graphs and Potts sums
// ---------------------------------------------------------------------------

struct SignedEdge {
    int a = 0;
    int b = 0;
    int sign = 1;  // +1 or -1
};

// Multi-edges are allowed, self-loops are not.
struct SignedGraph {
    int vertices = 0;
    std::vector<SignedEdge> edges;

    void validate() const;
    int signature() const;  // (#positive) - (#negative)
};

struct PottsParams {
    int q = 2;
    cplx beta = 0;
};

// principal-branch acosh((q - 2) / 2)
cplx invariant_beta(int q);

inline constexpr double potts_cap = 1e7;  // largest q^vertices we enumerate

// sum over q-colourings of prod_edges exp(sign * beta * delta(colour_a, colour_b))
cplx potts_partition(const SignedGraph& graph, const PottsParams& params, unsigned threads = 1);

// e^{beta (n+ - n-) / 4} * potts_partition at the invariant temperature
cplx normalized_invariant(const SignedGraph& graph, int q, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Knot catalog
// ---------------------------------------------------------------------------

struct KnotEntry {
    std::string name;             // e.g. "3_1", "5^2_1"
    SignedGraph graph;
    std::vector<cplx> reference;  // published values for q = 1, 2, 3
};

const std::vector<KnotEntry>& knot_catalog();
const KnotEntry& find_knot(const std::string& name);
cplx knot_invariant(const std::string& name, int q);

nlohmann::json graph_to_json(const SignedGraph& g);
SignedGraph graph_from_json(const nlohmann::json& j);
nlohmann::json catalog_to_json(const std::vector<KnotEntry>& catalog);
std::vector<KnotEntry> catalog_from_json(const nlohmann::json& j);

}  // namespace ising_lab
