#include "ising_lab/knots.hpp"

#include <cmath>
#include <stdexcept>

#include "ising_lab/io.hpp"

namespace ising_lab {

void SignedGraph::validate() const {
    if (vertices < 0) throw std::invalid_argument("signed graph: negative vertex count");
    for (const auto& e : edges) {
        if (e.a < 0 || e.b < 0 || e.a >= vertices || e.b >= vertices)
            throw std::invalid_argument("signed graph: edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) +
                                        ") out of range");
        if (e.a == e.b) throw std::invalid_argument("signed graph: self-loop at " + std::to_string(e.a));
        if (e.sign != 1 && e.sign != -1) throw std::invalid_argument("signed graph: edge sign must be +1 or -1");
    }
}

int SignedGraph::signature() const {
    int s = 0;
    for (const auto& e : edges) s += e.sign;
    return s;
}

cplx invariant_beta(int q) {
    if (q < 1) throw std::invalid_argument("invariant_beta: q must be at least 1");
    return std::acosh(cplx((q - 2) / 2.0, 0.0));
}

cplx potts_partition(const SignedGraph& graph, const PottsParams& params, unsigned threads) {
    graph.validate();
    const int q = params.q, n = graph.vertices;
    if (q < 1) throw std::invalid_argument("potts_partition: q must be at least 1");
    if (std::pow(double(q), n) > potts_cap)
        throw std::length_error("potts_partition: q^vertices exceeds the enumeration cap");
    if (n == 0) return 1.0;
    // exp(+-beta) for each sign; an edge contributes only when its ends agree
    const cplx up = std::exp(params.beta), down = std::exp(-params.beta);

    // chunks fix the colour of the last vertex (and the one before it when
    // there is room); each chunk runs a mixed-radix counter over the rest
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= q;
    const int fixed = n >= 2 ? 2 : 1;
    std::size_t chunks = 1;
    for (int i = 0; i < fixed; ++i) chunks *= q;
    const std::size_t per_chunk = total / chunks;
    std::vector<cplx> partial(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
        std::vector<int> colour(n, 0);
        std::size_t rem = c;
        for (int i = n - fixed; i < n; ++i) {
            colour[i] = static_cast<int>(rem % q);
            rem /= q;
        }
        CompensatedSum<cplx> acc;
        for (std::size_t k = 0; k < per_chunk; ++k) {
            cplx w = 1;
            for (const auto& e : graph.edges)
                if (colour[e.a] == colour[e.b]) w *= e.sign > 0 ? up : down;
            acc.add(w);
            for (int i = 0; i < n - fixed; ++i) {  // advance the counter
                if (++colour[i] < q) break;
                colour[i] = 0;
            }
        }
        partial[c] = acc.value();
    });
    return tree_sum(partial);
}

cplx normalized_invariant(const SignedGraph& graph, int q, unsigned threads) {
    const cplx beta = invariant_beta(q);
    return std::exp(beta * double(graph.signature()) / 4.0) * potts_partition(graph, {q, beta}, threads);
}

// ---------------------------------------------------------------------------

namespace {

SignedGraph make(int v, std::vector<SignedEdge> e) { return {v, std::move(e)}; }

std::vector<KnotEntry> builtin_catalog() {
    const double s3 = std::sqrt(3.0);
    const cplx I{0, 1};
    auto ph = [&](double x) { return std::exp(I * pi * x); };
    return {
        {"3_1", make(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, -1}}),
         {ph(5.0 / 6), 4.0 * ph(5.0 / 8), 1.5 * (7 * s3 - I) * ph(0.25)}},
        {"4_1", make(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {1, 2, 1}}),
         {-ph(1.0 / 3), 4.0, -7.5 * (1.0 - s3 * I)}},
        {"6_2", make(5, {{0, 1, -1}, {0, 1, -1}, {0, 2, -1}, {1, 3, -1}, {2, 4, -1}, {3, 4, -1}}),
         {-1.0, -8.0 * ph(0.25), 3.0 * (15.0 - 22.0 * I)}},
        {"5^2_1", make(4, {{0, 1, -1}, {0, 2, -1}, {0, 3, -1}, {1, 2, -1}, {1, 3, -1}}),
         {-ph(5.0 / 6), 8.0 * ph(3.0 / 8), 1.5 * (9 * s3 + 29.0 * I) * ph(0.75)}},
        {"2^2_1", make(2, {{0, 1, 1}, {0, 1, 1}}), {-ph(2.0 / 3), 0.0, 1.5 * (3.0 + s3 * I)}},
        {"6^3_2", make(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}}),
         {-1.0, 8.0 * std::sqrt(2.0), -3.0 * (9 * s3 + 4.0 * I)}},
    };
}

}  // namespace

const std::vector<KnotEntry>& knot_catalog() {
    static const std::vector<KnotEntry> catalog = builtin_catalog();
    return catalog;
}

const KnotEntry& find_knot(const std::string& name) {
    for (const auto& k : knot_catalog())
        if (k.name == name) return k;
    std::string known;
    for (const auto& k : knot_catalog()) known += (known.empty() ? "" : ", ") + k.name;
    throw std::invalid_argument("unknown knot '" + name + "' (known: " + known + ")");
}

cplx knot_invariant(const std::string& name, int q) { return normalized_invariant(find_knot(name).graph, q); }

// ---------------------------------------------------------------------------

nlohmann::json graph_to_json(const SignedGraph& g) {
    nlohmann::json edges = nlohmann::json::array(), signs = nlohmann::json::array();
    for (const auto& e : g.edges) {
        edges.push_back({e.a, e.b});
        signs.push_back(e.sign);
    }
    return {{"lattice", {{"irregular", {{"vertices", g.vertices}, {"edges", edges}}}}}, {"signs", signs}};
}

SignedGraph graph_from_json(const nlohmann::json& j) {
    const auto& irr = j.at("lattice").at("irregular");
    SignedGraph g;
    g.vertices = irr.at("vertices").get<int>();
    const auto& edges = irr.at("edges");
    const auto& signs = j.at("signs");
    if (edges.size() != signs.size()) throw std::invalid_argument("signed graph: edges and signs differ in length");
    for (std::size_t k = 0; k < edges.size(); ++k)
        g.edges.push_back({edges[k].at(0).get<int>(), edges[k].at(1).get<int>(), signs[k].get<int>()});
    g.validate();
    return g;
}

nlohmann::json catalog_to_json(const std::vector<KnotEntry>& catalog) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& k : catalog) {
        nlohmann::json ref = nlohmann::json::array();
        for (auto v : k.reference) ref.push_back(complex_to_json(v));
        out.push_back({{"name", k.name}, {"graph", graph_to_json(k.graph)}, {"reference", ref}});
    }
    return out;
}

std::vector<KnotEntry> catalog_from_json(const nlohmann::json& j) {
    std::vector<KnotEntry> out;
    for (const auto& k : j) {
        KnotEntry e{k.at("name").get<std::string>(), graph_from_json(k.at("graph")), {}};
        for (const auto& v : k.at("reference")) e.reference.push_back(complex_from_json(v));
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace ising_lab
