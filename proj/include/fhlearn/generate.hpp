#pragma once

// Instance generators. Structure is drawn first, then one coefficient per edge
// (in sorted edge order) and one per site, each uniform on [-1, 1).

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fhlearn/hamiltonian.hpp"
#include "fhlearn/random.hpp"

namespace fhlearn {

inline InteractionGraph chain_graph(int n_sites) {
    if (n_sites < 1) throw std::invalid_argument("chain: need N >= 1");
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n_sites; ++i) edges.push_back({i, i + 1});
    return {n_sites, edges};
}

/// Site (row, col) is row * cols + col.
inline InteractionGraph grid_graph(int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid: need rows, cols >= 1");
    std::vector<Edge> edges;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int s = r * cols + c;
            if (c + 1 < cols) edges.push_back({s, s + 1});
            if (r + 1 < rows) edges.push_back({s, s + cols});
        }
    return {rows * cols, edges};
}

/// Visits all site pairs in random order and keeps each with probability
/// `keep` while both endpoints stay below `max_degree`.
inline InteractionGraph random_bounded_degree_graph(int n_sites, int max_degree, Rng& rng, double keep = 0.5) {
    if (n_sites < 1) throw std::invalid_argument("random graph: need N >= 1");
    if (max_degree < 1) throw std::invalid_argument("random graph: degree bound must be >= 1");
    if (!(keep > 0.0 && keep <= 1.0)) throw std::invalid_argument("random graph: keep probability in (0, 1]");
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < n_sites; ++a)
        for (int b = a + 1; b < n_sites; ++b) pairs.emplace_back(a, b);
    for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[uniform_index(rng, i)]);
    std::vector<int> degree(n_sites, 0);
    std::vector<Edge> edges;
    for (auto [a, b] : pairs) {
        const bool coin = uniform01(rng) < keep;
        if (!coin || degree[a] >= max_degree || degree[b] >= max_degree) continue;
        ++degree[a];
        ++degree[b];
        edges.push_back({a, b});
    }
    return {n_sites, edges};
}

inline HubbardModel random_coefficients(const InteractionGraph& graph, Rng& rng) {
    HubbardModel m{graph, {}, {}};
    for (std::size_t k = 0; k < graph.edges().size(); ++k) m.hopping.push_back(2.0 * uniform01(rng) - 1.0);
    for (int i = 0; i < graph.n_sites(); ++i) m.interaction.push_back(2.0 * uniform01(rng) - 1.0);
    return m;
}

enum class GraphKind { chain, grid, random_bounded_degree };

struct GenerateParams {
    GraphKind kind = GraphKind::chain;
    int n_sites = 4;     ///< chain and random kinds
    int rows = 2;        ///< grid
    int cols = 2;        ///< grid
    int max_degree = 3;  ///< random kind
    double keep = 0.5;   ///< random kind
};

/// Graph and coefficients from one seed; the graph draws from substream 0 and
/// the coefficients from substream 1.
inline HubbardModel generate_instance(const GenerateParams& p, std::uint64_t seed) {
    Rng structure = make_stream(seed, {0});
    Rng coefficients = make_stream(seed, {1});
    InteractionGraph g;
    switch (p.kind) {
        case GraphKind::chain: g = chain_graph(p.n_sites); break;
        case GraphKind::grid: g = grid_graph(p.rows, p.cols); break;
        case GraphKind::random_bounded_degree:
            g = random_bounded_degree_graph(p.n_sites, p.max_degree, structure, p.keep);
            break;
    }
    return random_coefficients(g, coefficients);
}

}  // namespace fhlearn
