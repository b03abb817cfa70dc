#pragma once

// Distance-2 edge coloring of the interaction graph.
//
// Two edges conflict when they share a vertex, or when some third edge shares a
// vertex with each of them. Edges of one color are then pairwise vertex-disjoint
// and no graph edge joins two of them, so twirling every site outside a color
// class leaves a sum of decoupled two-site Hamiltonians.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhlearn/hamiltonian.hpp"

namespace fhlearn {

/// Graph whose vertices are the edges of G (indexed as in G.edges()).
struct ConflictGraph {
    std::vector<Edge> vertices;
    std::vector<std::vector<int>> adjacency;  ///< sorted neighbor lists

    [[nodiscard]] int max_degree() const noexcept {
        std::size_t d = 0;
        for (const auto& a : adjacency) d = std::max(d, a.size());
        return static_cast<int>(d);
    }
    [[nodiscard]] bool adjacent(int a, int b) const {
        return std::binary_search(adjacency.at(a).begin(), adjacency.at(a).end(), b);
    }
};

inline ConflictGraph conflict_graph(const InteractionGraph& g) {
    const auto& edges = g.edges();
    std::vector<std::vector<int>> incident(g.n_sites());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        incident[edges[k].first].push_back(static_cast<int>(k));
        incident[edges[k].second].push_back(static_cast<int>(k));
    }
    ConflictGraph out{edges, std::vector<std::vector<int>>(edges.size())};
    for (std::size_t c = 0; c < edges.size(); ++c) {
        auto& nbrs = out.adjacency[c];
        for (int endpoint : {edges[c].first, edges[c].second}) {
            for (int middle : incident[endpoint]) {
                // `middle` shares a vertex with c (middle == c covers the direct case)
                for (int v : {edges[middle].first, edges[middle].second})
                    for (int other : incident[v])
                        if (other != static_cast<int>(c)) nbrs.push_back(other);
            }
        }
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return out;
}

struct ColorClass {
    std::vector<Edge> edges;          ///< E_c, each with first < second
    std::vector<int> vertices;        ///< V_c
    std::vector<int> first_vertices;  ///< V_c1 = {k1 = min endpoint}
    std::vector<int> second_vertices; ///< V_c2 = {k2 = max endpoint}
};

struct ColorPartition {
    int num_colors = 0;
    std::vector<int> assignment;  ///< color per edge index
    std::vector<ColorClass> classes;
};

/// First-fit coloring in lexicographic edge order.
inline ColorPartition greedy_color(const ConflictGraph& conflicts) {
    const std::size_t n = conflicts.vertices.size();
    ColorPartition p;
    p.assignment.assign(n, -1);
    std::vector<char> used;
    for (std::size_t v = 0; v < n; ++v) {
        used.assign(p.num_colors + 1, 0);
        for (int u : conflicts.adjacency[v])
            if (p.assignment[u] >= 0) used[p.assignment[u]] = 1;
        const int c = static_cast<int>(std::find(used.begin(), used.end(), 0) - used.begin());
        p.assignment[v] = c;
        p.num_colors = std::max(p.num_colors, c + 1);
    }
    p.classes.resize(p.num_colors);
    for (std::size_t v = 0; v < n; ++v) {
        ColorClass& cls = p.classes[p.assignment[v]];
        const Edge e = conflicts.vertices[v];
        cls.edges.push_back(e);
        cls.first_vertices.push_back(e.first);
        cls.second_vertices.push_back(e.second);
    }
    for (ColorClass& cls : p.classes) {
        std::sort(cls.first_vertices.begin(), cls.first_vertices.end());
        std::sort(cls.second_vertices.begin(), cls.second_vertices.end());
        cls.vertices = cls.first_vertices;
        cls.vertices.insert(cls.vertices.end(), cls.second_vertices.begin(), cls.second_vertices.end());
        std::sort(cls.vertices.begin(), cls.vertices.end());
    }
    return p;
}

inline ColorPartition greedy_color(const InteractionGraph& g) { return greedy_color(conflict_graph(g)); }

inline const ColorClass& color_sets(const ColorPartition& partition, int c) {
    if (c < 0 || c >= partition.num_colors)
        throw std::out_of_range("color_sets: color " + std::to_string(c) + " outside [0, " +
                                std::to_string(partition.num_colors) + ")");
    return partition.classes[c];
}

}  // namespace fhlearn
