#pragma once

// Spinful Fermi-Hubbard model on a bounded-degree interaction graph:
//
//   H = - sum_{(i,j) in E, s} h_ij (c+_{is} c_{js} + c+_{js} c_{is}) + sum_i xi_i n_{i up} n_{i down}
//
// One hopping value is stored per unordered edge.

#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fhlearn/fock.hpp"

namespace fhlearn {

struct Edge {
    int first;
    int second;

    /// Canonical form with first < second.
    static Edge of(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

    [[nodiscard]] bool touches(int site) const noexcept { return first == site || second == site; }
    [[nodiscard]] bool shares_vertex(const Edge& o) const noexcept { return touches(o.first) || touches(o.second); }

    auto operator<=>(const Edge&) const = default;
};

class InteractionGraph {
public:
    InteractionGraph() = default;

    InteractionGraph(int n_sites, std::vector<Edge> edges) : n_sites_(n_sites) {
        if (n_sites < 1) throw std::invalid_argument("InteractionGraph: need at least one site");
        for (Edge& e : edges) {
            if (e.first == e.second)
                throw std::invalid_argument("InteractionGraph: self-loop at site " + std::to_string(e.first));
            if (std::min(e.first, e.second) < 0 || std::max(e.first, e.second) >= n_sites)
                throw std::out_of_range("InteractionGraph: edge endpoint outside [0, n_sites)");
            e = Edge::of(e.first, e.second);
        }
        std::sort(edges.begin(), edges.end());
        if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
            throw std::invalid_argument("InteractionGraph: duplicate edge");
        edges_ = std::move(edges);
        degree_.assign(n_sites, 0);
        for (const Edge& e : edges_) {
            ++degree_[e.first];
            ++degree_[e.second];
        }
    }

    [[nodiscard]] int n_sites() const noexcept { return n_sites_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] int degree(int site) const { return degree_.at(site); }
    [[nodiscard]] int max_degree() const noexcept {
        return degree_.empty() ? 0 : *std::max_element(degree_.begin(), degree_.end());
    }

    /// Position of the edge in edges(), or -1.
    [[nodiscard]] int index_of(Edge e) const {
        e = Edge::of(e.first, e.second);
        auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        return (it != edges_.end() && *it == e) ? static_cast<int>(it - edges_.begin()) : -1;
    }
    [[nodiscard]] bool contains(Edge e) const { return index_of(e) >= 0; }

private:
    int n_sites_ = 0;
    std::vector<Edge> edges_;
    std::vector<int> degree_;
};

struct HubbardModel {
    InteractionGraph graph;
    std::vector<double> hopping;      ///< aligned with graph.edges()
    std::vector<double> interaction;  ///< xi_i, one per site

    [[nodiscard]] int n_sites() const noexcept { return graph.n_sites(); }

    [[nodiscard]] double hopping_on(Edge e) const {
        const int k = graph.index_of(e);
        if (k < 0) throw std::invalid_argument("HubbardModel: edge not in graph");
        return hopping.at(k);
    }
};

struct Violation {
    std::string kind;  ///< "shape", "hopping bound", "interaction bound", "non-finite"
    std::string detail;
};

inline std::vector<Violation> validate_model(const HubbardModel& model) {
    std::vector<Violation> out;
    const auto& edges = model.graph.edges();
    if (model.hopping.size() != edges.size())
        out.push_back({"shape", "hopping has " + std::to_string(model.hopping.size()) + " entries for " +
                                    std::to_string(edges.size()) + " edges"});
    if (model.interaction.size() != static_cast<std::size_t>(model.n_sites()))
        out.push_back({"shape", "xi has " + std::to_string(model.interaction.size()) + " entries for " +
                                    std::to_string(model.n_sites()) + " sites"});
    for (std::size_t k = 0; k < model.hopping.size(); ++k) {
        const double h = model.hopping[k];
        const std::string where =
            k < edges.size() ? "(" + std::to_string(edges[k].first) + "," + std::to_string(edges[k].second) + ")"
                             : "#" + std::to_string(k);
        if (!std::isfinite(h)) out.push_back({"non-finite", "h" + where});
        else if (std::abs(h) > 1.0) out.push_back({"hopping bound", "|h" + where + "| = " + std::to_string(std::abs(h))});
    }
    for (std::size_t i = 0; i < model.interaction.size(); ++i) {
        const double xi = model.interaction[i];
        if (!std::isfinite(xi)) out.push_back({"non-finite", "xi_" + std::to_string(i)});
        else if (std::abs(xi) > 1.0)
            out.push_back({"interaction bound", "|xi_" + std::to_string(i) + "| = " + std::to_string(std::abs(xi))});
    }
    return out;
}

inline void require_valid(const HubbardModel& model) {
    auto v = validate_model(model);
    if (v.empty()) return;
    std::string msg = "invalid Hubbard model:";
    for (const auto& x : v) msg += " [" + x.kind + ": " + x.detail + "]";
    throw std::invalid_argument(msg);
}

/// Real symmetric operator on the 4^N occupation basis.
using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Materializes H from ladder operators. Hermitian (real symmetric) by construction.
inline SparseOperator build_matrix(const HubbardModel& model) {
    require_valid(model);
    if (model.n_sites() > kMaxSites) throw std::invalid_argument("build_matrix: too many sites");
    const Mask dim = Mask{1} << (2 * model.n_sites());
    std::vector<Eigen::Triplet<double>> triplets;
    const auto& edges = model.graph.edges();
    for (Mask mask = 0; mask < dim; ++mask) {
        double diag = 0.0;
        for (int i = 0; i < model.n_sites(); ++i)
            if (site_occupation(mask, i) == 2) diag += model.interaction[i];
        if (diag != 0.0) triplets.emplace_back(mask, mask, diag);
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const double h = model.hopping[k];
            if (h == 0.0) continue;
            for (int spin = 0; spin < 2; ++spin) {
                const int mi = 2 * edges[k].first + spin;
                const int mj = 2 * edges[k].second + spin;
                // -h (c+_i c_j + c+_j c_i) acting on |mask>
                for (auto [to, from] : {std::pair{mi, mj}, std::pair{mj, mi}}) {
                    auto a = annihilate(mask, from);
                    if (!a) continue;
                    auto c = create(a->mask, to);
                    if (!c) continue;
                    triplets.emplace_back(c->mask, mask, -h * a->sign * c->sign);
                }
            }
        }
    }
    SparseOperator H(dim, dim);
    H.setFromTriplets(triplets.begin(), triplets.end());
    H.makeCompressed();
    return H;
}

struct RestrictedModel {
    HubbardModel model;           ///< two sites: 0 <-> k1, 1 <-> k2
    std::array<int, 2> site_map;  ///< local site -> original site
};

/// H restricted to an edge: h_{k1 k2}, xi_{k1}, xi_{k2} on a relabeled two-site graph.
inline RestrictedModel restrict_to_edge(const HubbardModel& model, Edge edge) {
    const int k = model.graph.index_of(edge);
    if (k < 0) throw std::invalid_argument("restrict_to_edge: edge not in graph");
    const Edge e = model.graph.edges()[k];
    RestrictedModel out;
    out.model.graph = InteractionGraph(2, {Edge{0, 1}});
    out.model.hopping = {model.hopping.at(k)};
    out.model.interaction = {model.interaction.at(e.first), model.interaction.at(e.second)};
    out.site_map = {e.first, e.second};
    return out;
}

}  // namespace fhlearn
