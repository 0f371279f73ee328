#include "ccsim/graphs.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <istream>
#include <set>
#include <sstream>

#include "ccsim/errors.hpp"
#include "ccsim/random.hpp"

namespace ccsim {

std::uint64_t VertexId::hash() const noexcept {
    std::uint64_t h = splitmix64(coords_.size());
    for (std::int64_t c : coords_) h = hash_combine(h, static_cast<std::uint64_t>(c));
    return h;
}

std::string VertexId::to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(coords_[i]);
    }
    return out + ")";
}

std::string to_string(GraphFamily family) {
    switch (family) {
        case GraphFamily::Lattice: return "lattice";
        case GraphFamily::Tree: return "tree";
        case GraphFamily::Finite: return "finite";
    }
    return "unknown";
}

Topology Topology::lattice(int d, std::optional<std::int64_t> box_extent) {
    if (d < 1) throw DomainError("lattice dimension must be >= 1");
    if (box_extent && *box_extent < 1) throw DomainError("box extent must be >= 1");
    Topology t;
    t.family_ = GraphFamily::Lattice;
    t.d_ = d;
    t.box_ = box_extent;
    return t;
}

Topology Topology::tree(int d) {
    if (d < 1) throw DomainError("tree parameter d must be >= 1");
    Topology t;
    t.family_ = GraphFamily::Tree;
    t.d_ = d;
    return t;
}

Topology Topology::finite(std::vector<std::vector<std::int64_t>> adjacency) {
    const auto n = static_cast<std::int64_t>(adjacency.size());
    if (n == 0) throw ValidationError("finite graph has no vertices");
    for (std::int64_t u = 0; u < n; ++u) {
        auto& list = adjacency[static_cast<std::size_t>(u)];
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        for (std::int64_t v : list) {
            if (v == u) throw FormatError("self-loop at vertex " + std::to_string(u));
            if (v < 0 || v >= n) throw FormatError("neighbour index " + std::to_string(v) + " out of range");
        }
    }
    for (std::int64_t u = 0; u < n; ++u) {
        for (std::int64_t v : adjacency[static_cast<std::size_t>(u)]) {
            const auto& back = adjacency[static_cast<std::size_t>(v)];
            if (!std::binary_search(back.begin(), back.end(), u)) {
                throw ValidationError("adjacency is not symmetric at edge " + std::to_string(u) + "-" +
                                      std::to_string(v));
            }
        }
    }
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::deque<std::int64_t> queue{0};
    seen[0] = true;
    std::int64_t reached = 1;
    while (!queue.empty()) {
        const std::int64_t u = queue.front();
        queue.pop_front();
        for (std::int64_t v : adjacency[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = true;
                ++reached;
                queue.push_back(v);
            }
        }
    }
    if (reached != n) {
        throw ValidationError("graph is disconnected: " + std::to_string(reached) + " of " + std::to_string(n) +
                              " vertices reachable from vertex 0");
    }
    Topology t;
    t.family_ = GraphFamily::Finite;
    t.d_ = 0;
    t.adjacency_ = std::move(adjacency);
    return t;
}

bool Topology::is_finite() const noexcept {
    return family_ == GraphFamily::Finite || (family_ == GraphFamily::Lattice && box_.has_value());
}

std::size_t Topology::vertex_count() const {
    if (family_ == GraphFamily::Finite) return adjacency_.size();
    if (family_ == GraphFamily::Lattice && box_) {
        std::size_t n = 1;
        for (int i = 0; i < d_; ++i) n *= static_cast<std::size_t>(*box_);
        return n;
    }
    throw DomainError("vertex_count is only defined for finite topologies");
}

bool Topology::contains(const VertexId& v) const {
    switch (family_) {
        case GraphFamily::Lattice:
            if (v.size() != static_cast<std::size_t>(d_)) return false;
            if (box_) {
                for (std::int64_t c : v.coords()) {
                    if (c < 0 || c >= *box_) return false;
                }
            }
            return true;
        case GraphFamily::Tree:
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::int64_t limit = i == 0 ? d_ : d_ - 1;
                if (v[i] < 0 || v[i] > limit) return false;
            }
            return true;
        case GraphFamily::Finite:
            return v.size() == 1 && v[0] >= 0 && v[0] < static_cast<std::int64_t>(adjacency_.size());
    }
    return false;
}

void Topology::require(const VertexId& v) const {
    if (!contains(v)) throw DomainError("vertex " + v.to_string() + " is not in " + describe());
}

int Topology::degree(const VertexId& v) const {
    require(v);
    switch (family_) {
        case GraphFamily::Lattice: return 2 * d_;
        case GraphFamily::Tree: return d_ + 1;
        case GraphFamily::Finite: return static_cast<int>(adjacency_[static_cast<std::size_t>(v[0])].size());
    }
    return 0;
}

std::vector<Neighbor> Topology::neighbors(const VertexId& v) const {
    require(v);
    std::vector<Neighbor> out;
    switch (family_) {
        case GraphFamily::Lattice: {
            out.reserve(static_cast<std::size_t>(2 * d_));
            std::vector<std::int64_t> c = v.coords();
            for (int axis = 0; axis < d_; ++axis) {
                for (int step : {1, -1}) {
                    c[static_cast<std::size_t>(axis)] += step;
                    VertexId w(c);
                    const bool off = box_ && (w[static_cast<std::size_t>(axis)] < 0 ||
                                              w[static_cast<std::size_t>(axis)] >= *box_);
                    out.push_back({std::move(w), off});
                    c[static_cast<std::size_t>(axis)] -= step;
                }
            }
            break;
        }
        case GraphFamily::Tree: {
            const int children = v.size() == 0 ? d_ + 1 : d_;
            out.reserve(static_cast<std::size_t>(d_ + 1));
            std::vector<std::int64_t> path = v.coords();
            for (int child = 0; child < children; ++child) {
                path.push_back(child);
                out.push_back({VertexId(path), false});
                path.pop_back();
            }
            if (!path.empty()) {
                path.pop_back();
                out.push_back({VertexId(std::move(path)), false});
            }
            break;
        }
        case GraphFamily::Finite:
            for (std::int64_t w : adjacency_[static_cast<std::size_t>(v[0])]) out.push_back({VertexId{w}, false});
            break;
    }
    return out;
}

VertexId Topology::default_start() const {
    switch (family_) {
        case GraphFamily::Lattice:
            return VertexId(std::vector<std::int64_t>(static_cast<std::size_t>(d_), box_ ? *box_ / 2 : 0));
        case GraphFamily::Tree: return VertexId{};
        case GraphFamily::Finite: return VertexId{0};
    }
    return {};
}

std::string Topology::describe() const {
    switch (family_) {
        case GraphFamily::Lattice:
            return "Z^" + std::to_string(d_) + (box_ ? " box " + std::to_string(*box_) : std::string{});
        case GraphFamily::Tree: return "T^" + std::to_string(d_);
        case GraphFamily::Finite: return "finite graph on " + std::to_string(adjacency_.size()) + " vertices";
    }
    return "unknown";
}

Topology parse_edge_list(std::istream& in) {
    std::set<std::pair<std::int64_t, std::int64_t>> edges;
    std::int64_t max_id = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        std::string a, b, extra;
        if (!(fields >> a >> b) || (fields >> extra)) {
            throw FormatError("line " + std::to_string(line_no) + ": expected two vertex ids");
        }
        const auto parse_id = [&](const std::string& tok) {
            if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
                throw FormatError("line " + std::to_string(line_no) + ": '" + tok +
                                  "' is not a nonnegative integer");
            }
            return static_cast<std::int64_t>(std::stoll(tok));
        };
        const std::int64_t u = parse_id(a);
        const std::int64_t v = parse_id(b);
        if (u == v) throw FormatError("line " + std::to_string(line_no) + ": self-loop at vertex " + a);
        edges.insert({std::min(u, v), std::max(u, v)});
        max_id = std::max({max_id, u, v});
    }
    if (edges.empty()) throw FormatError("edge list contains no edges");
    std::vector<std::vector<std::int64_t>> adjacency(static_cast<std::size_t>(max_id + 1));
    for (const auto& [u, v] : edges) {
        adjacency[static_cast<std::size_t>(u)].push_back(v);
        adjacency[static_cast<std::size_t>(v)].push_back(u);
    }
    return Topology::finite(std::move(adjacency));
}

Topology parse_edge_list(const std::string& text) {
    std::istringstream in(text);
    return parse_edge_list(in);
}

std::uint64_t graph_distance(const Topology& t, const VertexId& x, const VertexId& y) {
    if (!t.contains(x)) throw DomainError("vertex " + x.to_string() + " is not in " + t.describe());
    if (!t.contains(y)) throw DomainError("vertex " + y.to_string() + " is not in " + t.describe());
    switch (t.family()) {
        case GraphFamily::Lattice: {
            std::uint64_t d = 0;
            for (std::size_t i = 0; i < x.size(); ++i) d += static_cast<std::uint64_t>(std::llabs(x[i] - y[i]));
            return d;
        }
        case GraphFamily::Tree: {
            std::size_t common = 0;
            while (common < x.size() && common < y.size() && x[common] == y[common]) ++common;
            return (x.size() - common) + (y.size() - common);
        }
        case GraphFamily::Finite: {
            if (x == y) return 0;
            std::vector<std::int64_t> dist(t.vertex_count(), -1);
            std::deque<VertexId> queue{x};
            dist[static_cast<std::size_t>(x[0])] = 0;
            while (!queue.empty()) {
                const VertexId u = queue.front();
                queue.pop_front();
                for (const Neighbor& n : t.neighbors(u)) {
                    auto& slot = dist[static_cast<std::size_t>(n.id[0])];
                    if (slot >= 0) continue;
                    slot = dist[static_cast<std::size_t>(u[0])] + 1;
                    if (n.id == y) return static_cast<std::uint64_t>(slot);
                    queue.push_back(n.id);
                }
            }
            throw ValidationError("vertices are not connected");
        }
    }
    return 0;
}

}  // namespace ccsim
