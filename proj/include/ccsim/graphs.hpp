#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ccsim {

// Value-typed vertex name. Its coordinates are read by the owning topology:
// a d-tuple on the lattice, the reduced path of child indices from the root
// on a tree (empty = root), a single dense index on a finite graph.
class VertexId {
public:
    VertexId() = default;
    explicit VertexId(std::vector<std::int64_t> coords) : coords_(std::move(coords)) {}
    VertexId(std::initializer_list<std::int64_t> coords) : coords_(coords) {}

    const std::vector<std::int64_t>& coords() const noexcept { return coords_; }
    std::size_t size() const noexcept { return coords_.size(); }
    std::int64_t operator[](std::size_t i) const { return coords_.at(i); }

    std::uint64_t hash() const noexcept;
    std::string to_string() const;

    friend bool operator==(const VertexId&, const VertexId&) = default;

private:
    std::vector<std::int64_t> coords_;
};

struct VertexIdHash {
    std::size_t operator()(const VertexId& v) const noexcept { return static_cast<std::size_t>(v.hash()); }
};

// One entry of a neighbour list. `off_graph` marks lattice sites outside a
// box: they count toward the degree but colonization attempts there die.
struct Neighbor {
    VertexId id;
    bool off_graph = false;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

enum class GraphFamily { Lattice, Tree, Finite };

std::string to_string(GraphFamily family);

class Topology {
public:
    // Z^d, optionally restricted to the box [0, extent)^d.
    static Topology lattice(int d, std::optional<std::int64_t> box_extent = std::nullopt);
    // Homogeneous tree in which every vertex has degree d + 1.
    static Topology tree(int d);
    // Undirected graph on vertices 0..n-1. Throws FormatError on self-loops
    // or out-of-range ids and ValidationError on asymmetric or disconnected input.
    static Topology finite(std::vector<std::vector<std::int64_t>> adjacency);

    GraphFamily family() const noexcept { return family_; }
    // d for lattices and trees; 0 for finite graphs.
    int dimension() const noexcept { return d_; }
    std::optional<std::int64_t> box_extent() const noexcept { return box_; }
    bool is_finite() const noexcept;
    std::size_t vertex_count() const;  // finite graphs and boxes only

    bool contains(const VertexId& v) const;
    int degree(const VertexId& v) const;
    // Deterministic order. Lattice: +e1, -e1, +e2, -e2, ... Tree: children in
    // index order, then the parent. Finite: ascending index.
    std::vector<Neighbor> neighbors(const VertexId& v) const;

    // Origin of Z^d, root of the tree, vertex 0 of a finite graph, centre of a box.
    VertexId default_start() const;

    std::string describe() const;

private:
    Topology() = default;
    void require(const VertexId& v) const;

    GraphFamily family_ = GraphFamily::Lattice;
    int d_ = 1;
    std::optional<std::int64_t> box_;
    std::vector<std::vector<std::int64_t>> adjacency_;
};

// Whitespace-separated "u v" pairs, one edge per line; '#' starts a comment line.
Topology parse_edge_list(std::istream& in);
Topology parse_edge_list(const std::string& text);

std::uint64_t graph_distance(const Topology& t, const VertexId& x, const VertexId& y);

}  // namespace ccsim
