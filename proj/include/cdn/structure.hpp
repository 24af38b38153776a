#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cdn/depnet.hpp"
#include "cdn/matrix.hpp"

namespace cdn {

// Entry (j, i) = coefficient of variable j in the model for variable i;
// diagonal is zero, intercepts excluded.
Matrix adjacency(const DependencyNetwork& dn);

struct Edge {
    std::size_t from;
    std::size_t to;
    double coefficient;
};

// The `count` largest strictly positive entries; ties broken by (from, to).
std::vector<Edge> top_positive_edges(const Matrix& adjacency, std::size_t count);

double frobenius_difference(const Matrix& a, const Matrix& b);

// CSV: from,to,weight
void write_edges_csv(const std::vector<Edge>& edges, std::ostream& out,
                     const std::vector<std::string>& names = {});
void write_edges_csv(const std::vector<Edge>& edges, const std::string& path,
                     const std::vector<std::string>& names = {});

// Graphviz DOT digraph for external rendering.
void write_edges_dot(const std::vector<Edge>& edges, std::ostream& out,
                     const std::vector<std::string>& names = {});
void write_edges_dot(const std::vector<Edge>& edges, const std::string& path,
                     const std::vector<std::string>& names = {});

}  // namespace cdn
