#include "cdn/structure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace cdn {

Matrix adjacency(const DependencyNetwork& dn) {
    Matrix a(dn.d, dn.d);
    for (std::size_t i = 0; i < dn.d; ++i) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < dn.d; ++j) {
            if (j == i) continue;
            a(j, i) = dn.coefficients[i][c++];
        }
    }
    return a;
}

std::vector<Edge> top_positive_edges(const Matrix& adj, std::size_t count) {
    if (count < 1) throw std::invalid_argument("top_positive_edges: count must be >= 1");
    std::vector<Edge> edges;
    for (std::size_t j = 0; j < adj.rows(); ++j)
        for (std::size_t i = 0; i < adj.cols(); ++i)
            if (j != i && adj(j, i) > 0.0) edges.push_back({j, i, adj(j, i)});
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.coefficient != b.coefficient) return a.coefficient > b.coefficient;
        if (a.from != b.from) return a.from < b.from;
        return a.to < b.to;
    });
    if (edges.size() > count) edges.resize(count);
    return edges;
}

double frobenius_difference(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("frobenius_difference: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        s += d * d;
    }
    return std::sqrt(s);
}

namespace {
std::string node_name(std::size_t i, const std::vector<std::string>& names) {
    return i < names.size() ? names[i] : "x" + std::to_string(i);
}
}  // namespace

void write_edges_csv(const std::vector<Edge>& edges, std::ostream& out,
                     const std::vector<std::string>& names) {
    out << "from,to,weight\n";
    out.precision(17);
    for (const auto& e : edges)
        out << node_name(e.from, names) << ',' << node_name(e.to, names) << ','
            << e.coefficient << '\n';
}

void write_edges_csv(const std::vector<Edge>& edges, const std::string& path,
                     const std::vector<std::string>& names) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_edges_csv: cannot open " + path);
    write_edges_csv(edges, f, names);
}

void write_edges_dot(const std::vector<Edge>& edges, std::ostream& out,
                     const std::vector<std::string>& names) {
    out << "digraph depnet {\n";
    out.precision(6);
    for (const auto& e : edges)
        out << "  \"" << node_name(e.from, names) << "\" -> \""
            << node_name(e.to, names) << "\" [weight=" << e.coefficient << "];\n";
    out << "}\n";
}

void write_edges_dot(const std::vector<Edge>& edges, const std::string& path,
                     const std::vector<std::string>& names) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_edges_dot: cannot open " + path);
    write_edges_dot(edges, f, names);
}

}  // namespace cdn
