#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"

namespace loopsoup
{

using Element = std::size_t;

/// Finite group given by its Cayley table: table[a][b] = a * b.
class FiniteGroup
{
  public:
    /// Checks the Latin-square property, the identity, and (for order <= 24)
    /// associativity exhaustively.
    static FiniteGroup from_table(std::vector<std::vector<Element>> table, Element identity,
                                  std::string name = "custom")
    {
        const std::size_t n = table.size();
        if (n == 0)
            throw DomainError("group table is empty");
        if (identity >= n)
            throw DomainError("group identity index out of range");
        for (const auto& row : table) {
            if (row.size() != n)
                throw DomainError("group table must be square");
            std::vector<bool> seen(n, false);
            for (Element v : row) {
                if (v >= n || seen[v])
                    throw DomainError("group table rows must be permutations");
                seen[v] = true;
            }
        }
        for (std::size_t b = 0; b < n; ++b) {
            std::vector<bool> seen(n, false);
            for (std::size_t a = 0; a < n; ++a) {
                if (seen[table[a][b]])
                    throw DomainError("group table columns must be permutations");
                seen[table[a][b]] = true;
            }
        }
        for (Element a = 0; a < n; ++a)
            if (table[identity][a] != a || table[a][identity] != a)
                throw DomainError("declared identity is not neutral");
        if (n <= 24) {
            for (Element a = 0; a < n; ++a)
                for (Element b = 0; b < n; ++b)
                    for (Element c = 0; c < n; ++c)
                        if (table[table[a][b]][c] != table[a][table[b][c]])
                            throw DomainError("group table is not associative");
        }

        FiniteGroup grp;
        grp.name_ = std::move(name);
        grp.table_ = std::move(table);
        grp.identity_ = identity;
        grp.inverse_.resize(n);
        for (Element a = 0; a < n; ++a)
            for (Element b = 0; b < n; ++b)
                if (grp.table_[a][b] == identity)
                    grp.inverse_[a] = b;

        grp.class_of_.assign(n, n);
        for (Element a = 0; a < n; ++a) {
            if (grp.class_of_[a] != n)
                continue;
            std::size_t cls = grp.classes_.size();
            grp.classes_.emplace_back();
            for (Element g = 0; g < n; ++g) {
                Element conj = grp.mul(grp.mul(g, a), grp.inverse_[g]);
                if (grp.class_of_[conj] == n) {
                    grp.class_of_[conj] = cls;
                    grp.classes_[cls].push_back(conj);
                }
            }
            std::sort(grp.classes_[cls].begin(), grp.classes_[cls].end());
        }
        return grp;
    }

    /// Z/n with elements 0..n-1 under addition.
    static FiniteGroup cyclic(std::size_t n)
    {
        if (n == 0)
            throw DomainError("cyclic group order must be positive");
        std::vector<std::vector<Element>> table(n, std::vector<Element>(n));
        for (Element a = 0; a < n; ++a)
            for (Element b = 0; b < n; ++b)
                table[a][b] = (a + b) % n;
        return from_table(std::move(table), 0, "Z" + std::to_string(n));
    }

    /// S_3 with elements the permutations of {0,1,2} in lexicographic order;
    /// (p * q)(i) = p(q(i)).
    static FiniteGroup symmetric3()
    {
        std::vector<std::array<int, 3>> perms;
        std::array<int, 3> p{0, 1, 2};
        do
            perms.push_back(p);
        while (std::next_permutation(p.begin(), p.end()));
        const std::size_t n = perms.size();
        std::vector<std::vector<Element>> table(n, std::vector<Element>(n));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                std::array<int, 3> c{};
                for (int i = 0; i < 3; ++i)
                    c[i] = perms[a][perms[b][i]];
                table[a][b] = static_cast<Element>(std::find(perms.begin(), perms.end(), c) -
                                                   perms.begin());
            }
        return from_table(std::move(table), 0, "S3");
    }

    std::size_t order() const noexcept { return table_.size(); }
    Element identity() const noexcept { return identity_; }
    Element mul(Element a, Element b) const { return table_[a][b]; }
    Element inverse(Element a) const { return inverse_[a]; }
    const std::string& name() const noexcept { return name_; }
    const std::vector<std::vector<Element>>& table() const noexcept { return table_; }

    std::size_t num_classes() const noexcept { return classes_.size(); }
    std::size_t class_of(Element a) const { return class_of_.at(a); }
    const std::vector<Element>& conjugacy_class(std::size_t c) const { return classes_.at(c); }
    std::size_t identity_class() const { return class_of_[identity_]; }

  private:
    std::string name_;
    std::vector<std::vector<Element>> table_;
    Element identity_ = 0;
    std::vector<Element> inverse_;
    std::vector<std::size_t> class_of_;
    std::vector<std::vector<Element>> classes_;
};

/// Probability vector on the group elements.
using GroupDistribution = std::vector<double>;

inline GroupDistribution delta_identity(const FiniteGroup& grp)
{
    GroupDistribution d(grp.order(), 0.0);
    d[grp.identity()] = 1.0;
    return d;
}

inline GroupDistribution uniform_distribution(const FiniteGroup& grp)
{
    return GroupDistribution(grp.order(), 1.0 / static_cast<double>(grp.order()));
}

/// Throws unless gamma is a probability vector with gamma(g) = gamma(g^-1).
inline void check_symmetric_distribution(const FiniteGroup& grp, const GroupDistribution& gamma)
{
    if (gamma.size() != grp.order())
        throw DomainError("group distribution must have one entry per element");
    double total = 0.0;
    for (double p : gamma) {
        if (!(p >= 0.0))
            throw DomainError("group distribution must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw DomainError("group distribution must sum to 1");
    for (Element a = 0; a < grp.order(); ++a)
        if (std::abs(gamma[a] - gamma[grp.inverse(a)]) > 1e-12)
            throw DomainError("group distribution must be symmetric under inversion");
}

} // namespace loopsoup
