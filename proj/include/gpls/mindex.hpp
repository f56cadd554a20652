#pragma once

// Downward-closed multi-index sets A_{m,n,p} = { alpha in N^m : ||alpha||_p <= n }.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gpls/error.hpp"

namespace gpls {

using MultiIndex = std::vector<int>;

/// Selector of the l_p degree norm. Only 1, 2 and infinity are exposed; a rational
/// exponent is available through detail::rational_degree for internal experiments.
class LpDegree {
public:
    enum class Kind { one, two, infinity, rational };

    static constexpr LpDegree one() { return LpDegree(Kind::one, 1, 1); }
    static constexpr LpDegree two() { return LpDegree(Kind::two, 2, 1); }
    static constexpr LpDegree infinity() { return LpDegree(Kind::infinity, 0, 1); }

    /// Parses "1", "2", "inf" (also "infinity", "Inf").
    static LpDegree parse(const std::string& text) {
        if (text == "1") return one();
        if (text == "2") return two();
        if (text == "inf" || text == "Inf" || text == "infinity" || text == "oo") return infinity();
        throw DomainError("lp degree must be one of 1, 2, inf (got '" + text + "')");
    }

    constexpr Kind kind() const { return kind_; }

    std::string to_string() const {
        switch (kind_) {
            case Kind::one: return "1";
            case Kind::two: return "2";
            case Kind::infinity: return "inf";
            case Kind::rational: return std::to_string(num_) + "/" + std::to_string(den_);
        }
        return "?";
    }

    double value() const {
        if (kind_ == Kind::infinity) return std::numeric_limits<double>::infinity();
        return static_cast<double>(num_) / den_;
    }

    /// ||alpha||_p <= n. Exact integer arithmetic for p in {1, 2, inf}.
    bool admits(std::span<const int> alpha, int n) const {
        switch (kind_) {
            case Kind::one: {
                long s = 0;
                for (int a : alpha) s += a;
                return s <= n;
            }
            case Kind::two: {
                long long s = 0;
                for (int a : alpha) s += static_cast<long long>(a) * a;
                return s <= static_cast<long long>(n) * n;
            }
            case Kind::infinity: {
                for (int a : alpha)
                    if (a > n) return false;
                return true;
            }
            case Kind::rational: {
                const double p = value();
                double s = 0.0;
                for (int a : alpha) s += std::pow(static_cast<double>(a), p);
                const double bound = std::pow(static_cast<double>(n), p);
                return s <= bound * (1.0 + 1e-12);
            }
        }
        return false;
    }

    friend constexpr bool operator==(const LpDegree& a, const LpDegree& b) {
        return a.kind_ == b.kind_ && a.num_ == b.num_ && a.den_ == b.den_;
    }

private:
    constexpr LpDegree(Kind k, int num, int den) : kind_(k), num_(num), den_(den) {}
    friend LpDegree rational_degree_impl(int, int);

    Kind kind_;
    int num_;
    int den_;
};

inline LpDegree rational_degree_impl(int num, int den) {
    if (num <= 0 || den <= 0) throw DomainError("lp degree must be positive");
    return LpDegree(LpDegree::Kind::rational, num, den);
}

namespace detail {
inline LpDegree rational_degree(int num, int den) { return rational_degree_impl(num, den); }
}  // namespace detail

/// Lexicographic order scanning coordinates from the last entry to the first.
inline std::strong_ordering lex_compare(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw DomainError("lex_compare: multi-indices of different length");
    for (std::size_t i = a.size(); i-- > 0;) {
        if (a[i] != b[i]) return a[i] <=> b[i];
    }
    return std::strong_ordering::equal;
}

/// Ordered multi-index set with O(1) lookup. Indices are stored contiguously,
/// `dim()` entries per index, in increasing lex order.
class MultiIndexSet {
public:
    MultiIndexSet() = default;

    /// Builds a set from arbitrary indices; they are sorted and de-duplicated.
    /// `degree` and `norm` are recorded as metadata.
    MultiIndexSet(int dim, std::vector<MultiIndex> indices, int degree, LpDegree norm)
        : dim_(dim), degree_(degree), norm_(norm) {
        if (dim < 1) throw DomainError("multi-index dimension must be >= 1");
        for (const auto& a : indices) {
            if (static_cast<int>(a.size()) != dim) throw DomainError("multi-index has wrong dimension");
            for (int v : a)
                if (v < 0) throw DomainError("multi-index entries must be non-negative");
        }
        std::sort(indices.begin(), indices.end(),
                  [](const MultiIndex& a, const MultiIndex& b) { return lex_compare(a, b) < 0; });
        indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
        data_.reserve(indices.size() * dim);
        for (const auto& a : indices) data_.insert(data_.end(), a.begin(), a.end());
        finalize();
    }

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    LpDegree norm() const { return norm_; }
    std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    bool empty() const { return size() == 0; }

    std::span<const int> operator[](std::size_t i) const {
        return {data_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    MultiIndex index(std::size_t i) const {
        auto s = (*this)[i];
        return {s.begin(), s.end()};
    }

    /// Largest entry per coordinate, n_i = max_alpha alpha_i.
    const std::vector<int>& max_degrees() const { return max_degrees_; }

    std::optional<std::size_t> find(std::span<const int> alpha) const {
        if (static_cast<int>(alpha.size()) != dim_) return std::nullopt;
        std::uint64_t key = 0;
        for (int i = dim_; i-- > 0;) {
            if (alpha[i] < 0 || alpha[i] > max_degrees_[i]) return std::nullopt;
            key = key * static_cast<std::uint64_t>(max_degrees_[i] + 1) + static_cast<std::uint64_t>(alpha[i]);
        }
        auto it = lookup_.find(key);
        if (it == lookup_.end()) return std::nullopt;
        return it->second;
    }
    bool contains(std::span<const int> alpha) const { return find(alpha).has_value(); }

    friend bool operator==(const MultiIndexSet& a, const MultiIndexSet& b) {
        return a.dim_ == b.dim_ && a.data_ == b.data_;
    }

private:
    friend MultiIndexSet build_index_set(int, int, LpDegree);

    void finalize() {
        max_degrees_.assign(dim_, 0);
        const std::size_t count = size();
        for (std::size_t k = 0; k < count; ++k)
            for (int i = 0; i < dim_; ++i) max_degrees_[i] = std::max(max_degrees_[i], data_[k * dim_ + i]);
        lookup_.clear();
        lookup_.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            std::uint64_t key = 0;
            for (int i = dim_; i-- > 0;)
                key = key * static_cast<std::uint64_t>(max_degrees_[i] + 1) + static_cast<std::uint64_t>(data_[k * dim_ + i]);
            lookup_.emplace(key, k);
        }
    }

    int dim_ = 0;
    int degree_ = 0;
    LpDegree norm_ = LpDegree::two();
    std::vector<int> data_;
    std::vector<int> max_degrees_;
    std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

/// A_{m,n,p} in lex order. Generation runs the last coordinate in the outermost
/// loop, so the output is already sorted.
inline MultiIndexSet build_index_set(int m, int n, LpDegree p) {
    if (m < 1) throw DomainError("build_index_set: dimension m must be >= 1");
    if (n < 0) throw DomainError("build_index_set: degree n must be >= 0");
    MultiIndexSet set;
    set.dim_ = m;
    set.degree_ = n;
    set.norm_ = p;
    MultiIndex alpha(m, 0);
    // Recursive enumeration from coordinate m-1 down to 0; a partial index that already
    // violates the bound prunes its subtree because the norms are monotone.
    auto recurse = [&](auto&& self, int coord) -> void {
        if (coord < 0) {
            set.data_.insert(set.data_.end(), alpha.begin(), alpha.end());
            return;
        }
        for (int v = 0; v <= n; ++v) {
            alpha[coord] = v;
            if (!p.admits(alpha, n)) break;
            self(self, coord - 1);
        }
        alpha[coord] = 0;
    };
    recurse(recurse, m - 1);
    set.finalize();
    return set;
}

/// True iff every component-wise dominated index of every member is present.
/// Checking the immediate predecessors alpha - e_i suffices by induction.
inline bool is_downward_closed(const MultiIndexSet& set) {
    MultiIndex beta(set.dim());
    for (std::size_t k = 0; k < set.size(); ++k) {
        auto alpha = set[k];
        std::copy(alpha.begin(), alpha.end(), beta.begin());
        for (int i = 0; i < set.dim(); ++i) {
            if (beta[i] == 0) continue;
            --beta[i];
            bool present = set.contains(beta);
            ++beta[i];
            if (!present) return false;
        }
    }
    return true;
}

}  // namespace gpls
