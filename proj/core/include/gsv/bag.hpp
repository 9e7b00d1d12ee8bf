#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace gsv {

// Finite multiset with non-negative multiplicities. Entries with multiplicity
// zero are erased on the way in, so equality is plain map equality.
template <typename T>
class Bag {
public:
    using Count = std::uint64_t;

    Bag() = default;
    Bag(std::initializer_list<T> xs) {
        for (const T& x : xs) add(x);
    }

    void add(const T& x, Count n = 1) {
        if (n == 0) return;
        m_[x] += n;
    }

    // Removes up to n copies; returns how many were actually removed.
    Count remove(const T& x, Count n = 1) {
        auto it = m_.find(x);
        if (it == m_.end()) return 0;
        Count taken = it->second < n ? it->second : n;
        it->second -= taken;
        if (it->second == 0) m_.erase(it);
        return taken;
    }

    Count count(const T& x) const {
        auto it = m_.find(x);
        return it == m_.end() ? 0 : it->second;
    }

    Count size() const {
        Count s = 0;
        for (auto& [_, n] : m_) s += n;
        return s;
    }

    bool empty() const { return m_.empty(); }

    bool contains(const Bag& other) const {
        for (auto& [x, n] : other.m_)
            if (count(x) < n) return false;
        return true;
    }

    bool operator==(const Bag& o) const { return m_ == o.m_; }
    auto operator<=>(const Bag& o) const { return m_ <=> o.m_; }

    const std::map<T, Count>& entries() const { return m_; }

    auto begin() const { return m_.begin(); }
    auto end() const { return m_.end(); }

private:
    std::map<T, Count> m_;
};

template <typename T>
Bag<T> bag_union(const Bag<T>& a, const Bag<T>& b) {
    Bag<T> r = a;
    for (auto& [x, n] : b.entries()) r.add(x, n);
    return r;
}

// Pointwise difference clamped at zero.
template <typename T>
Bag<T> bag_subtract(const Bag<T>& a, const Bag<T>& b) {
    Bag<T> r = a;
    for (auto& [x, n] : b.entries()) r.remove(x, n);
    return r;
}

template <typename T, typename Keep>
Bag<T> bag_refine(const Bag<T>& a, Keep&& keep) {
    Bag<T> r;
    for (auto& [x, n] : a.entries())
        if (keep(x)) r.add(x, n);
    return r;
}

// Enumerates every sub-bag of b (multiplicity choices per element) and feeds
// it to f; f returning true stops the walk and makes the result true.
template <typename T, typename Fn>
bool any_subbag(const Bag<T>& b, Fn&& f) {
    std::vector<std::pair<T, typename Bag<T>::Count>> items(b.entries().begin(), b.entries().end());
    Bag<T> cur;
    std::function<bool(std::size_t)> walk = [&](std::size_t i) -> bool {
        if (i == items.size()) return f(cur);
        for (typename Bag<T>::Count k = 0; k <= items[i].second; ++k) {
            if (k > 0) cur.add(items[i].first);
            if (walk(i + 1)) return true;
        }
        cur.remove(items[i].first, items[i].second);
        return false;
    };
    return walk(0);
}

// Dershowitz-Manna ordering: a < b iff some non-empty C <= b and finite D with
// a = (b \ C) + D exist where every element of D sits strictly below some
// element of C. The search over C is exhaustive; D is forced to a - (b \ C).
template <typename T, typename Lt>
bool dm_less(const Bag<T>& a, const Bag<T>& b, Lt&& elem_lt) {
    return any_subbag(b, [&](const Bag<T>& c) {
        if (c.empty()) return false;
        Bag<T> rest = bag_subtract(b, c);
        if (!a.contains(rest)) return false;
        Bag<T> d = bag_subtract(a, rest);
        for (auto& [x, n] : d.entries()) {
            (void)n;
            bool dominated = false;
            for (auto& [y, m] : c.entries()) {
                (void)m;
                if (elem_lt(x, y)) { dominated = true; break; }
            }
            if (!dominated) return false;
        }
        return true;
    });
}

} // namespace gsv
