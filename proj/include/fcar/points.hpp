#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fcar/errors.hpp"
#include "fcar/grid.hpp"

namespace fcar {

/// One evaluation point of a past curve: which lag it belongs to and
/// where on the grid it sits.
struct Candidate {
    int lag = 1;       // 1..q, 1 = previous curve
    int index = 0;     // position in the candidate grid
    double abscissa = 0.0;

    friend bool operator==(const Candidate& a, const Candidate& b) {
        return a.lag == b.lag && a.index == b.index;
    }
};

/// An ordered set of candidates with a minimum same-lag separation.
/// Construction enforces distinctness and the separation constraint.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::vector<Candidate> candidates, double delta)
        : candidates_(std::move(candidates)), delta_(delta) {
        if (delta_ < 0.0) throw InvalidArgument("PointSet: delta must be nonnegative");
        for (std::size_t i = 0; i < candidates_.size(); ++i) {
            const Candidate& a = candidates_[i];
            if (a.lag < 1) throw InvalidArgument("PointSet: lag must be >= 1");
            for (std::size_t j = i + 1; j < candidates_.size(); ++j) {
                const Candidate& b = candidates_[j];
                if (a.lag != b.lag) continue;
                if (a.index == b.index)
                    throw InvalidArgument("PointSet: duplicate (lag, abscissa) pair");
                if (!separated(a.abscissa, b.abscissa, delta_))
                    throw InvalidArgument("PointSet: same-lag points closer than delta");
            }
        }
    }

    static bool separated(double a, double b, double delta) {
        // small slack so an exactly delta-wide gap survives rounding
        return std::fabs(a - b) + 1e-12 >= delta;
    }

    int size() const { return static_cast<int>(candidates_.size()); }
    bool empty() const { return candidates_.empty(); }
    const Candidate& operator[](int i) const { return candidates_[static_cast<std::size_t>(i)]; }
    const std::vector<Candidate>& candidates() const { return candidates_; }
    double delta() const { return delta_; }

    bool contains(const Candidate& c) const {
        for (const Candidate& x : candidates_)
            if (x == c) return true;
        return false;
    }

    /// True when adding `c` would keep all invariants.
    bool admits(const Candidate& c) const {
        for (const Candidate& x : candidates_) {
            if (x == c) return false;
            if (x.lag == c.lag && !separated(x.abscissa, c.abscissa, delta_)) return false;
        }
        return true;
    }

private:
    std::vector<Candidate> candidates_;
    double delta_ = 0.0;
};

}  // namespace fcar
