#include "coformer/neighbor.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace coformer {

NeighborQuery NeighborQuery::knn(int k) {
    NeighborQuery q;
    q.mode = Mode::Knn;
    q.k = k;
    return q;
}

NeighborQuery NeighborQuery::radius(double delta_tau) {
    NeighborQuery q;
    q.mode = Mode::Radius;
    q.delta_tau = delta_tau;
    return q;
}

void NeighborQuery::validate() const {
    if (mode == Mode::Knn && k < 1) {
        throw std::invalid_argument("neighbor query: k must be at least 1");
    }
    if (mode == Mode::Radius && (!(delta_tau >= 0.0) || std::isnan(delta_tau))) {
        throw std::invalid_argument("neighbor query: delta_tau must be non-negative");
    }
}

bool canonical_less(const VariateTimePoint& a, const VariateTimePoint& b) {
    return std::tie(a.timestamp, a.variate_id, a.sample_idx) <
           std::tie(b.timestamp, b.variate_id, b.sample_idx);
}

NeighborIndex NeighborIndex::build(const Observation& obs) {
    NeighborIndex index;
    index.times_.resize(obs.variates.size());
    index.flat_of_.resize(obs.variates.size());
    for (std::size_t v = 0; v < obs.variates.size(); ++v) {
        auto& times = index.times_[v];
        times.reserve(obs.variates[v].samples.size());
        for (const auto& s : obs.variates[v].samples) {
            if (!times.empty() && s.timestamp < times.back()) {
                throw std::invalid_argument("variate " + std::to_string(v) +
                                            " is not sorted by timestamp");
            }
            times.push_back(s.timestamp);
        }
        index.flat_of_[v].resize(times.size(), -1);
        for (std::size_t i = 0; i < times.size(); ++i) {
            index.canonical_.push_back(
                {static_cast<int>(v), static_cast<int>(i), times[i]});
        }
    }
    std::sort(index.canonical_.begin(), index.canonical_.end(), canonical_less);
    for (std::size_t pos = 0; pos < index.canonical_.size(); ++pos) {
        const auto& p = index.canonical_[pos];
        index.flat_of_[static_cast<std::size_t>(p.variate_id)][static_cast<std::size_t>(p.sample_idx)] =
            static_cast<int>(pos);
    }
    return index;
}

int NeighborIndex::samples_in(int variate_id) const {
    if (variate_id < 0 || variate_id >= n_variates()) {
        throw std::out_of_range("variate id out of range");
    }
    return static_cast<int>(times_[static_cast<std::size_t>(variate_id)].size());
}

void NeighborIndex::check_point(const VariateTimePoint& p) const {
    if (p.variate_id < 0 || p.variate_id >= n_variates()) {
        throw std::invalid_argument("query point: variate id out of range");
    }
    const auto& times = times_[static_cast<std::size_t>(p.variate_id)];
    if (p.sample_idx < 0 || p.sample_idx >= static_cast<int>(times.size())) {
        throw std::invalid_argument("query point: sample index out of range");
    }
    if (times[static_cast<std::size_t>(p.sample_idx)] != p.timestamp) {
        throw std::invalid_argument("query point: timestamp does not match the index");
    }
}

int NeighborIndex::flat_id(const VariateTimePoint& p) const {
    check_point(p);
    return flat_of_[static_cast<std::size_t>(p.variate_id)][static_cast<std::size_t>(p.sample_idx)];
}

std::vector<VariateTimePoint> NeighborIndex::intra(const VariateTimePoint& p) const {
    check_point(p);
    const auto& times = times_[static_cast<std::size_t>(p.variate_id)];
    std::vector<VariateTimePoint> result;
    result.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        result.push_back({p.variate_id, static_cast<int>(i), times[i]});
    }
    return result;
}

std::vector<VariateTimePoint> NeighborIndex::inter_knn(const VariateTimePoint& p, int k) const {
    check_point(p);
    if (k < 1) {
        throw std::invalid_argument("inter_knn: k must be at least 1");
    }

    // One cursor pair per other variate walks outward from the query time;
    // a heap over the per-variate frontrunners yields candidates globally
    // ordered by (|dt|, variate_id, sample_idx).
    struct Candidate {
        double abs_dt;
        int variate_id;
        int sample_idx;
        bool operator>(const Candidate& o) const {
            return std::tie(abs_dt, variate_id, sample_idx) >
                   std::tie(o.abs_dt, o.variate_id, o.sample_idx);
        }
    };

    struct Cursor {
        int left = -1;
        int right = 0;
    };

    const int n_v = n_variates();
    std::vector<Cursor> cursors(static_cast<std::size_t>(n_v));
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap;

    auto next_from = [&](int v) -> bool {
        const auto& times = times_[static_cast<std::size_t>(v)];
        auto& cur = cursors[static_cast<std::size_t>(v)];
        const bool has_left = cur.left >= 0;
        const bool has_right = cur.right < static_cast<int>(times.size());
        if (!has_left && !has_right) {
            return false;
        }
        const double dl = has_left
                              ? std::abs(times[static_cast<std::size_t>(cur.left)] - p.timestamp)
                              : 0.0;
        const double dr = has_right
                              ? std::abs(times[static_cast<std::size_t>(cur.right)] - p.timestamp)
                              : 0.0;
        // On equal |dt| the left element wins: it has the smaller sample index.
        const bool take_left = has_left && (!has_right || dl <= dr);
        if (take_left) {
            // Walking left through duplicate timestamps would emit equal-|dt|
            // candidates with decreasing sample index, so push the whole run
            // and let the heap order it.
            int run_start = cur.left;
            while (run_start > 0 &&
                   times[static_cast<std::size_t>(run_start - 1)] ==
                       times[static_cast<std::size_t>(cur.left)]) {
                --run_start;
            }
            for (int i = run_start; i <= cur.left; ++i) {
                heap.push({dl, v, i});
            }
            cur.left = run_start - 1;
        } else {
            heap.push({dr, v, cur.right});
            ++cur.right;
        }
        return true;
    };

    for (int v = 0; v < n_v; ++v) {
        if (v == p.variate_id) {
            continue;
        }
        const auto& times = times_[static_cast<std::size_t>(v)];
        const auto it = std::lower_bound(times.begin(), times.end(), p.timestamp);
        auto& cur = cursors[static_cast<std::size_t>(v)];
        cur.right = static_cast<int>(it - times.begin());
        cur.left = cur.right - 1;
        next_from(v);
    }

    std::vector<VariateTimePoint> result;
    result.reserve(static_cast<std::size_t>(k));
    while (static_cast<int>(result.size()) < k && !heap.empty()) {
        const Candidate c = heap.top();
        heap.pop();
        result.push_back({c.variate_id, c.sample_idx,
                          times_[static_cast<std::size_t>(c.variate_id)]
                                [static_cast<std::size_t>(c.sample_idx)]});
        next_from(c.variate_id);
    }
    std::sort(result.begin(), result.end(), canonical_less);
    return result;
}

std::vector<VariateTimePoint> NeighborIndex::inter_radius(const VariateTimePoint& p,
                                                          double delta_tau) const {
    check_point(p);
    if (!(delta_tau >= 0.0)) {
        throw std::invalid_argument("inter_radius: delta_tau must be non-negative");
    }
    std::vector<VariateTimePoint> result;
    for (int v = 0; v < n_variates(); ++v) {
        if (v == p.variate_id) {
            continue;
        }
        const auto& times = times_[static_cast<std::size_t>(v)];
        const auto lo = std::lower_bound(times.begin(), times.end(), p.timestamp - delta_tau);
        const auto hi = std::upper_bound(times.begin(), times.end(), p.timestamp + delta_tau);
        for (auto it = lo; it != hi; ++it) {
            const int idx = static_cast<int>(it - times.begin());
            if (std::abs(*it - p.timestamp) <= delta_tau) {
                result.push_back({v, idx, *it});
            }
        }
    }
    std::sort(result.begin(), result.end(), canonical_less);
    return result;
}

std::vector<VariateTimePoint> NeighborIndex::inter(const VariateTimePoint& p,
                                                   const NeighborQuery& query) const {
    query.validate();
    return query.mode == NeighborQuery::Mode::Knn ? inter_knn(p, query.k)
                                                  : inter_radius(p, query.delta_tau);
}

std::vector<VariateTimePoint> brute_force_inter(const Observation& obs, const VariateTimePoint& p,
                                                const NeighborQuery& query) {
    query.validate();
    std::vector<VariateTimePoint> candidates;
    for (std::size_t v = 0; v < obs.variates.size(); ++v) {
        if (static_cast<int>(v) == p.variate_id) {
            continue;
        }
        const auto& samples = obs.variates[v].samples;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            candidates.push_back({static_cast<int>(v), static_cast<int>(i), samples[i].timestamp});
        }
    }

    std::vector<VariateTimePoint> result;
    if (query.mode == NeighborQuery::Mode::Radius) {
        for (const auto& c : candidates) {
            if (std::abs(c.timestamp - p.timestamp) <= query.delta_tau) {
                result.push_back(c);
            }
        }
    } else {
        std::sort(candidates.begin(), candidates.end(),
                  [&](const VariateTimePoint& a, const VariateTimePoint& b) {
                      const double da = std::abs(a.timestamp - p.timestamp);
                      const double db = std::abs(b.timestamp - p.timestamp);
                      return std::tie(da, a.variate_id, a.sample_idx) <
                             std::tie(db, b.variate_id, b.sample_idx);
                  });
        if (static_cast<int>(candidates.size()) > query.k) {
            candidates.resize(static_cast<std::size_t>(query.k));
        }
        result = std::move(candidates);
    }
    std::sort(result.begin(), result.end(), canonical_less);
    return result;
}

}  // namespace coformer
