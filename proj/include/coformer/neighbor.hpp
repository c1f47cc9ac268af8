#pragma once

#include <vector>

#include "coformer/data.hpp"

namespace coformer {

/// How inter-variate neighbor sets are formed.
struct NeighborQuery {
    enum class Mode { Knn, Radius };

    Mode mode = Mode::Knn;
    int k = 30;
    double delta_tau = 0.0;

    static NeighborQuery knn(int k);
    static NeighborQuery radius(double delta_tau);
    void validate() const;
};

/// Canonical point ordering: (timestamp, variate_id, sample_idx) ascending.
bool canonical_less(const VariateTimePoint& a, const VariateTimePoint& b);

/// Per-observation lookup structure for neighbor queries.  Sample timestamps
/// of each variate must arrive sorted; build verifies this.
class NeighborIndex {
public:
    static NeighborIndex build(const Observation& obs);

    int n_variates() const { return static_cast<int>(times_.size()); }
    std::size_t total_points() const { return canonical_.size(); }
    int samples_in(int variate_id) const;

    /// All points in canonical order.
    const std::vector<VariateTimePoint>& points() const { return canonical_; }

    /// Position of a point within points().
    int flat_id(const VariateTimePoint& p) const;

    /// Every point of p's variate, including p itself, ordered by
    /// (timestamp, sample_idx).
    std::vector<VariateTimePoint> intra(const VariateTimePoint& p) const;

    /// K nearest points in time among all other variates.  Ties on |dt| break
    /// by (variate_id, sample_idx); the result is in canonical order.  Returns
    /// every other-variate point when fewer than k exist.
    std::vector<VariateTimePoint> inter_knn(const VariateTimePoint& p, int k) const;

    /// All other-variate points with |dt| <= delta_tau, in canonical order.
    std::vector<VariateTimePoint> inter_radius(const VariateTimePoint& p, double delta_tau) const;

    std::vector<VariateTimePoint> inter(const VariateTimePoint& p, const NeighborQuery& query) const;

private:
    void check_point(const VariateTimePoint& p) const;

    std::vector<std::vector<double>> times_;
    std::vector<VariateTimePoint> canonical_;
    std::vector<std::vector<int>> flat_of_;
};

/// Reference implementation of inter-variate queries: a flat scan over every
/// point with an explicit sort, kept free of the index's search structures so
/// the two routes stay independent.
std::vector<VariateTimePoint> brute_force_inter(const Observation& obs, const VariateTimePoint& p,
                                                const NeighborQuery& query);

}  // namespace coformer
