#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "ubd/error.hpp"
#include "ubd/units.hpp"

namespace ubd {

// Topside record Y(t) = (alpha_G(L,t), p(L,t), v_G(L,t)).
struct MeasurementRecord {
    double t = 0.0;         // s
    double alpha_top = 0.0; // gas fraction at x = L
    double p_top = 0.0;     // Pa
    double v_g_top = 0.0;   // m/s

    void validate() const {
        if (!(alpha_top >= 0.0 && alpha_top <= 1.0))
            throw Error(ErrorKind::Validation, "measurement: alpha outside [0,1]");
        if (!(p_top >= units::bar))
            throw Error(ErrorKind::Validation, "measurement: p below the 1 bar floor");
        if (!(v_g_top > 0.0))
            throw Error(ErrorKind::Validation, "measurement: vG must be > 0");
    }
};

// Rolling, time-ordered record window with piecewise-linear interpolation.
class MeasurementHistory {
public:
    explicit MeasurementHistory(double horizon = 2400.0, double max_gap = 30.0)
        : horizon_(horizon), max_gap_(max_gap) {}

    void append(const MeasurementRecord& rec) {
        rec.validate();
        if (!records_.empty()) {
            if (!(rec.t > records_.back().t))
                throw Error(ErrorKind::Ordering, "measurement history: non-increasing timestamp");
            if (rec.t - records_.back().t > max_gap_)
                throw Error(ErrorKind::Ordering, "measurement history: gap exceeds configured maximum");
        }
        records_.push_back(rec);
        trim();
    }

    bool covers(double t0, double t1) const {
        return !records_.empty() && records_.front().t <= t0 + 1e-9 && records_.back().t >= t1 - 1e-9;
    }

    double earliest() const {
        if (records_.empty()) throw Error(ErrorKind::Observability, "measurement history: empty");
        return records_.front().t;
    }
    double latest() const {
        if (records_.empty()) throw Error(ErrorKind::Observability, "measurement history: empty");
        return records_.back().t;
    }

    MeasurementRecord interpolate(double t) const {
        if (records_.empty()) throw Error(ErrorKind::Observability, "measurement history: empty");
        if (t <= records_.front().t) return front_at(t);
        if (t >= records_.back().t) return back_at(t);
        auto cmp = [](const MeasurementRecord& r, double tt) { return r.t < tt; };
        auto it = std::lower_bound(records_.begin(), records_.end(), t, cmp);
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (t - lo.t) / (hi.t - lo.t);
        MeasurementRecord out;
        out.t = t;
        out.alpha_top = lo.alpha_top + w * (hi.alpha_top - lo.alpha_top);
        out.p_top = lo.p_top + w * (hi.p_top - lo.p_top);
        out.v_g_top = lo.v_g_top + w * (hi.v_g_top - lo.v_g_top);
        return out;
    }

    double horizon() const { return horizon_; }
    std::size_t size() const { return records_.size(); }
    const std::deque<MeasurementRecord>& records() const { return records_; }

private:
    MeasurementRecord front_at(double t) const {
        MeasurementRecord r = records_.front();
        r.t = t;
        return r;
    }
    MeasurementRecord back_at(double t) const {
        MeasurementRecord r = records_.back();
        r.t = t;
        return r;
    }

    void trim() {
        // keep one point before the horizon edge so interpolation stays valid
        const double cutoff = records_.back().t - 1.25 * horizon_ - max_gap_;
        while (records_.size() > 2 && records_[1].t < cutoff) records_.pop_front();
    }

    double horizon_;
    double max_gap_;
    std::deque<MeasurementRecord> records_;
};

// Moving-average smoothing of the alpha channel, used before differentiating
// noisy histories in the backward solve. window <= 0 disables it.
inline std::vector<double> smooth_series(const std::vector<double>& v, const std::vector<double>& t,
                                         double window) {
    if (window <= 0.0 || v.size() < 3) return v;
    std::vector<double> out(v.size());
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        while (lo < i && t[i] - t[lo] > 0.5 * window) ++lo;
        while (hi + 1 < v.size() && t[hi + 1] - t[i] <= 0.5 * window) ++hi;
        double s = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) s += v[j];
        out[i] = s / static_cast<double>(hi - lo + 1);
    }
    return out;
}

} // namespace ubd
