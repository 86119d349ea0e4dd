#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "ubd/error.hpp"
#include "ubd/units.hpp"

namespace ubd {

// Topside pressure signal as a breakpoint sequence, either held (ZOH) or
// interpolated linearly between breakpoints.
class Schedule {
public:
    enum class Mode { Hold, Linear };

    Schedule() = default;

    Schedule(std::vector<double> times, std::vector<double> values, Mode mode = Mode::Hold)
        : t_(std::move(times)), v_(std::move(values)), mode_(mode) {
        if (t_.empty() || t_.size() != v_.size())
            throw Error(ErrorKind::Validation, "schedule: need matching, nonempty breakpoints and values");
        for (std::size_t i = 1; i < t_.size(); ++i)
            if (!(t_[i] > t_[i - 1]))
                throw Error(ErrorKind::Validation, "schedule: breakpoints must be strictly increasing");
        for (double p : v_)
            if (!(p >= units::bar))
                throw Error(ErrorKind::Validation, "schedule: pressures must be >= 1 bar");
    }

    static Schedule constant(double value, double t0 = 0.0) {
        return Schedule({t0}, {value}, Mode::Hold);
    }

    double value(double t) const {
        if (t_.empty()) throw Error(ErrorKind::Validation, "schedule: empty");
        if (t <= t_.front()) return v_.front();
        if (t >= t_.back()) return v_.back();
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - t_.begin());
        const std::size_t lo = hi - 1;
        if (mode_ == Mode::Hold) return v_[lo];
        const double w = (t - t_[lo]) / (t_[hi] - t_[lo]);
        return v_[lo] + w * (v_[hi] - v_[lo]);
    }

    // Breakpoints inside (t0, t1); integrators restart there so holds stay exact.
    std::vector<double> breakpoints_between(double t0, double t1) const {
        std::vector<double> out;
        for (double t : t_)
            if (t > t0 && t < t1) out.push_back(t);
        return out;
    }

    const std::vector<double>& times() const { return t_; }
    const std::vector<double>& values() const { return v_; }
    Mode mode() const { return mode_; }

    // Append another schedule starting after this one's last breakpoint.
    void extend(const Schedule& tail) {
        for (std::size_t i = 0; i < tail.t_.size(); ++i) {
            if (!t_.empty() && !(tail.t_[i] > t_.back())) continue;
            t_.push_back(tail.t_[i]);
            v_.push_back(tail.v_[i]);
        }
    }

private:
    std::vector<double> t_;
    std::vector<double> v_;
    Mode mode_ = Mode::Hold;
};

} // namespace ubd
