#pragma once

namespace ubd {

// Internal units are strict SI (Pa, m, s, kg). bar / minutes / hours only
// appear at I/O boundaries, through these helpers.
namespace units {

constexpr double bar = 1.0e5;     // Pa
constexpr double minute = 60.0;   // s
constexpr double hour = 3600.0;   // s

constexpr double bar_to_pa(double b) { return b * bar; }
constexpr double pa_to_bar(double p) { return p / bar; }
constexpr double min_to_s(double m) { return m * minute; }
constexpr double h_to_s(double h) { return h * hour; }

// Table-style production index, kg/(s*bar) -> kg/(s*Pa)
constexpr double kg_per_s_bar_to_si(double k) { return k / bar; }

} // namespace units
} // namespace ubd
