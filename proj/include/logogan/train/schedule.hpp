#pragma once

#include <stdexcept>
#include <utility>

namespace logogan {

struct PhasePoint {
    int phase = 0;
    double alpha = 1.0;
};

// Progressive-growing schedule over images seen: stabilize each resolution
// for images_per_phase, then ramp alpha linearly from 0 to 1 over
// images_per_transition while the next resolution fades in. Terminal state
// is (max_phase, 1.0) forever.
inline PhasePoint schedule_phase(long images_seen, long images_per_phase,
                                 long images_per_transition, int max_phase) {
    if (images_seen < 0) throw std::invalid_argument("images_seen must be >= 0");
    if (images_per_phase < 1) throw std::invalid_argument("images_per_phase must be >= 1");
    if (images_per_transition < 0)
        throw std::invalid_argument("images_per_transition must be >= 0");
    if (max_phase < 0) throw std::invalid_argument("max_phase must be >= 0");

    long pos = images_seen;
    if (pos < images_per_phase) return {0, 1.0};
    pos -= images_per_phase;
    for (int phase = 1; phase <= max_phase; ++phase) {
        if (pos < images_per_transition)
            return {phase, static_cast<double>(pos) / static_cast<double>(images_per_transition)};
        pos -= images_per_transition;
        if (pos < images_per_phase) return {phase, 1.0};
        pos -= images_per_phase;
    }
    return {max_phase, 1.0};
}

} // namespace logogan
