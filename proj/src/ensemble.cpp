#include "decoh/ensemble.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace decoh {

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::weighted: return "weighted";
        case Mode::count: return "count";
        case Mode::collapse: return "collapse";
    }
    return "unknown";
}

std::optional<Mode> parse_mode(std::string_view text) {
    if (text == "weighted") return Mode::weighted;
    if (text == "count") return Mode::count;
    if (text == "collapse") return Mode::collapse;
    return std::nullopt;
}

Ensemble::Ensemble(Mode mode, double time, std::vector<Branch> branches)
    : mode_(mode), time_(time), branches_(std::move(branches)) {
    if (!std::isfinite(time_)) throw std::invalid_argument("Ensemble: time must be finite");
    if (mode_ == Mode::collapse && branches_.size() != 1) {
        throw std::invalid_argument("Ensemble: collapse mode holds exactly one branch, got " +
                                    std::to_string(branches_.size()));
    }
    if (mode_ == Mode::count) {
        for (const auto& b : branches_) {
            if (b.multiplicity < 1) {
                throw std::invalid_argument("Ensemble: count-mode multiplicity must be >= 1");
            }
            if (total_count_ > std::numeric_limits<std::uint64_t>::max() - b.multiplicity) {
                throw std::overflow_error("Ensemble: total count overflows 64 bits");
            }
            total_count_ += b.multiplicity;
        }
    } else if (!branches_.empty()) {
        double sum = 0.0;
        for (const auto& b : branches_) {
            if (!(b.weight > 0.0 && b.weight <= 1.0 + kWeightSumTolerance)) {
                throw std::invalid_argument("Ensemble: branch weight must lie in (0, 1], got " +
                                            std::to_string(b.weight));
            }
            sum += b.weight;
        }
        if (std::abs(sum - 1.0) > kWeightSumTolerance) {
            throw std::invalid_argument("Ensemble: weights must sum to 1, got " +
                                        std::to_string(sum));
        }
    }
}

Ensemble Ensemble::midbox(const PhysicalParams& p, Mode mode, std::uint64_t multiplicity) {
    Branch b;
    b.packet = GaussianPacket::localized(0.5 * p.L, p.w * p.w);
    b.multiplicity = multiplicity;
    return Ensemble(mode, 0.0, {b});
}

double Ensemble::total_mass() const {
    if (mode_ == Mode::count) return static_cast<double>(total_count_);
    double sum = 0.0;
    for (const auto& b : branches_) sum += b.weight;
    return sum;
}

double Ensemble::effective_size() const {
    double s1 = 0.0;
    double s2 = 0.0;
    for (const auto& b : branches_) {
        const double m = mass(b);
        s1 += m;
        s2 += m * m;
    }
    return s2 > 0.0 ? s1 * s1 / s2 : 0.0;
}

}  // namespace decoh
