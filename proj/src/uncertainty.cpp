#include "agora/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agora {

const char* dim_name(Dim d) {
    switch (d) {
        case Dim::perc: return "perc";
        case Dim::sem: return "sem";
        default: return "inf";
    }
}

Dim dim_from_name(const std::string& name) {
    if (name == "perc") return Dim::perc;
    if (name == "sem") return Dim::sem;
    if (name == "inf") return Dim::inf;
    throw std::invalid_argument("unknown dimension name: " + name);
}

double UncertaintyVector::l1() const {
    return std::abs(perc) + std::abs(sem) + std::abs(inf);
}

bool DimensionWeights::valid() const {
    for (Dim d : kAllDims) {
        const double w = (*this)[d];
        if (!(w >= 0.0 && w <= 1.0)) return false;
    }
    return std::abs(perc + sem + inf - 1.0) <= 1e-9;
}

namespace {

void check_simplex(std::span<const double> p, const char* what) {
    if (p.empty())
        throw std::invalid_argument(std::string(what) + ": empty distribution");
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0)
            throw std::invalid_argument(std::string(what) +
                                        ": negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument(std::string(what) +
                                    ": probabilities do not sum to 1");
}

// 0 * log 0 := 0
double entropy_nats(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

}  // namespace

double perceptual_uncertainty(std::span<const double> class_probs) {
    check_simplex(class_probs, "class_probs");
    const std::size_t k = class_probs.size();
    if (k == 1) return 0.0;
    return entropy_nats(class_probs) / std::log(static_cast<double>(k));
}

double semantic_uncertainty(
    std::span<const std::pair<double, double>> ambiguity_scores,
    double complexity, double lambda_smooth) {
    if (!(lambda_smooth > 0.0))
        throw std::invalid_argument("lambda_smooth must be positive");
    if (!(complexity > 0.0))
        throw std::invalid_argument("complexity must be positive");
    double mass = 0.0;
    for (const auto& [w, c] : ambiguity_scores) {
        if (w < 0.0 || c < 0.0)
            throw std::invalid_argument(
                "ambiguity weights and scores must be nonnegative");
        mass += w * c;
    }
    return std::clamp(mass / (complexity + lambda_smooth), 0.0, 1.0);
}

double inferential_uncertainty(std::span<const double> outcome_probs,
                               double gamma) {
    check_simplex(outcome_probs, "outcome_probs");
    if (gamma < 0.0 || gamma > 1.0)
        throw std::invalid_argument("gamma must be in [0,1]");
    const double pmax =
        *std::max_element(outcome_probs.begin(), outcome_probs.end());
    const std::size_t m = outcome_probs.size();
    const double hbar =
        m == 1 ? 0.0
               : entropy_nats(outcome_probs) / std::log(static_cast<double>(m));
    return gamma * (1.0 - pmax) + (1.0 - gamma) * hbar;
}

UncertaintyDecomposition decompose(const UncertaintyVector& total,
                                   double knowledge_gap_cue,
                                   double randomness_signal) {
    if (knowledge_gap_cue < 0.0 || knowledge_gap_cue > 1.0 ||
        randomness_signal < 0.0 || randomness_signal > 1.0)
        throw std::invalid_argument("decomposition cues must be in [0,1]");
    const double share =
        std::min(1.0, (1.0 - randomness_signal) + knowledge_gap_cue);
    UncertaintyDecomposition out;
    for (Dim d : kAllDims) {
        out.epistemic[d] = total[d] * share;
        out.aleatoric[d] = total[d] - out.epistemic[d];
    }
    return out;
}

double total_uncertainty(const UncertaintyVector& u,
                         const DimensionWeights& w) {
    return w.perc * u.perc + w.sem * u.sem + w.inf * u.inf;
}

}  // namespace agora
