#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

namespace agora {

// The three cognitive uncertainty dimensions. Indexing order is part of the
// ledger/CSV contract (perc < sem < inf).
enum class Dim : int { perc = 0, sem = 1, inf = 2 };

inline constexpr std::array<Dim, 3> kAllDims{Dim::perc, Dim::sem, Dim::inf};

const char* dim_name(Dim d);
Dim dim_from_name(const std::string& name);

// 3-dimensional uncertainty asset: [perc, sem, inf]. Componentwise vector
// space operations; components are nonnegative for any portfolio the engine
// exposes, but intermediate signed values (net transfers) reuse the type.
struct UncertaintyVector {
    double perc = 0.0;
    double sem = 0.0;
    double inf = 0.0;

    double operator[](Dim d) const {
        switch (d) {
            case Dim::perc: return perc;
            case Dim::sem: return sem;
            default: return inf;
        }
    }
    double& operator[](Dim d) {
        switch (d) {
            case Dim::perc: return perc;
            case Dim::sem: return sem;
            default: return inf;
        }
    }

    UncertaintyVector operator+(const UncertaintyVector& o) const {
        return {perc + o.perc, sem + o.sem, inf + o.inf};
    }
    UncertaintyVector operator-(const UncertaintyVector& o) const {
        return {perc - o.perc, sem - o.sem, inf - o.inf};
    }
    UncertaintyVector operator*(double s) const {
        return {perc * s, sem * s, inf * s};
    }
    UncertaintyVector& operator+=(const UncertaintyVector& o) {
        perc += o.perc;
        sem += o.sem;
        inf += o.inf;
        return *this;
    }
    bool operator==(const UncertaintyVector&) const = default;

    double l1() const;
};

// Epistemic (tradable) / aleatoric (non-tradable) split of a total vector.
// Invariant: epistemic + aleatoric reconstructs the total within 1e-9.
struct UncertaintyDecomposition {
    UncertaintyVector epistemic;
    UncertaintyVector aleatoric;
};

struct DimensionWeights {
    double perc = 0.4;
    double sem = 0.3;
    double inf = 0.3;

    double operator[](Dim d) const {
        switch (d) {
            case Dim::perc: return perc;
            case Dim::sem: return sem;
            default: return inf;
        }
    }
    // weights in [0,1], sum to 1 within 1e-9
    bool valid() const;
};

// Normalized Shannon entropy of a class distribution: H(p)/log(K).
// K = 1 returns 0. Throws std::invalid_argument if the input is not on the
// probability simplex (tolerance 1e-6).
double perceptual_uncertainty(std::span<const double> class_probs);

// Weighted ambiguity mass over semantic elements, smoothed by complexity:
// sum(w_i * C_i) / (N + lambda), clamped to [0,1]. lambda_smooth must be > 0.
double semantic_uncertainty(
    std::span<const std::pair<double, double>> ambiguity_scores,
    double complexity, double lambda_smooth);

// gamma * (1 - max p) + (1 - gamma) * H(p)/log(M); entropy term is 0 for M=1.
double inferential_uncertainty(std::span<const double> outcome_probs,
                               double gamma);

// Splits a total vector into epistemic/aleatoric parts. The epistemic share
// per dimension is total_d * min(1, (1 - randomness_signal) +
// knowledge_gap_cue); aleatoric is the exact remainder, so the two always
// reconstruct the total.
UncertaintyDecomposition decompose(const UncertaintyVector& total,
                                   double knowledge_gap_cue,
                                   double randomness_signal);

// Weighted scalar collapse: w . u
double total_uncertainty(const UncertaintyVector& u,
                         const DimensionWeights& w);

}  // namespace agora
