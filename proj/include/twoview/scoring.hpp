#pragma once

// Intra-view triple plausibility: higher is more plausible.
//   translational   f = -||h + r - t||_2
//   multiplicative  f = (h o t) . r
//   correlational   f = (h * t) . r        (* = circular correlation)

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "twoview/tensor_ops.hpp"

namespace twoview {

enum class ScorerKind { Translational, Multiplicative, Correlational };

/// "TransE", "Mult", "HolE".
std::string_view scorer_name(ScorerKind kind) noexcept;
std::optional<ScorerKind> parse_scorer(std::string_view name) noexcept;

template <typename T>
T score(ScorerKind kind, std::span<const T> h, std::span<const T> r, std::span<const T> t) {
    require_same_length(h.size(), r.size(), "score");
    require_same_length(h.size(), t.size(), "score");
    const std::size_t d = h.size();
    switch (kind) {
        case ScorerKind::Translational: {
            T s = 0;
            for (std::size_t i = 0; i < d; ++i) {
                const T x = h[i] + r[i] - t[i];
                s += x * x;
            }
            return -std::sqrt(s);
        }
        case ScorerKind::Multiplicative: {
            T s = 0;
            for (std::size_t i = 0; i < d; ++i) s += h[i] * t[i] * r[i];
            return s;
        }
        case ScorerKind::Correlational: {
            T s = 0;
            for (std::size_t k = 0; k < d; ++k) {
                T c = 0;
                for (std::size_t i = 0; i < d; ++i) c += h[i] * t[(k + i) % d];
                s += c * r[k];
            }
            return s;
        }
    }
    return T(0);
}

/// Writes df/dh, df/dr, df/dt. The translational score uses the zero
/// subgradient where h + r - t = 0.
template <typename T>
void score_grads(ScorerKind kind, std::span<const T> h, std::span<const T> r, std::span<const T> t, std::span<T> gh,
                 std::span<T> gr, std::span<T> gt) {
    require_same_length(h.size(), r.size(), "score gradient");
    require_same_length(h.size(), t.size(), "score gradient");
    require_same_length(h.size(), gh.size(), "score gradient");
    require_same_length(h.size(), gr.size(), "score gradient");
    require_same_length(h.size(), gt.size(), "score gradient");
    const std::size_t d = h.size();
    switch (kind) {
        case ScorerKind::Translational: {
            T s = 0;
            for (std::size_t i = 0; i < d; ++i) {
                const T x = h[i] + r[i] - t[i];
                gt[i] = x;
                s += x * x;
            }
            const T n = std::sqrt(s);
            for (std::size_t i = 0; i < d; ++i) {
                const T u = n > T(0) ? gt[i] / n : T(0);
                gh[i] = -u;
                gr[i] = -u;
                gt[i] = u;
            }
            return;
        }
        case ScorerKind::Multiplicative:
            for (std::size_t i = 0; i < d; ++i) {
                gh[i] = t[i] * r[i];
                gr[i] = h[i] * t[i];
                gt[i] = h[i] * r[i];
            }
            return;
        case ScorerKind::Correlational:
            // df/dr = h * t,  df/dh = r * t,  df/dt = r (x) h
            circ_correlation(h, t, gr);
            circ_correlation(r, t, gh);
            circ_convolution(r, h, gt);
            return;
    }
}

template <typename T>
struct ScoreGradients {
    std::vector<T> head, relation, tail;
};

template <typename T>
ScoreGradients<T> score_grads(ScorerKind kind, std::span<const T> h, std::span<const T> r, std::span<const T> t) {
    ScoreGradients<T> g{std::vector<T>(h.size()), std::vector<T>(h.size()), std::vector<T>(h.size())};
    score_grads(kind, h, r, t, std::span<T>(g.head), std::span<T>(g.relation), std::span<T>(g.tail));
    return g;
}

/// Scores every candidate tail (or head) against a fixed pair of slots in
/// O(d) per candidate. For the bilinear scorers the fixed slots collapse to
/// a single query vector q with f = q . x; for the translational scorer
/// f = -||q - x||. Computed in double.
class CandidateScorer {
public:
    enum class Slot { Head, Tail };

    /// `a`, `b` are the known vectors in triple order: (h, r) for a tail
    /// query, (r, t) for a head query.
    CandidateScorer(ScorerKind kind, Slot missing, std::span<const double> a, std::span<const double> b);

    template <typename U>
    double operator()(std::span<const U> candidate) const {
        double s = 0;
        if (kind_ == ScorerKind::Translational) {
            for (std::size_t i = 0; i < query_.size(); ++i) {
                const double x = query_[i] - static_cast<double>(candidate[i]);
                s += x * x;
            }
            return -std::sqrt(s);
        }
        for (std::size_t i = 0; i < query_.size(); ++i) s += query_[i] * static_cast<double>(candidate[i]);
        return s;
    }

private:
    ScorerKind kind_;
    std::vector<double> query_;
};

}  // namespace twoview
