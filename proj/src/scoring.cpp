#include "twoview/scoring.hpp"

namespace twoview {

namespace {
// Below this length the O(d^2) sums beat the transform.
constexpr std::size_t fft_threshold = 64;
}  // namespace

std::string_view scorer_name(ScorerKind kind) noexcept {
    switch (kind) {
        case ScorerKind::Translational: return "TransE";
        case ScorerKind::Multiplicative: return "Mult";
        case ScorerKind::Correlational: return "HolE";
    }
    return "?";
}

std::optional<ScorerKind> parse_scorer(std::string_view name) noexcept {
    if (name == "TransE") return ScorerKind::Translational;
    if (name == "Mult" || name == "DistMult") return ScorerKind::Multiplicative;
    if (name == "HolE") return ScorerKind::Correlational;
    return std::nullopt;
}

CandidateScorer::CandidateScorer(ScorerKind kind, Slot missing, std::span<const double> a, std::span<const double> b)
    : kind_(kind), query_(a.size()) {
    require_same_length(a.size(), b.size(), "candidate scorer");
    const std::size_t d = a.size();
    std::span<double> q(query_);
    switch (kind) {
        case ScorerKind::Translational:
            // tail: q = h + r;  head: q = t - r
            for (std::size_t i = 0; i < d; ++i) q[i] = missing == Slot::Tail ? a[i] + b[i] : b[i] - a[i];
            break;
        case ScorerKind::Multiplicative:
            for (std::size_t i = 0; i < d; ++i) q[i] = a[i] * b[i];
            break;
        case ScorerKind::Correlational:
            // tail: f = t . (r (x) h);  head: f = h . (r * t)
            if (missing == Slot::Tail) {
                if (d >= fft_threshold)
                    circ_convolution_fft(b, a, q);
                else
                    circ_convolution(b, a, q);
            } else {
                if (d >= fft_threshold)
                    circ_correlation_fft(a, b, q);
                else
                    circ_correlation(a, b, q);
            }
            break;
    }
}

}  // namespace twoview
