#include "twoview/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <random>

#include "twoview/errors.hpp"
#include "twoview/objectives.hpp"
#include "twoview/optimizer.hpp"
#include "twoview/scoring.hpp"
#include "twoview/tensor_ops.hpp"

namespace twoview {

namespace {

constexpr std::size_t probe_entities = 6, probe_relations = 3, probe_concepts = 5, probe_meta = 3, probe_batch = 4;

constexpr ScorerKind all_scorers[] = {ScorerKind::Translational, ScorerKind::Multiplicative, ScorerKind::Correlational};

BasicModelParams<double> random_params(std::size_t d, SplitMix64& rng) {
    std::normal_distribution<double> normal(0.0, 0.5);
    BasicModelParams<double> p;
    const std::size_t rows[table_count] = {probe_entities, probe_relations, probe_concepts, probe_meta};
    for (std::size_t i = 0; i < table_count; ++i) {
        p.tables[i] = EmbeddingTable<double>(rows[i], d);
        for (auto& x : p.tables[i].data) x = normal(rng);
    }
    for (auto* m : {&p.ct_map, &p.ha_map}) {
        m->emplace(d, d);
        for (auto& x : (*m)->weight) x = normal(rng);
        for (auto& x : (*m)->bias) x = 0.2 * normal(rng);
    }
    return p;
}

Id pick(std::size_t n, SplitMix64& rng) { return static_cast<Id>(rng.below(n)); }

Id pick_other(std::size_t n, Id avoid, SplitMix64& rng) {
    Id x = pick(n - 1, rng);
    return x >= avoid ? x + 1 : x;
}

// Negatives never coincide with a positive of the same batch, as with the
// filtered sampler used in training.
std::vector<LinkSample> link_batch(SplitMix64& rng) {
    std::vector<std::pair<Id, Id>> pairs;
    for (std::size_t i = 0; i < probe_batch; ++i) pairs.emplace_back(pick(probe_entities, rng), pick(probe_concepts, rng));
    std::vector<LinkSample> batch;
    for (const auto& [e, c] : pairs) {
        Id neg;
        do neg = pick_other(probe_concepts, c, rng);
        while (std::find(pairs.begin(), pairs.end(), std::pair{e, neg}) != pairs.end());
        batch.push_back({e, c, neg});
    }
    return batch;
}

double worst_error(std::span<const double> grad, std::span<const double> point,
                   const std::function<double(std::span<const double>)>& f, double fault) {
    std::vector<double> g(grad.begin(), grad.end());
    for (auto& x : g) x *= fault;
    return finite_diff_check(f, g, point);
}

using LossFn = std::function<LossResult<double>(const BasicModelParams<double>&)>;

double check_loss(const BasicModelParams<double>& params, const LossFn& loss, double fault) {
    const auto point = flatten(params);
    const auto grad = flatten_grads(loss(params).grads, params);
    BasicModelParams<double> scratch = params;
    auto f = [&](std::span<const double> x) {
        unflatten(x, scratch);
        return loss(scratch).loss;
    };
    return worst_error(grad, point, f, fault);
}

}  // namespace

std::vector<double> flatten(const BasicModelParams<double>& p) {
    std::vector<double> out;
    for (const auto& t : p.tables) out.insert(out.end(), t.data.begin(), t.data.end());
    for (const auto* m : {&p.ct_map, &p.ha_map}) {
        if (!*m) continue;
        out.insert(out.end(), (*m)->weight.begin(), (*m)->weight.end());
        out.insert(out.end(), (*m)->bias.begin(), (*m)->bias.end());
    }
    return out;
}

void unflatten(std::span<const double> v, BasicModelParams<double>& p) {
    std::size_t at = 0;
    auto take = [&](std::vector<double>& dst) {
        if (at + dst.size() > v.size()) throw DimensionError("flattened vector too short for the parameter shapes");
        std::copy(v.begin() + static_cast<std::ptrdiff_t>(at), v.begin() + static_cast<std::ptrdiff_t>(at + dst.size()),
                  dst.begin());
        at += dst.size();
    };
    for (auto& t : p.tables) take(t.data);
    for (auto* m : {&p.ct_map, &p.ha_map}) {
        if (!*m) continue;
        take((*m)->weight);
        take((*m)->bias);
    }
    if (at != v.size()) throw DimensionError("flattened vector longer than the parameter shapes");
}

std::vector<double> flatten_grads(const GradientMap<double>& g, const BasicModelParams<double>& shape) {
    std::vector<double> out;
    for (std::size_t i = 0; i < table_count; ++i) {
        const auto& t = shape.tables[i];
        const std::size_t base = out.size();
        out.resize(base + t.data.size(), 0.0);
        for (const auto& [id, row] : g.rows[i]) {
            if (id >= t.rows || row.size() != t.dim) throw DimensionError("gradient row outside the parameter table");
            std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(base + id * t.dim));
        }
    }
    auto add_map = [&](const std::optional<AffineMap<double>>& shape_map, const std::optional<AffineMap<double>>& gm) {
        if (!shape_map) return;
        const std::size_t nw = shape_map->weight.size(), nb = shape_map->bias.size();
        if (gm) {
            out.insert(out.end(), gm->weight.begin(), gm->weight.end());
            out.insert(out.end(), gm->bias.begin(), gm->bias.end());
        } else {
            out.insert(out.end(), nw + nb, 0.0);
        }
    };
    add_map(shape.ct_map, g.ct_map);
    add_map(shape.ha_map, g.ha_map);
    return out;
}

std::vector<std::string> gradient_check_names() {
    std::vector<std::string> names;
    for (auto k : all_scorers) names.push_back("score/" + std::string(scorer_name(k)));
    for (auto k : all_scorers) {
        names.push_back("hinge/" + std::string(scorer_name(k)) + "/instance");
        names.push_back("hinge/" + std::string(scorer_name(k)) + "/ontology");
    }
    names.insert(names.end(), {"cg/radius", "cg/negatives", "ct", "ha"});
    return names;
}

std::vector<CheckOutcome> run_gradient_suite(const GradientSuiteOptions& opt) {
    if (opt.dim == 0 || opt.probes == 0) throw ConfigError("gradient suite needs positive dim and probe count");
    SplitMix64 rng(opt.seed);
    const std::size_t d = opt.dim;
    std::vector<CheckOutcome> out;
    auto fault_for = [&](const std::string& name) {
        return opt.fault && opt.fault->check == name ? opt.fault->factor : 1.0;
    };
    auto record = [&](const std::string& name, const std::function<double()>& probe) {
        double worst = 0;
        for (std::size_t i = 0; i < opt.probes; ++i) worst = std::max(worst, probe());
        out.push_back({name, worst < opt.tolerance, worst, opt.tolerance,
                       std::to_string(opt.probes) + " probes, d=" + std::to_string(d)});
    };

    std::normal_distribution<double> normal(0.0, 0.5);
    for (auto kind : all_scorers) {
        const std::string name = "score/" + std::string(scorer_name(kind));
        record(name, [&] {
            std::vector<double> x(3 * d);
            for (auto& v : x) v = normal(rng);
            auto split = [d](std::span<const double> s, int i) { return s.subspan(static_cast<std::size_t>(i) * d, d); };
            const auto g = score_grads<double>(kind, split(x, 0), split(x, 1), split(x, 2));
            std::vector<double> grad;
            grad.insert(grad.end(), g.head.begin(), g.head.end());
            grad.insert(grad.end(), g.relation.begin(), g.relation.end());
            grad.insert(grad.end(), g.tail.begin(), g.tail.end());
            auto f = [&](std::span<const double> p) { return score<double>(kind, split(p, 0), split(p, 1), split(p, 2)); };
            return worst_error(grad, x, f, fault_for(name));
        });
    }

    for (auto kind : all_scorers) {
        for (View view : {View::Instance, View::Ontology}) {
            const std::string name = "hinge/" + std::string(scorer_name(kind)) +
                                     (view == View::Instance ? "/instance" : "/ontology");
            record(name, [&] {
                const auto params = random_params(d, rng);
                const std::size_t nodes = view == View::Instance ? probe_entities : probe_concepts;
                const std::size_t rels = view == View::Instance ? probe_relations : probe_meta;
                TripleStore positives;
                for (std::size_t i = 0; i < probe_batch; ++i)
                    positives.insert({pick(nodes, rng), pick(rels, rng), pick(nodes, rng)});
                std::vector<TripleSample> batch;
                for (const auto& pos : positives.triples()) {
                    Triple neg;
                    do {
                        neg = pos;
                        if (rng.coin())
                            neg.head = pick_other(nodes, pos.head, rng);
                        else
                            neg.tail = pick_other(nodes, pos.tail, rng);
                    } while (positives.contains(neg) || positives.contains({neg.tail, neg.relation, neg.head}));
                    batch.push_back({pos, neg});
                }
                // A wide margin keeps most brackets active so the probe exercises every term.
                LossFn loss = [&](const BasicModelParams<double>& p) {
                    return intra_hinge_loss<double>(kind, view, batch, 4.0, p);
                };
                return check_loss(params, loss, fault_for(name));
            });
        }
    }

    for (bool negatives : {false, true}) {
        const std::string name = negatives ? "cg/negatives" : "cg/radius";
        record(name, [&] {
            const auto params = random_params(d, rng);
            const auto batch = link_batch(rng);
            LossFn loss = [&](const BasicModelParams<double>& p) {
                return cg_loss<double>(batch, negatives ? 4.0 : 0.1, negatives, p);
            };
            return check_loss(params, loss, fault_for(name));
        });
    }

    record("ct", [&] {
        const auto params = random_params(d, rng);
        const auto batch = link_batch(rng);
        LossFn loss = [&](const BasicModelParams<double>& p) { return ct_loss<double>(batch, 4.0, p); };
        return check_loss(params, loss, fault_for("ct"));
    });

    record("ha", [&] {
        const auto params = random_params(d, rng);
        std::vector<std::pair<Id, Id>> pairs;
        for (std::size_t i = 0; i < probe_batch; ++i) {
            const Id fine = pick(probe_concepts, rng);
            pairs.emplace_back(fine, pick_other(probe_concepts, fine, rng));
        }
        std::vector<HierarchySample> batch;
        for (const auto& [fine, coarse] : pairs) {
            Id neg;
            do neg = pick_other(probe_concepts, coarse, rng);
            while (std::find(pairs.begin(), pairs.end(), std::pair{fine, neg}) != pairs.end());
            batch.push_back({fine, coarse, neg});
        }
        LossFn loss = [&](const BasicModelParams<double>& p) { return ha_loss<double>(batch, 4.0, p); };
        return check_loss(params, loss, fault_for("ha"));
    });
    return out;
}

double max_norm_deviation(const ModelParams& params) {
    double worst = 0;
    for (Table t : {Table::Entity, Table::Concept}) {
        const auto& table = params.table(t);
        for (std::size_t i = 0; i < table.rows; ++i) {
            const auto row = table.row(i);
            double n = 0;
            for (float x : row) n += static_cast<double>(x) * x;
            worst = std::max(worst, std::abs(std::sqrt(n) - 1.0));
        }
    }
    return worst;
}

NormAudit audit_norms(const ModelConfig& model, std::size_t steps, std::uint64_t seed) {
    model.validate();
    SplitMix64 rng(seed);
    const std::size_t ne = 30, nr = 4, nc = 8, nm = 3, batch = 6;
    auto params = init_params<float>(model, ne, nr, nc, nm, rng);
    AmsgradState<float> state(params);

    NormAudit audit;
    std::vector<int> sources = {0, 1, 2};
    if (model.hierarchy_aware) sources.push_back(3);
    for (std::size_t s = 0; s < steps; ++s) {
        LossResult<float> result;
        switch (sources[s % sources.size()]) {
            case 0:
            case 1: {
                const bool inst = sources[s % sources.size()] == 0;
                const std::size_t nodes = inst ? ne : nc, rels = inst ? nr : nm;
                std::vector<TripleSample> b;
                for (std::size_t i = 0; i < batch; ++i) {
                    Triple pos{pick(nodes, rng), pick(rels, rng), pick(nodes, rng)};
                    Triple neg = pos;
                    neg.tail = pick_other(nodes, pos.tail, rng);
                    b.push_back({pos, neg});
                }
                result = intra_hinge_loss<float>(model.intra, inst ? View::Instance : View::Ontology, b, 1.0f, params);
                break;
            }
            case 2: {
                std::vector<LinkSample> b;
                for (std::size_t i = 0; i < batch; ++i) {
                    const Id c = pick(nc, rng);
                    b.push_back({pick(ne, rng), c, pick_other(nc, c, rng)});
                }
                result = model.cross == CrossKind::Transformation ? ct_loss<float>(b, 1.0f, params)
                                                                  : cg_loss<float>(b, 1.0f, true, params);
                break;
            }
            default: {
                std::vector<HierarchySample> b;
                for (std::size_t i = 0; i < batch; ++i) {
                    const Id fine = pick(nc, rng);
                    const Id coarse = pick_other(nc, fine, rng);
                    b.push_back({fine, coarse, pick_other(nc, coarse, rng)});
                }
                result = ha_loss<float>(b, 1.0f, params);
                break;
            }
        }
        const auto before = params;
        amsgrad_step(params, state, result.grads, 0.01);
        for (std::size_t t = 0; t < table_count; ++t) {
            const auto& touched = result.grads.rows[t];
            const auto& a = before.tables[t];
            const auto& b = params.tables[t];
            for (std::size_t r = 0; r < a.rows; ++r) {
                if (touched.contains(static_cast<Id>(r))) continue;
                if (std::memcmp(a.row(r).data(), b.row(r).data(), a.dim * sizeof(float)) != 0) ++audit.untouched_changed;
            }
        }
        if (!result.grads.ct_map && before.ct_map != params.ct_map) ++audit.untouched_changed;
        if (!result.grads.ha_map && before.ha_map != params.ha_map) ++audit.untouched_changed;
        ++audit.steps;
    }
    audit.max_deviation = max_norm_deviation(params);
    return audit;
}

CorrelationAudit audit_correlation(std::span<const std::size_t> dims, std::size_t pairs, std::uint64_t seed) {
    CorrelationAudit audit;
    SplitMix64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t d : dims) {
        std::vector<double> a(d), b(d), oracle(d), direct(d), fft(d);
        std::vector<float> af(d), bf(d), outf(d);
        for (std::size_t p = 0; p < pairs; ++p) {
            for (std::size_t i = 0; i < d; ++i) {
                a[i] = normal(rng);
                b[i] = normal(rng);
                af[i] = static_cast<float>(a[i]);
                bf[i] = static_cast<float>(b[i]);
            }
            double scale = 0;
            for (std::size_t k = 0; k < d; ++k) {
                double s = 0;
                for (std::size_t i = 0; i < d; ++i) s += a[i] * b[(k + i) % d];
                oracle[k] = s;
                scale = std::max(scale, std::abs(s));
            }
            circ_correlation<double>(a, b, direct);
            circ_correlation_fft(a, b, fft);
            circ_correlation<float>(af, bf, outf);
            double err = 0;
            for (std::size_t k = 0; k < d; ++k) {
                err = std::max(err, std::abs(direct[k] - oracle[k]));
                err = std::max(err, std::abs(fft[k] - oracle[k]));
                err = std::max(err, std::abs(static_cast<double>(outf[k]) - oracle[k]));
            }
            audit.max_relative_error = std::max(audit.max_relative_error, err / std::max(scale, 1e-12));
        }
    }
    const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
    const auto z = circ_correlation<double>(x, y);
    audit.worked_example_exact = z == std::vector<double>{32, 29, 29};
    return audit;
}

}  // namespace twoview
