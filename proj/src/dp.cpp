#include "procqm/dp.hpp"

#include <sstream>

#include "procqm/errors.hpp"

namespace procqm::dp {

char ontic_char(Ontic s) { return static_cast<char>('a' + static_cast<int>(s)); }

Ontic ontic_from_char(char c) {
    if (c < 'a' || c > 'd') throw ConfigError("ontic state label must be one of a,b,c,d");
    return static_cast<Ontic>(c - 'a');
}

void DetectionRule::validate() const {
    int first = 0;
    int second = 0;
    for (int cls : outcome_of) {
        if (cls == 0) {
            ++first;
        } else if (cls == 1) {
            ++second;
        } else {
            throw ConfigError("detection rule classes must be 0 or 1");
        }
    }
    if (first == 0 || second == 0) {
        throw ConfigError("detection rule must use both outcome classes");
    }
}

Model builtin_model(bool extended) {
    Model model;
    model.extended = extended;
    model.preparations = {
        {"z+", {Ontic::a, Ontic::b}},
        {"m+", {Ontic::b, Ontic::c}},
        {"z-", {Ontic::c, Ontic::d}},
    };
    if (extended) {
        // Forced by requiring rule ii to stay deterministic on eigenstates,
        // mirroring m+=(b,c). Not used by the exact-table checks.
        model.preparations.push_back({"m-", {Ontic::d, Ontic::a}});
    }
    model.rules = {
        {"i", {"m1", "m2"}, {0, 0, 1, 1}},   // a,b -> m1 ; c,d -> m2
        {"ii", {"n1", "n2"}, {1, 0, 0, 1}},  // b,c -> n1 ; d,a -> n2
        {"iii", {"k1", "k2"}, {1, 0, 1, 0}}, // b,d -> k1 ; a,c -> k2
    };
    for (const auto& rule : model.rules) rule.validate();
    return model;
}

std::array<Rational, 2> outcome_distribution(const CyclicPrep& prep, const DetectionRule& rule) {
    if (prep.cycle[0] == prep.cycle[1]) throw ConfigError("cycle elements must be distinct");
    rule.validate();
    std::array<std::int64_t, 2> hits = {0, 0};
    for (const Ontic s : prep.cycle) {
        ++hits[static_cast<std::size_t>(rule.outcome_of[static_cast<std::size_t>(s)])];
    }
    return {Rational(hits[0], 2), Rational(hits[1], 2)};
}

PairAnalysis distinguishability(const CyclicPrep& prep1, const CyclicPrep& prep2,
                                const DetectionRule& rule) {
    if (prep1.name == prep2.name && prep1.cycle == prep2.cycle) {
        throw ConfigError("distinguishability needs two distinct preparations");
    }
    const auto dist1 = outcome_distribution(prep1, rule);
    const auto dist2 = outcome_distribution(prep2, rule);

    PairAnalysis analysis;
    analysis.one_shot_distinguishable = true;
    for (std::size_t o = 0; o < 2; ++o) {
        OutcomeRow row;
        row.outcome = rule.outcome_names[o];
        row.likelihood1 = dist1[o];
        row.likelihood2 = dist2[o];
        const Rational total = row.likelihood1 + row.likelihood2;
        row.possible = total.is_positive();
        if (row.likelihood1.is_positive() && row.likelihood2.is_positive()) {
            analysis.one_shot_distinguishable = false;
        }
        if (row.possible) {
            // Uniform prior over the pair.
            row.posterior1 = row.likelihood1 / total;
            row.posterior2 = row.likelihood2 / total;
            const int feasible = (row.likelihood1.is_positive() ? 1 : 0) +
                                 (row.likelihood2.is_positive() ? 1 : 0);
            row.support_share1 = Rational(row.likelihood1.is_positive() ? 1 : 0, feasible);
            row.support_share2 = Rational(row.likelihood2.is_positive() ? 1 : 0, feasible);
        }
        analysis.rows.push_back(row);
    }
    return analysis;
}

std::vector<DetectionRule> enumerate_two_outcome_rules() {
    std::vector<DetectionRule> rules;
    // All 2^4 - 2 labelled assignments; both classes must be nonempty.
    for (int mask = 1; mask < 15; ++mask) {
        DetectionRule rule;
        rule.name = "mask" + std::to_string(mask);
        rule.outcome_names = {"o1", "o2"};
        for (int s = 0; s < 4; ++s) {
            rule.outcome_of[static_cast<std::size_t>(s)] = (mask >> s) & 1;
        }
        rule.validate();
        rules.push_back(rule);
    }
    return rules;
}

std::optional<DetectionRule> find_distinguishing_rule(const CyclicPrep& prep1,
                                                      const CyclicPrep& prep2) {
    for (const auto& rule : enumerate_two_outcome_rules()) {
        if (distinguishability(prep1, prep2, rule).one_shot_distinguishable) {
            return rule;
        }
    }
    return std::nullopt;
}

Table outcome_table(const Model& model) {
    Table table;
    for (const auto& prep : model.preparations) table.prep_names.push_back(prep.name);
    for (const auto& rule : model.rules) {
        table.rule_names.push_back(rule.name);
        table.rule_outcomes.push_back(rule.outcome_names);
    }
    for (const auto& prep : model.preparations) {
        std::vector<std::array<Rational, 2>> row;
        for (const auto& rule : model.rules) {
            row.push_back(outcome_distribution(prep, rule));
        }
        table.cells.push_back(std::move(row));
    }
    return table;
}

Table spekkens_table() {
    Model model = builtin_model(true);
    // The toy-model reading of the three settings.
    model.rules[0].name = "i(z)";
    model.rules[1].name = "ii(y)";
    model.rules[2].name = "iii(x)";
    return outcome_table(model);
}

std::string table_to_csv(const Table& table) {
    std::ostringstream out;
    out << "prep";
    for (const auto& rule : table.rule_names) out << "," << rule;
    out << "\n";
    for (std::size_t p = 0; p < table.prep_names.size(); ++p) {
        out << table.prep_names[p];
        for (std::size_t r = 0; r < table.rule_names.size(); ++r) {
            const auto& cell = table.cells[p][r];
            out << "," << table.rule_outcomes[r][0] << ":" << cell[0].str() << ";"
                << table.rule_outcomes[r][1] << ":" << cell[1].str();
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace procqm::dp
