#include "playmech/cssr.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "playmech/common.hpp"

namespace playmech {
namespace {

using Counts = std::vector<std::uint64_t>;

std::uint64_t sum(std::span<const std::uint64_t> c) {
    return std::accumulate(c.begin(), c.end(), std::uint64_t{0});
}

void add_into(Counts& into, const Counts& from) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

std::vector<double> normalize(const Counts& c) {
    const auto total = static_cast<double>(sum(c));
    std::vector<double> p(c.size(), 0.0);
    if (total == 0) return p;
    for (std::size_t i = 0; i < c.size(); ++i) p[i] = static_cast<double>(c[i]) / total;
    return p;
}

// Working state set shared by the sufficiency and determinization phases.
class Partition {
public:
    Partition(const SuffixStats& stats, const CssrConfig& config)
        : stats_(stats), config_(config), k_(stats.alphabet.size()) {}

    int add_state() {
        members_.emplace_back();
        pooled_.emplace_back(k_, 0);
        return static_cast<int>(members_.size()) - 1;
    }

    void assign(const std::string& suffix, int state) {
        const Counts& c = *stats_.find(suffix);
        if (auto it = where_.find(suffix); it != where_.end()) {
            auto& old = members_[static_cast<std::size_t>(it->second)];
            old.erase(std::find(old.begin(), old.end(), suffix));
            auto& p = pooled_[static_cast<std::size_t>(it->second)];
            for (std::size_t i = 0; i < k_; ++i) p[i] -= c[i];
        }
        where_[suffix] = state;
        members_[static_cast<std::size_t>(state)].push_back(suffix);
        add_into(pooled_[static_cast<std::size_t>(state)], c);
    }

    std::size_t size() const { return members_.size(); }
    const std::vector<std::string>& members(int s) const { return members_[static_cast<std::size_t>(s)]; }
    const Counts& pooled(int s) const { return pooled_[static_cast<std::size_t>(s)]; }
    int state_of(const std::string& suffix) const { return where_.at(suffix); }
    const std::map<std::string, int>& where() const { return where_; }

    // State of the longest member suffix of `history` (truncated to L).
    int locate(std::string history) const {
        if (history.size() > static_cast<std::size_t>(config_.max_length)) {
            history.erase(0, history.size() - static_cast<std::size_t>(config_.max_length));
        }
        for (std::size_t cut = 0; cut <= history.size(); ++cut) {
            if (auto it = where_.find(history.substr(cut)); it != where_.end()) return it->second;
        }
        return -1;
    }

    // Successor state of `suffix` on symbol index b, -1 when never observed.
    int successor(const std::string& suffix, std::size_t b) const {
        const Counts& c = *stats_.find(suffix);
        if (c[b] == 0) return -1;
        return locate(suffix + stats_.alphabet[b]);
    }

    void drop_empty() {
        std::vector<int> remap(members_.size(), -1);
        std::vector<std::vector<std::string>> m;
        std::vector<Counts> p;
        for (std::size_t s = 0; s < members_.size(); ++s) {
            if (members_[s].empty()) continue;
            remap[s] = static_cast<int>(m.size());
            m.push_back(std::move(members_[s]));
            p.push_back(std::move(pooled_[s]));
        }
        members_ = std::move(m);
        pooled_ = std::move(p);
        for (auto& [suffix, s] : where_) s = remap[static_cast<std::size_t>(s)];
    }

private:
    const SuffixStats& stats_;
    const CssrConfig& config_;
    std::size_t k_;
    std::vector<std::vector<std::string>> members_;
    std::vector<Counts> pooled_;
    std::map<std::string, int> where_;
};

// Members whose successors define a state's transitions: testable suffixes
// shorter than L, whose one-symbol extensions are fully known. A state
// holding only length-L suffixes falls back to them, truncating the oldest
// symbol.
std::vector<std::string> transition_members(const Partition& part, int s,
                                            const SuffixStats& stats, const CssrConfig& config) {
    std::vector<std::string> primary, secondary;
    for (const auto& m : part.members(s)) {
        if (stats.total(m) < config.min_count) continue;
        (m.size() < static_cast<std::size_t>(config.max_length) ? primary : secondary).push_back(m);
    }
    if (!primary.empty()) return primary;
    if (!secondary.empty()) return secondary;
    return part.members(s);
}

void sufficiency(Partition& part, const SuffixStats& stats, const CssrConfig& config) {
    part.add_state();
    part.assign("", 0);
    for (int len = 0; len < config.max_length; ++len) {
        std::vector<std::string> frontier;
        for (std::size_t s = 0; s < part.size(); ++s) {
            for (const auto& m : part.members(static_cast<int>(s))) {
                if (m.size() == static_cast<std::size_t>(len)) frontier.push_back(m);
            }
        }
        for (const auto& suffix : frontier) {
            for (char a : stats.alphabet) {
                const std::string child = a + suffix;
                const auto* counts = stats.find(child);
                if (!counts || sum(*counts) == 0) continue;
                const int parent = part.state_of(suffix);
                if (sum(*counts) < config.min_count ||
                    test_equal(*counts, part.pooled(parent), config)) {
                    part.assign(child, parent);
                    continue;
                }
                int target = -1;
                for (std::size_t s = 0; s < part.size(); ++s) {
                    const int cand = static_cast<int>(s);
                    if (cand == parent || part.members(cand).empty()) continue;
                    if (test_equal(*counts, part.pooled(cand), config)) {
                        target = cand;
                        break;
                    }
                }
                part.assign(child, target >= 0 ? target : part.add_state());
            }
        }
    }
    part.drop_empty();
}

// Splits states whose well-observed members are pairwise distinguishable.
// Members are grouped greedily, largest sample first, each joining the first
// group it matches against every member; the first group keeps the state.
void homogenize(Partition& part, const SuffixStats& stats, const CssrConfig& config) {
    const std::size_t initial = part.size();
    for (std::size_t s = 0; s < initial; ++s) {
        const int state = static_cast<int>(s);
        std::vector<std::string> testable;
        for (const auto& m : part.members(state)) {
            if (sum(*stats.find(m)) >= config.min_count) testable.push_back(m);
        }
        std::sort(testable.begin(), testable.end(), [&](const auto& a, const auto& b) {
            const auto na = sum(*stats.find(a)), nb = sum(*stats.find(b));
            return na != nb ? na > nb : a < b;
        });
        std::vector<std::vector<std::string>> groups;
        for (const auto& m : testable) {
            auto fits = [&](const std::vector<std::string>& g) {
                return std::all_of(g.begin(), g.end(), [&](const std::string& other) {
                    return test_equal(*stats.find(m), *stats.find(other), config);
                });
            };
            auto g = std::find_if(groups.begin(), groups.end(), fits);
            if (g == groups.end()) {
                groups.push_back({m});
            } else {
                g->push_back(m);
            }
        }
        for (std::size_t g = 1; g < groups.size(); ++g) {
            const int fresh = part.add_state();
            for (const auto& m : groups[g]) part.assign(m, fresh);
        }
    }
}

void determinize(Partition& part, const SuffixStats& stats, const CssrConfig& config) {
    const std::size_t cap =
        static_cast<std::size_t>(config.state_cap_factor) * std::max<std::size_t>(part.size(), 1);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t s = 0; s < part.size() && !changed; ++s) {
            const int state = static_cast<int>(s);
            const auto movers = transition_members(part, state, stats, config);
            for (std::size_t b = 0; b < stats.alphabet.size() && !changed; ++b) {
                std::vector<std::pair<int, std::vector<std::string>>> groups;
                for (const auto& m : movers) {
                    const int succ = part.successor(m, b);
                    if (succ < 0) continue;
                    auto g = std::find_if(groups.begin(), groups.end(),
                                          [&](const auto& x) { return x.first == succ; });
                    if (g == groups.end()) {
                        groups.push_back({succ, {m}});
                    } else {
                        g->second.push_back(m);
                    }
                }
                if (groups.size() < 2) continue;
                for (std::size_t g = 1; g < groups.size(); ++g) {
                    const int fresh = part.add_state();
                    for (const auto& m : groups[g].second) part.assign(m, fresh);
                }
                changed = true;
            }
        }
        if (part.size() > cap) {
            throw DataError("CSSR determinization did not converge: " +
                            std::to_string(part.size()) + " states exceeds cap " +
                            std::to_string(cap) + " (L=" + std::to_string(config.max_length) +
                            ", alpha=" + std::to_string(config.alpha) + ")");
        }
    }
}

// Tarjan's algorithm; returns the component index of every node.
std::vector<int> strongly_connected(const std::vector<std::vector<int>>& adj, int& n_comp) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(adj.size(), -1), low(adj.size(), 0), comp(adj.size(), -1), stack;
    std::vector<bool> on_stack(adj.size(), false);
    int next = 0;
    n_comp = 0;
    std::function<void(int)> visit = [&](int v) {
        index[v] = low[v] = next++;
        stack.push_back(v);
        on_stack[v] = true;
        for (int w : adj[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp[w] = n_comp;
            } while (w != v);
            ++n_comp;
        }
    };
    for (int v = 0; v < n; ++v) {
        if (index[v] < 0) visit(v);
    }
    return comp;
}

std::string format_prob(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::uint64_t>* SuffixStats::find(std::string_view suffix) const {
    auto it = counts.find(std::string(suffix));
    return it == counts.end() ? nullptr : &it->second;
}

std::uint64_t SuffixStats::total(std::string_view suffix) const {
    const auto* c = find(suffix);
    return c ? sum(*c) : 0;
}

void SuffixStats::merge(const SuffixStats& other) {
    if (other.alphabet != alphabet || other.max_length != max_length) {
        throw ConfigError("cannot merge suffix statistics with different alphabet or length");
    }
    for (const auto& [suffix, c] : other.counts) {
        auto& mine = counts[suffix];
        if (mine.empty()) mine.assign(alphabet.size(), 0);
        add_into(mine, c);
    }
}

int SuffixStats::symbol_index(char c) const {
    const auto pos = alphabet.find(c);
    return pos == std::string::npos ? -1 : static_cast<int>(pos);
}

SuffixStats collect_suffix_stats(std::span<const std::string> streams, std::string_view alphabet,
                                 int max_length) {
    if (max_length < 1) throw ConfigError("suffix length must be >= 1");
    if (alphabet.empty()) throw ConfigError("empty alphabet");
    std::array<int, 256> index;
    index.fill(-1);
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
        index[static_cast<unsigned char>(alphabet[i])] = static_cast<int>(i);
    }
    std::unordered_map<std::string, Counts> acc;
    for (const auto& stream : streams) {
        for (std::size_t t = 0; t < stream.size(); ++t) {
            const int sym = index[static_cast<unsigned char>(stream[t])];
            if (sym < 0) {
                throw DataError(std::string("symbol '") + stream[t] + "' is not in the alphabet");
            }
            const std::size_t longest = std::min<std::size_t>(t, static_cast<std::size_t>(max_length));
            for (std::size_t len = 0; len <= longest; ++len) {
                auto& c = acc[stream.substr(t - len, len)];
                if (c.empty()) c.assign(alphabet.size(), 0);
                ++c[static_cast<std::size_t>(sym)];
            }
        }
    }
    SuffixStats stats{std::string(alphabet), max_length, {}};
    for (auto& [k, v] : acc) stats.counts.emplace(k, std::move(v));
    return stats;
}

const char* to_string(TestKind t) { return t == TestKind::ChiSquare ? "chi_square" : "ks"; }

TestKind test_kind_from_string(std::string_view s) {
    if (s == "chi_square" || s == "chi-square" || s == "chi2") return TestKind::ChiSquare;
    if (s == "ks" || s == "KS") return TestKind::KolmogorovSmirnov;
    throw ConfigError("unknown test '" + std::string(s) + "' (expected chi_square or ks)");
}

void CssrConfig::validate() const {
    if (max_length < 1) throw ConfigError("CSSR: L must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("CSSR: alpha must lie in (0, 1)");
    if (min_count < 1) throw ConfigError("CSSR: min_count must be >= 1");
    if (state_cap_factor < 1) throw ConfigError("CSSR: state cap factor must be >= 1");
}

bool test_equal(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                const CssrConfig& config) {
    if (sum(a) < config.min_count || sum(b) < config.min_count) return true;
    const auto r = config.test == TestKind::ChiSquare ? chi_square_two_sample(a, b)
                                                      : ks_two_sample(a, b);
    return r.p_value >= config.alpha;
}

std::size_t EpsilonMachine::recurrent_count() const {
    return static_cast<std::size_t>(
        std::count_if(states.begin(), states.end(), [](const auto& s) { return s.recurrent; }));
}

int EpsilonMachine::symbol_index(char c) const {
    const auto pos = alphabet.find(c);
    return pos == std::string::npos ? -1 : static_cast<int>(pos);
}

std::optional<int> EpsilonMachine::synchronize(std::string_view history) const {
    const auto longest =
        std::min<std::size_t>(history.size(), static_cast<std::size_t>(config.max_length));
    for (std::size_t len = longest; len >= 1; --len) {
        auto it = sync.find(std::string(history.substr(history.size() - len)));
        if (it != sync.end()) return it->second;
    }
    return std::nullopt;
}

EpsilonMachine fit(const SuffixStats& stats, const CssrConfig& config) {
    config.validate();
    if (stats.total("") == 0) throw DataError("CSSR: no observations to fit");
    if (stats.max_length < config.max_length) {
        throw ConfigError("CSSR: statistics collected with L=" + std::to_string(stats.max_length) +
                          " < configured L=" + std::to_string(config.max_length));
    }
    Partition part(stats, config);
    sufficiency(part, stats, config);
    homogenize(part, stats, config);
    determinize(part, stats, config);
    part.drop_empty();

    const std::size_t k = stats.alphabet.size();
    EpsilonMachine m;
    m.alphabet = stats.alphabet;
    m.config = config;
    m.marginal = normalize(*stats.find(""));

    // canonical order: lexicographically smallest member suffix
    std::vector<int> order(part.size());
    std::iota(order.begin(), order.end(), 0);
    auto smallest = [&](int s) {
        return *std::min_element(part.members(s).begin(), part.members(s).end());
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) { return smallest(a) < smallest(b); });
    std::vector<int> canon(part.size());
    for (std::size_t i = 0; i < order.size(); ++i) canon[static_cast<std::size_t>(order[i])] = static_cast<int>(i);

    for (int old : order) {
        CausalState st;
        st.id = canon[static_cast<std::size_t>(old)];
        st.members = part.members(old);
        std::sort(st.members.begin(), st.members.end());
        // Exclusive counts: occurrences whose longest member suffix is this one.
        Counts exclusive(k, 0);
        for (const auto& s : st.members) {
            Counts c = *stats.find(s);
            for (char a : stats.alphabet) {
                const std::string longer = a + s;
                if (longer.size() > static_cast<std::size_t>(config.max_length)) continue;
                if (!part.where().contains(longer)) continue;
                const Counts& lc = *stats.find(longer);
                for (std::size_t i = 0; i < k; ++i) c[i] -= lc[i];
            }
            add_into(exclusive, c);
        }
        st.counts = sum(exclusive) > 0 ? exclusive : part.pooled(old);
        st.emission = normalize(st.counts);
        st.transitions.assign(k, -1);
        const auto movers = transition_members(part, old, stats, config);
        for (std::size_t b = 0; b < k; ++b) {
            for (const auto* pool : {&movers, &part.members(old)}) {
                for (const auto& s : *pool) {
                    if (const int succ = part.successor(s, b); succ >= 0) {
                        st.transitions[b] = canon[static_cast<std::size_t>(succ)];
                        break;
                    }
                }
                if (st.transitions[b] >= 0) break;
            }
        }
        m.states.push_back(std::move(st));
    }
    for (const auto& [suffix, s] : part.where()) m.sync[suffix] = canon[static_cast<std::size_t>(s)];
    mark_recurrent(m);
    return m;
}

void mark_recurrent(EpsilonMachine& machine) {
    const auto n = machine.states.size();
    std::vector<std::vector<int>> adj(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& st = machine.states[s];
        for (std::size_t b = 0; b < st.transitions.size(); ++b) {
            if (st.transitions[b] >= 0 && st.emission[b] > 0) adj[s].push_back(st.transitions[b]);
        }
    }
    int n_comp = 0;
    const auto comp = strongly_connected(adj, n_comp);
    std::vector<bool> closed(static_cast<std::size_t>(n_comp), true);
    std::vector<bool> has_edge(static_cast<std::size_t>(n_comp), false);
    for (std::size_t s = 0; s < n; ++s) {
        for (int t : adj[s]) {
            if (comp[s] != comp[static_cast<std::size_t>(t)]) {
                closed[static_cast<std::size_t>(comp[s])] = false;
            } else {
                has_edge[static_cast<std::size_t>(comp[s])] = true;
            }
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        const auto c = static_cast<std::size_t>(comp[s]);
        machine.states[s].recurrent = closed[c] && has_edge[c];
    }
}

std::vector<double> stationary_distribution(const EpsilonMachine& machine) {
    const auto n = machine.states.size();
    std::vector<std::vector<double>> T(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<int>> adj(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& st = machine.states[s];
        if (!st.recurrent) continue;
        for (std::size_t b = 0; b < st.transitions.size(); ++b) {
            const int t = st.transitions[b];
            if (t < 0 || st.emission[b] <= 0) continue;
            T[s][static_cast<std::size_t>(t)] += st.emission[b];
            adj[s].push_back(t);
        }
    }
    int n_comp = 0;
    const auto comp = strongly_connected(adj, n_comp);

    std::vector<double> pi(n, 0.0);
    std::vector<double> weights;
    std::vector<std::vector<double>> per_class;
    for (int c = 0; c < n_comp; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t s = 0; s < n; ++s) {
            if (comp[s] == c && machine.states[s].recurrent) idx.push_back(s);
        }
        if (idx.empty()) continue;
        // lazy chain (I + T) / 2: same fixed point, aperiodic
        std::vector<double> x(n, 0.0), y(n, 0.0);
        for (auto s : idx) x[s] = 1.0 / static_cast<double>(idx.size());
        for (int iter = 0; iter < 1000000; ++iter) {
            std::fill(y.begin(), y.end(), 0.0);
            for (auto s : idx) {
                y[s] += 0.5 * x[s];
                for (std::size_t t = 0; t < n; ++t) y[t] += 0.5 * x[s] * T[s][t];
            }
            double total = 0.0, delta = 0.0;
            for (auto s : idx) total += y[s];
            for (auto s : idx) {
                y[s] /= total;
                delta = std::max(delta, std::abs(y[s] - x[s]));
            }
            x.swap(y);
            if (delta < 1e-15) break;
        }
        double w = 0.0;
        for (auto s : idx) w += static_cast<double>(sum(machine.states[s].counts));
        weights.push_back(w);
        per_class.push_back(std::move(x));
    }
    if (per_class.empty()) throw DataError("machine has no recurrent component");
    double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (wsum <= 0) {
        std::fill(weights.begin(), weights.end(), 1.0);
        wsum = static_cast<double>(weights.size());
    }
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        for (std::size_t s = 0; s < n; ++s) pi[s] += weights[c] / wsum * per_class[c][s];
    }
    return pi;
}

std::vector<std::pair<std::string, std::string>> audit_refinement(const EpsilonMachine& machine,
                                                                  const SuffixStats& stats) {
    std::vector<std::pair<std::string, std::string>> bad;
    for (const auto& st : machine.states) {
        std::vector<const std::string*> testable;
        for (const auto& m : st.members) {
            if (stats.total(m) >= machine.config.min_count) testable.push_back(&m);
        }
        for (std::size_t i = 0; i < testable.size(); ++i) {
            for (std::size_t j = i + 1; j < testable.size(); ++j) {
                if (!test_equal(*stats.find(*testable[i]), *stats.find(*testable[j]),
                                machine.config)) {
                    bad.emplace_back(*testable[i], *testable[j]);
                }
            }
        }
    }
    return bad;
}

std::string export_dot(const EpsilonMachine& machine, const DotOptions& options) {
    std::ostringstream out;
    out << "digraph epsilon_machine {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=circle];\n";
    for (const auto& st : machine.states) {
        if (!st.recurrent && !options.include_transient) continue;
        out << "  s" << st.id << " [label=\"s" << st.id << "\\n";
        for (std::size_t b = 0; b < machine.alphabet.size(); ++b) {
            if (b) out << ' ';
            out << machine.alphabet[b] << ':' << format_prob(st.emission[b]);
        }
        out << "\"" << (st.recurrent ? "" : ", style=dashed") << "];\n";
    }
    for (const auto& st : machine.states) {
        if (!st.recurrent && !options.include_transient) continue;
        for (std::size_t b = 0; b < machine.alphabet.size(); ++b) {
            const double p = st.emission[b];
            const int to = st.transitions[b];
            if (to < 0 || p <= 0 || p < options.min_edge_prob) continue;
            char width[16];
            std::snprintf(width, sizeof width, "%.2f", 1.0 + 4.0 * p);
            out << "  s" << st.id << " -> s" << to << " [label=\"" << machine.alphabet[b] << " : "
                << format_prob(p) << "\", penwidth=" << width << "];\n";
        }
    }
    out << "}\n";
    return out.str();
}

DotGraph parse_dot(std::string_view dot, std::string_view alphabet) {
    static const std::regex node_re(R"re(^\s*s(\d+) \[label="s\d+\\n([^"]*)")re");
    static const std::regex edge_re(R"re(^\s*s(\d+) -> s(\d+) \[label="(.) : ([^"]+)")re");
    DotGraph g;
    std::istringstream in{std::string(dot)};
    std::string line;
    std::smatch m;
    while (std::getline(in, line)) {
        if (std::regex_search(line, m, edge_re)) {
            g.edges.push_back({std::stoi(m[1]), std::stoi(m[2]), m[3].str()[0], std::stod(m[4])});
        } else if (std::regex_search(line, m, node_re)) {
            DotGraph::Node node{std::stoi(m[1]), std::vector<double>(alphabet.size(), 0.0)};
            std::istringstream probs(m[2].str());
            std::string item;
            while (probs >> item) {
                const auto pos = alphabet.find(item[0]);
                if (pos == std::string_view::npos || item.size() < 3) {
                    throw DataError("DOT node label has unknown symbol: " + item);
                }
                node.emission[pos] = std::stod(item.substr(2));
            }
            g.nodes.push_back(std::move(node));
        }
    }
    return g;
}

nlohmann::json to_json(const CssrConfig& c) {
    return {{"L", c.max_length},
            {"alpha", c.alpha},
            {"test", to_string(c.test)},
            {"min_count", c.min_count},
            {"state_cap_factor", c.state_cap_factor}};
}

CssrConfig cssr_config_from_json(const nlohmann::json& j) {
    CssrConfig c;
    c.max_length = j.at("L").get<int>();
    c.alpha = j.at("alpha").get<double>();
    c.test = test_kind_from_string(j.at("test").get<std::string>());
    c.min_count = j.at("min_count").get<std::uint64_t>();
    c.state_cap_factor = j.value("state_cap_factor", 10);
    return c;
}

nlohmann::json to_json(const EpsilonMachine& m) {
    nlohmann::json states = nlohmann::json::array();
    for (const auto& s : m.states) {
        states.push_back({{"id", s.id},
                          {"members", s.members},
                          {"counts", s.counts},
                          {"emission", s.emission},
                          {"transitions", s.transitions},
                          {"recurrent", s.recurrent}});
    }
    return {{"format", "playmech-epsilon-machine"},
            {"format_version", 1},
            {"alphabet", m.alphabet},
            {"config", to_json(m.config)},
            {"marginal", m.marginal},
            {"states", states},
            {"sync", m.sync}};
}

EpsilonMachine machine_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format_version").get<int>() != 1) {
            throw DataError("unsupported machine format version");
        }
        EpsilonMachine m;
        m.alphabet = j.at("alphabet").get<std::string>();
        m.config = cssr_config_from_json(j.at("config"));
        m.marginal = j.at("marginal").get<std::vector<double>>();
        for (const auto& s : j.at("states")) {
            CausalState st;
            st.id = s.at("id").get<int>();
            st.members = s.at("members").get<std::vector<std::string>>();
            st.counts = s.at("counts").get<std::vector<std::uint64_t>>();
            st.emission = s.at("emission").get<std::vector<double>>();
            st.transitions = s.at("transitions").get<std::vector<int>>();
            st.recurrent = s.at("recurrent").get<bool>();
            if (st.emission.size() != m.alphabet.size() ||
                st.transitions.size() != m.alphabet.size()) {
                throw DataError("machine state " + std::to_string(st.id) +
                                ": vector sizes do not match the alphabet");
            }
            m.states.push_back(std::move(st));
        }
        m.sync = j.at("sync").get<std::map<std::string, int>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("machine JSON: ") + e.what());
    }
}

}  // namespace playmech
