#include "hfmdp/mdp_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>
#include <vector>

namespace hfmdp {

namespace {

struct Line {
    int number;
    std::string text;
};

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    throw ParseError(name + ":" + std::to_string(line) + ": " + msg);
}

std::vector<Line> read_lines(std::istream& in) {
    std::vector<Line> out;
    std::string raw;
    int n = 0;
    while (std::getline(in, raw)) {
        ++n;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        size_t b = raw.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = raw.find_last_not_of(" \t\r");
        out.push_back(Line{n, raw.substr(b, e - b + 1)});
    }
    return out;
}

double parse_number(const std::string& name, int line, const std::string& tok) {
    try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) fail(name, line, "trailing characters in number '" + tok + "'");
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        fail(name, line, "expected a number, got '" + tok + "'");
    }
}

std::vector<std::string> tokens(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

int parse_keyval_int(const std::string& name, int line, const std::string& tok,
                     const std::string& key) {
    const std::string prefix = key + "=";
    if (tok.rfind(prefix, 0) != 0)
        fail(name, line, "expected '" + key + "=<n>', got '" + tok + "'");
    const double v = parse_number(name, line, tok.substr(prefix.size()));
    const int i = static_cast<int>(v);
    if (v != i || i <= 0) fail(name, line, key + " must be a positive integer");
    return i;
}

}  // namespace

FiniteMdp read_mdp(std::istream& in, const std::string& name) {
    const std::vector<Line> lines = read_lines(in);
    size_t pos = 0;

    if (pos >= lines.size() || lines[pos].text.rfind("[dims]", 0) != 0)
        fail(name, lines.empty() ? 1 : lines[0].number, "file must start with a [dims] section");
    {
        const auto toks = tokens(lines[pos].text);
        if (toks.size() != 4) fail(name, lines[pos].number, "[dims] needs states= actions= horizon=");
        FiniteMdp m;
        m.n_states = parse_keyval_int(name, lines[pos].number, toks[1], "states");
        m.n_actions = parse_keyval_int(name, lines[pos].number, toks[2], "actions");
        m.horizon = parse_keyval_int(name, lines[pos].number, toks[3], "horizon");
        ++pos;

        m.transition.assign(m.n_pairs(), {});
        m.reward.assign(m.n_pairs(), {});
        std::vector<char> seen_t(m.n_pairs(), 0), seen_r(m.n_pairs(), 0);
        bool seen_init = false;

        auto read_probs = [&](int count, const char* what) {
            std::vector<double> v;
            while (static_cast<int>(v.size()) < count) {
                if (pos >= lines.size() || lines[pos].text[0] == '[')
                    fail(name, pos < lines.size() ? lines[pos].number : lines.back().number,
                         std::string(what) + ": expected " + std::to_string(count) + " probabilities");
                for (const auto& t : tokens(lines[pos].text))
                    v.push_back(parse_number(name, lines[pos].number, t));
                ++pos;
            }
            if (static_cast<int>(v.size()) != count)
                fail(name, lines[pos - 1].number,
                     std::string(what) + ": expected exactly " + std::to_string(count) + " probabilities");
            return v;
        };

        while (pos < lines.size()) {
            const Line& header = lines[pos];
            const auto toks = tokens(header.text);
            if (header.text[0] != '[')
                fail(name, header.number, "expected a section header, got '" + header.text + "'");
            if (toks[0] == "[initial]") {
                ++pos;
                if (seen_init) fail(name, header.number, "duplicate [initial] section");
                m.initial = read_probs(m.n_states, "[initial]");
                seen_init = true;
            } else if (toks[0] == "[transition" || toks[0] == "[reward") {
                if (toks.size() != 3 || toks[2].back() != ']')
                    fail(name, header.number, "section header needs '[transition s a]' form");
                const int s = static_cast<int>(parse_number(name, header.number, toks[1]));
                const int a = static_cast<int>(parse_number(
                    name, header.number, toks[2].substr(0, toks[2].size() - 1)));
                if (s < 0 || s >= m.n_states || a < 0 || a >= m.n_actions)
                    fail(name, header.number, "state/action index out of range in section header");
                ++pos;
                if (toks[0] == "[transition") {
                    if (seen_t[m.pair_index(s, a)]) fail(name, header.number, "duplicate transition section");
                    m.transition[m.pair_index(s, a)] = read_probs(m.n_states, "[transition]");
                    seen_t[m.pair_index(s, a)] = 1;
                } else {
                    if (seen_r[m.pair_index(s, a)]) fail(name, header.number, "duplicate reward section");
                    DiscreteReward r;
                    while (pos < lines.size() && lines[pos].text[0] != '[') {
                        const auto vt = tokens(lines[pos].text);
                        if (vt.size() != 2)
                            fail(name, lines[pos].number, "[reward] lines must be 'value prob'");
                        r.values.push_back(parse_number(name, lines[pos].number, vt[0]));
                        r.probs.push_back(parse_number(name, lines[pos].number, vt[1]));
                        ++pos;
                    }
                    if (r.values.empty()) fail(name, header.number, "[reward] section has no entries");
                    m.reward[m.pair_index(s, a)] = std::move(r);
                    seen_r[m.pair_index(s, a)] = 1;
                }
            } else {
                fail(name, header.number, "unknown section '" + toks[0] + "'");
            }
        }

        if (!seen_init) fail(name, lines.back().number, "missing [initial] section");
        for (int s = 0; s < m.n_states; ++s)
            for (int a = 0; a < m.n_actions; ++a) {
                if (!seen_t[m.pair_index(s, a)])
                    fail(name, lines.back().number,
                         "missing [transition " + std::to_string(s) + " " + std::to_string(a) + "]");
                if (!seen_r[m.pair_index(s, a)])
                    fail(name, lines.back().number,
                         "missing [reward " + std::to_string(s) + " " + std::to_string(a) + "]");
            }
        validate_mdp(m);
        return m;
    }
}

FiniteMdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    return read_mdp(in, path);
}

void write_mdp(const FiniteMdp& m, std::ostream& out) {
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "[dims] states=" << m.n_states << " actions=" << m.n_actions
        << " horizon=" << m.horizon << "\n";
    out << "[initial]\n";
    for (double p : m.initial) out << num(p) << "\n";
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            out << "[transition " << s << " " << a << "]\n";
            for (double p : m.row(s, a)) out << num(p) << "\n";
            out << "[reward " << s << " " << a << "]\n";
            const DiscreteReward& r = m.reward_dist(s, a);
            for (size_t i = 0; i < r.values.size(); ++i)
                out << num(r.values[i]) << " " << num(r.probs[i]) << "\n";
        }
    }
}

void save_mdp(const FiniteMdp& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    write_mdp(m, out);
}

void write_policy(const Policy& p, std::ostream& out) {
    out << "[policy]\n";
    for (int h = 0; h < p.n_steps(); ++h)
        for (size_t s = 0; s < p.steps[h].size(); ++s) {
            if (p.stationary) out << "*";
            else out << h;
            out << " " << s << " -> " << p.steps[h][s] << "\n";
        }
}

void save_policy(const Policy& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    write_policy(p, out);
}

Policy read_policy(std::istream& in, const std::string& name) {
    const std::vector<Line> lines = read_lines(in);
    if (lines.empty() || lines[0].text != "[policy]")
        fail(name, lines.empty() ? 1 : lines[0].number, "expected a [policy] header");
    bool stationary = true;
    // (step, state) -> action; step -1 encodes the stationary '*'
    std::vector<std::tuple<int, int, int>> entries;
    int max_h = -1, max_s = -1;
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto toks = tokens(lines[i].text);
        if (toks.size() != 4 || toks[2] != "->")
            fail(name, lines[i].number, "expected 'h s -> a'");
        int h = -1;
        if (toks[0] != "*") {
            h = static_cast<int>(parse_number(name, lines[i].number, toks[0]));
            stationary = false;
        }
        const int s = static_cast<int>(parse_number(name, lines[i].number, toks[1]));
        const int a = static_cast<int>(parse_number(name, lines[i].number, toks[3]));
        if (s < 0 || a < 0 || (toks[0] != "*" && h < 0))
            fail(name, lines[i].number, "indices must be nonnegative");
        entries.emplace_back(h, s, a);
        max_h = std::max(max_h, h);
        max_s = std::max(max_s, s);
    }
    if (entries.empty()) fail(name, lines[0].number, "[policy] has no assignments");
    for (const auto& [h, s, a] : entries)
        if (stationary != (h < 0))
            fail(name, lines[0].number, "cannot mix '*' and per-step assignments");
    const int steps = stationary ? 1 : max_h + 1;
    std::vector<std::vector<int>> maps(steps, std::vector<int>(max_s + 1, -1));
    for (const auto& [h, s, a] : entries) maps[stationary ? 0 : h][s] = a;
    for (const auto& map : maps)
        for (int a : map)
            if (a < 0) fail(name, lines[0].number, "policy leaves a (step, state) unassigned");
    Policy p;
    p.stationary = stationary;
    p.steps = std::move(maps);
    return p;
}

Policy load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    return read_policy(in, path);
}

}  // namespace hfmdp
